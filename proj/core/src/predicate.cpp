#include "arise/predicate.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <optional>
#include <set>

#include "arise/error.hpp"
#include "arise/text.hpp"

namespace arise {

std::string_view to_string(PredicateKind kind) {
  switch (kind) {
    case PredicateKind::Word: return "Word";
    case PredicateKind::WordSet: return "WordSet";
    case PredicateKind::Stem: return "Stem";
    case PredicateKind::StemSet: return "StemSet";
    case PredicateKind::Pos: return "Pos";
    case PredicateKind::PosSet: return "PosSet";
    case PredicateKind::Any: return "Any";
  }
  return "Any";
}

NodePredicate::NodePredicate(Level level, std::vector<std::string> members)
    : level_(level), members_(std::move(members)) {
  if (level_ == Level::any) {
    members_.clear();
    return;
  }
  if (level_ == Level::word) {
    for (auto& m : members_) m = text::fold_case(m);
  }
  std::sort(members_.begin(), members_.end());
  members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
  if (members_.empty()) throw ContractError("typed node predicate needs at least one member");
}

NodePredicate NodePredicate::from_kind(PredicateKind kind, std::vector<std::string> members) {
  switch (kind) {
    case PredicateKind::Word:
    case PredicateKind::WordSet: return {Level::word, std::move(members)};
    case PredicateKind::Stem:
    case PredicateKind::StemSet: return {Level::stem, std::move(members)};
    case PredicateKind::Pos:
    case PredicateKind::PosSet: return {Level::pos, std::move(members)};
    case PredicateKind::Any: return {};
  }
  return {};
}

PredicateKind NodePredicate::kind() const noexcept {
  const bool single = members_.size() == 1;
  switch (level_) {
    case Level::word: return single ? PredicateKind::Word : PredicateKind::WordSet;
    case Level::stem: return single ? PredicateKind::Stem : PredicateKind::StemSet;
    case Level::pos: return single ? PredicateKind::Pos : PredicateKind::PosSet;
    case Level::any: return PredicateKind::Any;
  }
  return PredicateKind::Any;
}

namespace {

bool contains(const std::vector<std::string>& sorted, std::string_view value) {
  return std::binary_search(sorted.begin(), sorted.end(), value);
}

std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

bool NodePredicate::matches(const Token& t) const {
  switch (level_) {
    case Level::word: return contains(members_, t.folded);
    case Level::stem: return contains(members_, t.stem);
    case Level::pos: return contains(members_, t.upos);
    case Level::any: return true;
  }
  return false;
}

bool NodePredicate::matches(const TokenPayload& p) const {
  switch (level_) {
    case Level::word: return contains(members_, p.form);
    case Level::stem: return contains(members_, p.stem);
    case Level::pos: return contains(members_, p.upos);
    case Level::any: return true;
  }
  return false;
}

std::string NodePredicate::to_string() const {
  std::string out(arise::to_string(kind()));
  if (level_ == Level::any) return out;
  out += '[';
  for (std::size_t i = 0; i < members_.size(); ++i) {
    if (i) out += ',';
    out += quote(members_[i]);
  }
  out += ']';
  return out;
}

void TripleSet::unite(const TripleSet& other) {
  for (std::size_t i = 0; i < bits_.size() && i < other.bits_.size(); ++i) bits_[i] |= other.bits_[i];
}

bool TripleSet::subset_of(const TripleSet& other) const {
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    const std::uint64_t theirs = i < other.bits_.size() ? other.bits_[i] : 0;
    if ((bits_[i] & ~theirs) != 0) return false;
  }
  return true;
}

std::size_t TripleSet::count() const {
  std::size_t n = 0;
  for (auto w : bits_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

Lexicon::Lexicon(std::vector<TokenPayload> entries) : entries_(std::move(entries)) {
  std::sort(entries_.begin(), entries_.end());
  entries_.erase(std::unique(entries_.begin(), entries_.end()), entries_.end());
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    by_form_[entries_[i].form].push_back(i);
    by_stem_[entries_[i].stem].push_back(i);
    by_pos_[entries_[i].upos].push_back(i);
  }
}

Lexicon Lexicon::from_corpus(const Corpus& corpus) {
  std::set<TokenPayload> seen;
  for (const auto& doc : corpus.docs) {
    for (const auto& tree : doc.sentences) {
      for (const auto& t : tree.tokens()) seen.insert(TokenPayload::of(t));
    }
  }
  return Lexicon(std::vector<TokenPayload>(seen.begin(), seen.end()));
}

TripleSet Lexicon::extension(const NodePredicate& p) const {
  TripleSet set(entries_.size());
  if (p.is_any()) {
    for (std::size_t i = 0; i < entries_.size(); ++i) set.set(i);
    return set;
  }
  const auto& index = p.level() == Level::word ? by_form_ : p.level() == Level::stem ? by_stem_ : by_pos_;
  for (const auto& m : p.members()) {
    if (auto it = index.find(m); it != index.end()) {
      for (auto i : it->second) set.set(i);
    }
  }
  return set;
}

std::vector<std::string> Lexicon::project(const TripleSet& set, Level level) const {
  std::set<std::string> values;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (!set.test(i)) continue;
    switch (level) {
      case Level::word: values.insert(entries_[i].form); break;
      case Level::stem: values.insert(entries_[i].stem); break;
      case Level::pos: values.insert(entries_[i].upos); break;
      case Level::any: break;
    }
  }
  return {values.begin(), values.end()};
}

namespace {

bool members_superset(const NodePredicate& g, const NodePredicate& s) {
  return std::includes(g.members().begin(), g.members().end(), s.members().begin(), s.members().end());
}

bool subsumes_with(const NodePredicate& g, const TripleSet& eg, const NodePredicate& s, const TripleSet& es) {
  if (g == s) return true;
  if (!es.subset_of(eg)) return false;
  if (!(eg == es)) return true;
  if (g.level() != s.level()) return g.level() > s.level();
  return members_superset(g, s);
}

}  // namespace

bool pred_subsumes(const NodePredicate& general, const NodePredicate& specific, const Lexicon& lexicon) {
  if (general == specific || general.is_any()) return true;
  return subsumes_with(general, lexicon.extension(general), specific, lexicon.extension(specific));
}

NodePredicate lgg_nodes(const NodePredicate& a, const NodePredicate& b, const Lexicon& lexicon,
                        std::size_t cap) {
  if (a == b) return a;
  if (a.is_any() || b.is_any()) return NodePredicate::any();
  cap = std::max<std::size_t>(cap, 1);

  const TripleSet ea = lexicon.extension(a);
  const TripleSet eb = lexicon.extension(b);
  TripleSet both = ea;
  both.unite(eb);

  struct Candidate {
    NodePredicate pred;
    TripleSet ext;
  };
  std::vector<Candidate> valid;
  for (Level level : {Level::word, Level::stem, Level::pos}) {
    std::vector<std::string> members = lexicon.project(both, level);
    if (a.level() == level) members.insert(members.end(), a.members().begin(), a.members().end());
    if (b.level() == level) members.insert(members.end(), b.members().begin(), b.members().end());
    std::sort(members.begin(), members.end());
    members.erase(std::unique(members.begin(), members.end()), members.end());
    if (members.empty() || members.size() > cap) continue;
    NodePredicate candidate(level, std::move(members));
    TripleSet ext = lexicon.extension(candidate);
    if (subsumes_with(candidate, ext, a, ea) && subsumes_with(candidate, ext, b, eb)) {
      valid.push_back({std::move(candidate), std::move(ext)});
    }
  }
  for (const auto& c : valid) {
    const bool has_lower = std::any_of(valid.begin(), valid.end(), [&](const Candidate& other) {
      return !(other.pred == c.pred) && subsumes_with(c.pred, c.ext, other.pred, other.ext);
    });
    if (!has_lower) return c.pred;
  }
  return NodePredicate::any();
}

}  // namespace arise
