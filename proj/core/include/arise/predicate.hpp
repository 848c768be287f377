#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "arise/corpus.hpp"

namespace arise {

/// The (form, stem, upos) triple of a token. Forms are case-folded.
struct TokenPayload {
  std::string form;
  std::string stem;
  std::string upos;

  static TokenPayload of(const Token& t) { return {t.folded, t.stem, t.upos}; }

  auto operator<=>(const TokenPayload&) const = default;
  bool operator==(const TokenPayload&) const = default;
};

/// Generalisation ladder: word forms < stems < PoS tags < anything.
enum class Level : std::uint8_t { word = 0, stem = 1, pos = 2, any = 3 };

enum class PredicateKind : std::uint8_t { Word, WordSet, Stem, StemSet, Pos, PosSet, Any };

std::string_view to_string(PredicateKind kind);

/// A typed node test. Members are homogeneous (all forms, all stems or all
/// tags), sorted and unique; singletons are the Word/Stem/Pos kinds.
class NodePredicate {
 public:
  NodePredicate() = default;  // Any
  NodePredicate(Level level, std::vector<std::string> members);

  static NodePredicate any() { return {}; }
  static NodePredicate word(std::string_view form) { return {Level::word, {std::string(form)}}; }
  static NodePredicate stem(std::string_view stem) { return {Level::stem, {std::string(stem)}}; }
  static NodePredicate pos(std::string_view tag) { return {Level::pos, {std::string(tag)}}; }
  /// Parses a kind name ("WordSet", ...) with its members.
  static NodePredicate from_kind(PredicateKind kind, std::vector<std::string> members);

  Level level() const noexcept { return level_; }
  PredicateKind kind() const noexcept;
  const std::vector<std::string>& members() const noexcept { return members_; }
  bool is_any() const noexcept { return level_ == Level::any; }

  bool matches(const Token& token) const;
  bool matches(const TokenPayload& payload) const;

  /// e.g. `Word["dogs"]`, `PosSet["NOUN","PROPN"]`, `Any`.
  std::string to_string() const;

  auto operator<=>(const NodePredicate&) const = default;
  bool operator==(const NodePredicate&) const = default;

 private:
  Level level_ = Level::any;
  std::vector<std::string> members_;
};

inline bool pred_matches(const NodePredicate& p, const Token& t) { return p.matches(t); }

/// Set of lexicon entries, one bit per entry.
class TripleSet {
 public:
  TripleSet() = default;
  explicit TripleSet(std::size_t n) : bits_((n + 63) / 64, 0), size_(n) {}

  void set(std::size_t i) { bits_[i / 64] |= std::uint64_t{1} << (i % 64); }
  bool test(std::size_t i) const { return (bits_[i / 64] >> (i % 64)) & 1U; }
  void unite(const TripleSet& other);
  bool subset_of(const TripleSet& other) const;
  std::size_t count() const;
  std::size_t universe() const noexcept { return size_; }

  bool operator==(const TripleSet&) const = default;

 private:
  std::vector<std::uint64_t> bits_;
  std::size_t size_ = 0;
};

/// The token universe observed in a corpus: every distinct (form, stem, upos)
/// triple. Predicate extensions are computed against it, which makes the
/// subsumption order decidable without a morphological analyser.
class Lexicon {
 public:
  Lexicon() = default;
  explicit Lexicon(std::vector<TokenPayload> entries);

  static Lexicon from_corpus(const Corpus& corpus);

  std::span<const TokenPayload> entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }

  TripleSet extension(const NodePredicate& p) const;
  /// Distinct level attributes (forms, stems or tags) of the entries in `set`.
  std::vector<std::string> project(const TripleSet& set, Level level) const;

 private:
  std::vector<TokenPayload> entries_;
  std::map<std::string, std::vector<std::size_t>, std::less<>> by_form_;
  std::map<std::string, std::vector<std::size_t>, std::less<>> by_stem_;
  std::map<std::string, std::vector<std::size_t>, std::less<>> by_pos_;
};

/// Predicate order used by the rule lattice. `general` subsumes `specific`
/// when its extension is a strict superset, or the extensions coincide and
/// `general` sits at a higher ladder level (or at the same level with a
/// superset of members). This refines extension containment into a partial
/// order, so distinct predicates never subsume each other both ways.
bool pred_subsumes(const NodePredicate& general, const NodePredicate& specific, const Lexicon& lexicon);

/// Least general generalisation of two node predicates. Candidates are the
/// per-level closures of both extensions (word, stem, pos) and Any; sets are
/// bounded by `cap`. Returns the lowest-level candidate that subsumes both
/// inputs and has no valid candidate strictly below it.
NodePredicate lgg_nodes(const NodePredicate& a, const NodePredicate& b, const Lexicon& lexicon,
                        std::size_t cap);

}  // namespace arise
