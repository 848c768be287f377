#include "arise/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "arise/error.hpp"
#include "arise/text.hpp"
#include "json.hpp"

namespace arise {

using nlohmann::json;
using nlohmann::ordered_json;

Token make_token(int index, std::string form, std::string_view lemma, std::string upos, int head,
                 std::string deprel) {
  Token t;
  t.index = index;
  t.folded = text::fold_case(form);
  t.stem = (lemma.empty() || lemma == "_") ? t.folded : std::string(lemma);
  t.form = std::move(form);
  t.upos = std::move(upos);
  t.head = head;
  t.relation = std::string(text::base_relation(deprel));
  t.deprel = std::move(deprel);
  return t;
}

std::optional<std::string> tree_violation(std::span<const Token> tokens) {
  const int n = static_cast<int>(tokens.size());
  if (n == 0) return "empty sentence";
  for (int i = 0; i < n; ++i) {
    const Token& t = tokens[static_cast<std::size_t>(i)];
    if (t.index != i + 1) return "token ids must run 1.." + std::to_string(n) + " in order";
    if (t.form.empty()) return "empty FORM at token " + std::to_string(t.index);
    if (t.upos.empty()) return "empty UPOS at token " + std::to_string(t.index);
    if (t.head < 0 || t.head > n) {
      return "HEAD " + std::to_string(t.head) + " out of range at token " + std::to_string(t.index);
    }
    if (t.head == t.index) return "cyclic head links (token " + std::to_string(t.index) + " heads itself)";
  }
  for (int i = 0; i < n; ++i) {
    int cur = i + 1;
    int steps = 0;
    while (cur != 0) {
      cur = tokens[static_cast<std::size_t>(cur - 1)].head;
      if (++steps > n) return "cyclic head links through token " + std::to_string(i + 1);
    }
  }
  const auto roots = std::count_if(tokens.begin(), tokens.end(), [](const Token& t) { return t.head == 0; });
  if (roots != 1) return roots == 0 ? std::string("no root") : "multiple roots (" + std::to_string(roots) + ")";
  return std::nullopt;
}

DepTree::DepTree(std::vector<Token> tokens, std::string sent_id)
    : tokens_(std::move(tokens)), sent_id_(std::move(sent_id)) {
  if (auto violation = tree_violation(tokens_)) throw ContractError("invalid dependency tree: " + *violation);
  children_.resize(tokens_.size());
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    const int head = tokens_[i].head;
    if (head == 0) {
      root_ = i;
    } else {
      children_[static_cast<std::size_t>(head - 1)].push_back(i);
    }
  }
}

std::optional<std::size_t> DepTree::parent(std::size_t pos) const {
  const int head = tokens_.at(pos).head;
  if (head == 0) return std::nullopt;
  return static_cast<std::size_t>(head - 1);
}

std::string_view to_string(Origin origin) {
  switch (origin) {
    case Origin::gold: return "gold";
    case Origin::generated: return "generated";
    case Origin::paraphrase: return "paraphrase";
  }
  return "gold";
}

std::optional<Origin> origin_from(std::string_view name) {
  if (name == "gold") return Origin::gold;
  if (name == "generated") return Origin::generated;
  if (name == "paraphrase") return Origin::paraphrase;
  return std::nullopt;
}

bool LabeledDoc::has_role(std::string_view role) const {
  return std::find(roles.begin(), roles.end(), role) != roles.end();
}

std::string_view LabeledDoc::role_of(std::size_t i) const {
  return i < roles.size() ? std::string_view(roles[i]) : std::string_view();
}

std::optional<std::size_t> Corpus::label_index(std::string_view name) const {
  const auto it = std::find(labels.begin(), labels.end(), name);
  if (it == labels.end()) return std::nullopt;
  return static_cast<std::size_t>(it - labels.begin());
}

void Corpus::validate() const {
  std::set<std::string_view> ids;
  for (const auto& doc : docs) {
    if (!ids.insert(doc.doc_id).second) throw ContractError("duplicate doc_id '" + doc.doc_id + "'");
    if (doc.label >= labels.size()) throw ContractError("label out of range in doc '" + doc.doc_id + "'");
    if (doc.sentences.empty()) throw ContractError("doc '" + doc.doc_id + "' has no sentences");
  }
}

namespace {

int parse_int(std::string_view s, bool& ok) {
  int value = 0;
  const auto* end = s.data() + s.size();
  const auto result = std::from_chars(s.data(), end, value);
  ok = result.ec == std::errc() && result.ptr == end && !s.empty();
  return value;
}

std::string_view sent_id_comment(std::string_view line) {
  // "# sent_id = X" or "# sent_id=X"
  auto body = text::trim(line.substr(1));
  constexpr std::string_view key = "sent_id";
  if (body.substr(0, key.size()) != key) return {};
  body = text::trim(body.substr(key.size()));
  if (body.empty() || body.front() != '=') return {};
  return text::trim(body.substr(1));
}

}  // namespace

std::vector<DepTree> parse_conllu(std::string_view input) {
  std::vector<DepTree> trees;
  std::vector<Token> tokens;
  std::string sent_id;
  std::size_t block_start = 0;

  auto flush = [&]() {
    if (!tokens.empty()) {
      if (auto violation = tree_violation(tokens)) throw ParseError(*violation, block_start);
      trees.emplace_back(std::move(tokens), std::move(sent_id));
    }
    tokens.clear();
    sent_id.clear();
    block_start = 0;
  };

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= input.size()) {
    const auto nl = input.find('\n', pos);
    std::string_view line =
        input.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? input.size() + 1 : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    if (text::trim(line).empty()) {
      flush();
      continue;
    }
    if (block_start == 0) block_start = line_no;
    if (line.front() == '#') {
      if (auto id = sent_id_comment(line); !id.empty()) sent_id = std::string(id);
      continue;
    }
    const auto cols = text::split(line, '\t');
    if (cols.size() != 10) {
      throw ParseError("expected 10 tab-separated columns, found " + std::to_string(cols.size()), line_no);
    }
    const std::string_view id = cols[0];
    if (id.find('-') != std::string_view::npos || id.find('.') != std::string_view::npos) continue;
    bool ok = false;
    const int index = parse_int(id, ok);
    if (!ok) throw ParseError("non-integer ID '" + std::string(id) + "'", line_no);
    const int head = parse_int(cols[6], ok);
    if (!ok) throw ParseError("non-integer HEAD '" + std::string(cols[6]) + "'", line_no);
    if (cols[1].empty() || cols[3].empty()) throw ParseError("empty FORM or UPOS", line_no);
    tokens.push_back(make_token(index, std::string(cols[1]), cols[2], std::string(cols[3]), head,
                                std::string(cols[7])));
  }
  flush();
  return trees;
}

std::string write_conllu(std::span<const DepTree> trees) {
  std::ostringstream out;
  for (const auto& tree : trees) {
    if (!tree.sent_id().empty()) out << "# sent_id = " << tree.sent_id() << '\n';
    for (const auto& t : tree.tokens()) {
      out << t.index << '\t' << t.form << '\t' << t.stem << '\t' << t.upos << "\t_\t_\t" << t.head
          << '\t' << t.deprel << "\t_\t_\n";
    }
    out << '\n';
  }
  return out.str();
}

namespace {

struct SentencePool {
  std::vector<DepTree> trees;
  std::map<std::string, std::size_t, std::less<>> by_id;

  explicit SentencePool(std::vector<DepTree> parsed) : trees(std::move(parsed)) {
    for (std::size_t i = 0; i < trees.size(); ++i) {
      const auto& id = trees[i].sent_id();
      if (id.empty()) continue;
      if (!by_id.emplace(id, i).second) throw LoadError("duplicate sent_id '" + id + "' in CoNLL-U");
    }
  }
};

std::vector<std::string> string_list(const ordered_json& value, const std::string& field, std::size_t line) {
  if (!value.is_array()) throw ParseError("field '" + field + "' must be an array", line);
  std::vector<std::string> out;
  for (const auto& v : value) {
    if (!v.is_string()) throw ParseError("field '" + field + "' must hold strings", line);
    out.push_back(v.get<std::string>());
  }
  return out;
}

// Resolves one JSON document against a sentence pool. Label index is filled
// in later, once the vocabulary is known.
LabeledDoc resolve_doc(const ordered_json& obj, const SentencePool& pool, const LoadOptions& options,
                       std::size_t line) {
  if (!obj.is_object()) throw ParseError("expected a JSON object", line);
  if (!obj.contains("doc_id") || !obj["doc_id"].is_string()) throw ParseError("missing string field 'doc_id'", line);
  if (!obj.contains("label") || !obj["label"].is_string()) throw ParseError("missing string field 'label'", line);

  LabeledDoc doc;
  doc.doc_id = obj["doc_id"].get<std::string>();
  doc.label_name = obj["label"].get<std::string>();
  doc.origin = options.default_origin;
  if (obj.contains("origin")) {
    const auto origin = obj["origin"].is_string() ? origin_from(obj["origin"].get<std::string>()) : std::nullopt;
    if (!origin) throw ParseError("unknown origin in doc '" + doc.doc_id + "'", line);
    doc.origin = *origin;
  }

  std::vector<std::string> missing;
  auto take = [&](const std::string& id, const std::string& role) {
    const auto it = pool.by_id.find(id);
    if (it == pool.by_id.end()) {
      missing.push_back(id);
      return;
    }
    doc.sentences.push_back(pool.trees[it->second]);
    doc.roles.push_back(role);
  };

  bool referenced = false;
  if (obj.contains("sent_ids")) {
    referenced = true;
    for (const auto& id : string_list(obj["sent_ids"], "sent_ids", line)) take(id, "");
  }
  if (obj.contains("sentence_range")) {
    referenced = true;
    const auto& range = obj["sentence_range"];
    if (!range.is_array() || range.size() != 2 || !range[0].is_number_unsigned() || !range[1].is_number_unsigned()) {
      throw ParseError("'sentence_range' must be [start, end)", line);
    }
    const auto begin = range[0].get<std::size_t>();
    const auto end = range[1].get<std::size_t>();
    if (begin > end || end > pool.trees.size()) {
      throw LoadError("sentence_range [" + std::to_string(begin) + ", " + std::to_string(end) +
                      ") out of bounds in doc '" + doc.doc_id + "'");
    }
    for (std::size_t i = begin; i < end; ++i) {
      doc.sentences.push_back(pool.trees[i]);
      doc.roles.emplace_back();
    }
  }
  if (obj.contains("roles")) {
    referenced = true;
    const auto& roles = obj["roles"];
    if (!roles.is_object()) throw ParseError("'roles' must map role names to sent_id arrays", line);
    for (const auto& [role, ids] : roles.items()) {
      if (std::find(options.allowed_roles.begin(), options.allowed_roles.end(), role) ==
          options.allowed_roles.end()) {
        throw LoadError("unknown role '" + role + "' in doc '" + doc.doc_id + "'");
      }
      for (const auto& id : string_list(ids, "roles." + role, line)) take(id, role);
    }
  }
  if (!referenced) {
    for (const auto& tree : pool.trees) {
      doc.sentences.push_back(tree);
      doc.roles.emplace_back();
    }
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& id : missing) list += (list.empty() ? "" : ", ") + id;
    throw LoadError("doc '" + doc.doc_id + "' references missing sent_id(s): " + list);
  }
  if (doc.sentences.empty()) throw LoadError("doc '" + doc.doc_id + "' has no sentences");
  if (std::all_of(doc.roles.begin(), doc.roles.end(), [](const std::string& r) { return r.empty(); })) {
    doc.roles.clear();
  }
  return doc;
}

Corpus assemble(std::vector<LabeledDoc> docs, const LoadOptions& options) {
  Corpus corpus;
  if (options.labels.empty()) {
    std::set<std::string> names;
    for (const auto& d : docs) names.insert(d.label_name);
    corpus.labels.assign(names.begin(), names.end());
  } else {
    corpus.labels = options.labels;
  }
  std::set<std::string> ids;
  std::set<std::string> roles;
  for (auto& d : docs) {
    if (!ids.insert(d.doc_id).second) throw LoadError("duplicate doc_id '" + d.doc_id + "'");
    const auto idx = corpus.label_index(d.label_name);
    if (!idx) throw LoadError("unknown label '" + d.label_name + "' in doc '" + d.doc_id + "'");
    d.label = *idx;
    for (const auto& r : d.roles) {
      if (!r.empty()) roles.insert(r);
    }
  }
  corpus.roles.assign(roles.begin(), roles.end());
  corpus.docs = std::move(docs);
  return corpus;
}

template <typename Fn>
void for_each_json_line(std::string_view jsonl, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < jsonl.size()) {
    const auto nl = jsonl.find('\n', pos);
    const auto line = text::trim(jsonl.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos));
    pos = nl == std::string_view::npos ? jsonl.size() : nl + 1;
    ++line_no;
    if (line.empty()) continue;
    ordered_json obj;
    try {
      obj = ordered_json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
    }
    fn(obj, line_no);
  }
}

}  // namespace

Corpus parse_corpus(std::string_view docs_jsonl, std::string_view conllu, const LoadOptions& options) {
  const SentencePool pool(parse_conllu(conllu));
  std::vector<LabeledDoc> docs;
  for_each_json_line(docs_jsonl, [&](const ordered_json& obj, std::size_t line) {
    if (obj.contains("conllu")) {
      if (!obj["conllu"].is_string()) throw ParseError("'conllu' must be a string", line);
      const SentencePool own(parse_conllu(obj["conllu"].get<std::string>()));
      docs.push_back(resolve_doc(obj, own, options, line));
    } else {
      docs.push_back(resolve_doc(obj, pool, options, line));
    }
  });
  return assemble(std::move(docs), options);
}

Corpus load_corpus(const std::filesystem::path& docs_path, const std::filesystem::path& parses_path,
                   const LoadOptions& options) {
  const std::string parses = parses_path.empty() ? std::string() : read_file(parses_path);
  return parse_corpus(read_file(docs_path), parses, options);
}

Corpus load_corpus_dir(const std::filesystem::path& dir, const LoadOptions& options) {
  return load_corpus(dir / "docs.jsonl", dir / "parses.conllu", options);
}

std::vector<LabeledDoc> parse_embedded_docs(std::string_view jsonl, const LoadOptions& options) {
  if (options.labels.empty()) throw ContractError("parse_embedded_docs needs a fixed label vocabulary");
  std::vector<LabeledDoc> docs;
  for_each_json_line(jsonl, [&](const ordered_json& obj, std::size_t line) {
    if (!obj.contains("conllu") || !obj["conllu"].is_string()) {
      const std::string id = obj.contains("doc_id") && obj["doc_id"].is_string() ? obj["doc_id"].get<std::string>() : "?";
      throw ParseError("document '" + id + "' carries no 'conllu' parse", line);
    }
    const SentencePool own(parse_conllu(obj["conllu"].get<std::string>()));
    docs.push_back(resolve_doc(obj, own, options, line));
  });
  Corpus c = assemble(std::move(docs), options);
  return std::move(c.docs);
}

namespace {

std::string sentence_id(const LabeledDoc& doc, std::size_t i) { return doc.doc_id + "-" + std::to_string(i + 1); }

std::vector<DepTree> renamed_sentences(const LabeledDoc& doc) {
  std::vector<DepTree> out;
  for (std::size_t i = 0; i < doc.sentences.size(); ++i) {
    DepTree t = doc.sentences[i];
    t.set_sent_id(sentence_id(doc, i));
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace

std::string docs_to_jsonl(std::span<const LabeledDoc> docs, bool embed_conllu) {
  std::string out;
  for (const auto& doc : docs) {
    ordered_json obj;
    obj["doc_id"] = doc.doc_id;
    obj["label"] = doc.label_name;
    obj["origin"] = std::string(to_string(doc.origin));
    std::vector<std::string> untagged;
    ordered_json by_role = ordered_json::object();
    for (std::size_t i = 0; i < doc.sentences.size(); ++i) {
      const auto role = doc.role_of(i);
      if (role.empty()) {
        untagged.push_back(sentence_id(doc, i));
      } else {
        by_role[std::string(role)].push_back(sentence_id(doc, i));
      }
    }
    if (!untagged.empty()) obj["sent_ids"] = untagged;
    if (!by_role.empty()) obj["roles"] = by_role;
    if (embed_conllu) obj["conllu"] = write_conllu(renamed_sentences(doc));
    out += obj.dump();
    out += '\n';
  }
  return out;
}

std::string write_corpus_conllu(std::span<const LabeledDoc> docs) {
  std::string out;
  for (const auto& doc : docs) out += write_conllu(renamed_sentences(doc));
  return out;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& docs_path,
                 const std::filesystem::path& parses_path) {
  write_file(docs_path, docs_to_jsonl(corpus.docs, false));
  write_file(parses_path, write_corpus_conllu(corpus.docs));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw LoadError("cannot write '" + path.string() + "'");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
}

}  // namespace arise
