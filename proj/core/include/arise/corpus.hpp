#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace arise {

/// One CoNLL-U token. `folded` and `relation` are derived at construction:
/// the case-folded form used for word matching and the deprel truncated at
/// its first ':'.
struct Token {
  int index = 0;  // 1-based
  std::string form;
  std::string stem;
  std::string upos;
  int head = 0;  // 0 = root
  std::string deprel;
  std::string folded;
  std::string relation;

  bool operator==(const Token&) const = default;
};

/// Builds a token, applying the lemma fallback ("_" -> lowercased form).
Token make_token(int index, std::string form, std::string_view lemma, std::string upos,
                 int head, std::string deprel);

/// A validated dependency tree: exactly one root, acyclic, heads in range.
class DepTree {
 public:
  DepTree() = default;
  /// Throws ContractError when the head links do not form a tree.
  explicit DepTree(std::vector<Token> tokens, std::string sent_id = {});

  std::size_t size() const noexcept { return tokens_.size(); }
  bool empty() const noexcept { return tokens_.empty(); }
  std::span<const Token> tokens() const noexcept { return tokens_; }
  /// 0-based position (token index - 1).
  const Token& token(std::size_t pos) const { return tokens_.at(pos); }
  std::size_t root() const noexcept { return root_; }
  std::span<const std::size_t> children(std::size_t pos) const { return children_.at(pos); }
  std::optional<std::size_t> parent(std::size_t pos) const;
  const std::string& sent_id() const noexcept { return sent_id_; }
  void set_sent_id(std::string id) { sent_id_ = std::move(id); }

  /// Structural equality; sentence ids are ignored.
  bool operator==(const DepTree& other) const { return tokens_ == other.tokens_; }

 private:
  std::vector<Token> tokens_;
  std::vector<std::vector<std::size_t>> children_;
  std::size_t root_ = 0;
  std::string sent_id_;
};

/// Returns a description of the first tree violation, or nullopt if valid.
std::optional<std::string> tree_violation(std::span<const Token> tokens);

enum class Origin { gold, generated, paraphrase };

std::string_view to_string(Origin origin);
std::optional<Origin> origin_from(std::string_view name);

struct LabeledDoc {
  std::string doc_id;
  std::size_t label = 0;
  std::string label_name;
  std::vector<DepTree> sentences;
  /// Parallel to `sentences`; empty string = sentence carries no role.
  std::vector<std::string> roles;
  Origin origin = Origin::gold;

  bool has_role(std::string_view role) const;
  /// Role of sentence i ("" when untagged).
  std::string_view role_of(std::size_t i) const;

  bool operator==(const LabeledDoc&) const = default;
};

struct Corpus {
  std::vector<LabeledDoc> docs;
  std::vector<std::string> labels;
  std::vector<std::string> roles;

  std::size_t num_labels() const noexcept { return labels.size(); }
  std::size_t size() const noexcept { return docs.size(); }
  std::optional<std::size_t> label_index(std::string_view name) const;
  /// Throws ContractError on duplicate ids or out-of-range labels.
  void validate() const;

  bool operator==(const Corpus&) const = default;
};

/// Parses CoNLL-U text. Multiword ranges ("3-4") and empty nodes ("3.1") are
/// skipped. `# sent_id = ...` comments are attached to the tree.
std::vector<DepTree> parse_conllu(std::string_view text);

/// Writes ID FORM LEMMA UPOS _ _ HEAD DEPREL _ _ rows with sent_id comments.
std::string write_conllu(std::span<const DepTree> trees);

struct LoadOptions {
  /// Fixed label vocabulary. Empty = the sorted set of observed label names.
  std::vector<std::string> labels;
  std::vector<std::string> allowed_roles{"hypothesis", "premise"};
  Origin default_origin = Origin::gold;
};

/// Parses corpus JSONL against sentences carrying `# sent_id` comments.
Corpus parse_corpus(std::string_view docs_jsonl, std::string_view conllu,
                    const LoadOptions& options = {});

Corpus load_corpus(const std::filesystem::path& docs_path,
                   const std::filesystem::path& parses_path, const LoadOptions& options = {});

/// Loads `<dir>/docs.jsonl` + `<dir>/parses.conllu`.
Corpus load_corpus_dir(const std::filesystem::path& dir, const LoadOptions& options = {});

/// Parses JSONL whose objects embed their parse in a `conllu` string field
/// (generator output). `options.labels` must be set.
std::vector<LabeledDoc> parse_embedded_docs(std::string_view jsonl, const LoadOptions& options);

/// Serialises docs as JSONL. With `embed_conllu`, each object carries its
/// parse; otherwise sentences are referenced by generated sent_ids that
/// match `write_corpus_conllu`.
std::string docs_to_jsonl(std::span<const LabeledDoc> docs, bool embed_conllu);
std::string write_corpus_conllu(std::span<const LabeledDoc> docs);

void save_corpus(const Corpus& corpus, const std::filesystem::path& docs_path,
                 const std::filesystem::path& parses_path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace arise
