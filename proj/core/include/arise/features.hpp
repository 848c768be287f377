#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "arise/corpus.hpp"
#include "arise/predicate.hpp"
#include "arise/relations.hpp"
#include "arise/rule.hpp"

namespace arise {

struct FeatureNode {
  TokenPayload payload;
  int parent = -1;
  std::string deprel;  // subtype-free relation to parent; empty for the root

  bool operator==(const FeatureNode&) const = default;
};

/// A syntactic n-gram: an induced subtree (2..3 nodes) of a sentence parse
/// with exactly one core-relation edge. Nodes are in canonical pre-order.
struct Feature {
  std::vector<FeatureNode> nodes;
  CoreRelation core = CoreRelation::nsubj;
  std::string role;
  std::set<std::string> support;  // doc_ids

  /// Canonical form over full payloads, e.g. `bark/bark/VERB(nsubj:dogs/dog/NOUN)`.
  std::string key() const;
  /// The most specific rule covering this feature (exact word predicates).
  Rule as_rule() const;
};

/// Every connected induced subtree of `tree` with 2..max_nodes nodes and
/// exactly one core edge, canonicalised and deduplicated, sorted by key.
std::vector<Feature> extract_subtrees(const DepTree& tree, std::size_t max_nodes = 3);

/// Features over a corpus with their document support. With a non-empty
/// `role`, only sentences tagged with that role contribute and features
/// carry the role.
std::vector<Feature> extract_features(const Corpus& corpus, std::string_view role = {},
                                      std::size_t max_nodes = 3);

/// One (possibly empty) set per core relation; every input lands in exactly one.
std::map<CoreRelation, std::vector<Feature>> partition_by_core_relation(std::span<const Feature> features);

/// doc_ids of documents containing the feature (exact-word matching).
std::set<std::string> feature_coverage(const Feature& feature, const Corpus& corpus);

/// JSON array of {key, core, role, support} objects.
std::string features_to_json(std::span<const Feature> features);

}  // namespace arise
