#include "arise/features.hpp"

#include <algorithm>
#include <functional>
#include <tuple>

#include "arise/error.hpp"
#include "json.hpp"

namespace arise {

namespace {

std::string payload_string(const TokenPayload& p) {
  auto quote = [](const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
      if (c == '"' || c == '\\') out += '\\';
      out += c;
    }
    return out + '"';
  };
  return quote(p.form) + "/" + quote(p.stem) + "/" + quote(p.upos);
}

using ChildLists = std::vector<std::vector<std::size_t>>;

std::string subtree_key(const std::vector<FeatureNode>& nodes, const ChildLists& kids, std::size_t n);

std::vector<std::size_t> ordered(const std::vector<FeatureNode>& nodes, const ChildLists& kids, std::size_t n) {
  std::vector<std::size_t> out = kids[n];
  std::vector<std::string> sub(nodes.size());
  for (auto k : out) sub[k] = subtree_key(nodes, kids, k);
  std::sort(out.begin(), out.end(), [&](std::size_t x, std::size_t y) {
    return std::tie(nodes[x].deprel, nodes[x].payload, sub[x]) < std::tie(nodes[y].deprel, nodes[y].payload, sub[y]);
  });
  return out;
}

std::string subtree_key(const std::vector<FeatureNode>& nodes, const ChildLists& kids, std::size_t n) {
  std::string out = payload_string(nodes[n].payload);
  const auto order = ordered(nodes, kids, n);
  if (order.empty()) return out;
  out += '(';
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (i) out += ',';
    out += nodes[order[i]].deprel + ":" + subtree_key(nodes, kids, order[i]);
  }
  return out + ')';
}

ChildLists child_lists(const std::vector<FeatureNode>& nodes) {
  ChildLists kids(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].parent >= 0) kids[static_cast<std::size_t>(nodes[i].parent)].push_back(i);
  }
  return kids;
}

// Builds a canonical feature from a connected node subset of `tree`, or
// nothing when the subset does not hold exactly one core edge.
std::optional<Feature> feature_from_subset(const DepTree& tree, std::span<const std::size_t> subset) {
  std::vector<FeatureNode> raw;
  std::size_t root = subset.size();
  int core_edges = 0;
  CoreRelation core = CoreRelation::nsubj;
  for (std::size_t i = 0; i < subset.size(); ++i) {
    const auto parent = tree.parent(subset[i]);
    int local_parent = -1;
    if (parent) {
      const auto it = std::find(subset.begin(), subset.end(), *parent);
      if (it != subset.end()) local_parent = static_cast<int>(it - subset.begin());
    }
    const Token& t = tree.token(subset[i]);
    FeatureNode node{TokenPayload::of(t), local_parent, local_parent >= 0 ? t.relation : std::string()};
    if (local_parent < 0) {
      if (root != subset.size()) return std::nullopt;  // disconnected
      root = i;
    } else if (auto rel = core_relation_from(t.relation)) {
      ++core_edges;
      core = *rel;
    }
    raw.push_back(std::move(node));
  }
  if (core_edges != 1 || root == subset.size()) return std::nullopt;

  const auto kids = child_lists(raw);
  Feature f;
  f.core = core;
  std::function<void(std::size_t, int)> emit = [&](std::size_t old, int parent) {
    const int self = static_cast<int>(f.nodes.size());
    f.nodes.push_back({raw[old].payload, parent, raw[old].deprel});
    for (auto k : ordered(raw, kids, old)) emit(k, self);
  };
  emit(root, -1);
  if (f.nodes.size() != raw.size()) return std::nullopt;
  return f;
}

}  // namespace

std::string Feature::key() const {
  const std::string tree = nodes.empty() ? std::string() : subtree_key(nodes, child_lists(nodes), 0);
  return role.empty() ? tree : role + "|" + tree;
}

Rule Feature::as_rule() const {
  std::vector<RuleNode> rn;
  rn.reserve(nodes.size());
  for (const auto& n : nodes) rn.push_back({NodePredicate::word(n.payload.form), n.parent, n.deprel});
  return Rule::from_nodes(std::move(rn), role);
}

std::vector<Feature> extract_subtrees(const DepTree& tree, std::size_t max_nodes) {
  if (max_nodes < 2 || max_nodes > 3) throw ContractError("max_nodes must be 2 or 3");
  std::vector<Feature> out;
  auto consider = [&](std::vector<std::size_t> subset) {
    if (auto f = feature_from_subset(tree, subset)) out.push_back(std::move(*f));
  };
  for (std::size_t v = 0; v < tree.size(); ++v) {
    if (auto p = tree.parent(v)) consider({*p, v});
  }
  if (max_nodes >= 3) {
    for (std::size_t v = 0; v < tree.size(); ++v) {
      std::vector<std::size_t> neighbours(tree.children(v).begin(), tree.children(v).end());
      if (auto p = tree.parent(v)) neighbours.push_back(*p);
      for (std::size_t i = 0; i < neighbours.size(); ++i) {
        for (std::size_t j = i + 1; j < neighbours.size(); ++j) consider({v, neighbours[i], neighbours[j]});
      }
    }
  }
  std::vector<std::pair<std::string, std::size_t>> keyed;
  for (std::size_t i = 0; i < out.size(); ++i) keyed.emplace_back(out[i].key(), i);
  std::sort(keyed.begin(), keyed.end());
  std::vector<Feature> unique;
  for (std::size_t i = 0; i < keyed.size(); ++i) {
    if (i > 0 && keyed[i].first == keyed[i - 1].first) continue;
    unique.push_back(std::move(out[keyed[i].second]));
  }
  return unique;
}

std::vector<Feature> extract_features(const Corpus& corpus, std::string_view role, std::size_t max_nodes) {
  std::map<std::string, Feature> merged;
  for (const auto& doc : corpus.docs) {
    for (std::size_t s = 0; s < doc.sentences.size(); ++s) {
      if (!role.empty() && doc.role_of(s) != role) continue;
      for (auto& f : extract_subtrees(doc.sentences[s], max_nodes)) {
        f.role = std::string(role);
        auto [it, inserted] = merged.try_emplace(f.key(), std::move(f));
        it->second.support.insert(doc.doc_id);
      }
    }
  }
  std::vector<Feature> out;
  out.reserve(merged.size());
  for (auto& [key, f] : merged) out.push_back(std::move(f));
  return out;
}

std::map<CoreRelation, std::vector<Feature>> partition_by_core_relation(std::span<const Feature> features) {
  std::map<CoreRelation, std::vector<Feature>> parts;
  for (auto rel : kCoreRelations) parts[rel];
  for (const auto& f : features) parts[f.core].push_back(f);
  return parts;
}

std::set<std::string> feature_coverage(const Feature& feature, const Corpus& corpus) {
  const Rule rule = feature.as_rule();
  std::set<std::string> covered;
  for (const auto& doc : corpus.docs) {
    if (matches(rule, doc)) covered.insert(doc.doc_id);
  }
  return covered;
}

std::string features_to_json(std::span<const Feature> features) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& f : features) {
    nlohmann::ordered_json obj;
    obj["key"] = f.key();
    obj["core"] = std::string(to_string(f.core));
    obj["role"] = f.role;
    obj["support"] = std::vector<std::string>(f.support.begin(), f.support.end());
    arr.push_back(std::move(obj));
  }
  return arr.dump(2) + "\n";
}

}  // namespace arise
