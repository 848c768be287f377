#include "arise/rule.hpp"

#include <algorithm>
#include <functional>
#include <tuple>

#include "arise/error.hpp"
#include "arise/text.hpp"

namespace arise {

std::string_view to_string(CoreRelation rel) {
  switch (rel) {
    case CoreRelation::obj: return "obj";
    case CoreRelation::iobj: return "iobj";
    case CoreRelation::nsubj: return "nsubj";
    case CoreRelation::csubj: return "csubj";
    case CoreRelation::ccomp: return "ccomp";
    case CoreRelation::xcomp: return "xcomp";
  }
  return "nsubj";
}

std::optional<CoreRelation> core_relation_from(std::string_view deprel) {
  const auto base = text::base_relation(deprel);
  for (auto rel : kCoreRelations) {
    if (base == to_string(rel)) return rel;
  }
  return std::nullopt;
}

namespace {

using ChildLists = std::vector<std::vector<std::size_t>>;

std::string subtree_string(const std::vector<RuleNode>& nodes, const ChildLists& children, std::size_t n);

// Children of `n` in canonical order: (deprel, kind, members, subtree).
std::vector<std::size_t> ordered_children(const std::vector<RuleNode>& nodes, const ChildLists& children,
                                          std::size_t n) {
  std::vector<std::size_t> kids = children[n];
  std::vector<std::string> sub(nodes.size());
  for (auto k : kids) sub[k] = subtree_string(nodes, children, k);
  std::sort(kids.begin(), kids.end(), [&](std::size_t x, std::size_t y) {
    const auto& a = nodes[x];
    const auto& b = nodes[y];
    return std::tie(a.deprel, a.pred, sub[x]) < std::tie(b.deprel, b.pred, sub[y]);
  });
  return kids;
}

std::string subtree_string(const std::vector<RuleNode>& nodes, const ChildLists& children, std::size_t n) {
  std::string out = nodes[n].pred.to_string();
  const auto kids = ordered_children(nodes, children, n);
  if (kids.empty()) return out;
  out += '(';
  for (std::size_t i = 0; i < kids.size(); ++i) {
    if (i) out += ',';
    out += nodes[kids[i]].deprel + ":" + subtree_string(nodes, children, kids[i]);
  }
  out += ')';
  return out;
}

}  // namespace

Rule Rule::from_nodes(std::vector<RuleNode> nodes, std::string role) {
  if (nodes.size() < 2 || nodes.size() > kMaxNodes) {
    throw ContractError("rule trees have 2.." + std::to_string(kMaxNodes) + " nodes, got " +
                        std::to_string(nodes.size()));
  }
  const int n = static_cast<int>(nodes.size());
  std::size_t root = nodes.size();
  ChildLists children(nodes.size());
  std::optional<CoreRelation> core;
  for (int i = 0; i < n; ++i) {
    auto& node = nodes[static_cast<std::size_t>(i)];
    if (node.parent < 0) {
      if (root != nodes.size()) throw ContractError("rule tree has more than one root");
      root = static_cast<std::size_t>(i);
      node.parent = -1;
      node.deprel.clear();
      continue;
    }
    if (node.parent >= n || node.parent == i) throw ContractError("rule node has an invalid parent");
    node.deprel = std::string(text::base_relation(node.deprel));
    if (node.deprel.empty()) throw ContractError("rule edge without a relation");
    if (auto rel = core_relation_from(node.deprel)) {
      if (core) throw ContractError("rule tree has more than one core-relation edge");
      core = rel;
    }
    children[static_cast<std::size_t>(node.parent)].push_back(static_cast<std::size_t>(i));
  }
  if (root == nodes.size()) throw ContractError("rule tree has no root");
  if (!core) throw ContractError("rule tree has no core-relation edge");

  // Re-emit in canonical pre-order.
  Rule rule;
  std::vector<int> remap(nodes.size(), -1);
  std::function<void(std::size_t, int)> emit = [&](std::size_t old, int parent) {
    remap[old] = static_cast<int>(rule.nodes_.size());
    rule.nodes_.push_back({nodes[old].pred, parent, nodes[old].deprel});
    const int self = remap[old];
    for (auto k : ordered_children(nodes, children, old)) emit(k, self);
  };
  emit(root, -1);
  if (rule.nodes_.size() != nodes.size()) throw ContractError("rule nodes are not connected");
  rule.core_ = *core;
  rule.role_ = std::move(role);
  rule.finish();
  return rule;
}

Rule Rule::supremum(CoreRelation rel, std::string role) {
  return from_nodes({{NodePredicate::any(), -1, ""}, {NodePredicate::any(), 0, std::string(to_string(rel))}},
                    std::move(role));
}

Rule Rule::infimum(CoreRelation rel, std::string role) {
  Rule rule;
  rule.core_ = rel;
  rule.role_ = std::move(role);
  rule.infimum_ = true;
  rule.finish();
  return rule;
}

void Rule::finish() {
  children_.assign(nodes_.size(), {});
  for (std::size_t i = 1; i < nodes_.size(); ++i) children_[static_cast<std::size_t>(nodes_[i].parent)].push_back(i);
  std::string tree = infimum_ ? "EPSILON(" + std::string(to_string(core_)) + ")"
                              : subtree_string(nodes_, children_, 0);
  key_ = role_.empty() ? tree : role_ + "|" + tree;
}

bool Rule::is_supremum() const noexcept {
  return !infimum_ && nodes_.size() == 2 && nodes_[0].pred.is_any() && nodes_[1].pred.is_any();
}

std::size_t Rule::core_dependent() const {
  for (std::size_t i = 1; i < nodes_.size(); ++i) {
    if (is_core(nodes_[i].deprel)) return i;
  }
  throw ContractError("rule has no core edge");
}

void sort_and_dedup(std::vector<Rule>& rules) {
  std::stable_sort(rules.begin(), rules.end(), RuleKeyLess{});
  rules.erase(std::unique(rules.begin(), rules.end(),
                          [](const Rule& a, const Rule& b) { return a.key() == b.key(); }),
              rules.end());
}

namespace {

bool match_at(const Rule& rule, std::size_t node, const DepTree& tree, std::size_t pos);

// Assigns rule children kids[i..] to distinct token children of `pos`.
bool assign_children(const Rule& rule, std::span<const std::size_t> kids, std::size_t i, const DepTree& tree,
                     std::size_t pos, std::vector<std::size_t>& used) {
  if (i == kids.size()) return true;
  const auto& rn = rule.nodes()[kids[i]];
  for (auto child : tree.children(pos)) {
    if (std::find(used.begin(), used.end(), child) != used.end()) continue;
    if (tree.token(child).relation != rn.deprel) continue;
    if (!match_at(rule, kids[i], tree, child)) continue;
    used.push_back(child);
    if (assign_children(rule, kids, i + 1, tree, pos, used)) return true;
    used.pop_back();
  }
  return false;
}

bool match_at(const Rule& rule, std::size_t node, const DepTree& tree, std::size_t pos) {
  if (!rule.nodes()[node].pred.matches(tree.token(pos))) return false;
  const auto kids = rule.children(node);
  if (kids.empty()) return true;
  std::vector<std::size_t> used;
  return assign_children(rule, kids, 0, tree, pos, used);
}

}  // namespace

bool matches(const Rule& rule, const DepTree& tree) {
  if (rule.is_infimum()) return false;
  for (std::size_t pos = 0; pos < tree.size(); ++pos) {
    if (match_at(rule, 0, tree, pos)) return true;
  }
  return false;
}

bool matches(const Rule& rule, const LabeledDoc& doc) {
  if (rule.is_infimum()) return false;
  for (std::size_t i = 0; i < doc.sentences.size(); ++i) {
    if (!rule.role().empty() && doc.role_of(i) != rule.role()) continue;
    if (matches(rule, doc.sentences[i])) return true;
  }
  return false;
}

std::vector<std::size_t> firing_docs(const Rule& rule, const Corpus& corpus) {
  std::vector<std::size_t> fired;
  for (std::size_t i = 0; i < corpus.docs.size(); ++i) {
    if (matches(rule, corpus.docs[i])) fired.push_back(i);
  }
  return fired;
}

}  // namespace arise
