#include "arise/morph.hpp"

#include <vector>

namespace arise {

std::set<std::string> default_peripheral_relations() {
  return {"amod", "advmod", "det", "nummod", "case", "punct", "mark"};
}

DepTree morph_tree(const DepTree& tree, const std::set<std::string>& peripheral) {
  const std::size_t n = tree.size();
  if (peripheral.count(tree.token(tree.root()).relation)) return tree;

  // A token survives iff no token on its path to the root hangs off a
  // peripheral edge.
  std::vector<bool> keep(n, true);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t cur = i;
    while (true) {
      const auto parent = tree.parent(cur);
      if (!parent) break;
      if (peripheral.count(tree.token(cur).relation)) {
        keep[i] = false;
        break;
      }
      cur = *parent;
    }
  }

  std::vector<int> new_index(n, 0);
  int next = 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (keep[i]) new_index[i] = next++;
  }
  std::vector<Token> tokens;
  tokens.reserve(static_cast<std::size_t>(next - 1));
  for (std::size_t i = 0; i < n; ++i) {
    if (!keep[i]) continue;
    Token t = tree.token(i);
    t.index = new_index[i];
    t.head = t.head == 0 ? 0 : new_index[static_cast<std::size_t>(t.head - 1)];
    tokens.push_back(std::move(t));
  }
  return DepTree(std::move(tokens), tree.sent_id());
}

}  // namespace arise
