#pragma once

#include <set>
#include <string>

#include "arise/corpus.hpp"

namespace arise {

/// Relations whose subtrees tree morphing prunes by default.
std::set<std::string> default_peripheral_relations();

/// Removes every subtree hanging off a peripheral-relation edge and repacks
/// token indices. Core edges are never peripheral-pruned unless listed. If
/// pruning would remove the root, the tree is returned unchanged.
DepTree morph_tree(const DepTree& tree, const std::set<std::string>& peripheral = default_peripheral_relations());

}  // namespace arise
