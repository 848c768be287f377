#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "arise/features.hpp"
#include "arise/predicate.hpp"
#include "arise/rule.hpp"

namespace arise {

inline constexpr std::size_t kDefaultGroupCap = 4;

/// `general` subsumes `specific` when general's tree embeds into specific's
/// (edges and relations preserved, core edge onto core edge) with every
/// mapped predicate subsuming its image. The supremum subsumes everything
/// and everything subsumes the infimum. Throws ContractError when the rules
/// belong to different partitions.
bool subsumes(const Rule& general, const Rule& specific, const Lexicon& lexicon);

/// Least general generalisation. The structural step anchors both trees at
/// their core edge and keeps the third node only when both rules carry one
/// at the same position under the same relation; the linguistic step merges
/// aligned predicates with lgg_nodes. Throws ContractError on mismatched
/// partitions. Scores on the result are reset.
Rule lgg(const Rule& a, const Rule& b, const Lexicon& lexicon, std::size_t cap = kDefaultGroupCap);

/// One partition's search space: features as most specific rules plus the
/// supremum and infimum. Subsumption between elements is computed on demand.
class Lattice {
 public:
  Lattice(CoreRelation relation, std::string role, std::vector<Rule> elements, Lexicon lexicon,
          std::size_t cap);

  CoreRelation relation() const noexcept { return relation_; }
  const std::string& role() const noexcept { return role_; }
  /// Feature rules, sorted by key (supremum and infimum excluded).
  std::span<const Rule> elements() const noexcept { return elements_; }
  const Rule& supremum() const noexcept { return supremum_; }
  const Rule& infimum() const noexcept { return infimum_; }
  const Lexicon& lexicon() const noexcept { return lexicon_; }
  std::size_t group_cap() const noexcept { return cap_; }
  /// Elements including supremum and infimum.
  std::size_t size() const noexcept { return elements_.size() + 2; }

  /// Element i (0..size()-1): feature rules, then supremum, then infimum.
  const Rule& at(std::size_t i) const;
  bool leq(std::size_t specific, std::size_t general) const;

 private:
  CoreRelation relation_;
  std::string role_;
  std::vector<Rule> elements_;
  Rule supremum_;
  Rule infimum_;
  Lexicon lexicon_;
  std::size_t cap_;
};

/// Builds the lattice for one partition. Every feature must carry
/// `relation`; features mapping to the same word rule collapse.
Lattice build_lattice(CoreRelation relation, std::span<const Feature> partition, Lexicon lexicon,
                      std::size_t cap = kDefaultGroupCap, std::string role = {});

}  // namespace arise
