#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace arise {

/// The six core dependency relations that anchor every rule.
enum class CoreRelation : std::uint8_t { obj, iobj, nsubj, csubj, ccomp, xcomp };

inline constexpr std::array<CoreRelation, 6> kCoreRelations{
    CoreRelation::obj,   CoreRelation::iobj,  CoreRelation::nsubj,
    CoreRelation::csubj, CoreRelation::ccomp, CoreRelation::xcomp};

std::string_view to_string(CoreRelation rel);

/// Maps a (possibly subtyped) deprel onto its core relation, if any.
std::optional<CoreRelation> core_relation_from(std::string_view deprel);

inline bool is_core(std::string_view deprel) { return core_relation_from(deprel).has_value(); }

}  // namespace arise
