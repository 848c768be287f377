#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace arise::text {

/// ASCII case folding. Non-ASCII bytes pass through untouched, which keeps
/// UTF-8 sequences intact.
std::string fold_case(std::string_view s);

/// "nsubj:pass" -> "nsubj".
std::string_view base_relation(std::string_view deprel);

std::vector<std::string_view> split(std::string_view s, char sep);

std::string_view trim(std::string_view s);

/// 64-bit FNV-1a; stable across platforms and runs.
std::uint64_t fnv1a(std::string_view s);

}  // namespace arise::text
