#pragma once

#include <cstddef>
#include <functional>

namespace arise::parallel {

/// Worker count used by data-parallel loops. Defaults to ARISE_THREADS when
/// set, otherwise the hardware concurrency.
std::size_t thread_count();
void set_thread_count(std::size_t n);

/// Calls fn(i) for i in [0, n). Work is split into contiguous chunks; fn must
/// only write to slots it owns so results do not depend on scheduling.
void for_each_index(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace arise::parallel
