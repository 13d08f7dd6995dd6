#pragma once

#include <cstddef>
#include <functional>

namespace qfclt {

/// Caps worker threads for every parallel loop in the library; 0 restores
/// the hardware default.
void set_max_threads(unsigned n) noexcept;
unsigned max_threads() noexcept;

/// Calls fn(i) for i in [0, count) on up to max_threads() workers. fn must
/// only write to state owned by index i; the first exception is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace qfclt
