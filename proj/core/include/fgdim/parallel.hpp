#pragma once

#include <cstddef>
#include <functional>

namespace fgdim {

/// Number of workers used for `requested` (0 means all hardware threads).
std::size_t resolve_workers(std::size_t requested) noexcept;

/// Calls fn(i) for i in [0, n) on up to `workers` threads. Indices are handed
/// out dynamically, so fn must not depend on which thread runs it. The first
/// exception thrown by fn is rethrown after all threads have stopped.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

}  // namespace fgdim
