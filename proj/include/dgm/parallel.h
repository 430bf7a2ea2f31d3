#pragma once

#include <cstddef>
#include <functional>

namespace dgm {

/// Worker count: hardware concurrency, capped by the DGM_THREADS environment variable.
std::size_t worker_count();

/// Runs fn(begin, end) over [0, total) split into blocks of `block` items.
///
/// Blocks are handed to workers in index order and each block writes only its
/// own outputs, so results do not depend on the number of workers.
void parallel_for_blocks(std::size_t total, std::size_t block,
                         const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace dgm
