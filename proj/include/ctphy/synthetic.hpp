#pragma once

#include <cstdint>
#include <random>

#include "ctphy/tree.hpp"

namespace ctphy {

// Random consistent complete tree, built by recursively partitioning each
// cell's next-deeper position into random symbol blocks until max_depth.
// Contexts come out in shallowest form (no full set at the deepest
// position), so distinct results always induce distinct partitions. Useful
// for benchmarks and randomized tests.
SparseContextTree random_complete_tree(AlphabetPtr alphabet, std::size_t max_depth,
                                       std::mt19937_64& rng);

}  // namespace ctphy
