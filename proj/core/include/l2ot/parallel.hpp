#pragma once

#include <cstddef>
#include <vector>

namespace l2ot {

// Worker-count control for the data-parallel reductions in the cost engine and
// the quadrature oracles. Results are bit-identical for any setting: work is
// split into chunks whose contents and combination order are fixed by the
// input shape, never by the number of threads.

/// Set the number of worker threads (0 restores the library default).
void set_num_threads(int n);

/// Current worker-thread count.
int num_threads();

/// Sum `partials` with a fixed pairwise tree (adjacent pairs, repeated).
/// The association depends only on partials.size().
double pairwise_tree_sum(std::vector<double> partials);

}  // namespace l2ot
