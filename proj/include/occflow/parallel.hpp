#pragma once

#include <functional>

namespace occflow {

// Thread cap for row-parallel kernels. Resolution order: explicit set_num_threads,
// OCCFLOW_THREADS, else 1. Results are bitwise identical for any thread count:
// workers write disjoint rows and reductions stay serial.
int num_threads();
void set_num_threads(int n);

// Runs fn(y) for y in [0, height). Splits rows across num_threads() workers.
void parallel_rows(int height, const std::function<void(int)>& fn);

}  // namespace occflow
