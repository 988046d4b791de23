#pragma once

#include <vector>

#include "fmlab/core/types.hpp"

namespace fmlab {

// Exact minimum-cost perfect matching on a square cost matrix (shortest
// augmenting paths with potentials, O(n^3)). Returns perm with row i
// assigned to column perm[i].
std::vector<int> solve_assignment(const Mat& cost);

double assignment_cost(const Mat& cost, const std::vector<int>& perm);

}  // namespace fmlab
