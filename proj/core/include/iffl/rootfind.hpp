#pragma once

#include <functional>
#include <vector>

namespace iffl {

// All roots of g on (0, hi], located by bracketing sign changes on a mixed
// logarithmic + linear grid and bisecting each bracket. The log half of the
// grid catches roots many decades below hi; the linear half keeps coverage
// uniform elsewhere. Bisection runs until the bracket collapses to a few ulps
// or |g| drops below g_tol.
std::vector<double> find_positive_roots(const std::function<double(double)>& g,
                                        double hi, std::size_t grid_points = 2048,
                                        double g_tol = 1e-12);

}  // namespace iffl
