#include "iffl/rootfind.hpp"

#include <algorithm>
#include <cmath>

#include "iffl/errors.hpp"

namespace iffl {

namespace {

double bisect(const std::function<double(double)>& g, double lo, double hi,
              double g_lo, double g_tol) {
  // g(lo) and g(hi) straddle zero; halve until the bracket collapses to ulps
  // (which drives |g| below any continuous function's g_tol) or g hits 0.
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double g_mid = g(mid);
    if (g_mid == 0.0) return mid;
    if (std::fabs(g_mid) < g_tol &&
        hi - lo <= 8.0 * 1e-16 * (1.0 + std::fabs(mid))) {
      return mid;
    }
    if ((g_lo < 0.0) == (g_mid < 0.0)) {
      lo = mid;
      g_lo = g_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

std::vector<double> find_positive_roots(const std::function<double(double)>& g,
                                        double hi, std::size_t grid_points,
                                        double g_tol) {
  if (!(hi > 0.0) || !std::isfinite(hi)) {
    throw ValidationError("root scan needs a positive finite upper bound");
  }
  const std::size_t half = std::max<std::size_t>(grid_points / 2, 8);

  std::vector<double> grid;
  grid.reserve(2 * half);
  // decades below hi, down to 1e-9*hi
  const double lo = hi * 1e-9;
  for (std::size_t i = 0; i < half; ++i) {
    const double f = static_cast<double>(i) / static_cast<double>(half - 1);
    grid.push_back(lo * std::pow(hi / lo, f));
  }
  for (std::size_t i = 1; i <= half; ++i) {
    grid.push_back(hi * static_cast<double>(i) / static_cast<double>(half));
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  std::vector<double> roots;
  double prev_y = grid.front();
  double prev_g = g(prev_y);
  if (prev_g == 0.0) roots.push_back(prev_y);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double cur_y = grid[i];
    const double cur_g = g(cur_y);
    if (cur_g == 0.0) {
      roots.push_back(cur_y);
    } else if (prev_g != 0.0 && (prev_g < 0.0) != (cur_g < 0.0)) {
      roots.push_back(bisect(g, prev_y, cur_y, prev_g, g_tol));
    }
    prev_y = cur_y;
    prev_g = cur_g;
  }

  // collapse near-duplicates from a root sitting exactly on a grid node
  std::sort(roots.begin(), roots.end());
  std::vector<double> out;
  for (double r : roots) {
    if (out.empty() || r - out.back() > 1e-10 * (1.0 + r)) out.push_back(r);
  }
  return out;
}

}  // namespace iffl
