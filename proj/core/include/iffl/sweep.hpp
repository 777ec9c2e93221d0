#pragma once

#include <optional>
#include <string>
#include <vector>

#include "iffl/integrate.hpp"
#include "iffl/model.hpp"

namespace iffl {

enum class SweepMethod { Algebraic, Simulation, Both };
const char* to_string(SweepMethod m);

enum class CellLabel { Elimination, Proliferation, Marginal, Indeterminate };
const char* to_string(CellLabel l);
CellLabel to_cell_label(Outcome o);

struct SweepAxis {
  std::string param;  // ModelParams field name
  double min = 0.0;
  double max = 0.0;
  std::size_t count = 0;

  double value_at(std::size_t i) const;
};

struct SweepSpec {
  SweepAxis axis1;
  std::optional<SweepAxis> axis2;
  SweepMethod method = SweepMethod::Algebraic;
  FullState initial;  // x = y = u = 1 by default
  IntegratorConfig integrator;
  std::size_t threads = 0;  // 0 = hardware concurrency
  // simulated band boundaries are bisected to this fraction of the axis span
  double boundary_resolution = 1e-4;
  double slope_tol = 1e-4;
};

void validate_axis(const SweepAxis& axis, bool allow_single);

// One evaluated parameter value. mu_all holds every interior root's mu;
// mu_selected is the unambiguous one (single root, or all roots agreeing in
// sign; with simulation available, the root tracking the simulated slope).
struct SweepCell {
  double value1 = 0.0;
  double value2 = 0.0;
  std::vector<double> mu_all;
  double mu_selected = 0.0;
  bool has_mu = false;
  CellLabel algebraic = CellLabel::Indeterminate;
  double w_slope = 0.0;
  bool has_slope = false;
  CellLabel simulated = CellLabel::Indeterminate;
  bool failed = false;
};

struct BandReport {
  SweepMethod method = SweepMethod::Algebraic;
  std::vector<double> boundaries;        // sorted, interior to the axis range
  std::vector<CellLabel> labels;         // boundaries.size() + 1, adjacent differ
};

struct LambdaSweepResult {
  std::vector<SweepCell> points;
  std::optional<BandReport> algebraic;
  std::optional<BandReport> simulated;
};

// Sweep over lambda producing band structure. Algebraic boundaries come from
// the switch locus; simulated ones from per-point outcome classification with
// bisection refinement between differing neighbours.
LambdaSweepResult lambda_sweep(const ModelParams& params, const SweepSpec& spec);

struct Heatmap {
  SweepAxis axis1;
  std::optional<SweepAxis> axis2;
  SweepMethod method = SweepMethod::Algebraic;
  std::vector<SweepCell> cells;  // row-major, axis2 fastest
};

// Grid evaluation over one or two parameter axes. Per-cell failures are
// flagged on the cell, never thrown.
Heatmap heatmap(const ModelParams& params, const SweepSpec& spec);

struct BandWidth {
  CellLabel label = CellLabel::Indeterminate;
  double lo = 0.0;
  double hi = 0.0;
  double fold = 0.0;   // hi/lo
  bool bounded = false;  // false for the two range-edge bands
};

// Fold-change width of each band between consecutive boundaries. The bands
// touching the scanned range edges are flagged unbounded.
std::vector<BandWidth> band_width_report(const ModelParams& params,
                                         const SweepSpec& spec);

// Same, computed from an already-run sweep (prefers the simulated band).
std::vector<BandWidth> band_widths_from(const LambdaSweepResult& result,
                                        const SweepSpec& spec);

}  // namespace iffl
