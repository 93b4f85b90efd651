#pragma once

#include <span>
#include <vector>

#include "genacc/dataset.hpp"
#include "genacc/metric.hpp"

namespace genacc {

// View over a dataset's clean points (or analytic 1-D closure) with the tolerance
// used for boundary ties. The tolerance is relative; abs_tol() is what predicates use.
class VoronoiQuery {
 public:
  VoronoiQuery(const LabeledDataset& data, Metric metric, double vb_tolerance = 1e-9);

  const LabeledDataset& data() const { return *data_; }
  Metric metric() const { return metric_; }
  double vb_tolerance() const { return vb_tolerance_; }
  double abs_tol() const { return abs_tol_; }

 private:
  const LabeledDataset* data_;
  Metric metric_;
  double vb_tolerance_;
  double abs_tol_;
};

struct NearestResult {
  double dist = 0.0;
  std::vector<std::size_t> indices;  // all dataset indices within abs_tol of the minimum
  int multiplicity = 0;              // distinct nearest closure points (analytic mode included)
};

// Nearest clean point(s). Throws on an empty dataset.
NearestResult nearest_clean(std::span<const double> p, const VoronoiQuery& q);

// True iff at least two distinct closure points are equidistant-nearest within tolerance.
bool is_on_voronoi_boundary(std::span<const double> p, const VoronoiQuery& q);

// True iff the nearest-closure distance is < eps and p is off the boundary set.
bool in_previously_allowed_region(std::span<const double> p, double eps, const VoronoiQuery& q);

// Metric ball projection around center; exact per metric (radial shrink / clamp /
// largest-coordinate reduction).
std::vector<double> project_to_ball(Metric m, std::span<const double> p,
                                    std::span<const double> center, double eps);

struct ProjectionResult {
  std::vector<double> point;
  bool in_ball = false;
  bool in_cell = false;  // strictly inside the anchor's cell (off the boundary set)
  bool ok = false;
};

// Ball projection first, then a move into the anchor's open Voronoi cell. The cell step
// clips against bisector halfspaces inset by abs_tol for L2 and bisects along the segment
// toward the anchor for L1/LINF. `alternations` repeats the ball/cell pair.
ProjectionResult project_ball_then_voronoi(std::span<const double> p, std::size_t anchor,
                                           double eps, const VoronoiQuery& q,
                                           int alternations = 1);

}  // namespace genacc
