#pragma once

#include <vector>

#include "genacc/classifiers.hpp"
#include "genacc/dataset.hpp"

namespace genacc::analytic {

// Exact interval-measure evaluators for piecewise-constant classifiers over a union of
// labeled intervals. All accuracies are uniform-measure expectations over the intervals.

// Worst case over the closed ball [x-eps, x+eps].
double std_acc_max(const Step1D& f, const Region1D& region, double eps);

// Worst case over the two-point sphere {x-eps, x+eps}.
double std_acc_exact(const Step1D& f, const Region1D& region, double eps);

struct SExact1D {
  bool full_region = false;       // eps == 0: every sample point qualifies
  std::vector<double> points;     // closure points that admit a feasible exact-eps move
};

SExact1D s_exact_set(const Region1D& region, double eps);

// Base points paired with their feasible exact-eps candidates.
struct SExactCandidate {
  double base = 0.0;
  double moved = 0.0;
  int label = 0;
};
std::vector<SExactCandidate> s_exact_candidates(const Region1D& region, double eps);

// Mean correctness over s_exact_set; NaN when the set is empty (undefined at this eps).
double gen_acc_exact(const Step1D& f, const Region1D& region, double eps);

// Worst case over the ball intersected with the cell of the sample's same-class region
// (distance to own-class intervals <= distance to the rest, boundary excluded).
double gen_acc_max_class_region(const Step1D& f, const Region1D& region, double eps);

enum class CurveKind { STD_MAX, STD_EXACT, GEN_EXACT, GEN_MAX_CLASS_REGION };

struct CurvePoint {
  double eps = 0.0;
  double value = 0.0;
  bool defined = true;
};

// Every eps where any of the four evaluators can change slope or jump: pairwise
// distances and half-distances of interval endpoints, classifier breakpoints, and
// boundary-set points.
std::vector<double> curve_breakpoints(const Step1D& f, const Region1D& region, double eps_max);

// Values at all breakpoints plus segment midpoints, so piecewise-linear curves are
// trapezoid-exact and jumps are visible in the output.
std::vector<CurvePoint> accuracy_curve(CurveKind kind, const Step1D& f, const Region1D& region,
                                       double eps_max);

// Trapezoidal area over consecutive defined points.
double ara(const std::vector<CurvePoint>& curve);

}  // namespace genacc::analytic
