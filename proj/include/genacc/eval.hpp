#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "genacc/classifiers.hpp"
#include "genacc/dataset.hpp"
#include "genacc/metric.hpp"

namespace genacc {

enum class NormMode { MAX, EXACT };
enum class AccuracyKind { STANDARD, GENUINE };
enum class VoronoiMode { POINT_CELL, CLASS_REGION };
enum class SearchMode { GRID, PGD };

struct PgdConfig {
  int steps = 40;
  int restarts = 4;
  double step_frac = 0.1;   // step size as a fraction of eps
  int alternations = 1;     // ball/cell projection rounds per step
  double fd_h_frac = 1e-4;  // finite-difference h as a fraction of eps
};

struct EvalConfig {
  Metric metric = Metric::L2;
  NormMode norm = NormMode::MAX;
  AccuracyKind kind = AccuracyKind::GENUINE;
  VoronoiMode voronoi_mode = VoronoiMode::POINT_CELL;
  SearchMode search = SearchMode::GRID;
  int grid_resolution = 200;     // nodes per axis across a candidate ball's bounding box
  int sphere_directions = 4096;  // exact-norm direction count for dim 2..3
  double vb_tolerance = 1e-9;
  std::uint64_t seed = 0;
  PgdConfig pgd;
};

std::string evaluator_tag(const EvalConfig& cfg);

struct CurvePoint {
  double eps = 0.0;
  double accuracy = 0.0;
  bool defined = true;  // false when the base set is empty at this eps
};

struct AccuracyCurve {
  std::vector<CurvePoint> points;
  std::string evaluator_tag;
  std::string classifier_tag;
};

double ara(const AccuracyCurve& curve);
std::vector<double> uniform_eps_grid(double eps_max, int n = 128);

// Explicit feasible-set description for the inner worst-case search.
struct FeasibleSet {
  enum class Kind { BALL, SPHERE, BALL_IN_POINT_CELL, BALL_IN_CLASS_CELL };
  Kind kind = Kind::BALL;
  std::vector<double> center;
  double eps = 0.0;
  std::size_t anchor = 0;  // dataset index owning the cell (BALL_IN_POINT_CELL)
  int anchor_class = 0;    // class owning the cell (BALL_IN_CLASS_CELL)
};

struct WorstCase {
  std::vector<double> x_star;
  double loss = 0.0;
  bool misclassified = false;
  bool feasible_found = false;  // nothing explored satisfied the constraints when false
};

// Maximizes the loss surrogate over the feasible set: negative margin for score
// classifiers, flip indicator for hard ones. Grid scans return the first maximizer in
// ascending axis order; PGD runs finite-difference ascent with the configured
// projections. `misclassified` only reports flips seen at feasible points, so search
// accuracies are upper bounds.
WorstCase worst_case_search(const Classifier& f, std::span<const double> x, int true_label,
                            const FeasibleSet& fs, const LabeledDataset& data,
                            const EvalConfig& cfg);

// Smallest per-sample distance at which a flip is reachable inside the sample's feasible
// family, found on one shared domain grid pass (max-norm feasible sets are nested in eps,
// so a single pass at eps_max answers every smaller eps). +inf where no flip exists up
// to eps_max; 0 where the sample itself is misclassified.
std::vector<double> min_flip_distances(const Classifier& f, const LabeledDataset& data,
                                       const EvalConfig& cfg, double eps_max);

// Sample indices that admit a feasible exact-eps perturbation (two-direction test in
// 1-D, sphere sampling with rejection in 2-D/3-D).
std::vector<std::size_t> s_exact_indices(const LabeledDataset& data, double eps,
                                         const EvalConfig& cfg);

double std_adv_acc(const Classifier& f, const LabeledDataset& data, double eps,
                   const EvalConfig& cfg);
double genuine_adv_acc_max(const Classifier& f, const LabeledDataset& data, double eps,
                           const EvalConfig& cfg);
// NaN when no sample admits a feasible exact-eps perturbation (undefined, not 0).
double genuine_adv_acc_exact(const Classifier& f, const LabeledDataset& data, double eps,
                             const EvalConfig& cfg);

AccuracyCurve accuracy_curve(const Classifier& f, const LabeledDataset& data,
                             std::span<const double> eps_grid, const EvalConfig& cfg,
                             const std::string& classifier_tag = "");

}  // namespace genacc
