#pragma once

#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "genacc/dataset.hpp"
#include "genacc/metric.hpp"

namespace genacc {

// Label reserved for the open-set "none of the known classes" outcome.
inline constexpr int kUnknownLabel = std::numeric_limits<int>::min();

class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual std::size_t dim() const = 0;
  virtual int predict(std::span<const double> x) const = 0;
  virtual bool has_scores() const { return false; }
  // Scores aligned with score_labels(); nonnegative, sum to 1.
  virtual std::vector<double> scores(std::span<const double> x) const;
  virtual const std::vector<int>& score_labels() const;
};

// Piecewise-constant 1-D classifier; value at x is values[#breakpoints <= x],
// so each piece is closed on its left breakpoint.
class Step1D final : public Classifier {
 public:
  Step1D(std::vector<double> breakpoints, std::vector<int> values);
  std::size_t dim() const override { return 1; }
  int predict(std::span<const double> x) const override;
  int at(double x) const;
  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::vector<int>& values() const { return values_; }

 private:
  std::vector<double> breakpoints_;
  std::vector<int> values_;
};

// The three 1-D benchmarks: sign step at 1, the band classifier (+1, -1 on [-4,0), +1),
// and the sign step at 0. Accepts "f1" / "f2" / "f3".
Step1D step_classifier(const std::string& which);

struct NnPrediction {
  int label = 0;
  bool tie = false;               // >= 2 distinct labels tied at the minimum distance
  std::vector<int> tied_labels;   // sorted distinct labels at the minimum
  double dist = 0.0;
  std::size_t index = 0;          // smallest nearest index
};

// Nearest-neighbor lookup with tie reporting. abs_tol widens the tie band (0 = exact ties).
NnPrediction predict_1nn(std::span<const double> x, const LabeledDataset& data, Metric metric,
                         double abs_tol = 0.0);

class NearestNeighborClassifier final : public Classifier {
 public:
  NearestNeighborClassifier(const LabeledDataset& data, Metric metric);
  std::size_t dim() const override { return data_->dim; }
  int predict(std::span<const double> x) const override;
  const LabeledDataset& data() const { return *data_; }
  Metric metric() const { return metric_; }

 private:
  const LabeledDataset* data_;
  Metric metric_;
};

enum class GradualKernel { INVERSE, INVERSE_SQUARE, INVERSE_LOG };

GradualKernel kernel_from_string(const std::string& s);

struct GradualScores {
  std::vector<int> labels;          // sorted distinct class labels
  std::vector<double> scores;       // normalized, sum to 1
  std::vector<double> nearest_dists;
};

// Normalized decreasing-kernel scores of the per-class nearest distances.
// Exactly-zero distance forces a one-hot score; two classes at zero distance is an error.
GradualScores gradual_scores(std::span<const double> x, const LabeledDataset& data, Metric metric,
                             GradualKernel kernel = GradualKernel::INVERSE);

class GradualClassifier final : public Classifier {
 public:
  GradualClassifier(const LabeledDataset& data, Metric metric,
                    GradualKernel kernel = GradualKernel::INVERSE);
  std::size_t dim() const override { return data_->dim; }
  int predict(std::span<const double> x) const override;
  bool has_scores() const override { return true; }
  std::vector<double> scores(std::span<const double> x) const override;
  const std::vector<int>& score_labels() const override { return labels_; }
  GradualKernel kernel() const { return kernel_; }
  const LabeledDataset& data() const { return *data_; }
  Metric metric() const { return metric_; }

 private:
  const LabeledDataset* data_;
  Metric metric_;
  GradualKernel kernel_;
  std::vector<int> labels_;
};

enum class OpenSetVariant { ENTROPY, GEOMETRIC_MEAN };

struct OpenSetScores {
  std::vector<int> labels;      // known labels then kUnknownLabel
  std::vector<double> scores;   // known scores scaled by (1 - unknown), then unknown
  double unknown = 0.0;
};

// Unknown mass from the spread of the known scores: normalized entropy (alpha in [0,1])
// or the geometric mean (alpha in [0, #classes]). Known scores are rescaled to keep the
// total at 1.
OpenSetScores open_set_scores(const GradualScores& g, double alpha, OpenSetVariant variant);

class OpenSetClassifier final : public Classifier {
 public:
  OpenSetClassifier(const LabeledDataset& data, Metric metric, double alpha,
                    OpenSetVariant variant, GradualKernel kernel = GradualKernel::INVERSE);
  std::size_t dim() const override { return base_.dim(); }
  int predict(std::span<const double> x) const override;
  bool has_scores() const override { return true; }
  std::vector<double> scores(std::span<const double> x) const override;
  const std::vector<int>& score_labels() const override { return labels_; }

 private:
  GradualClassifier base_;
  double alpha_;
  OpenSetVariant variant_;
  std::vector<int> labels_;
};

enum class NoiseModel { GAUSSIAN_ISOTROPIC, RBF_KERNEL_WEIGHTING };
enum class EnsembleVote { HARD, GRADUAL };

struct EnsembleConfig {
  double sigma = 0.1;
  std::size_t members = 1000;
  std::uint64_t seed = 0;
  NoiseModel noise_model = NoiseModel::GAUSSIAN_ISOTROPIC;
  EnsembleVote vote = EnsembleVote::HARD;
  GradualKernel kernel = GradualKernel::INVERSE;
};

// Averages hard 1-NN votes (or gradual scores) over copies of the dataset displaced by
// seeded Gaussian noise. sigma = 0 skips the noise entirely and reproduces the base
// classifier. RBF_KERNEL_WEIGHTING additionally weights each displaced point by the
// Gaussian kernel of its own displacement and ranks neighbors by distance/weight.
class NoisyEnsembleClassifier final : public Classifier {
 public:
  NoisyEnsembleClassifier(const LabeledDataset& data, Metric metric, EnsembleConfig cfg);
  std::size_t dim() const override { return data_->dim; }
  int predict(std::span<const double> x) const override;
  bool has_scores() const override { return true; }
  std::vector<double> scores(std::span<const double> x) const override;
  const std::vector<int>& score_labels() const override { return labels_; }
  const EnsembleConfig& config() const { return cfg_; }

 private:
  std::vector<double> member_scores(std::size_t m, std::span<const double> x) const;

  const LabeledDataset* data_;
  Metric metric_;
  EnsembleConfig cfg_;
  std::vector<int> labels_;
  std::vector<std::vector<double>> displaced_;      // per member, n*dim
  std::vector<std::vector<double>> point_weights_;  // per member, n (RBF model only)
};

// The eight-point two-class demo set the ensemble contours are drawn for.
LabeledDataset make_ensemble_demo_dataset();

}  // namespace genacc
