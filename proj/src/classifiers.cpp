#include "genacc/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace genacc {

std::vector<double> Classifier::scores(std::span<const double>) const {
  throw std::logic_error("this classifier does not produce scores");
}

const std::vector<int>& Classifier::score_labels() const {
  throw std::logic_error("this classifier does not produce scores");
}

// ---------------------------------------------------------------------------
// Step1D

Step1D::Step1D(std::vector<double> breakpoints, std::vector<int> values)
    : breakpoints_(std::move(breakpoints)), values_(std::move(values)) {
  if (values_.size() != breakpoints_.size() + 1)
    throw std::invalid_argument("Step1D: need one more value than breakpoints");
  if (!std::is_sorted(breakpoints_.begin(), breakpoints_.end()))
    throw std::invalid_argument("Step1D: breakpoints must be sorted");
}

int Step1D::at(double x) const {
  const auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x);
  return values_[static_cast<std::size_t>(it - breakpoints_.begin())];
}

int Step1D::predict(std::span<const double> x) const {
  if (x.size() != 1) throw std::invalid_argument("Step1D: 1-D inputs only");
  return at(x[0]);
}

Step1D step_classifier(const std::string& which) {
  if (which == "f1") return Step1D({1.0}, {-1, 1});
  if (which == "f2") return Step1D({-4.0, 0.0}, {1, -1, 1});
  if (which == "f3") return Step1D({0.0}, {-1, 1});
  throw std::invalid_argument("unknown step classifier '" + which + "' (expected f1, f2, f3)");
}

// ---------------------------------------------------------------------------
// Nearest neighbor

NnPrediction predict_1nn(std::span<const double> x, const LabeledDataset& data, Metric metric,
                         double abs_tol) {
  if (data.size() == 0) throw std::invalid_argument("predict_1nn: empty dataset");
  NnPrediction out;
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_i = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double d = distance(metric, x, data.point(i));
    if (d < best) {
      best = d;
      best_i = i;
    }
  }
  out.dist = best;
  out.index = best_i;
  out.label = data.labels[best_i];
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (distance(metric, x, data.point(i)) <= best + abs_tol)
      out.tied_labels.push_back(data.labels[i]);
  }
  std::sort(out.tied_labels.begin(), out.tied_labels.end());
  out.tied_labels.erase(std::unique(out.tied_labels.begin(), out.tied_labels.end()),
                        out.tied_labels.end());
  out.tie = out.tied_labels.size() > 1;
  return out;
}

NearestNeighborClassifier::NearestNeighborClassifier(const LabeledDataset& data, Metric metric)
    : data_(&data), metric_(metric) {
  if (data.size() == 0) throw std::invalid_argument("NearestNeighborClassifier: empty dataset");
}

int NearestNeighborClassifier::predict(std::span<const double> x) const {
  // Deterministic (distance, index) ordering; exact ties go to the smaller index.
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_i = 0;
  for (std::size_t i = 0; i < data_->size(); ++i) {
    const double d = distance(metric_, x, data_->point(i));
    if (d < best) {
      best = d;
      best_i = i;
    }
  }
  return data_->labels[best_i];
}

// ---------------------------------------------------------------------------
// Gradual scores

GradualKernel kernel_from_string(const std::string& s) {
  if (s == "inverse" || s == "1/d") return GradualKernel::INVERSE;
  if (s == "inverse-square" || s == "1/d2") return GradualKernel::INVERSE_SQUARE;
  if (s == "inverse-log" || s == "1/log") return GradualKernel::INVERSE_LOG;
  throw std::invalid_argument("unknown gradual kernel '" + s + "'");
}

GradualScores gradual_scores(std::span<const double> x, const LabeledDataset& data, Metric metric,
                             GradualKernel kernel) {
  GradualScores out;
  out.labels = data.distinct_labels();
  const std::size_t k = out.labels.size();
  if (k == 0) throw std::invalid_argument("gradual_scores: empty dataset");
  out.nearest_dists.assign(k, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto it = std::lower_bound(out.labels.begin(), out.labels.end(), data.labels[i]);
    const std::size_t c = static_cast<std::size_t>(it - out.labels.begin());
    out.nearest_dists[c] =
        std::min(out.nearest_dists[c], distance(metric, x, data.point(i)));
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (!std::isfinite(out.nearest_dists[c]))
      throw std::invalid_argument("gradual_scores: a class has no dataset points");
  }

  std::size_t zeros = 0, zero_at = 0;
  double dmin = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < k; ++c) {
    if (out.nearest_dists[c] == 0.0) {
      ++zeros;
      zero_at = c;
    }
    dmin = std::min(dmin, out.nearest_dists[c]);
  }
  if (zeros >= 2)
    throw std::runtime_error(
        "gradual_scores: exclusive-class violation, two classes at distance zero");
  out.scores.assign(k, 0.0);
  if (zeros == 1) {
    out.scores[zero_at] = 1.0;
    return out;
  }
  // Normalize through ratios against the smallest distance so huge kernel values
  // cannot overflow.
  std::vector<double> w(k);
  for (std::size_t c = 0; c < k; ++c) {
    const double d = out.nearest_dists[c];
    switch (kernel) {
      case GradualKernel::INVERSE: w[c] = dmin / d; break;
      case GradualKernel::INVERSE_SQUARE: w[c] = (dmin / d) * (dmin / d); break;
      case GradualKernel::INVERSE_LOG: w[c] = std::log1p(dmin) / std::log1p(d); break;
    }
  }
  double sum = 0.0;
  for (double v : w) sum += v;
  for (std::size_t c = 0; c < k; ++c) out.scores[c] = w[c] / sum;
  return out;
}

namespace {

int argmax_label(const std::vector<int>& labels, const std::vector<double>& scores) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return labels[best];
}

}  // namespace

GradualClassifier::GradualClassifier(const LabeledDataset& data, Metric metric,
                                     GradualKernel kernel)
    : data_(&data), metric_(metric), kernel_(kernel), labels_(data.distinct_labels()) {
  if (labels_.empty()) throw std::invalid_argument("GradualClassifier: empty dataset");
}

std::vector<double> GradualClassifier::scores(std::span<const double> x) const {
  return gradual_scores(x, *data_, metric_, kernel_).scores;
}

int GradualClassifier::predict(std::span<const double> x) const {
  return argmax_label(labels_, scores(x));
}

// ---------------------------------------------------------------------------
// Open-set extension

OpenSetScores open_set_scores(const GradualScores& g, double alpha, OpenSetVariant variant) {
  const std::size_t k = g.labels.size();
  if (k == 0) throw std::invalid_argument("open_set_scores: no classes");
  if (variant == OpenSetVariant::ENTROPY) {
    if (alpha < 0.0 || alpha > 1.0)
      throw std::invalid_argument("open_set_scores: ENTROPY needs 0 <= alpha <= 1");
  } else {
    if (alpha < 0.0 || alpha > static_cast<double>(k))
      throw std::invalid_argument("open_set_scores: GEOMETRIC_MEAN needs 0 <= alpha <= #classes");
  }

  double unknown = 0.0;
  if (variant == OpenSetVariant::ENTROPY) {
    if (k > 1) {
      double h = 0.0;
      for (double s : g.scores) {
        if (s > 0.0) h -= s * std::log2(s);
      }
      unknown = alpha * (h / std::log2(static_cast<double>(k)));
    }
  } else {
    bool any_zero = false;
    double mean_log = 0.0;
    for (double s : g.scores) {
      if (s == 0.0) {
        any_zero = true;
        break;
      }
      mean_log += std::log(s);
    }
    unknown = any_zero ? 0.0 : alpha * std::exp(mean_log / static_cast<double>(k));
  }
  unknown = std::clamp(unknown, 0.0, 1.0);

  OpenSetScores out;
  out.labels = g.labels;
  out.labels.push_back(kUnknownLabel);
  out.scores.resize(k + 1);
  for (std::size_t c = 0; c < k; ++c) out.scores[c] = (1.0 - unknown) * g.scores[c];
  out.scores[k] = unknown;
  out.unknown = unknown;
  return out;
}

OpenSetClassifier::OpenSetClassifier(const LabeledDataset& data, Metric metric, double alpha,
                                     OpenSetVariant variant, GradualKernel kernel)
    : base_(data, metric, kernel), alpha_(alpha), variant_(variant) {
  labels_ = base_.score_labels();
  labels_.push_back(kUnknownLabel);
  // Validate alpha eagerly.
  GradualScores probe;
  probe.labels = base_.score_labels();
  probe.scores.assign(probe.labels.size(), 1.0 / static_cast<double>(probe.labels.size()));
  open_set_scores(probe, alpha, variant);
}

std::vector<double> OpenSetClassifier::scores(std::span<const double> x) const {
  const GradualScores g = gradual_scores(x, base_.data(), base_.metric(), base_.kernel());
  return open_set_scores(g, alpha_, variant_).scores;
}

int OpenSetClassifier::predict(std::span<const double> x) const {
  return argmax_label(labels_, scores(x));
}

// ---------------------------------------------------------------------------
// Noisy ensemble

NoisyEnsembleClassifier::NoisyEnsembleClassifier(const LabeledDataset& data, Metric metric,
                                                 EnsembleConfig cfg)
    : data_(&data), metric_(metric), cfg_(cfg), labels_(data.distinct_labels()) {
  if (cfg_.members < 1) throw std::invalid_argument("ensemble: members must be >= 1");
  if (cfg_.sigma < 0.0) throw std::invalid_argument("ensemble: sigma must be >= 0");
  if (labels_.empty()) throw std::invalid_argument("ensemble: empty dataset");
  if (cfg_.sigma == 0.0) return;  // base classifier, no member state needed

  const std::size_t n = data.size(), dim = data.dim;
  if (cfg_.members * n * dim > 200'000'000ull)
    throw std::invalid_argument("ensemble: members * points * dim too large to precompute");
  displaced_.resize(cfg_.members);
  if (cfg_.noise_model == NoiseModel::RBF_KERNEL_WEIGHTING) point_weights_.resize(cfg_.members);
  for (std::size_t m = 0; m < cfg_.members; ++m) {
    std::seed_seq seq{static_cast<std::uint32_t>(cfg_.seed), static_cast<std::uint32_t>(cfg_.seed >> 32),
                      static_cast<std::uint32_t>(m), static_cast<std::uint32_t>(m >> 32)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> gauss(0.0, cfg_.sigma);
    auto& pts = displaced_[m];
    pts.resize(n * dim);
    std::vector<double> sq;
    if (cfg_.noise_model == NoiseModel::RBF_KERNEL_WEIGHTING) sq.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < dim; ++k) {
        const double eta = gauss(rng);
        pts[i * dim + k] = data.points[i * dim + k] + eta;
        if (!sq.empty()) sq[i] += eta * eta;
      }
    }
    if (!sq.empty()) {
      auto& w = point_weights_[m];
      w.resize(n);
      const double inv = 1.0 / (2.0 * cfg_.sigma * cfg_.sigma);
      for (std::size_t i = 0; i < n; ++i) w[i] = std::exp(-sq[i] * inv);
    }
  }
}

std::vector<double> NoisyEnsembleClassifier::member_scores(std::size_t m,
                                                           std::span<const double> x) const {
  const std::size_t n = data_->size(), dim = data_->dim, k = labels_.size();
  std::vector<double> out(k, 0.0);
  const double* pts = displaced_[m].data();
  const double* w = point_weights_.empty() ? nullptr : point_weights_[m].data();

  auto label_slot = [&](int lab) {
    return static_cast<std::size_t>(
        std::lower_bound(labels_.begin(), labels_.end(), lab) - labels_.begin());
  };

  if (cfg_.vote == EnsembleVote::HARD) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      double d = distance(metric_, x, std::span<const double>(pts + i * dim, dim));
      if (w) d /= w[i];
      if (d < best) best = d;
    }
    std::vector<std::size_t> tied;
    for (std::size_t i = 0; i < n; ++i) {
      double d = distance(metric_, x, std::span<const double>(pts + i * dim, dim));
      if (w) d /= w[i];
      if (d == best) tied.push_back(i);
    }
    std::vector<int> tied_labels;
    for (std::size_t i : tied) tied_labels.push_back(data_->labels[i]);
    std::sort(tied_labels.begin(), tied_labels.end());
    tied_labels.erase(std::unique(tied_labels.begin(), tied_labels.end()), tied_labels.end());
    const double share = 1.0 / static_cast<double>(tied_labels.size());
    for (int lab : tied_labels) out[label_slot(lab)] += share;
    return out;
  }

  // Gradual vote: per-class nearest (weighted) distances through the same kernel scores.
  std::vector<double> dists(k, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < n; ++i) {
    double d = distance(metric_, x, std::span<const double>(pts + i * dim, dim));
    if (w) d /= w[i];
    const std::size_t c = label_slot(data_->labels[i]);
    dists[c] = std::min(dists[c], d);
  }
  std::size_t zeros = 0;
  double dmin = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < k; ++c) {
    if (dists[c] == 0.0) ++zeros;
    dmin = std::min(dmin, dists[c]);
  }
  if (zeros >= 1) {
    // Zero distance pins the member's vote; two zero classes split it.
    const double share = 1.0 / static_cast<double>(zeros);
    for (std::size_t c = 0; c < k; ++c)
      if (dists[c] == 0.0) out[c] = share;
    return out;
  }
  std::vector<double> kw(k);
  for (std::size_t c = 0; c < k; ++c) {
    switch (cfg_.kernel) {
      case GradualKernel::INVERSE: kw[c] = dmin / dists[c]; break;
      case GradualKernel::INVERSE_SQUARE: kw[c] = (dmin / dists[c]) * (dmin / dists[c]); break;
      case GradualKernel::INVERSE_LOG: kw[c] = std::log1p(dmin) / std::log1p(dists[c]); break;
    }
  }
  double sum = 0.0;
  for (double v : kw) sum += v;
  for (std::size_t c = 0; c < k; ++c) out[c] = kw[c] / sum;
  return out;
}

std::vector<double> NoisyEnsembleClassifier::scores(std::span<const double> x) const {
  const std::size_t k = labels_.size();
  if (cfg_.sigma == 0.0) {
    if (cfg_.vote == EnsembleVote::GRADUAL)
      return gradual_scores(x, *data_, metric_, cfg_.kernel).scores;
    const auto pred = predict_1nn(x, *data_, metric_, 0.0);
    std::vector<double> out(k, 0.0);
    const double share = 1.0 / static_cast<double>(pred.tied_labels.size());
    for (int lab : pred.tied_labels) {
      const auto it = std::lower_bound(labels_.begin(), labels_.end(), lab);
      out[static_cast<std::size_t>(it - labels_.begin())] = share;
    }
    return out;
  }

  std::vector<double> acc(k, 0.0);
  std::vector<std::vector<double>> slots(cfg_.members);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (long long m = 0; m < static_cast<long long>(cfg_.members); ++m) {
    slots[static_cast<std::size_t>(m)] = member_scores(static_cast<std::size_t>(m), x);
  }
  for (std::size_t m = 0; m < cfg_.members; ++m) {
    for (std::size_t c = 0; c < k; ++c) acc[c] += slots[m][c];
  }
  const double inv = 1.0 / static_cast<double>(cfg_.members);
  for (double& v : acc) v *= inv;
  return acc;
}

int NoisyEnsembleClassifier::predict(std::span<const double> x) const {
  // sigma = 0 must reproduce the base classifier exactly, including its tie rule.
  if (cfg_.sigma == 0.0 && cfg_.vote == EnsembleVote::HARD)
    return predict_1nn(x, *data_, metric_, 0.0).label;
  return argmax_label(labels_, scores(x));
}

LabeledDataset make_ensemble_demo_dataset() {
  LabeledDataset d;
  d.dim = 2;
  const double pts[] = {1, 1, 2, -1, 2, -2, -1, -1, -2, 1,   // class 0
                        2, 1, 1, -1, 0, 0};                  // class 1
  d.points.assign(pts, pts + 16);
  d.labels = {0, 0, 0, 0, 0, 1, 1, 1};
  d.conflicts = find_label_conflicts(d);
  return d;
}

}  // namespace genacc
