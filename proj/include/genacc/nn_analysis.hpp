#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "genacc/dataset.hpp"
#include "genacc/metric.hpp"

namespace genacc {

enum class EngineKind { NAIVE, BLOCKED };
enum class LooMode { STRICT, OPTIMISTIC };

EngineKind engine_from_string(const std::string& s);

// Per-sample nearest-neighbor distances, in the dataset's final (scaled) units.
struct AnalysisRow {
  double d_diff = 0.0;      // distance to the nearest sample of a different class
  double d_same_min = 0.0;  // distance to the nearest other sample of the same class
  double d_same_max = 0.0;  // distance to the farthest sample of the same class
};

// Fraction of the distance budget between a sample's class and the opposition:
// how far toward the nearest different-class sample one can move before leaving
// the sample's side, measured against the nearest (or farthest) same-class peer.
double ratio_min(const AnalysisRow& r);
double ratio_max(const AnalysisRow& r);

struct Histogram {
  std::vector<double> edges;    // bins+1 ascending edges
  std::vector<double> density;  // per-bin count / (n * width)
};

Histogram make_histogram(const std::vector<double>& values, int bins);

struct AnalysisReport {
  Metric metric = Metric::L2;
  EngineKind engine = EngineKind::BLOCKED;
  bool raw_integer_path = false;
  std::vector<AnalysisRow> rows;

  double min_d_diff = 0.0;
  double mean_d_diff = 0.0;
  double max_d_diff = 0.0;

  double loo_strict = 0.0;      // leave-one-out 1-NN accuracy, ties incorrect
  double loo_optimistic = 0.0;  // leave-one-out 1-NN accuracy, ties correct

  // Mean of -log2(ratio) over rows with a positive finite ratio.
  double mean_neglog2_ratio_min = 0.0;
  double mean_neglog2_ratio_max = 0.0;
  std::size_t excluded_ratio_min = 0;  // rows dropped from the ratio_min average
  std::size_t excluded_ratio_max = 0;

  Histogram hist_d_diff;
  Histogram hist_ratio_min;
};

struct AnalysisOptions {
  Metric metric = Metric::L2;
  EngineKind engine = EngineKind::BLOCKED;
  bool use_raw = true;  // run on raw integer-valued pixels when the dataset has them
  int hist_bins = 50;
  std::size_t tile = 256;
  std::string checkpoint_path;  // empty: no checkpointing (BLOCKED engine only)
  std::function<void(std::size_t rows_done, std::size_t rows_total)> progress;
};

// Computes per-sample nearest-neighbor distances for every sample against the
// rest of the dataset, plus the derived leave-one-out and ratio summaries.
// When the dataset carries raw integer pixel values (and use_raw is set), all
// distance arithmetic runs on those integers, where L1/LINF distances and
// squared L2 distances are exact, and results are scaled once at the end.
AnalysisReport analyze_dataset(const LabeledDataset& data, const AnalysisOptions& opts);

}  // namespace genacc
