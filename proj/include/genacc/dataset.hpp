#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace genacc {

// Closed interval [lo, hi] as closure; the sampling set is [lo, hi).
struct Interval1D {
  double lo = 0.0;
  double hi = 0.0;
  int label = 0;
};

struct NearestClosure1D {
  double dist = 0.0;
  int multiplicity = 1;  // number of distinct nearest closure points
  double attainer = 0.0; // one nearest closure point
};

// Union of disjoint labeled intervals on the real line, kept sorted by lo.
struct Region1D {
  std::vector<Interval1D> parts;

  double total_length() const;
  double lo() const;
  double hi() const;
  double extent() const { return hi() - lo(); }

  bool in_closure(double x) const;
  bool in_sample_set(double x) const;   // half-open parts
  int label_at(double x) const;         // label of the closure interval containing x; throws if none

  double closure_distance(double x) const;
  NearestClosure1D nearest(double x) const;
  std::vector<double> vb_points() const;  // gap midpoints (points with two nearest closure points)
  bool on_vb(double x, double abs_tol) const;
  // Inside the open eps-neighborhood of the closure and off the boundary set.
  bool in_x_eps(double x, double eps, double abs_tol) const;
};

// Geometry of the two-class circle/line benchmark, kept for provenance and demos.
struct SunsetSpec {
  double cx = 0.0, cy = 1.0, radius = 1.0;
  double line_y = 0.0;
  double half_width = 3.0;
};

struct ConflictPair {
  std::size_t i = 0, j = 0;
};

// Identical points carrying different labels (exclusive-class violations).
struct ConflictReport {
  std::size_t count = 0;
  std::vector<ConflictPair> examples;  // up to a handful of representative pairs
};

struct LabeledDataset {
  std::size_t dim = 0;
  std::vector<double> points;  // row-major, size == n*dim
  std::vector<int> labels;
  // Original byte payload for u8-sourced data (IDX / CIFAR-10). Distance code can
  // run on the integer values and scale once at the end, which keeps k/255-valued
  // results exact in double arithmetic.
  std::vector<std::uint8_t> raw;
  bool scaled = false;  // points == raw / 255
  std::optional<Region1D> region;
  std::optional<SunsetSpec> sunset;
  ConflictReport conflicts;

  std::size_t size() const { return labels.size(); }
  std::span<const double> point(std::size_t i) const {
    return std::span<const double>(points.data() + i * dim, dim);
  }
  std::vector<int> distinct_labels() const;
  std::size_t num_classes() const { return distinct_labels().size(); }
  // L2 norm of the bounding-box diagonal (cheap stand-in for the diameter).
  double extent() const;
};

ConflictReport find_label_conflicts(const LabeledDataset& data, std::size_t max_examples = 8);
std::uint64_t dataset_hash(const LabeledDataset& data);

// Two labeled intervals on the line: class -1 on [-2,-1), class 1 on [1,2).
Region1D make_toy_region();
LabeledDataset make_toy_1d();

// Uniform draw from a region (by length); labels follow the intervals.
LabeledDataset sample_region(const Region1D& region, std::size_t n, std::uint64_t seed);

// Class 0 on the circle x^2 + (y-1)^2 = 1, class 1 on the segment y = 0, |x| <= half_width.
// Evenly spaced by default; seeded uniform placement otherwise.
LabeledDataset make_sunset(std::size_t n_per_class, std::uint64_t seed = 0,
                           bool evenly_spaced = true, double half_width = 3.0);

LabeledDataset load_idx(const std::string& images_path, const std::string& labels_path,
                        bool scale_to_unit = true);
LabeledDataset load_cifar10(const std::vector<std::string>& bin_paths, bool scale_to_unit = true);

void save_csv(const LabeledDataset& data, const std::string& path);
LabeledDataset load_csv(const std::string& path);

}  // namespace genacc
