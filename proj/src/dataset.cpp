#include "genacc/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace genacc {

// ---------------------------------------------------------------------------
// Region1D

double Region1D::total_length() const {
  double s = 0.0;
  for (const auto& p : parts) s += p.hi - p.lo;
  return s;
}

double Region1D::lo() const { return parts.empty() ? 0.0 : parts.front().lo; }
double Region1D::hi() const { return parts.empty() ? 0.0 : parts.back().hi; }

bool Region1D::in_closure(double x) const {
  for (const auto& p : parts)
    if (x >= p.lo && x <= p.hi) return true;
  return false;
}

bool Region1D::in_sample_set(double x) const {
  for (const auto& p : parts)
    if (x >= p.lo && x < p.hi) return true;
  return false;
}

int Region1D::label_at(double x) const {
  for (const auto& p : parts)
    if (x >= p.lo && x <= p.hi) return p.label;
  throw std::invalid_argument("label_at: point is outside the closure");
}

double Region1D::closure_distance(double x) const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : parts) {
    const double d = (x < p.lo) ? p.lo - x : (x > p.hi ? x - p.hi : 0.0);
    best = std::min(best, d);
  }
  return best;
}

NearestClosure1D Region1D::nearest(double x) const {
  if (parts.empty()) throw std::invalid_argument("nearest: empty region");
  NearestClosure1D out;
  out.dist = std::numeric_limits<double>::infinity();
  out.multiplicity = 0;
  for (const auto& p : parts) {
    double d, at;
    if (x < p.lo) {
      d = p.lo - x;
      at = p.lo;
    } else if (x > p.hi) {
      d = x - p.hi;
      at = p.hi;
    } else {
      d = 0.0;
      at = x;
    }
    if (d < out.dist) {
      out.dist = d;
      out.attainer = at;
      out.multiplicity = 1;
    } else if (d == out.dist && at != out.attainer) {
      out.multiplicity += 1;
    }
  }
  return out;
}

std::vector<double> Region1D::vb_points() const {
  std::vector<double> vb;
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    vb.push_back(0.5 * (parts[i].hi + parts[i + 1].lo));
  }
  return vb;
}

bool Region1D::on_vb(double x, double abs_tol) const {
  for (double m : vb_points())
    if (std::abs(x - m) <= abs_tol) return true;
  return false;
}

bool Region1D::in_x_eps(double x, double eps, double abs_tol) const {
  if (on_vb(x, abs_tol)) return false;
  return closure_distance(x) < eps;
}

// ---------------------------------------------------------------------------
// LabeledDataset

std::vector<int> LabeledDataset::distinct_labels() const {
  std::set<int> s(labels.begin(), labels.end());
  if (region) {
    for (const auto& p : region->parts) s.insert(p.label);
  }
  return std::vector<int>(s.begin(), s.end());
}

double LabeledDataset::extent() const {
  if (region) return region->extent();
  if (size() == 0 || dim == 0) return 0.0;
  double sq = 0.0;
  for (std::size_t k = 0; k < dim; ++k) {
    double lo = points[k], hi = points[k];
    for (std::size_t i = 1; i < size(); ++i) {
      lo = std::min(lo, points[i * dim + k]);
      hi = std::max(hi, points[i * dim + k]);
    }
    sq += (hi - lo) * (hi - lo);
  }
  return std::sqrt(sq);
}

ConflictReport find_label_conflicts(const LabeledDataset& data, std::size_t max_examples) {
  ConflictReport rep;
  if (data.size() == 0) return rep;
  struct Slot {
    std::size_t first_index;
    int label;
  };
  std::unordered_map<std::string, Slot> seen;
  seen.reserve(data.size());
  std::string key;
  for (std::size_t i = 0; i < data.size(); ++i) {
    key.assign(reinterpret_cast<const char*>(data.points.data() + i * data.dim),
               data.dim * sizeof(double));
    auto it = seen.find(key);
    if (it == seen.end()) {
      seen.emplace(std::move(key), Slot{i, data.labels[i]});
    } else if (it->second.label != data.labels[i]) {
      rep.count += 1;
      if (rep.examples.size() < max_examples)
        rep.examples.push_back({it->second.first_index, i});
    }
  }
  return rep;
}

std::uint64_t dataset_hash(const LabeledDataset& data) {
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a
  auto mix = [&h](const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ull;
    }
  };
  const std::uint64_t dim64 = data.dim;
  mix(&dim64, sizeof dim64);
  mix(data.points.data(), data.points.size() * sizeof(double));
  mix(data.labels.data(), data.labels.size() * sizeof(int));
  return h;
}

// ---------------------------------------------------------------------------
// Synthetic datasets

Region1D make_toy_region() {
  Region1D r;
  r.parts = {{-2.0, -1.0, -1}, {1.0, 2.0, 1}};
  return r;
}

LabeledDataset make_toy_1d() {
  LabeledDataset d;
  d.dim = 1;
  d.region = make_toy_region();
  return d;
}

LabeledDataset sample_region(const Region1D& region, std::size_t n, std::uint64_t seed) {
  LabeledDataset d;
  d.dim = 1;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double total = region.total_length();
  for (std::size_t i = 0; i < n; ++i) {
    double t = unit(rng) * total;
    for (const auto& p : region.parts) {
      const double len = p.hi - p.lo;
      if (t < len || &p == &region.parts.back()) {
        d.points.push_back(std::min(p.lo + t, p.hi));
        d.labels.push_back(p.label);
        break;
      }
      t -= len;
    }
  }
  return d;
}

LabeledDataset make_sunset(std::size_t n_per_class, std::uint64_t seed, bool evenly_spaced,
                           double half_width) {
  if (n_per_class < 1) throw std::invalid_argument("make_sunset: n_per_class must be >= 1");
  LabeledDataset d;
  d.dim = 2;
  d.sunset = SunsetSpec{0.0, 1.0, 1.0, 0.0, half_width};
  const std::size_t n = n_per_class;
  d.points.reserve(4 * n);
  d.labels.reserve(2 * n);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const double two_pi = 2.0 * std::acos(-1.0);
  for (std::size_t k = 0; k < n; ++k) {
    double x, y;
    if (evenly_spaced) {
      // Snap the four cardinal angles so (0,2), (0,0), (1,1), (-1,1) come out exact.
      if ((4 * k) % n == 0 && (4 * k) / n < 4) {
        switch ((4 * k) / n) {
          case 0: x = 1.0; y = 1.0; break;
          case 1: x = 0.0; y = 2.0; break;
          case 2: x = -1.0; y = 1.0; break;
          default: x = 0.0; y = 0.0; break;
        }
      } else {
        const double th = two_pi * static_cast<double>(k) / static_cast<double>(n);
        x = std::cos(th);
        y = 1.0 + std::sin(th);
      }
    } else {
      const double th = two_pi * unit(rng);
      x = std::cos(th);
      y = 1.0 + std::sin(th);
    }
    d.points.push_back(x);
    d.points.push_back(y);
    d.labels.push_back(0);
  }
  for (std::size_t k = 0; k < n; ++k) {
    double x;
    if (evenly_spaced) {
      x = (n == 1) ? 0.0
                   : -half_width + 2.0 * half_width * static_cast<double>(k) /
                                       static_cast<double>(n - 1);
    } else {
      x = -half_width + 2.0 * half_width * unit(rng);
    }
    d.points.push_back(x);
    d.points.push_back(0.0);
    d.labels.push_back(1);
  }
  d.conflicts = find_label_conflicts(d);
  return d;
}

// ---------------------------------------------------------------------------
// IDX (big-endian) loader

namespace {

std::vector<unsigned char> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  return bytes;
}

std::uint32_t be32(const std::vector<unsigned char>& b, std::size_t off) {
  return (std::uint32_t(b[off]) << 24) | (std::uint32_t(b[off + 1]) << 16) |
         (std::uint32_t(b[off + 2]) << 8) | std::uint32_t(b[off + 3]);
}

}  // namespace

LabeledDataset load_idx(const std::string& images_path, const std::string& labels_path,
                        bool scale_to_unit) {
  const auto img = read_file(images_path);
  const auto lab = read_file(labels_path);
  if (img.size() < 16) throw std::runtime_error("truncated IDX header: " + images_path);
  if (lab.size() < 8) throw std::runtime_error("truncated IDX header: " + labels_path);

  const std::uint32_t img_magic = be32(img, 0);
  const std::uint32_t lab_magic = be32(lab, 0);
  char buf[64];
  if (img_magic != 0x00000803u) {
    std::snprintf(buf, sizeof buf, "unsupported IDX type (magic 0x%08x)", img_magic);
    throw std::runtime_error(std::string(buf) + " in " + images_path);
  }
  if (lab_magic != 0x00000801u) {
    std::snprintf(buf, sizeof buf, "unsupported IDX type (magic 0x%08x)", lab_magic);
    throw std::runtime_error(std::string(buf) + " in " + labels_path);
  }

  const std::uint32_t n = be32(img, 4);
  const std::uint32_t rows = be32(img, 8);
  const std::uint32_t cols = be32(img, 12);
  const std::uint32_t n_lab = be32(lab, 4);
  if (n != n_lab) {
    throw std::runtime_error("IDX image/label count mismatch (" + std::to_string(n) + " vs " +
                             std::to_string(n_lab) + ")");
  }
  const std::size_t want_img = 16 + std::size_t(n) * rows * cols;
  const std::size_t want_lab = 8 + std::size_t(n);
  if (img.size() < want_img) throw std::runtime_error("truncated IDX payload: " + images_path);
  if (lab.size() < want_lab) throw std::runtime_error("truncated IDX payload: " + labels_path);
  if (img.size() > want_img)
    throw std::runtime_error("unexpected trailing bytes in IDX file: " + images_path);
  if (lab.size() > want_lab)
    throw std::runtime_error("unexpected trailing bytes in IDX file: " + labels_path);

  LabeledDataset d;
  d.dim = std::size_t(rows) * cols;
  d.scaled = scale_to_unit;
  d.raw.assign(img.begin() + 16, img.end());
  d.points.resize(d.raw.size());
  const double scale = scale_to_unit ? 1.0 / 255.0 : 1.0;
  for (std::size_t i = 0; i < d.raw.size(); ++i)
    d.points[i] = static_cast<double>(d.raw[i]) * scale;
  d.labels.resize(n);
  for (std::uint32_t i = 0; i < n; ++i) d.labels[i] = lab[8 + i];
  d.conflicts = find_label_conflicts(d);
  return d;
}

LabeledDataset load_cifar10(const std::vector<std::string>& bin_paths, bool scale_to_unit) {
  constexpr std::size_t kRecord = 3073;  // 1 label byte + 32*32*3 pixels
  LabeledDataset d;
  d.dim = 3072;
  d.scaled = scale_to_unit;
  const double scale = scale_to_unit ? 1.0 / 255.0 : 1.0;
  for (const auto& path : bin_paths) {
    const auto bytes = read_file(path);
    if (bytes.empty()) {
      std::cerr << "warning: empty CIFAR-10 file: " << path << "\n";
      continue;
    }
    if (bytes.size() % kRecord != 0) {
      throw std::runtime_error("CIFAR-10 file length is not a multiple of 3073: " + path);
    }
    const std::size_t n = bytes.size() / kRecord;
    for (std::size_t r = 0; r < n; ++r) {
      const unsigned char* rec = bytes.data() + r * kRecord;
      if (rec[0] > 9) {
        throw std::runtime_error("CIFAR-10 label byte out of range (" + std::to_string(rec[0]) +
                                 ") in " + path);
      }
      d.labels.push_back(rec[0]);
      d.raw.insert(d.raw.end(), rec + 1, rec + kRecord);
    }
  }
  d.points.resize(d.raw.size());
  for (std::size_t i = 0; i < d.raw.size(); ++i)
    d.points[i] = static_cast<double>(d.raw[i]) * scale;
  d.conflicts = find_label_conflicts(d);
  return d;
}

// ---------------------------------------------------------------------------
// CSV

void save_csv(const LabeledDataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open file for writing: " + path);
  for (std::size_t k = 0; k < data.dim; ++k) out << "x" << k << ",";
  out << "label\n";
  char buf[40];
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t k = 0; k < data.dim; ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", data.points[i * data.dim + k]);
      out << buf << ",";
    }
    out << data.labels[i] << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

LabeledDataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty CSV file: " + path);
  std::size_t dim = 0;
  {
    std::stringstream header(line);
    std::string col;
    std::vector<std::string> cols;
    while (std::getline(header, col, ',')) cols.push_back(col);
    if (cols.empty() || cols.back() != "label")
      throw std::runtime_error("CSV header must end with 'label': " + path);
    dim = cols.size() - 1;
  }
  LabeledDataset d;
  d.dim = dim;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const char* p = line.c_str();
    char* end = nullptr;
    for (std::size_t k = 0; k < dim; ++k) {
      d.points.push_back(std::strtod(p, &end));
      if (end == p || *end != ',')
        throw std::runtime_error("CSV parse error at " + path + ":" + std::to_string(lineno));
      p = end + 1;
    }
    d.labels.push_back(static_cast<int>(std::strtol(p, &end, 10)));
    if (end == p)
      throw std::runtime_error("CSV parse error at " + path + ":" + std::to_string(lineno));
  }
  d.conflicts = find_label_conflicts(d);
  return d;
}

}  // namespace genacc
