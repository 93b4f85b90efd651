#include "genacc/nn_analysis.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace genacc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Pair distance in the working value domain; L2 is kept squared until the end
// so that integer-valued inputs stay exact.
double pair_value(Metric m, const double* a, const double* b, std::size_t dim) {
  switch (m) {
    case Metric::L1: {
      double s = 0.0;
      for (std::size_t k = 0; k < dim; ++k) s += std::abs(a[k] - b[k]);
      return s;
    }
    case Metric::LINF: {
      double s = 0.0;
      for (std::size_t k = 0; k < dim; ++k) s = std::max(s, std::abs(a[k] - b[k]));
      return s;
    }
    case Metric::L2:
    default: {
      double s = 0.0;
      for (std::size_t k = 0; k < dim; ++k) {
        const double d = a[k] - b[k];
        s += d * d;
      }
      return s;
    }
  }
}

struct Cand {
  double v = kInf;
  std::size_t j = static_cast<std::size_t>(-1);
};

// Tracks the two best candidates per category so a second exact pass can settle
// near-ties introduced by the blocked Gram expansion.
struct RowAcc {
  Cand diff[2];
  Cand smin[2];
  Cand smax[2];

  RowAcc() {
    smax[0].v = -kInf;
    smax[1].v = -kInf;
  }

  static bool better_min(const Cand& a, const Cand& b) {
    return a.v < b.v || (a.v == b.v && a.j < b.j);
  }
  static bool better_max(const Cand& a, const Cand& b) {
    return a.v > b.v || (a.v == b.v && a.j < b.j);
  }

  void add(double v, std::size_t j, bool same) {
    const Cand c{v, j};
    if (same) {
      if (better_min(c, smin[0])) {
        smin[1] = smin[0];
        smin[0] = c;
      } else if (better_min(c, smin[1])) {
        smin[1] = c;
      }
      if (better_max(c, smax[0])) {
        smax[1] = smax[0];
        smax[0] = c;
      } else if (better_max(c, smax[1])) {
        smax[1] = c;
      }
    } else {
      if (better_min(c, diff[0])) {
        diff[1] = diff[0];
        diff[0] = c;
      } else if (better_min(c, diff[1])) {
        diff[1] = c;
      }
    }
  }
};

struct WorkingData {
  std::vector<double> values;  // row-major n*dim, integer-valued on the raw path
  double scale = 1.0;          // final distances = value-domain distances / scale
  bool raw_path = false;
};

WorkingData make_working(const LabeledDataset& data, const AnalysisOptions& opts) {
  WorkingData w;
  const std::size_t n = data.size(), dim = data.dim;
  if (opts.use_raw && data.raw.size() == n * dim) {
    w.values.resize(n * dim);
    for (std::size_t i = 0; i < n * dim; ++i)
      w.values[i] = static_cast<double>(data.raw[i]);
    w.scale = data.scaled ? 255.0 : 1.0;
    w.raw_path = true;
  } else {
    w.values = data.points;
  }
  return w;
}

AnalysisRow finalize_row(const RowAcc& acc, Metric m, double scale) {
  AnalysisRow row;
  auto fin = [&](double v) {
    if (!std::isfinite(v)) return v < 0.0 ? kInf : v;  // -inf means "no same-class peer"
    if (m == Metric::L2) v = std::sqrt(v);
    return v / scale;
  };
  row.d_diff = fin(acc.diff[0].v);
  row.d_same_min = fin(acc.smin[0].v);
  row.d_same_max = fin(acc.smax[0].v);
  return row;
}

// --- checkpointing ---------------------------------------------------------

constexpr std::uint64_t kCheckpointMagic = 0x47414343'4e4e4131ull;  // "GACCNNA1"

std::uint64_t config_hash(const LabeledDataset& data, const AnalysisOptions& opts,
                          bool raw_path) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix64 = [&h](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xff;
      h *= 1099511628211ull;
    }
  };
  mix64(dataset_hash(data));
  mix64(static_cast<std::uint64_t>(opts.metric));
  mix64(raw_path ? 1 : 0);
  mix64(data.size());
  mix64(data.dim);
  mix64(opts.tile);
  return h;
}

std::size_t try_resume(const std::string& path, std::uint64_t hash,
                       std::vector<AnalysisRow>& rows) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return 0;
  std::uint64_t magic = 0, file_hash = 0, done = 0;
  in.read(reinterpret_cast<char*>(&magic), sizeof magic);
  in.read(reinterpret_cast<char*>(&file_hash), sizeof file_hash);
  in.read(reinterpret_cast<char*>(&done), sizeof done);
  if (!in || magic != kCheckpointMagic || file_hash != hash || done > rows.size()) return 0;
  in.read(reinterpret_cast<char*>(rows.data()),
          static_cast<std::streamsize>(done * sizeof(AnalysisRow)));
  if (!in) return 0;
  return static_cast<std::size_t>(done);
}

void write_checkpoint(const std::string& path, std::uint64_t hash, std::size_t done,
                      const std::vector<AnalysisRow>& rows) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write checkpoint file: " + tmp);
    const std::uint64_t magic = kCheckpointMagic, done64 = done;
    out.write(reinterpret_cast<const char*>(&magic), sizeof magic);
    out.write(reinterpret_cast<const char*>(&hash), sizeof hash);
    out.write(reinterpret_cast<const char*>(&done64), sizeof done64);
    out.write(reinterpret_cast<const char*>(rows.data()),
              static_cast<std::streamsize>(done * sizeof(AnalysisRow)));
    if (!out) throw std::runtime_error("checkpoint write failed: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("cannot move checkpoint into place: " + path);
}

// --- engines ----------------------------------------------------------------

void run_naive(const LabeledDataset& data, const WorkingData& w, Metric m,
               std::vector<AnalysisRow>& rows) {
  const std::size_t n = data.size(), dim = data.dim;
  std::vector<RowAcc> acc(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* a = w.values.data() + i * dim;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = pair_value(m, a, w.values.data() + j * dim, dim);
      const bool same = data.labels[i] == data.labels[j];
      acc[i].add(v, j, same);
      acc[j].add(v, i, same);
    }
  }
  for (std::size_t i = 0; i < n; ++i) rows[i] = finalize_row(acc[i], m, w.scale);
}

void run_blocked(const LabeledDataset& data, const WorkingData& w, const AnalysisOptions& opts,
                 std::vector<AnalysisRow>& rows) {
  const std::size_t n = data.size(), dim = data.dim;
  const Metric m = opts.metric;
  const std::size_t T = std::max<std::size_t>(8, opts.tile);
  const std::uint64_t hash = config_hash(data, opts, w.raw_path);

  std::size_t start_row = 0;
  if (!opts.checkpoint_path.empty()) {
    start_row = try_resume(opts.checkpoint_path, hash, rows);
    start_row -= start_row % T;  // resume on a tile boundary
  }

  using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const Mat> V(w.values.data(), static_cast<Eigen::Index>(n),
                          static_cast<Eigen::Index>(dim));
  std::vector<double> sq;
  if (m == Metric::L2) {
    sq.resize(n);
    for (std::size_t i = 0; i < n; ++i)
      sq[i] = V.row(static_cast<Eigen::Index>(i)).squaredNorm();
  }

  std::vector<RowAcc> acc;
  Mat G;
  for (std::size_t r0 = start_row; r0 < n; r0 += T) {
    const std::size_t rt = std::min(T, n - r0);
    acc.assign(rt, RowAcc{});
    for (std::size_t c0 = 0; c0 < n; c0 += T) {
      const std::size_t ct = std::min(T, n - c0);
      if (m == Metric::L2) {
        G.noalias() = V.middleRows(static_cast<Eigen::Index>(r0), static_cast<Eigen::Index>(rt)) *
                      V.middleRows(static_cast<Eigen::Index>(c0), static_cast<Eigen::Index>(ct))
                          .transpose();
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
        for (long long li = 0; li < static_cast<long long>(rt); ++li) {
          const std::size_t i = r0 + static_cast<std::size_t>(li);
          for (std::size_t lj = 0; lj < ct; ++lj) {
            const std::size_t j = c0 + lj;
            if (j == i) continue;
            const double v =
                std::max(0.0, sq[i] + sq[j] - 2.0 * G(static_cast<Eigen::Index>(li),
                                                      static_cast<Eigen::Index>(lj)));
            acc[static_cast<std::size_t>(li)].add(v, j, data.labels[i] == data.labels[j]);
          }
        }
      } else {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
        for (long long li = 0; li < static_cast<long long>(rt); ++li) {
          const std::size_t i = r0 + static_cast<std::size_t>(li);
          const double* a = w.values.data() + i * dim;
          for (std::size_t lj = 0; lj < ct; ++lj) {
            const std::size_t j = c0 + lj;
            if (j == i) continue;
            const double v = pair_value(m, a, w.values.data() + j * dim, dim);
            acc[static_cast<std::size_t>(li)].add(v, j, data.labels[i] == data.labels[j]);
          }
        }
      }
    }
    // Settle the winners with direct arithmetic (the Gram expansion can misorder
    // near-ties by a few ulps; the two stored candidates bracket the true winner).
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (long long li = 0; li < static_cast<long long>(rt); ++li) {
      RowAcc& a = acc[static_cast<std::size_t>(li)];
      if (m == Metric::L2) {
        const std::size_t i = r0 + static_cast<std::size_t>(li);
        const double* p = w.values.data() + i * dim;
        auto exact = [&](Cand& c) {
          if (c.j != static_cast<std::size_t>(-1))
            c.v = pair_value(m, p, w.values.data() + c.j * dim, dim);
        };
        for (auto* list : {a.diff, a.smin}) {
          exact(list[0]);
          exact(list[1]);
          if (RowAcc::better_min(list[1], list[0])) std::swap(list[0], list[1]);
        }
        for (Cand* c : {&a.smax[0], &a.smax[1]})
          if (c->j != static_cast<std::size_t>(-1))
            c->v = pair_value(m, p, w.values.data() + c->j * dim, dim);
        if (RowAcc::better_max(a.smax[1], a.smax[0])) std::swap(a.smax[0], a.smax[1]);
      }
      rows[r0 + static_cast<std::size_t>(li)] =
          finalize_row(a, m, w.scale);
    }
    const std::size_t done = r0 + rt;
    if (!opts.checkpoint_path.empty()) write_checkpoint(opts.checkpoint_path, hash, done, rows);
    if (opts.progress) opts.progress(done, n);
  }
}

}  // namespace

EngineKind engine_from_string(const std::string& s) {
  if (s == "naive") return EngineKind::NAIVE;
  if (s == "blocked") return EngineKind::BLOCKED;
  throw std::invalid_argument("unknown engine: " + s + " (expected naive|blocked)");
}

double ratio_min(const AnalysisRow& r) { return r.d_diff / (r.d_same_min + r.d_diff); }
double ratio_max(const AnalysisRow& r) { return r.d_diff / (r.d_same_max + r.d_diff); }

Histogram make_histogram(const std::vector<double>& values, int bins) {
  if (bins < 1) throw std::invalid_argument("make_histogram: bins must be >= 1");
  Histogram h;
  std::vector<double> v;
  v.reserve(values.size());
  for (double x : values)
    if (std::isfinite(x)) v.push_back(x);
  if (v.empty()) return h;
  const auto [mn_it, mx_it] = std::minmax_element(v.begin(), v.end());
  double lo = *mn_it, hi = *mx_it;
  if (lo == hi) {
    lo -= 0.5;
    hi += 0.5;
    bins = 1;
  }
  h.edges.resize(static_cast<std::size_t>(bins) + 1);
  for (int b = 0; b <= bins; ++b)
    h.edges[static_cast<std::size_t>(b)] = lo + (hi - lo) * b / bins;
  h.density.assign(static_cast<std::size_t>(bins), 0.0);
  for (double x : v) {
    int b = static_cast<int>((x - lo) / (hi - lo) * bins);
    b = std::clamp(b, 0, bins - 1);
    h.density[static_cast<std::size_t>(b)] += 1.0;
  }
  const double n = static_cast<double>(v.size());
  for (int b = 0; b < bins; ++b) {
    const double width = h.edges[static_cast<std::size_t>(b) + 1] - h.edges[static_cast<std::size_t>(b)];
    h.density[static_cast<std::size_t>(b)] /= n * width;
  }
  return h;
}

AnalysisReport analyze_dataset(const LabeledDataset& data, const AnalysisOptions& opts) {
  const std::size_t n = data.size();
  if (n < 2) throw std::invalid_argument("analyze_dataset: need at least two samples");
  const WorkingData w = make_working(data, opts);

  AnalysisReport rep;
  rep.metric = opts.metric;
  rep.engine = opts.engine;
  rep.raw_integer_path = w.raw_path;
  rep.rows.resize(n);

  if (opts.engine == EngineKind::NAIVE)
    run_naive(data, w, opts.metric, rep.rows);
  else
    run_blocked(data, w, opts, rep.rows);

  // Aggregates over the finalized rows.
  double mn = kInf, mx = -kInf, sum = 0.0;
  for (const auto& r : rep.rows) {
    mn = std::min(mn, r.d_diff);
    mx = std::max(mx, r.d_diff);
    sum += r.d_diff;
  }
  rep.min_d_diff = mn;
  rep.max_d_diff = mx;
  rep.mean_d_diff = sum / static_cast<double>(n);

  const double tol = 1e-9 * data.extent();
  std::size_t strict = 0, optimistic = 0;
  for (const auto& r : rep.rows) {
    const double gap = r.d_diff - r.d_same_min;
    strict += gap > tol;
    optimistic += gap >= -tol;
  }
  rep.loo_strict = static_cast<double>(strict) / static_cast<double>(n);
  rep.loo_optimistic = static_cast<double>(optimistic) / static_cast<double>(n);

  auto mean_neglog2 = [&](bool use_min, std::size_t& excluded) {
    double acc = 0.0;
    std::size_t counted = 0;
    for (const auto& r : rep.rows) {
      const double rho = use_min ? ratio_min(r) : ratio_max(r);
      if (rho > 0.0 && std::isfinite(rho)) {
        acc += -std::log2(rho);
        counted += 1;
      }
    }
    excluded = n - counted;
    return counted ? acc / static_cast<double>(counted)
                   : std::numeric_limits<double>::quiet_NaN();
  };
  rep.mean_neglog2_ratio_min = mean_neglog2(true, rep.excluded_ratio_min);
  rep.mean_neglog2_ratio_max = mean_neglog2(false, rep.excluded_ratio_max);

  std::vector<double> dd(n), rmins(n);
  for (std::size_t i = 0; i < n; ++i) {
    dd[i] = rep.rows[i].d_diff;
    rmins[i] = ratio_min(rep.rows[i]);
  }
  rep.hist_d_diff = make_histogram(dd, opts.hist_bins);
  rep.hist_ratio_min = make_histogram(rmins, opts.hist_bins);
  return rep;
}

}  // namespace genacc
