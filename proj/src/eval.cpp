#include "genacc/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <random>
#include <stdexcept>

#include "genacc/voronoi.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace genacc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint64_t mix_seed(std::uint64_t seed, std::span<const double> center, double eps) {
  std::uint64_t h = 1469598103934665603ull ^ seed;
  auto mix = [&h](const void* p, std::size_t bytes) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < bytes; ++i) {
      h ^= b[i];
      h *= 1099511628211ull;
    }
  };
  mix(center.data(), center.size() * sizeof(double));
  mix(&eps, sizeof eps);
  return h;
}

double margin_loss(const Classifier& f, std::span<const double> z, int true_label,
                   bool* flipped) {
  const int pred = f.predict(z);
  if (flipped) *flipped = pred != true_label;
  if (!f.has_scores()) return pred != true_label ? 1.0 : 0.0;
  const auto s = f.scores(z);
  const auto& labs = f.score_labels();
  double own = 0.0, best_wrong = -kInf;
  for (std::size_t i = 0; i < labs.size(); ++i) {
    if (labs[i] == true_label)
      own = s[i];
    else
      best_wrong = std::max(best_wrong, s[i]);
  }
  return best_wrong - own;
}

// Unit direction in the given metric (gaussian draw normalized by the metric norm).
std::vector<double> random_direction(Metric m, std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> u(dim);
  for (;;) {
    for (auto& v : u) v = gauss(rng);
    const double n = norm(m, u);
    if (n > 1e-12) {
      for (auto& v : u) v /= n;
      return u;
    }
  }
}

std::vector<std::vector<double>> sphere_directions(Metric m, std::size_t dim, int count,
                                                   std::uint64_t seed) {
  if (dim == 1) return {{1.0}, {-1.0}};
  std::mt19937_64 rng(seed);
  std::vector<std::vector<double>> dirs;
  dirs.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) dirs.push_back(random_direction(m, dim, rng));
  return dirs;
}

struct ClassIndex {
  std::vector<int> labels;  // sorted distinct
  std::vector<std::size_t> slot_of_sample;

  explicit ClassIndex(const LabeledDataset& data) : labels(data.distinct_labels()) {
    slot_of_sample.resize(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
      slot_of_sample[i] = static_cast<std::size_t>(
          std::lower_bound(labels.begin(), labels.end(), data.labels[i]) - labels.begin());
    }
  }
};

struct CellCheck {
  double d1 = kInf, d2 = kInf;  // nearest and nearest-distinct-runner-up distances
  std::size_t idx = 0;
};

CellCheck nearest_two(const LabeledDataset& data, std::span<const double> dist) {
  CellCheck c;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (dist[i] < c.d1) {
      c.d1 = dist[i];
      c.idx = i;
    }
  }
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (i == c.idx) continue;
    if (std::memcmp(data.point(i).data(), data.point(c.idx).data(),
                    data.dim * sizeof(double)) == 0)
      continue;
    c.d2 = std::min(c.d2, dist[i]);
  }
  return c;
}

}  // namespace

std::string evaluator_tag(const EvalConfig& cfg) {
  std::string t = (cfg.kind == AccuracyKind::STANDARD) ? "std" : "gen";
  t += (cfg.norm == NormMode::MAX) ? "-max" : "-exact";
  if (cfg.kind == AccuracyKind::GENUINE && cfg.norm == NormMode::MAX &&
      cfg.voronoi_mode == VoronoiMode::CLASS_REGION)
    t += "-class-region";
  return t;
}

double ara(const AccuracyCurve& curve) {
  double area = 0.0;
  const auto& p = curve.points;
  for (std::size_t i = 0; i + 1 < p.size(); ++i) {
    if (!p[i].defined || !p[i + 1].defined) continue;
    area += 0.5 * (p[i].accuracy + p[i + 1].accuracy) * (p[i + 1].eps - p[i].eps);
  }
  return area;
}

std::vector<double> uniform_eps_grid(double eps_max, int n) {
  if (n < 2 || eps_max <= 0.0) throw std::invalid_argument("uniform_eps_grid: bad arguments");
  std::vector<double> g(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    g[static_cast<std::size_t>(i)] = eps_max * static_cast<double>(i) / (n - 1);
  return g;
}

// ---------------------------------------------------------------------------
// Worst-case search

namespace {

bool grid_feasible(const FeasibleSet& fs, std::span<const double> z, const LabeledDataset& data,
                   const VoronoiQuery& q, const EvalConfig& cfg, std::vector<double>& dist_buf) {
  const double d_center = distance(cfg.metric, z, fs.center);
  if (d_center > fs.eps * (1.0 + 1e-12)) return false;
  if (fs.kind == FeasibleSet::Kind::BALL) return true;
  dist_buf.resize(data.size());
  for (std::size_t i = 0; i < data.size(); ++i)
    dist_buf[i] = distance(cfg.metric, z, data.point(i));
  const CellCheck c = nearest_two(data, dist_buf);
  if (c.d2 - c.d1 <= q.abs_tol()) return false;  // boundary-set tie
  if (fs.kind == FeasibleSet::Kind::BALL_IN_POINT_CELL) return c.idx == fs.anchor;
  // BALL_IN_CLASS_CELL: the nearest class must be the anchor class, with margin.
  const ClassIndex ci(data);
  std::vector<double> cd(ci.labels.size(), kInf);
  for (std::size_t i = 0; i < data.size(); ++i)
    cd[ci.slot_of_sample[i]] = std::min(cd[ci.slot_of_sample[i]], dist_buf[i]);
  std::size_t best = 0;
  for (std::size_t k = 1; k < cd.size(); ++k)
    if (cd[k] < cd[best]) best = k;
  double runner = kInf;
  for (std::size_t k = 0; k < cd.size(); ++k)
    if (k != best) runner = std::min(runner, cd[k]);
  if (runner - cd[best] <= q.abs_tol()) return false;
  return ci.labels[best] == fs.anchor_class;
}

WorstCase search_grid(const Classifier& f, std::span<const double> x, int true_label,
                      const FeasibleSet& fs, const LabeledDataset& data, const EvalConfig& cfg) {
  const std::size_t dim = fs.center.size();
  if (dim > 3)
    throw std::invalid_argument("grid search supports dimension <= 3; use PGD instead");
  const VoronoiQuery q(data, cfg.metric, cfg.vb_tolerance);
  const int R = std::max(2, cfg.grid_resolution);
  std::vector<std::size_t> counts(dim, static_cast<std::size_t>(R));
  std::size_t total = 1;
  for (std::size_t c : counts) total *= c;

  WorstCase best;
  best.loss = -kInf;
  std::vector<double> z(dim), dist_buf;
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    for (std::size_t k = dim; k-- > 0;) {
      const std::size_t j = rem % counts[k];
      rem /= counts[k];
      z[k] = (fs.center[k] - fs.eps) +
             2.0 * fs.eps * static_cast<double>(j) / static_cast<double>(R - 1);
    }
    if (!grid_feasible(fs, z, data, q, cfg, dist_buf)) continue;
    bool flip = false;
    const double loss = margin_loss(f, z, true_label, &flip);
    best.feasible_found = true;
    if (flip) best.misclassified = true;
    if (loss > best.loss) {
      best.loss = loss;
      best.x_star = z;
    }
  }
  if (!best.feasible_found) {
    best.loss = 0.0;
    best.x_star.assign(x.begin(), x.end());
  }
  return best;
}

WorstCase search_sphere(const Classifier& f, std::span<const double> x, int true_label,
                        const FeasibleSet& fs, const EvalConfig& cfg) {
  const std::size_t dim = fs.center.size();
  if (dim > 3)
    throw std::invalid_argument("exact-norm evaluation requires dimension <= 3");
  const auto dirs = sphere_directions(cfg.metric, dim, cfg.sphere_directions,
                                      mix_seed(cfg.seed, fs.center, fs.eps));
  WorstCase best;
  best.loss = -kInf;
  std::vector<double> z(dim);
  for (const auto& u : dirs) {
    for (std::size_t k = 0; k < dim; ++k) z[k] = fs.center[k] + fs.eps * u[k];
    bool flip = false;
    const double loss = margin_loss(f, z, true_label, &flip);
    best.feasible_found = true;
    if (flip) best.misclassified = true;
    if (loss > best.loss) {
      best.loss = loss;
      best.x_star = z;
    }
  }
  if (!best.feasible_found) {
    best.loss = 0.0;
    best.x_star.assign(x.begin(), x.end());
  }
  return best;
}

WorstCase search_pgd(const Classifier& f, std::span<const double> x, int true_label,
                     const FeasibleSet& fs, const LabeledDataset& data, const EvalConfig& cfg) {
  if (fs.kind == FeasibleSet::Kind::BALL_IN_CLASS_CELL)
    throw std::invalid_argument("PGD supports BALL and BALL_IN_POINT_CELL feasible sets");
  const std::size_t dim = fs.center.size();
  const VoronoiQuery q(data, cfg.metric, cfg.vb_tolerance);
  std::mt19937_64 rng(mix_seed(cfg.seed, fs.center, fs.eps));
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  auto project = [&](std::vector<double>& z) -> bool {
    if (fs.kind == FeasibleSet::Kind::BALL) {
      z = project_to_ball(cfg.metric, z, fs.center, fs.eps);
      return true;
    }
    auto res = project_ball_then_voronoi(z, fs.anchor, fs.eps, q, cfg.pgd.alternations);
    z = res.point;
    return res.ok;
  };

  WorstCase best;
  best.loss = -kInf;
  std::vector<double> z(dim), g(dim), zp(dim), zm(dim);
  const double step = cfg.pgd.step_frac * fs.eps;
  const double h = cfg.pgd.fd_h_frac * fs.eps;

  auto consider = [&](const std::vector<double>& pt, bool feasible) {
    if (!feasible) return;
    bool flip = false;
    const double loss = margin_loss(f, pt, true_label, &flip);
    best.feasible_found = true;
    if (flip) best.misclassified = true;
    if (loss > best.loss) {
      best.loss = loss;
      best.x_star = pt;
    }
  };

  for (int r = 0; r < std::max(1, cfg.pgd.restarts); ++r) {
    if (r == 0) {
      z.assign(x.begin(), x.end());
    } else {
      const auto u = random_direction(cfg.metric, dim, rng);
      const double t = std::pow(unit(rng), 1.0 / static_cast<double>(dim));
      for (std::size_t k = 0; k < dim; ++k) z[k] = fs.center[k] + fs.eps * t * u[k];
    }
    bool ok = project(z);
    consider(z, ok);
    if (!f.has_scores()) {
      // Hard classifier: the interior gives no gradient; sample feasible points.
      for (int s = 0; s < cfg.pgd.steps; ++s) {
        const auto u = random_direction(cfg.metric, dim, rng);
        const double t = std::pow(unit(rng), 1.0 / static_cast<double>(dim));
        for (std::size_t k = 0; k < dim; ++k) z[k] = fs.center[k] + fs.eps * t * u[k];
        ok = project(z);
        consider(z, ok);
      }
      continue;
    }
    for (int s = 0; s < cfg.pgd.steps; ++s) {
      for (std::size_t k = 0; k < dim; ++k) {
        zp = z;
        zm = z;
        zp[k] += h;
        zm[k] -= h;
        g[k] = (margin_loss(f, zp, true_label, nullptr) -
                margin_loss(f, zm, true_label, nullptr)) /
               (2.0 * h);
      }
      // Steepest-ascent direction for the metric.
      switch (cfg.metric) {
        case Metric::L2: {
          const double gn = norm(Metric::L2, g);
          if (gn <= 1e-300) break;
          for (std::size_t k = 0; k < dim; ++k) z[k] += step * g[k] / gn;
          break;
        }
        case Metric::LINF: {
          for (std::size_t k = 0; k < dim; ++k)
            z[k] += step * ((g[k] > 0.0) - (g[k] < 0.0));
          break;
        }
        case Metric::L1: {
          std::size_t kmax = 0;
          for (std::size_t k = 1; k < dim; ++k)
            if (std::abs(g[k]) > std::abs(g[kmax])) kmax = k;
          z[kmax] += step * ((g[kmax] > 0.0) - (g[kmax] < 0.0));
          break;
        }
      }
      ok = project(z);
      consider(z, ok);
    }
  }
  if (!best.feasible_found) {
    best.loss = 0.0;
    best.x_star.assign(x.begin(), x.end());
  }
  return best;
}

}  // namespace

WorstCase worst_case_search(const Classifier& f, std::span<const double> x, int true_label,
                            const FeasibleSet& fs, const LabeledDataset& data,
                            const EvalConfig& cfg) {
  if (fs.eps < 0.0) throw std::invalid_argument("worst_case_search: eps must be >= 0");
  if (fs.eps == 0.0) {
    WorstCase w;
    w.x_star.assign(x.begin(), x.end());
    bool flip = false;
    w.loss = margin_loss(f, x, true_label, &flip);
    w.misclassified = flip;
    w.feasible_found = true;
    return w;
  }
  if (fs.kind == FeasibleSet::Kind::SPHERE) return search_sphere(f, x, true_label, fs, cfg);
  if (cfg.search == SearchMode::GRID && fs.center.size() <= 3)
    return search_grid(f, x, true_label, fs, data, cfg);
  return search_pgd(f, x, true_label, fs, data, cfg);
}

// ---------------------------------------------------------------------------
// Shared-domain-grid minimum flip distances

std::vector<double> min_flip_distances(const Classifier& f, const LabeledDataset& data,
                                       const EvalConfig& cfg, double eps_max) {
  const std::size_t n = data.size(), dim = data.dim;
  if (n == 0) throw std::invalid_argument("min_flip_distances: empty dataset");
  if (dim > 3)
    throw std::invalid_argument("grid search supports dimension <= 3; use PGD instead");
  if (cfg.norm != NormMode::MAX)
    throw std::invalid_argument("min_flip_distances applies to max-norm evaluation");

  std::vector<double> r(n, kInf);
  for (std::size_t i = 0; i < n; ++i) {
    if (f.predict(data.point(i)) != data.labels[i]) r[i] = 0.0;
  }
  if (eps_max <= 0.0) return r;

  const VoronoiQuery q(data, cfg.metric, cfg.vb_tolerance);
  const double abs_tol = q.abs_tol();
  const ClassIndex ci(data);
  const std::size_t num_classes = ci.labels.size();

  // Grid over the data bounding box inflated by eps_max, spaced so any candidate
  // ball's bounding box sees at least grid_resolution nodes per axis.
  const int R = std::max(2, cfg.grid_resolution);
  const double h = 2.0 * eps_max / static_cast<double>(R - 1);
  std::vector<double> lo(dim), hi(dim);
  std::vector<std::size_t> counts(dim);
  std::size_t total = 1;
  for (std::size_t k = 0; k < dim; ++k) {
    lo[k] = data.points[k];
    hi[k] = data.points[k];
    for (std::size_t i = 1; i < n; ++i) {
      lo[k] = std::min(lo[k], data.points[i * dim + k]);
      hi[k] = std::max(hi[k], data.points[i * dim + k]);
    }
    lo[k] -= eps_max;
    hi[k] += eps_max;
    counts[k] = static_cast<std::size_t>(std::ceil((hi[k] - lo[k]) / h)) + 1;
    total *= counts[k];
  }
  if (total > 80'000'000ull)
    throw std::invalid_argument(
        "domain grid too large; lower grid_resolution or the eps range, or use PGD");

  const bool standard = cfg.kind == AccuracyKind::STANDARD;
  const bool class_region =
      cfg.kind == AccuracyKind::GENUINE && cfg.voronoi_mode == VoronoiMode::CLASS_REGION;

#ifdef _OPENMP
#pragma omp parallel
#endif
  {
    std::vector<double> local_r(n, kInf);
    std::vector<double> z(dim), dist(n), cd(num_classes);
#ifdef _OPENMP
#pragma omp for schedule(static)
#endif
    for (long long flat = 0; flat < static_cast<long long>(total); ++flat) {
      std::size_t rem = static_cast<std::size_t>(flat);
      for (std::size_t k = dim; k-- > 0;) {
        z[k] = lo[k] + h * static_cast<double>(rem % counts[k]);
        rem /= counts[k];
      }
      for (std::size_t i = 0; i < n; ++i) dist[i] = distance(cfg.metric, z, data.point(i));

      if (standard) {
        const int label = f.predict(z);
        for (std::size_t i = 0; i < n; ++i) {
          if (data.labels[i] != label) local_r[i] = std::min(local_r[i], dist[i]);
        }
        continue;
      }

      const CellCheck c = nearest_two(data, dist);
      if (c.d2 - c.d1 <= abs_tol) continue;  // boundary-set node, feasible for nobody
      if (!class_region) {
        if (dist[c.idx] >= local_r[c.idx]) continue;
        if (f.predict(z) != data.labels[c.idx])
          local_r[c.idx] = std::min(local_r[c.idx], dist[c.idx]);
        continue;
      }
      // Class-region cells: the node belongs to the nearest class (with margin).
      std::fill(cd.begin(), cd.end(), kInf);
      for (std::size_t i = 0; i < n; ++i)
        cd[ci.slot_of_sample[i]] = std::min(cd[ci.slot_of_sample[i]], dist[i]);
      std::size_t bestc = 0;
      for (std::size_t k = 1; k < num_classes; ++k)
        if (cd[k] < cd[bestc]) bestc = k;
      double runner = kInf;
      for (std::size_t k = 0; k < num_classes; ++k)
        if (k != bestc) runner = std::min(runner, cd[k]);
      if (runner - cd[bestc] <= abs_tol) continue;
      if (f.predict(z) == ci.labels[bestc]) continue;
      for (std::size_t i = 0; i < n; ++i) {
        if (ci.slot_of_sample[i] == bestc) local_r[i] = std::min(local_r[i], dist[i]);
      }
    }
#ifdef _OPENMP
#pragma omp critical
#endif
    {
      for (std::size_t i = 0; i < n; ++i) r[i] = std::min(r[i], local_r[i]);
    }
  }

  if (standard) {
    // Dataset points are exact flip candidates worth testing directly.
    for (std::size_t j = 0; j < n; ++j) {
      const int label = f.predict(data.point(j));
      for (std::size_t i = 0; i < n; ++i) {
        if (data.labels[i] != label)
          r[i] = std::min(r[i], distance(cfg.metric, data.point(i), data.point(j)));
      }
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Exact-norm evaluators

namespace {

struct ExactOutcome {
  bool in_base_set = false;
  bool correct = false;
};

ExactOutcome exact_outcome(const Classifier& f, const LabeledDataset& data, std::size_t i,
                           double eps, const VoronoiQuery& q,
                           const std::vector<std::vector<double>>& dirs) {
  ExactOutcome out;
  const auto x = data.point(i);
  std::vector<double> z(data.dim);
  for (const auto& u : dirs) {
    for (std::size_t k = 0; k < data.dim; ++k) z[k] = x[k] + eps * u[k];
    const auto near = nearest_clean(z, q);
    if (near.multiplicity >= 2) continue;                  // boundary set
    if (near.indices.size() != 1 || near.indices[0] != i) continue;  // not this sample's point
    if (near.dist < eps - q.abs_tol()) continue;           // previously allowed region
    if (!out.in_base_set) {
      out.in_base_set = true;
      out.correct = true;
    }
    if (f.predict(z) != data.labels[i]) out.correct = false;
  }
  return out;
}

}  // namespace

std::vector<std::size_t> s_exact_indices(const LabeledDataset& data, double eps,
                                         const EvalConfig& cfg) {
  if (eps < 0.0) throw std::invalid_argument("eps must be >= 0");
  std::vector<std::size_t> out;
  if (eps == 0.0) {
    out.resize(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) out[i] = i;
    return out;
  }
  if (data.dim > 3)
    throw std::invalid_argument("exact-norm evaluation requires dimension <= 3");
  const VoronoiQuery q(data, cfg.metric, cfg.vb_tolerance);
  const auto dirs =
      sphere_directions(cfg.metric, data.dim, cfg.sphere_directions, cfg.seed);
  std::vector<double> z(data.dim);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto x = data.point(i);
    bool any = false;
    for (const auto& u : dirs) {
      for (std::size_t k = 0; k < data.dim; ++k) z[k] = x[k] + eps * u[k];
      const auto near = nearest_clean(z, q);
      if (near.multiplicity >= 2) continue;
      if (near.indices.size() != 1 || near.indices[0] != i) continue;
      if (near.dist < eps - q.abs_tol()) continue;
      any = true;
      break;
    }
    if (any) out.push_back(i);
  }
  return out;
}

double genuine_adv_acc_exact(const Classifier& f, const LabeledDataset& data, double eps,
                             const EvalConfig& cfg) {
  if (eps < 0.0) throw std::invalid_argument("eps must be >= 0");
  const std::size_t n = data.size();
  if (n == 0) throw std::invalid_argument("empty dataset");
  if (eps == 0.0) {
    std::size_t ok = 0;
    for (std::size_t i = 0; i < n; ++i) ok += f.predict(data.point(i)) == data.labels[i];
    return static_cast<double>(ok) / static_cast<double>(n);
  }
  if (data.dim > 3)
    throw std::invalid_argument("exact-norm evaluation requires dimension <= 3");
  const VoronoiQuery q(data, cfg.metric, cfg.vb_tolerance);
  const auto dirs =
      sphere_directions(cfg.metric, data.dim, cfg.sphere_directions, cfg.seed);
  std::size_t included = 0, correct = 0;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) reduction(+ : included, correct)
#endif
  for (long long i = 0; i < static_cast<long long>(n); ++i) {
    const auto out = exact_outcome(f, data, static_cast<std::size_t>(i), eps, q, dirs);
    if (out.in_base_set) {
      included += 1;
      correct += out.correct;
    }
  }
  if (included == 0) return std::numeric_limits<double>::quiet_NaN();
  return static_cast<double>(correct) / static_cast<double>(included);
}

// ---------------------------------------------------------------------------
// Top-level accuracies and curves

namespace {

double max_norm_accuracy(const Classifier& f, const LabeledDataset& data, double eps,
                         const EvalConfig& cfg) {
  const std::size_t n = data.size();
  if (cfg.search == SearchMode::GRID && data.dim <= 3) {
    const auto r = min_flip_distances(f, data, cfg, eps);
    std::size_t ok = 0;
    for (double ri : r) ok += ri > eps;
    return static_cast<double>(ok) / static_cast<double>(n);
  }
  if (cfg.kind == AccuracyKind::GENUINE && cfg.voronoi_mode == VoronoiMode::CLASS_REGION)
    throw std::invalid_argument("PGD supports BALL and BALL_IN_POINT_CELL feasible sets");
  std::vector<unsigned char> wrong(n, 0);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (long long i = 0; i < static_cast<long long>(n); ++i) {
    FeasibleSet fs;
    fs.eps = eps;
    const auto x = data.point(static_cast<std::size_t>(i));
    fs.center.assign(x.begin(), x.end());
    if (cfg.kind == AccuracyKind::STANDARD) {
      fs.kind = FeasibleSet::Kind::BALL;
    } else if (cfg.voronoi_mode == VoronoiMode::POINT_CELL) {
      fs.kind = FeasibleSet::Kind::BALL_IN_POINT_CELL;
      fs.anchor = static_cast<std::size_t>(i);
    } else {
      fs.kind = FeasibleSet::Kind::BALL_IN_CLASS_CELL;
      fs.anchor_class = data.labels[static_cast<std::size_t>(i)];
    }
    const auto w =
        worst_case_search(f, x, data.labels[static_cast<std::size_t>(i)], fs, data, cfg);
    wrong[static_cast<std::size_t>(i)] = w.misclassified ? 1 : 0;
  }
  std::size_t ok = 0;
  for (auto w : wrong) ok += w == 0;
  return static_cast<double>(ok) / static_cast<double>(n);
}

double std_exact_accuracy(const Classifier& f, const LabeledDataset& data, double eps,
                          const EvalConfig& cfg) {
  const std::size_t n = data.size();
  if (eps == 0.0) {
    std::size_t ok = 0;
    for (std::size_t i = 0; i < n; ++i) ok += f.predict(data.point(i)) == data.labels[i];
    return static_cast<double>(ok) / static_cast<double>(n);
  }
  if (data.dim > 3)
    throw std::invalid_argument("exact-norm evaluation requires dimension <= 3");
  const auto dirs =
      sphere_directions(cfg.metric, data.dim, cfg.sphere_directions, cfg.seed);
  std::size_t ok = 0;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) reduction(+ : ok)
#endif
  for (long long i = 0; i < static_cast<long long>(n); ++i) {
    const auto x = data.point(static_cast<std::size_t>(i));
    std::vector<double> z(data.dim);
    bool correct = true;
    for (const auto& u : dirs) {
      for (std::size_t k = 0; k < data.dim; ++k) z[k] = x[k] + eps * u[k];
      if (f.predict(z) != data.labels[static_cast<std::size_t>(i)]) {
        correct = false;
        break;
      }
    }
    ok += correct;
  }
  return static_cast<double>(ok) / static_cast<double>(n);
}

}  // namespace

double std_adv_acc(const Classifier& f, const LabeledDataset& data, double eps,
                   const EvalConfig& cfg) {
  if (eps < 0.0) throw std::invalid_argument("eps must be >= 0");
  EvalConfig c = cfg;
  c.kind = AccuracyKind::STANDARD;
  if (c.norm == NormMode::EXACT) return std_exact_accuracy(f, data, eps, c);
  return max_norm_accuracy(f, data, eps, c);
}

double genuine_adv_acc_max(const Classifier& f, const LabeledDataset& data, double eps,
                           const EvalConfig& cfg) {
  if (eps < 0.0) throw std::invalid_argument("eps must be >= 0");
  EvalConfig c = cfg;
  c.kind = AccuracyKind::GENUINE;
  c.norm = NormMode::MAX;
  return max_norm_accuracy(f, data, eps, c);
}

AccuracyCurve accuracy_curve(const Classifier& f, const LabeledDataset& data,
                             std::span<const double> eps_grid, const EvalConfig& cfg,
                             const std::string& classifier_tag) {
  if (eps_grid.empty()) throw std::invalid_argument("accuracy_curve: empty eps grid");
  for (std::size_t i = 1; i < eps_grid.size(); ++i) {
    if (eps_grid[i] <= eps_grid[i - 1])
      throw std::invalid_argument("accuracy_curve: eps grid must be strictly increasing");
  }
  AccuracyCurve curve;
  curve.evaluator_tag = genacc::evaluator_tag(cfg);
  curve.classifier_tag = classifier_tag;
  curve.points.reserve(eps_grid.size());

  if (cfg.norm == NormMode::MAX && cfg.search == SearchMode::GRID && data.dim <= 3) {
    EvalConfig c = cfg;
    const auto r = min_flip_distances(f, data, c, eps_grid.back());
    for (double e : eps_grid) {
      std::size_t ok = 0;
      for (double ri : r) ok += ri > e;
      curve.points.push_back(
          {e, static_cast<double>(ok) / static_cast<double>(data.size()), true});
    }
    return curve;
  }

  if (cfg.norm == NormMode::MAX) {
    // PGD path: flips are sticky across the ascending grid (nested feasible sets).
    if (cfg.kind == AccuracyKind::GENUINE && cfg.voronoi_mode == VoronoiMode::CLASS_REGION)
      throw std::invalid_argument("PGD supports BALL and BALL_IN_POINT_CELL feasible sets");
    const std::size_t n = data.size();
    std::vector<unsigned char> flipped(n, 0);
    for (std::size_t i = 0; i < n; ++i)
      flipped[i] = f.predict(data.point(i)) != data.labels[i] ? 1 : 0;
    for (double e : eps_grid) {
      if (e > 0.0) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
        for (long long i = 0; i < static_cast<long long>(n); ++i) {
          if (flipped[static_cast<std::size_t>(i)]) continue;
          FeasibleSet fs;
          fs.eps = e;
          const auto x = data.point(static_cast<std::size_t>(i));
          fs.center.assign(x.begin(), x.end());
          if (cfg.kind == AccuracyKind::STANDARD) {
            fs.kind = FeasibleSet::Kind::BALL;
          } else {
            fs.kind = FeasibleSet::Kind::BALL_IN_POINT_CELL;
            fs.anchor = static_cast<std::size_t>(i);
          }
          const auto w =
              worst_case_search(f, x, data.labels[static_cast<std::size_t>(i)], fs, data, cfg);
          if (w.misclassified) flipped[static_cast<std::size_t>(i)] = 1;
        }
      }
      std::size_t ok = 0;
      for (auto fl : flipped) ok += fl == 0;
      curve.points.push_back(
          {e, static_cast<double>(ok) / static_cast<double>(n), true});
    }
    return curve;
  }

  // Exact-norm curves, one independent evaluation per eps.
  for (double e : eps_grid) {
    double v;
    if (cfg.kind == AccuracyKind::STANDARD) {
      v = std_adv_acc(f, data, e, cfg);
      curve.points.push_back({e, v, true});
    } else {
      v = genuine_adv_acc_exact(f, data, e, cfg);
      curve.points.push_back({e, std::isnan(v) ? 0.0 : v, !std::isnan(v)});
    }
  }
  return curve;
}

}  // namespace genacc
