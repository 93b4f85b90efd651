#include "genacc/voronoi.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace genacc {

VoronoiQuery::VoronoiQuery(const LabeledDataset& data, Metric metric, double vb_tolerance)
    : data_(&data), metric_(metric), vb_tolerance_(vb_tolerance) {
  if (vb_tolerance <= 0.0) throw std::invalid_argument("vb_tolerance must be > 0");
  abs_tol_ = vb_tolerance * data.extent();
  if (abs_tol_ == 0.0) abs_tol_ = vb_tolerance;  // degenerate single-point extent
}

NearestResult nearest_clean(std::span<const double> p, const VoronoiQuery& q) {
  const LabeledDataset& d = q.data();
  NearestResult out;
  if (d.region) {
    if (p.size() != 1) throw std::invalid_argument("nearest_clean: region datasets are 1-D");
    const auto info = d.region->nearest(p[0]);
    out.dist = info.dist;
    out.multiplicity = d.region->on_vb(p[0], q.abs_tol()) ? 2 : info.multiplicity;
    return out;
  }
  if (d.size() == 0) throw std::invalid_argument("nearest_clean: empty dataset");
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < d.size(); ++i) {
    best = std::min(best, distance(q.metric(), p, d.point(i)));
  }
  out.dist = best;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (distance(q.metric(), p, d.point(i)) <= best + q.abs_tol()) out.indices.push_back(i);
  }
  // Count distinct coordinate vectors among the ties.
  int distinct = 0;
  for (std::size_t a = 0; a < out.indices.size(); ++a) {
    bool dup = false;
    for (std::size_t b = 0; b < a && !dup; ++b) {
      dup = std::memcmp(d.point(out.indices[a]).data(), d.point(out.indices[b]).data(),
                        d.dim * sizeof(double)) == 0;
    }
    if (!dup) ++distinct;
  }
  out.multiplicity = distinct;
  return out;
}

bool is_on_voronoi_boundary(std::span<const double> p, const VoronoiQuery& q) {
  return nearest_clean(p, q).multiplicity >= 2;
}

bool in_previously_allowed_region(std::span<const double> p, double eps, const VoronoiQuery& q) {
  if (eps < 0.0) throw std::invalid_argument("eps must be >= 0");
  const auto near = nearest_clean(p, q);
  return near.dist < eps && near.multiplicity < 2;
}

std::vector<double> project_to_ball(Metric m, std::span<const double> p,
                                    std::span<const double> center, double eps) {
  if (p.size() != center.size()) throw std::invalid_argument("project_to_ball: dimension mismatch");
  std::vector<double> v(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) v[i] = p[i] - center[i];
  std::vector<double> out(p.begin(), p.end());
  switch (m) {
    case Metric::L2: {
      const double n = norm(Metric::L2, v);
      if (n <= eps) return out;
      const double s = eps / n;
      for (std::size_t i = 0; i < p.size(); ++i) out[i] = center[i] + v[i] * s;
      return out;
    }
    case Metric::LINF: {
      for (std::size_t i = 0; i < p.size(); ++i)
        out[i] = center[i] + std::clamp(v[i], -eps, eps);
      return out;
    }
    case Metric::L1: {
      const double n = norm(Metric::L1, v);
      if (n <= eps) return out;
      // Reduce the largest coordinates first: soft-threshold at theta chosen so the
      // remaining l1 mass equals eps.
      std::vector<double> u(v.size());
      for (std::size_t i = 0; i < v.size(); ++i) u[i] = std::abs(v[i]);
      std::sort(u.begin(), u.end(), std::greater<double>());
      double css = 0.0, theta = 0.0;
      for (std::size_t j = 0; j < u.size(); ++j) {
        css += u[j];
        const double t = (css - eps) / static_cast<double>(j + 1);
        if (j + 1 == u.size() || u[j + 1] <= t) {
          theta = t;
          break;
        }
      }
      for (std::size_t i = 0; i < v.size(); ++i) {
        const double w = std::max(std::abs(v[i]) - theta, 0.0);
        out[i] = center[i] + std::copysign(w, v[i]);
      }
      return out;
    }
  }
  throw std::logic_error("project_to_ball: unreachable");
}

namespace {

// Second-nearest margin: distance gap between the runner-up and the anchor.
// Strictly positive beyond abs_tol means the point is inside the open cell.
double cell_margin(std::span<const double> z, std::size_t anchor, const VoronoiQuery& q) {
  const LabeledDataset& d = q.data();
  const double da = distance(q.metric(), z, d.point(anchor));
  double runner = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < d.size(); ++j) {
    if (j == anchor) continue;
    if (std::memcmp(d.point(j).data(), d.point(anchor).data(), d.dim * sizeof(double)) == 0)
      continue;  // coordinate duplicates share the cell
    runner = std::min(runner, distance(q.metric(), z, d.point(j)));
  }
  return runner - da;
}

std::vector<double> clip_to_cell_l2(std::vector<double> z, std::size_t anchor,
                                    const VoronoiQuery& q, double inset) {
  const LabeledDataset& d = q.data();
  const auto a = d.point(anchor);
  const std::size_t dim = d.dim;
  for (int pass = 0; pass < 64; ++pass) {
    bool clipped = false;
    for (std::size_t j = 0; j < d.size(); ++j) {
      if (j == anchor) continue;
      const auto pj = d.point(j);
      double L2 = 0.0, t = 0.0;
      for (std::size_t k = 0; k < dim; ++k) {
        const double u = pj[k] - a[k];
        L2 += u * u;
        t += (z[k] - a[k]) * u;
      }
      if (L2 == 0.0) continue;
      const double L = std::sqrt(L2);
      const double limit = 0.5 * L2 - inset * L;
      if (t > limit) {
        const double step = (t - limit) / L2;
        for (std::size_t k = 0; k < dim; ++k) z[k] -= step * (pj[k] - a[k]);
        clipped = true;
      }
    }
    if (!clipped) break;
  }
  return z;
}

std::vector<double> bisect_to_cell(std::vector<double> z, std::size_t anchor,
                                   const VoronoiQuery& q) {
  const LabeledDataset& d = q.data();
  const auto a = d.point(anchor);
  const std::size_t dim = d.dim;
  auto at = [&](double t) {
    std::vector<double> w(dim);
    for (std::size_t k = 0; k < dim; ++k) w[k] = a[k] + t * (z[k] - a[k]);
    return w;
  };
  // Target twice the tolerance so the accepted point clears the tie band with
  // headroom; bisection otherwise converges onto the band's edge, where separately
  // rounded comparisons can disagree by one ulp.
  if (cell_margin(z, anchor, q) > 2.0 * q.abs_tol()) return z;
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (cell_margin(at(mid), anchor, q) > 2.0 * q.abs_tol())
      lo = mid;
    else
      hi = mid;
  }
  return at(lo);
}

}  // namespace

ProjectionResult project_ball_then_voronoi(std::span<const double> p, std::size_t anchor,
                                           double eps, const VoronoiQuery& q, int alternations) {
  if (eps <= 0.0) throw std::invalid_argument("project_ball_then_voronoi: eps must be > 0");
  const LabeledDataset& d = q.data();
  if (d.region) throw std::invalid_argument("project_ball_then_voronoi: finite datasets only");
  if (anchor >= d.size()) throw std::invalid_argument("project_ball_then_voronoi: bad anchor");
  if (alternations < 1) alternations = 1;
  const auto center = d.point(anchor);

  ProjectionResult res;
  res.point.assign(p.begin(), p.end());
  for (int round = 0; round < alternations; ++round) {
    const bool ball_ok = distance(q.metric(), res.point, center) <= eps;
    const bool cell_ok = cell_margin(res.point, anchor, q) > 2.0 * q.abs_tol();
    if (ball_ok && cell_ok) break;
    res.point = project_to_ball(q.metric(), res.point, center, eps);
    if (cell_margin(res.point, anchor, q) > 2.0 * q.abs_tol()) continue;
    if (q.metric() == Metric::L2) {
      double inset = 4.0 * q.abs_tol();
      for (int attempt = 0; attempt < 4; ++attempt) {
        auto cand = clip_to_cell_l2(res.point, anchor, q, inset);
        if (cell_margin(cand, anchor, q) > 2.0 * q.abs_tol()) {
          res.point = std::move(cand);
          break;
        }
        inset *= 4.0;
        if (attempt == 3) res.point = bisect_to_cell(std::move(cand), anchor, q);
      }
    } else {
      res.point = bisect_to_cell(std::move(res.point), anchor, q);
    }
  }
  res.in_ball = distance(q.metric(), res.point, center) <= eps * (1.0 + 1e-12) + 1e-15;
  // The cell verdict is issued by the same predicate callers verify with, so an
  // accepted point can never read as a boundary tie downstream. Coordinate
  // duplicates of the anchor count as the anchor itself.
  const NearestResult near = nearest_clean(res.point, q);
  res.in_cell = near.multiplicity == 1 &&
                std::find(near.indices.begin(), near.indices.end(), anchor) != near.indices.end();
  res.ok = res.in_ball && res.in_cell;
  return res;
}

}  // namespace genacc
