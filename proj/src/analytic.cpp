#include "genacc/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace genacc::analytic {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Interval with explicit boundary openness; lo/hi may be infinite (then open).
struct Piece {
  double lo = -kInf, hi = kInf;
  bool lo_open = true, hi_open = true;
};

bool piece_nonempty(const Piece& p) {
  if (p.lo < p.hi) return true;
  return p.lo == p.hi && !p.lo_open && !p.hi_open;
}

bool intersect(const Piece& a, const Piece& b, Piece* out) {
  Piece r;
  if (a.lo > b.lo) {
    r.lo = a.lo;
    r.lo_open = a.lo_open;
  } else if (b.lo > a.lo) {
    r.lo = b.lo;
    r.lo_open = b.lo_open;
  } else {
    r.lo = a.lo;
    r.lo_open = a.lo_open || b.lo_open;
  }
  if (a.hi < b.hi) {
    r.hi = a.hi;
    r.hi_open = a.hi_open;
  } else if (b.hi < a.hi) {
    r.hi = b.hi;
    r.hi_open = b.hi_open;
  } else {
    r.hi = a.hi;
    r.hi_open = a.hi_open || b.hi_open;
  }
  if (!piece_nonempty(r)) return false;
  *out = r;
  return true;
}

// Maximal runs where the classifier's value satisfies pred. Each classifier piece is
// closed on its left breakpoint.
template <typename Pred>
std::vector<Piece> value_pieces(const Step1D& f, Pred pred) {
  const auto& bp = f.breakpoints();
  const auto& vals = f.values();
  std::vector<Piece> out;
  for (std::size_t i = 0; i < vals.size(); ++i) {
    if (!pred(vals[i])) continue;
    Piece p;
    p.lo = (i == 0) ? -kInf : bp[i - 1];
    p.lo_open = (i == 0);
    p.hi = (i == vals.size() - 1) ? kInf : bp[i];
    p.hi_open = true;
    if (!out.empty() && out.back().hi == p.lo) {
      out.back().hi = p.hi;
      out.back().hi_open = p.hi_open;
    } else {
      out.push_back(p);
    }
  }
  return out;
}

// Measure of [lo, hi] minus a union of closed intervals.
double length_minus(double lo, double hi, std::vector<std::pair<double, double>> bad) {
  std::sort(bad.begin(), bad.end());
  double good = 0.0, cur = lo;
  for (const auto& [bl, br] : bad) {
    if (br <= cur) continue;
    if (bl > cur) good += std::min(bl, hi) - cur;
    cur = std::max(cur, br);
    if (cur >= hi) return good;
  }
  if (cur < hi) good += hi - cur;
  return good;
}

// Measure of [lo, hi] intersected with two unions of pieces (boundary types are
// measure-irrelevant here).
double length_triple(double lo, double hi, const std::vector<Piece>& a,
                     const std::vector<Piece>& b) {
  double total = 0.0;
  for (const auto& pa : a) {
    for (const auto& pb : b) {
      const double l = std::max({lo, pa.lo, pb.lo});
      const double r = std::min({hi, pa.hi, pb.hi});
      if (r > l) total += r - l;
    }
  }
  return total;
}

std::vector<Piece> shift(std::vector<Piece> pieces, double by) {
  for (auto& p : pieces) {
    if (std::isfinite(p.lo)) p.lo += by;
    if (std::isfinite(p.hi)) p.hi += by;
  }
  return pieces;
}

// Cells of each class's region: the line cut at midpoints between consecutive
// different-class intervals, ends open because the cuts are boundary points.
std::vector<std::pair<int, Piece>> class_cells(const Region1D& region) {
  const auto& parts = region.parts;
  std::vector<std::pair<int, Piece>> cells;
  if (parts.empty()) return cells;
  double left = -kInf;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const bool last = (i + 1 == parts.size());
    if (!last && parts[i + 1].label == parts[i].label) continue;
    const double right = last ? kInf : 0.5 * (parts[i].hi + parts[i + 1].lo);
    Piece p;
    p.lo = left;
    p.hi = right;
    p.lo_open = true;  // open at cuts and at infinity
    p.hi_open = true;
    cells.emplace_back(parts[i].label, p);
    left = right;
  }
  return cells;
}

}  // namespace

double std_acc_max(const Step1D& f, const Region1D& region, double eps) {
  if (eps < 0.0) throw std::invalid_argument("eps must be >= 0");
  const double total = region.total_length();
  double good = 0.0;
  for (const auto& part : region.parts) {
    const auto wrong = value_pieces(f, [&](int v) { return v != part.label; });
    std::vector<std::pair<double, double>> bad;
    for (const auto& w : wrong) bad.emplace_back(w.lo - eps, w.hi + eps);
    good += length_minus(part.lo, part.hi, std::move(bad));
  }
  return good / total;
}

double std_acc_exact(const Step1D& f, const Region1D& region, double eps) {
  if (eps < 0.0) throw std::invalid_argument("eps must be >= 0");
  const double total = region.total_length();
  double good = 0.0;
  for (const auto& part : region.parts) {
    const auto pre = value_pieces(f, [&](int v) { return v == part.label; });
    good += length_triple(part.lo, part.hi, shift(pre, eps), shift(pre, -eps));
  }
  return good / total;
}

std::vector<SExactCandidate> s_exact_candidates(const Region1D& region, double eps) {
  std::vector<SExactCandidate> out;
  if (eps <= 0.0) return out;
  const auto& parts = region.parts;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    for (int side = 0; side < 2; ++side) {
      const double base = side == 0 ? parts[i].lo : parts[i].hi;
      const double moved = side == 0 ? base - eps : base + eps;
      // The own-interval distance is eps by construction (outward move). The candidate
      // fails when any other interval is at distance <= eps: closer means the base is
      // not nearest, equal means two nearest closure points (boundary set).
      bool valid = true;
      for (std::size_t j = 0; j < parts.size() && valid; ++j) {
        if (j == i) continue;
        const double dj = (moved < parts[j].lo)
                              ? parts[j].lo - moved
                              : (moved > parts[j].hi ? moved - parts[j].hi : 0.0);
        if (dj <= eps) valid = false;
      }
      if (valid) out.push_back({base, moved, parts[i].label});
    }
  }
  return out;
}

SExact1D s_exact_set(const Region1D& region, double eps) {
  if (eps < 0.0) throw std::invalid_argument("eps must be >= 0");
  SExact1D out;
  if (eps == 0.0) {
    out.full_region = true;
    return out;
  }
  for (const auto& c : s_exact_candidates(region, eps)) out.points.push_back(c.base);
  std::sort(out.points.begin(), out.points.end());
  out.points.erase(std::unique(out.points.begin(), out.points.end()), out.points.end());
  return out;
}

double gen_acc_exact(const Step1D& f, const Region1D& region, double eps) {
  if (eps < 0.0) throw std::invalid_argument("eps must be >= 0");
  if (eps == 0.0) return std_acc_max(f, region, 0.0);  // plain accuracy
  const auto cands = s_exact_candidates(region, eps);
  if (cands.empty()) return std::numeric_limits<double>::quiet_NaN();
  // Group by base point: a base is correct iff every feasible candidate stays correct.
  std::vector<double> bases;
  for (const auto& c : cands) bases.push_back(c.base);
  std::sort(bases.begin(), bases.end());
  bases.erase(std::unique(bases.begin(), bases.end()), bases.end());
  std::size_t correct = 0;
  for (double b : bases) {
    bool ok = true;
    for (const auto& c : cands) {
      if (c.base == b && f.at(c.moved) != c.label) ok = false;
    }
    correct += ok;
  }
  return static_cast<double>(correct) / static_cast<double>(bases.size());
}

double gen_acc_max_class_region(const Step1D& f, const Region1D& region, double eps) {
  if (eps < 0.0) throw std::invalid_argument("eps must be >= 0");
  const double total = region.total_length();
  const auto cells = class_cells(region);
  double good = 0.0;
  for (const auto& part : region.parts) {
    const auto wrong = value_pieces(f, [&](int v) { return v != part.label; });
    std::vector<std::pair<double, double>> bad;
    for (const auto& [cls, cell] : cells) {
      if (cls != part.label) continue;
      for (const auto& w : wrong) {
        Piece q;
        if (!intersect(w, cell, &q)) continue;
        bad.emplace_back(q.lo - eps, q.hi + eps);
      }
    }
    good += length_minus(part.lo, part.hi, std::move(bad));
  }
  return good / total;
}

std::vector<double> curve_breakpoints(const Step1D& f, const Region1D& region, double eps_max) {
  std::vector<double> anchors;
  for (const auto& p : region.parts) {
    anchors.push_back(p.lo);
    anchors.push_back(p.hi);
  }
  for (double b : f.breakpoints()) anchors.push_back(b);
  for (double m : region.vb_points()) anchors.push_back(m);
  std::vector<double> eps{0.0, eps_max};
  for (std::size_t a = 0; a < anchors.size(); ++a) {
    for (std::size_t b = 0; b < a; ++b) {
      const double d = std::abs(anchors[a] - anchors[b]);
      eps.push_back(d);
      eps.push_back(0.5 * d);
    }
  }
  std::sort(eps.begin(), eps.end());
  eps.erase(std::unique(eps.begin(), eps.end()), eps.end());
  eps.erase(std::remove_if(eps.begin(), eps.end(),
                           [&](double e) { return e < 0.0 || e > eps_max; }),
            eps.end());
  return eps;
}

std::vector<CurvePoint> accuracy_curve(CurveKind kind, const Step1D& f, const Region1D& region,
                                       double eps_max) {
  if (eps_max <= 0.0) throw std::invalid_argument("eps_max must be > 0");
  const auto bp = curve_breakpoints(f, region, eps_max);
  std::vector<double> grid;
  for (std::size_t i = 0; i < bp.size(); ++i) {
    grid.push_back(bp[i]);
    if (i + 1 < bp.size()) grid.push_back(0.5 * (bp[i] + bp[i + 1]));
  }
  std::vector<CurvePoint> out;
  out.reserve(grid.size());
  for (double e : grid) {
    double v = 0.0;
    switch (kind) {
      case CurveKind::STD_MAX: v = std_acc_max(f, region, e); break;
      case CurveKind::STD_EXACT: v = std_acc_exact(f, region, e); break;
      case CurveKind::GEN_EXACT: v = gen_acc_exact(f, region, e); break;
      case CurveKind::GEN_MAX_CLASS_REGION: v = gen_acc_max_class_region(f, region, e); break;
    }
    out.push_back({e, v, !std::isnan(v)});
  }
  return out;
}

double ara(const std::vector<CurvePoint>& curve) {
  double area = 0.0;
  for (std::size_t i = 0; i + 1 < curve.size(); ++i) {
    if (!curve[i].defined || !curve[i + 1].defined) continue;
    area += 0.5 * (curve[i].value + curve[i + 1].value) * (curve[i + 1].eps - curve[i].eps);
  }
  return area;
}

}  // namespace genacc::analytic
