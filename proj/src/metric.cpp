#include "genacc/metric.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace genacc {

double distance(Metric m, std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("distance: dimension mismatch (" + std::to_string(a.size()) +
                                " vs " + std::to_string(b.size()) + ")");
  }
  switch (m) {
    case Metric::L1: {
      double s = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
      return s;
    }
    case Metric::L2: {
      double s = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
      }
      return std::sqrt(s);
    }
    case Metric::LINF: {
      double s = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) s = std::max(s, std::abs(a[i] - b[i]));
      return s;
    }
  }
  throw std::logic_error("distance: unreachable");
}

double norm(Metric m, std::span<const double> v) {
  if (v.empty()) return 0.0;
  std::vector<double> z(v.size(), 0.0);
  return distance(m, v, z);
}

Metric metric_from_string(const std::string& s) {
  std::string t;
  t.reserve(s.size());
  for (char c : s) t.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (t == "l1") return Metric::L1;
  if (t == "l2") return Metric::L2;
  if (t == "linf" || t == "loo" || t == "linfinity") return Metric::LINF;
  throw std::invalid_argument("unknown metric '" + s + "' (expected l1, l2, or linf)");
}

std::string to_string(Metric m) {
  switch (m) {
    case Metric::L1: return "l1";
    case Metric::L2: return "l2";
    case Metric::LINF: return "linf";
  }
  return "?";
}

}  // namespace genacc
