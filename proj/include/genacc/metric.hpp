#pragma once

#include <span>
#include <string>

namespace genacc {

enum class Metric { L1, L2, LINF };

// Norm of (a - b). Throws std::invalid_argument on dimension mismatch.
double distance(Metric m, std::span<const double> a, std::span<const double> b);

double norm(Metric m, std::span<const double> v);

Metric metric_from_string(const std::string& s);
std::string to_string(Metric m);

}  // namespace genacc
