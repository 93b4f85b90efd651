#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <stdexcept>
#include <vector>

#include "genacc/classifiers.hpp"
#include "genacc/dataset.hpp"
#include "genacc/nn_analysis.hpp"

using namespace genacc;
using doctest::Approx;

namespace {

LabeledDataset make_blobs(std::size_t n, std::size_t dim, int classes, std::uint64_t seed) {
  LabeledDataset d;
  d.dim = dim;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    const int c = static_cast<int>(i % static_cast<std::size_t>(classes));
    for (std::size_t k = 0; k < dim; ++k)
      d.points.push_back(4.0 * c + noise(rng));
    d.labels.push_back(c);
  }
  return d;
}

std::filesystem::path temp_dir() {
  auto p = std::filesystem::temp_directory_path() / "genacc_nn_analysis_tests";
  std::filesystem::create_directories(p);
  return p;
}

bool rows_close(const std::vector<AnalysisRow>& a, const std::vector<AnalysisRow>& b,
                double rel) {
  if (a.size() != b.size()) return false;
  auto close = [&](double x, double y) {
    if (std::isinf(x) || std::isinf(y)) return x == y;
    return std::abs(x - y) <= rel * std::max({1.0, std::abs(x), std::abs(y)});
  };
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!close(a[i].d_diff, b[i].d_diff)) return false;
    if (!close(a[i].d_same_min, b[i].d_same_min)) return false;
    if (!close(a[i].d_same_max, b[i].d_same_max)) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("three points on a line, by hand") {
  LabeledDataset d;
  d.dim = 1;
  d.points = {0.0, 1.0, 3.0};
  d.labels = {0, 0, 1};

  for (EngineKind e : {EngineKind::NAIVE, EngineKind::BLOCKED}) {
    AnalysisOptions opts;
    opts.engine = e;
    const auto rep = analyze_dataset(d, opts);
    REQUIRE(rep.rows.size() == 3);
    CHECK(rep.rows[0].d_diff == 3.0);
    CHECK(rep.rows[0].d_same_min == 1.0);
    CHECK(rep.rows[0].d_same_max == 1.0);
    CHECK(rep.rows[1].d_diff == 2.0);
    CHECK(rep.rows[1].d_same_min == 1.0);
    CHECK(rep.rows[2].d_diff == 2.0);
    CHECK(std::isinf(rep.rows[2].d_same_min));
    CHECK(std::isinf(rep.rows[2].d_same_max));

    CHECK(rep.min_d_diff == 2.0);
    CHECK(rep.max_d_diff == 3.0);
    CHECK(rep.mean_d_diff == Approx(7.0 / 3.0).epsilon(1e-15));

    // the lone class-1 sample can never win a leave-one-out vote
    CHECK(rep.loo_strict == Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(rep.loo_optimistic == Approx(2.0 / 3.0).epsilon(1e-15));

    CHECK(ratio_min(rep.rows[0]) == 0.75);
    CHECK(ratio_min(rep.rows[1]) == Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(ratio_min(rep.rows[2]) == 0.0);  // infinite same-class distance
    CHECK(rep.excluded_ratio_min == 1);
    CHECK(rep.excluded_ratio_max == 1);
    // -log2(3/4) - log2(2/3) average to exactly 1/2
    CHECK(rep.mean_neglog2_ratio_min == Approx(0.5).epsilon(1e-12));
    CHECK(rep.raw_integer_path == false);
  }
}

TEST_CASE("unit square with vertical classes is fully symmetric") {
  LabeledDataset d;
  d.dim = 2;
  d.points = {0, 0, 0, 1, 1, 0, 1, 1};
  d.labels = {0, 0, 1, 1};
  AnalysisOptions opts;
  const auto rep = analyze_dataset(d, opts);

  for (const auto& r : rep.rows) {
    CHECK(r.d_diff == 1.0);
    CHECK(r.d_same_min == 1.0);
    CHECK(r.d_same_max == 1.0);
    CHECK(ratio_min(r) == 0.5);
    CHECK(ratio_max(r) == 0.5);
  }
  CHECK(rep.loo_strict == 0.0);       // every vote is an exact tie
  CHECK(rep.loo_optimistic == 1.0);
  CHECK(rep.mean_neglog2_ratio_min == 1.0);
  CHECK(rep.mean_neglog2_ratio_max == 1.0);
  CHECK(rep.excluded_ratio_min == 0);
}

TEST_CASE("blocked and naive engines agree on gaussian blobs") {
  const auto d = make_blobs(700, 20, 3, 123);
  for (Metric m : {Metric::L2, Metric::LINF, Metric::L1}) {
    AnalysisOptions a;
    a.metric = m;
    a.engine = EngineKind::NAIVE;
    AnalysisOptions b = a;
    b.engine = EngineKind::BLOCKED;
    b.tile = 64;
    const auto ra = analyze_dataset(d, a);
    const auto rb = analyze_dataset(d, b);
    CHECK(rows_close(ra.rows, rb.rows, 1e-9));
    CHECK(ra.loo_strict == rb.loo_strict);
    CHECK(ra.min_d_diff == Approx(rb.min_d_diff).epsilon(1e-12));
    CHECK(ra.mean_neglog2_ratio_min == Approx(rb.mean_neglog2_ratio_min).epsilon(1e-9));
  }
}

TEST_CASE("integer-valued inputs produce exact fraction distances") {
  LabeledDataset d;
  d.dim = 2;
  d.raw = {0, 0, 10, 0, 200, 0, 210, 0};
  d.scaled = true;
  d.labels = {0, 0, 1, 1};
  d.points.resize(d.raw.size());
  for (std::size_t i = 0; i < d.raw.size(); ++i) d.points[i] = d.raw[i] / 255.0;

  for (Metric m : {Metric::LINF, Metric::L2, Metric::L1}) {
    for (EngineKind e : {EngineKind::NAIVE, EngineKind::BLOCKED}) {
      AnalysisOptions opts;
      opts.metric = m;
      opts.engine = e;
      const auto rep = analyze_dataset(d, opts);
      CHECK(rep.raw_integer_path);
      CHECK(rep.min_d_diff == 190.0 / 255.0);  // bit-exact, not approximately
      CHECK(rep.rows[0].d_same_min == 10.0 / 255.0);
    }
  }

  AnalysisOptions no_raw;
  no_raw.use_raw = false;
  const auto rep = analyze_dataset(d, no_raw);
  CHECK_FALSE(rep.raw_integer_path);
  CHECK(rep.min_d_diff == Approx(190.0 / 255.0).epsilon(1e-12));
}

TEST_CASE("a checkpoint lets an interrupted run resume where it stopped") {
  const auto d = make_blobs(64, 5, 2, 9);
  const auto ckpt = (temp_dir() / "resume.ckpt").string();
  std::remove(ckpt.c_str());

  AnalysisOptions ref_opts;
  ref_opts.tile = 16;
  const auto ref = analyze_dataset(d, ref_opts);

  AnalysisOptions broken = ref_opts;
  broken.checkpoint_path = ckpt;
  broken.progress = [](std::size_t done, std::size_t) {
    if (done >= 16) throw std::runtime_error("simulated interruption");
  };
  CHECK_THROWS_AS(analyze_dataset(d, broken), std::runtime_error);
  CHECK(std::filesystem::exists(ckpt));

  AnalysisOptions resume = ref_opts;
  resume.checkpoint_path = ckpt;
  std::size_t first_report = 0;
  resume.progress = [&](std::size_t done, std::size_t) {
    if (first_report == 0) first_report = done;
  };
  const auto rep = analyze_dataset(d, resume);
  CHECK(first_report == 32);  // rows 0-15 came from the checkpoint
  CHECK(rows_close(rep.rows, ref.rows, 0.0));
  CHECK(rep.loo_strict == ref.loo_strict);

  // A config change invalidates the file instead of poisoning the results.
  AnalysisOptions other = ref_opts;
  other.metric = Metric::LINF;
  other.checkpoint_path = ckpt;
  AnalysisOptions other_ref = ref_opts;
  other_ref.metric = Metric::LINF;
  const auto ro = analyze_dataset(d, other);
  const auto ro_ref = analyze_dataset(d, other_ref);
  CHECK(rows_close(ro.rows, ro_ref.rows, 0.0));
  std::remove(ckpt.c_str());
}

TEST_CASE("histograms integrate to one and tolerate degenerate input") {
  const auto h1 = make_histogram({2.5}, 10);
  REQUIRE(h1.edges.size() == 2);
  CHECK(h1.edges[0] == 2.0);
  CHECK(h1.edges[1] == 3.0);
  CHECK(h1.density[0] == 1.0);

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  std::vector<double> vals;
  for (int i = 0; i < 1000; ++i) vals.push_back(u(rng));
  const auto h = make_histogram(vals, 37);
  double mass = 0.0;
  for (std::size_t b = 0; b < h.density.size(); ++b)
    mass += h.density[b] * (h.edges[b + 1] - h.edges[b]);
  CHECK(mass == Approx(1.0).epsilon(1e-9));

  const double inf = std::numeric_limits<double>::infinity();
  const auto h2 = make_histogram({1.0, inf, 2.0, std::nan("")}, 2);
  double mass2 = 0.0;
  for (std::size_t b = 0; b < h2.density.size(); ++b)
    mass2 += h2.density[b] * (h2.edges[b + 1] - h2.edges[b]);
  CHECK(mass2 == Approx(1.0).epsilon(1e-12));

  CHECK(make_histogram({}, 5).edges.empty());
  CHECK_THROWS_AS(make_histogram({1.0}, 0), std::invalid_argument);
}

TEST_CASE("ratio toward the opposition equals the leave-one-out soft score") {
  const auto d = make_blobs(50, 2, 2, 77);
  AnalysisOptions opts;
  const auto rep = analyze_dataset(d, opts);

  for (std::size_t i = 0; i < d.size(); ++i) {
    LabeledDataset loo;
    loo.dim = d.dim;
    for (std::size_t j = 0; j < d.size(); ++j) {
      if (j == i) continue;
      loo.points.insert(loo.points.end(), d.point(j).begin(), d.point(j).end());
      loo.labels.push_back(d.labels[j]);
    }
    const auto g = gradual_scores(d.point(i), loo, Metric::L2, GradualKernel::INVERSE);
    double own = 0.0;
    for (std::size_t k = 0; k < g.labels.size(); ++k)
      if (g.labels[k] == d.labels[i]) own = g.scores[k];
    CHECK(own == Approx(ratio_min(rep.rows[i])).epsilon(1e-12));
  }
}

TEST_CASE("strict leave-one-out accuracy is the mass above ratio one half") {
  const auto d = make_blobs(300, 3, 2, 31);
  AnalysisOptions opts;
  const auto rep = analyze_dataset(d, opts);
  std::size_t above = 0;
  for (const auto& r : rep.rows) above += ratio_min(r) > 0.5;
  CHECK(rep.loo_strict == static_cast<double>(above) / static_cast<double>(d.size()));
  CHECK(rep.loo_optimistic >= rep.loo_strict);
  for (const auto& r : rep.rows) CHECK(ratio_max(r) <= ratio_min(r) + 1e-15);
}

TEST_CASE("engine names parse or fail loudly") {
  CHECK(engine_from_string("naive") == EngineKind::NAIVE);
  CHECK(engine_from_string("blocked") == EngineKind::BLOCKED);
  CHECK_THROWS_WITH_AS(engine_from_string("fast"), doctest::Contains("unknown engine"),
                       std::invalid_argument);
}
