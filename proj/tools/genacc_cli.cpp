// Command-line front end: analytic toy curves, dataset evaluation, nearest-neighbor
// distance analysis, and the ensemble/sunset demos.

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <memory>
#include <string>
#include <vector>

#include "genacc/analytic.hpp"
#include "genacc/classifiers.hpp"
#include "genacc/dataset.hpp"
#include "genacc/eval.hpp"
#include "genacc/metric.hpp"
#include "genacc/nn_analysis.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using nlohmann::json;

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void ensure_dir(const std::string& dir) { std::filesystem::create_directories(dir); }

void write_run_config(const std::string& dir, const json& j) {
  std::ofstream out(dir + "/run_config.json");
  out << j.dump(2) << "\n";
}

void write_curve_csv(const std::string& path, const std::vector<genacc::CurvePoint>& pts) {
  std::ofstream out(path);
  out << "epsilon,accuracy\n";
  for (const auto& p : pts)
    out << fmt17(p.eps) << ","
        << (p.defined ? fmt17(p.accuracy) : std::string("nan")) << "\n";
}

void write_analytic_csv(const std::string& path,
                        const std::vector<genacc::analytic::CurvePoint>& pts) {
  std::ofstream out(path);
  out << "epsilon,accuracy\n";
  for (const auto& p : pts)
    out << fmt17(p.eps) << "," << (p.defined ? fmt17(p.value) : std::string("nan")) << "\n";
}

void write_histogram_csv(const std::string& path, const genacc::Histogram& h) {
  std::ofstream out(path);
  out << "bin_left,bin_right,density\n";
  for (std::size_t b = 0; b + 1 < h.edges.size(); ++b)
    out << fmt17(h.edges[b]) << "," << fmt17(h.edges[b + 1]) << "," << fmt17(h.density[b])
        << "\n";
}

int threads_in_use() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

genacc::LabeledDataset head_subset(const genacc::LabeledDataset& data, std::size_t n) {
  if (n == 0 || n >= data.size()) return data;
  genacc::LabeledDataset out;
  out.dim = data.dim;
  out.points.assign(data.points.begin(),
                    data.points.begin() + static_cast<std::ptrdiff_t>(n * data.dim));
  out.labels.assign(data.labels.begin(), data.labels.begin() + static_cast<std::ptrdiff_t>(n));
  if (data.raw.size() == data.size() * data.dim)
    out.raw.assign(data.raw.begin(), data.raw.begin() + static_cast<std::ptrdiff_t>(n * data.dim));
  out.scaled = data.scaled;
  out.conflicts = genacc::find_label_conflicts(out);
  return out;
}

// --- toy-curves --------------------------------------------------------------

int run_toy_curves(const std::string& out_dir, double eps_max) {
  using namespace genacc::analytic;
  ensure_dir(out_dir);
  const auto region = genacc::make_toy_region();
  const std::vector<std::pair<CurveKind, std::string>> kinds = {
      {CurveKind::STD_MAX, "std-max"},
      {CurveKind::STD_EXACT, "std-exact"},
      {CurveKind::GEN_EXACT, "gen-exact"},
      {CurveKind::GEN_MAX_CLASS_REGION, "gen-max-class-region"},
  };
  json summary;
  for (const std::string name : {"f1", "f2", "f3"}) {
    const auto f = genacc::step_classifier(name);
    for (const auto& [kind, tag] : kinds) {
      const auto curve = accuracy_curve(kind, f, region, eps_max);
      write_analytic_csv(out_dir + "/" + name + "_" + tag + ".csv", curve);
      const double area = ara(curve);
      summary[name][tag] = area;
      std::printf("%s %-22s ara=%s\n", name.c_str(), tag.c_str(), fmt17(area).c_str());
    }
  }
  {
    std::ofstream out(out_dir + "/ara_summary.json");
    out << summary.dump(2) << "\n";
  }
  write_run_config(out_dir, {{"command", "toy-curves"},
                             {"eps_max", eps_max},
                             {"threads", threads_in_use()}});
  return 0;
}

// --- sunset-demo -------------------------------------------------------------

double parabola_margin(double x1, double x2) {
  // First-order distance from (x1, x2) to the curve x2 = x1^2 / 4.
  const double residual = x2 - x1 * x1 / 4.0;
  return residual / std::sqrt(1.0 + x1 * x1 / 4.0);
}

int run_sunset(const std::string& out_dir, std::size_t n_per_class, int grid_res,
               std::uint64_t seed, bool evenly, const std::string& metric_name) {
  ensure_dir(out_dir);
  const auto metric = genacc::metric_from_string(metric_name);
  const auto data = genacc::make_sunset(n_per_class, seed, evenly);
  genacc::save_csv(data, out_dir + "/points.csv");

  const genacc::NearestNeighborClassifier f(data, metric);
  double lo0 = data.points[0], hi0 = lo0, lo1 = data.points[1], hi1 = lo1;
  for (std::size_t i = 0; i < data.size(); ++i) {
    lo0 = std::min(lo0, data.points[2 * i]);
    hi0 = std::max(hi0, data.points[2 * i]);
    lo1 = std::min(lo1, data.points[2 * i + 1]);
    hi1 = std::max(hi1, data.points[2 * i + 1]);
  }
  std::ofstream grid(out_dir + "/grid.csv");
  grid << "x1,x2,pred\n";
  std::size_t agree = 0, counted = 0;
  for (int a = 0; a < grid_res; ++a) {
    for (int b = 0; b < grid_res; ++b) {
      const double x1 = lo0 + (hi0 - lo0) * a / (grid_res - 1);
      const double x2 = lo1 + (hi1 - lo1) * b / (grid_res - 1);
      const double z[2] = {x1, x2};
      const int pred = f.predict(std::span<const double>(z, 2));
      grid << fmt17(x1) << "," << fmt17(x2) << "," << pred << "\n";
      const double margin = parabola_margin(x1, x2);
      if (std::abs(margin) > 0.02) {
        counted += 1;
        agree += pred == (margin > 0.0 ? 0 : 1);
      }
    }
  }
  const double agreement = counted ? static_cast<double>(agree) / counted : 1.0;
  std::printf("decision-boundary agreement with x2 = x1^2/4: %.6f (%zu nodes)\n", agreement,
              counted);
  write_run_config(out_dir, {{"command", "sunset-demo"},
                             {"n_per_class", n_per_class},
                             {"grid_res", grid_res},
                             {"seed", seed},
                             {"evenly_spaced", evenly},
                             {"metric", metric_name},
                             {"agreement", agreement},
                             {"dataset_hash", genacc::dataset_hash(data)},
                             {"threads", threads_in_use()}});
  return 0;
}

// --- eval --------------------------------------------------------------------

struct ClassifierChoice {
  std::string name = "1nn";
  std::string kernel = "inverse";
  double alpha = 1.0;
  std::string open_variant = "entropy";
  double sigma = 0.1;
  std::size_t members = 100;
  std::string noise = "gaussian";
  std::string vote = "hard";
};

std::unique_ptr<genacc::Classifier> make_classifier(const ClassifierChoice& c,
                                                    const genacc::LabeledDataset& data,
                                                    genacc::Metric metric,
                                                    std::uint64_t seed) {
  using namespace genacc;
  if (c.name == "f1" || c.name == "f2" || c.name == "f3") {
    if (data.dim != 1)
      throw std::invalid_argument("classifier " + c.name + " is 1-D; dataset has dim " +
                                  std::to_string(data.dim));
    return std::make_unique<Step1D>(step_classifier(c.name));
  }
  if (c.name == "1nn") return std::make_unique<NearestNeighborClassifier>(data, metric);
  if (c.name == "gradual")
    return std::make_unique<GradualClassifier>(data, metric, kernel_from_string(c.kernel));
  if (c.name == "open-set") {
    const auto variant = c.open_variant == "geometric-mean" ? OpenSetVariant::GEOMETRIC_MEAN
                                                            : OpenSetVariant::ENTROPY;
    return std::make_unique<OpenSetClassifier>(data, metric, c.alpha, variant,
                                               kernel_from_string(c.kernel));
  }
  if (c.name == "ensemble") {
    EnsembleConfig cfg;
    cfg.sigma = c.sigma;
    cfg.members = c.members;
    cfg.seed = seed;
    cfg.noise_model =
        c.noise == "rbf" ? NoiseModel::RBF_KERNEL_WEIGHTING : NoiseModel::GAUSSIAN_ISOTROPIC;
    cfg.vote = c.vote == "gradual" ? EnsembleVote::GRADUAL : EnsembleVote::HARD;
    cfg.kernel = kernel_from_string(c.kernel);
    return std::make_unique<NoisyEnsembleClassifier>(data, metric, cfg);
  }
  throw std::invalid_argument("unknown classifier: " + c.name);
}

}  // namespace

int main(int argc, char** argv) {
  if (const char* t = std::getenv("GENACC_THREADS")) {
#ifdef _OPENMP
    const int k = std::atoi(t);
    if (k > 0) omp_set_num_threads(k);
#endif
    (void)t;
  }

  CLI::App app{"Robustness evaluation for nearest-neighbor-style classifiers"};
  app.require_subcommand(1);

  // toy-curves
  std::string toy_out = "out/toy";
  double toy_eps_max = 6.3;
  auto* toy = app.add_subcommand(
      "toy-curves", "Exact accuracy curves for the three 1-D step benchmarks");
  toy->add_option("--out", toy_out, "Output directory");
  toy->add_option("--eps-max", toy_eps_max, "Upper end of the eps range")
      ->check(CLI::PositiveNumber);

  // sunset-demo
  std::string sun_out = "out/sunset";
  std::size_t sun_n = 1000;
  int sun_grid = 200;
  std::uint64_t sun_seed = 0;
  bool sun_random = false;
  std::string sun_metric = "l2";
  auto* sun = app.add_subcommand("sunset-demo",
                                 "Circle-plus-line dataset and its 1-NN decision grid");
  sun->add_option("--out", sun_out, "Output directory");
  sun->add_option("--n", sun_n, "Samples per class");
  sun->add_option("--grid-res", sun_grid, "Grid nodes per axis")->check(CLI::Range(2, 4096));
  sun->add_option("--seed", sun_seed, "Placement seed (random placement only)");
  sun->add_flag("--random", sun_random, "Sample placements instead of even spacing");
  sun->add_option("--metric", sun_metric, "l1|l2|linf");

  // eval
  std::string ev_out = "out/eval";
  std::string ev_data;
  std::size_t ev_toy_sample = 0, ev_sunset = 0;
  std::string ev_metric = "l2", ev_norm = "max", ev_kind = "genuine", ev_voronoi = "point",
              ev_search = "grid";
  double ev_eps_max = 1.0;
  int ev_eps_steps = 64, ev_grid_res = 200, ev_dirs = 4096;
  std::uint64_t ev_seed = 0;
  ClassifierChoice choice;
  auto* ev = app.add_subcommand("eval", "Adversarial-accuracy curves on a dataset");
  ev->add_option("--data", ev_data, "CSV dataset (header x0..x{d-1},label)");
  ev->add_option("--toy-sample", ev_toy_sample,
                 "Sample this many points from the 1-D toy intervals instead of --data");
  ev->add_option("--sunset", ev_sunset,
                 "Use the circle/line dataset with this many samples per class");
  ev->add_option("--classifier", choice.name, "1nn|gradual|open-set|ensemble|f1|f2|f3");
  ev->add_option("--metric", ev_metric, "l1|l2|linf");
  ev->add_option("--norm", ev_norm, "max|exact");
  ev->add_option("--kind", ev_kind, "standard|genuine");
  ev->add_option("--voronoi", ev_voronoi, "point|class");
  ev->add_option("--search", ev_search, "grid|pgd");
  ev->add_option("--eps-max", ev_eps_max, "Upper end of the eps grid")
      ->check(CLI::PositiveNumber);
  ev->add_option("--eps-steps", ev_eps_steps, "Number of eps grid points")
      ->check(CLI::Range(2, 100000));
  ev->add_option("--grid-resolution", ev_grid_res, "Search-grid nodes per axis")
      ->check(CLI::Range(2, 100000));
  ev->add_option("--sphere-directions", ev_dirs, "Exact-norm directions in 2-D/3-D")
      ->check(CLI::Range(1, 10000000));
  ev->add_option("--seed", ev_seed, "Random seed");
  ev->add_option("--kernel", choice.kernel, "inverse|inverse-square|inverse-log");
  ev->add_option("--alpha", choice.alpha, "Open-set unknown weight");
  ev->add_option("--open-variant", choice.open_variant, "entropy|geometric-mean");
  ev->add_option("--sigma", choice.sigma, "Ensemble noise scale");
  ev->add_option("--members", choice.members, "Ensemble member count");
  ev->add_option("--noise", choice.noise, "gaussian|rbf");
  ev->add_option("--vote", choice.vote, "hard|gradual");
  ev->add_option("--out", ev_out, "Output directory");

  // analyze
  std::string an_out = "out/analysis";
  std::string an_data, an_images, an_labels;
  std::vector<std::string> an_cifar;
  std::string an_metric = "l2", an_engine = "blocked", an_checkpoint;
  bool an_no_raw = false;
  int an_bins = 50;
  std::size_t an_tile = 256, an_limit = 0;
  auto* an = app.add_subcommand("analyze",
                                "Nearest-neighbor distance statistics over a dataset");
  an->add_option("--data", an_data, "CSV dataset");
  an->add_option("--idx-images", an_images, "IDX image file");
  an->add_option("--idx-labels", an_labels, "IDX label file");
  an->add_option("--cifar", an_cifar, "CIFAR-10 binary batch files");
  an->add_option("--metric", an_metric, "l1|l2|linf");
  an->add_option("--engine", an_engine, "naive|blocked");
  an->add_flag("--no-raw", an_no_raw, "Ignore raw integer pixels and use scaled values");
  an->add_option("--hist-bins", an_bins, "Histogram bin count")->check(CLI::Range(1, 100000));
  an->add_option("--tile", an_tile, "Blocked-engine tile size");
  an->add_option("--limit", an_limit, "Use only the first N samples (0 = all)");
  an->add_option("--checkpoint", an_checkpoint, "Checkpoint file (blocked engine)");
  an->add_option("--out", an_out, "Output directory");

  // ensemble-grid
  std::string en_out = "out/ensemble";
  std::string en_data;
  double en_sigma = 0.1, en_pad = 0.5;
  std::size_t en_members = 100;
  std::uint64_t en_seed = 0;
  std::string en_noise = "gaussian", en_vote = "hard", en_kernel = "inverse",
              en_metric = "l2";
  int en_grid = 200;
  auto* en = app.add_subcommand("ensemble-grid",
                                "Score field of the noisy ensemble over a 2-D grid");
  en->add_option("--data", en_data, "CSV dataset (defaults to the built-in demo set)");
  en->add_option("--sigma", en_sigma, "Noise scale");
  en->add_option("--members", en_members, "Member count");
  en->add_option("--seed", en_seed, "Noise seed");
  en->add_option("--noise", en_noise, "gaussian|rbf");
  en->add_option("--vote", en_vote, "hard|gradual");
  en->add_option("--kernel", en_kernel, "inverse|inverse-square|inverse-log");
  en->add_option("--metric", en_metric, "l1|l2|linf");
  en->add_option("--grid-res", en_grid, "Grid nodes per axis")->check(CLI::Range(2, 4096));
  en->add_option("--pad", en_pad, "Padding around the data bounding box");
  en->add_option("--out", en_out, "Output directory");

  // selftest
  auto* st = app.add_subcommand("selftest", "Run the built-in quick checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (toy->parsed()) return run_toy_curves(toy_out, toy_eps_max);

    if (sun->parsed())
      return run_sunset(sun_out, sun_n, sun_grid, sun_seed, !sun_random, sun_metric);

    if (ev->parsed()) {
      genacc::LabeledDataset data;
      std::string source;
      if (!ev_data.empty()) {
        data = genacc::load_csv(ev_data);
        source = ev_data;
      } else if (ev_toy_sample > 0) {
        data = genacc::sample_region(genacc::make_toy_region(), ev_toy_sample, ev_seed);
        source = "toy-sample";
      } else if (ev_sunset > 0) {
        data = genacc::make_sunset(ev_sunset, ev_seed);
        source = "sunset";
      } else {
        throw std::invalid_argument("eval needs one of --data, --toy-sample, --sunset");
      }
      if (data.conflicts.count > 0)
        std::fprintf(stderr, "warning: %zu identical points carry different labels\n",
                     data.conflicts.count);

      genacc::EvalConfig cfg;
      cfg.metric = genacc::metric_from_string(ev_metric);
      cfg.norm = ev_norm == "exact" ? genacc::NormMode::EXACT : genacc::NormMode::MAX;
      cfg.kind =
          ev_kind == "standard" ? genacc::AccuracyKind::STANDARD : genacc::AccuracyKind::GENUINE;
      cfg.voronoi_mode = ev_voronoi == "class" ? genacc::VoronoiMode::CLASS_REGION
                                               : genacc::VoronoiMode::POINT_CELL;
      cfg.search = ev_search == "pgd" ? genacc::SearchMode::PGD : genacc::SearchMode::GRID;
      cfg.grid_resolution = ev_grid_res;
      cfg.sphere_directions = ev_dirs;
      cfg.seed = ev_seed;

      const auto f = make_classifier(choice, data, cfg.metric, ev_seed);
      const auto grid = genacc::uniform_eps_grid(ev_eps_max, ev_eps_steps);
      const auto curve = genacc::accuracy_curve(*f, data, grid, cfg, choice.name);

      ensure_dir(ev_out);
      write_curve_csv(ev_out + "/curve.csv", curve.points);
      const double area = genacc::ara(curve);
      write_run_config(ev_out, {{"command", "eval"},
                                {"source", source},
                                {"n", data.size()},
                                {"dim", data.dim},
                                {"dataset_hash", genacc::dataset_hash(data)},
                                {"classifier", choice.name},
                                {"evaluator", curve.evaluator_tag},
                                {"metric", ev_metric},
                                {"norm", ev_norm},
                                {"kind", ev_kind},
                                {"voronoi", ev_voronoi},
                                {"search", ev_search},
                                {"eps_max", ev_eps_max},
                                {"eps_steps", ev_eps_steps},
                                {"grid_resolution", ev_grid_res},
                                {"sphere_directions", ev_dirs},
                                {"seed", ev_seed},
                                {"ara", area},
                                {"threads", threads_in_use()}});
      std::printf("%s %s: ara=%s over [0, %s]\n", curve.evaluator_tag.c_str(),
                  choice.name.c_str(), fmt17(area).c_str(), fmt17(ev_eps_max).c_str());
      for (const auto& p : curve.points)
        if (!p.defined)
          std::fprintf(stderr, "note: accuracy undefined at eps=%s (empty base set)\n",
                       fmt17(p.eps).c_str());
      return 0;
    }

    if (an->parsed()) {
      genacc::LabeledDataset data;
      std::string source;
      if (!an_data.empty()) {
        data = genacc::load_csv(an_data);
        source = an_data;
      } else if (!an_images.empty() && !an_labels.empty()) {
        data = genacc::load_idx(an_images, an_labels);
        source = an_images;
      } else if (!an_cifar.empty()) {
        data = genacc::load_cifar10(an_cifar);
        source = an_cifar.front();
      } else {
        throw std::invalid_argument(
            "analyze needs --data, --idx-images/--idx-labels, or --cifar");
      }
      if (an_limit > 0) data = head_subset(data, an_limit);

      genacc::AnalysisOptions opts;
      opts.metric = genacc::metric_from_string(an_metric);
      opts.engine = genacc::engine_from_string(an_engine);
      opts.use_raw = !an_no_raw;
      opts.hist_bins = an_bins;
      opts.tile = an_tile;
      opts.checkpoint_path = an_checkpoint;
      opts.progress = [](std::size_t done, std::size_t total) {
        std::fprintf(stderr, "\rrows %zu/%zu", done, total);
        if (done == total) std::fprintf(stderr, "\n");
      };
      const auto rep = genacc::analyze_dataset(data, opts);

      ensure_dir(an_out);
      {
        std::ofstream out(an_out + "/stats.csv");
        out << "index,label,d_diff,d_same_min,d_same_max,ratio_min,ratio_max\n";
        for (std::size_t i = 0; i < rep.rows.size(); ++i) {
          const auto& r = rep.rows[i];
          out << i << "," << data.labels[i] << "," << fmt17(r.d_diff) << ","
              << fmt17(r.d_same_min) << "," << fmt17(r.d_same_max) << ","
              << fmt17(genacc::ratio_min(r)) << "," << fmt17(genacc::ratio_max(r)) << "\n";
        }
      }
      write_histogram_csv(an_out + "/hist_d_diff.csv", rep.hist_d_diff);
      write_histogram_csv(an_out + "/hist_ratio_min.csv", rep.hist_ratio_min);
      const json summary = {{"n", data.size()},
                            {"dim", data.dim},
                            {"metric", an_metric},
                            {"engine", an_engine},
                            {"raw_integer_path", rep.raw_integer_path},
                            {"min_d_diff", rep.min_d_diff},
                            {"mean_d_diff", rep.mean_d_diff},
                            {"max_d_diff", rep.max_d_diff},
                            {"loo_strict", rep.loo_strict},
                            {"loo_optimistic", rep.loo_optimistic},
                            {"mean_neglog2_ratio_min", rep.mean_neglog2_ratio_min},
                            {"mean_neglog2_ratio_max", rep.mean_neglog2_ratio_max},
                            {"excluded_ratio_min", rep.excluded_ratio_min},
                            {"excluded_ratio_max", rep.excluded_ratio_max},
                            {"label_conflicts", data.conflicts.count}};
      {
        std::ofstream out(an_out + "/summary.json");
        out << summary.dump(2) << "\n";
      }
      write_run_config(an_out, {{"command", "analyze"},
                                {"source", source},
                                {"limit", an_limit},
                                {"tile", an_tile},
                                {"checkpoint", an_checkpoint},
                                {"dataset_hash", genacc::dataset_hash(data)},
                                {"threads", threads_in_use()}});
      std::printf(
          "n=%zu  min d_diff=%s  loo(strict)=%s  loo(ties-ok)=%s\n"
          "mean -log2 ratio: nearest=%s (excl %zu)  farthest=%s (excl %zu)\n",
          data.size(), fmt17(rep.min_d_diff).c_str(), fmt17(rep.loo_strict).c_str(),
          fmt17(rep.loo_optimistic).c_str(), fmt17(rep.mean_neglog2_ratio_min).c_str(),
          rep.excluded_ratio_min, fmt17(rep.mean_neglog2_ratio_max).c_str(),
          rep.excluded_ratio_max);
      return 0;
    }

    if (en->parsed()) {
      genacc::LabeledDataset data =
          en_data.empty() ? genacc::make_ensemble_demo_dataset() : genacc::load_csv(en_data);
      if (data.dim != 2)
        throw std::invalid_argument("ensemble-grid needs a 2-D dataset");
      genacc::EnsembleConfig cfg;
      cfg.sigma = en_sigma;
      cfg.members = en_members;
      cfg.seed = en_seed;
      cfg.noise_model = en_noise == "rbf" ? genacc::NoiseModel::RBF_KERNEL_WEIGHTING
                                          : genacc::NoiseModel::GAUSSIAN_ISOTROPIC;
      cfg.vote =
          en_vote == "gradual" ? genacc::EnsembleVote::GRADUAL : genacc::EnsembleVote::HARD;
      cfg.kernel = genacc::kernel_from_string(en_kernel);
      const auto metric = genacc::metric_from_string(en_metric);
      const genacc::NoisyEnsembleClassifier f(data, metric, cfg);
      const auto& labels = f.score_labels();

      double lo0 = data.points[0], hi0 = lo0, lo1 = data.points[1], hi1 = lo1;
      for (std::size_t i = 0; i < data.size(); ++i) {
        lo0 = std::min(lo0, data.points[2 * i]);
        hi0 = std::max(hi0, data.points[2 * i]);
        lo1 = std::min(lo1, data.points[2 * i + 1]);
        hi1 = std::max(hi1, data.points[2 * i + 1]);
      }
      lo0 -= en_pad;
      hi0 += en_pad;
      lo1 -= en_pad;
      hi1 += en_pad;

      ensure_dir(en_out);
      std::ofstream grid(en_out + "/grid.csv");
      grid << "x1,x2";
      for (int lab : labels) grid << ",score_" << lab;
      grid << ",pred\n";
      for (int a = 0; a < en_grid; ++a) {
        for (int b = 0; b < en_grid; ++b) {
          const double x1 = lo0 + (hi0 - lo0) * a / (en_grid - 1);
          const double x2 = lo1 + (hi1 - lo1) * b / (en_grid - 1);
          const double z[2] = {x1, x2};
          const auto s = f.scores(std::span<const double>(z, 2));
          grid << fmt17(x1) << "," << fmt17(x2);
          for (double v : s) grid << "," << fmt17(v);
          grid << "," << f.predict(std::span<const double>(z, 2)) << "\n";
        }
      }
      genacc::save_csv(data, en_out + "/points.csv");
      write_run_config(en_out, {{"command", "ensemble-grid"},
                                {"sigma", en_sigma},
                                {"members", en_members},
                                {"seed", en_seed},
                                {"noise", en_noise},
                                {"vote", en_vote},
                                {"kernel", en_kernel},
                                {"metric", en_metric},
                                {"grid_res", en_grid},
                                {"pad", en_pad},
                                {"dataset_hash", genacc::dataset_hash(data)},
                                {"threads", threads_in_use()}});
      std::printf("wrote %dx%d score grid for %zu members (sigma=%s)\n", en_grid, en_grid,
                  en_members, fmt17(en_sigma).c_str());
      return 0;
    }

    if (st->parsed()) {
      int failures = 0;
      auto check = [&failures](bool ok, const std::string& name) {
        std::printf("%s %s\n", ok ? "PASS" : "FAIL", name.c_str());
        failures += ok ? 0 : 1;
      };
      using namespace genacc;
      const auto region = make_toy_region();
      const auto f1 = step_classifier("f1");
      const auto f2 = step_classifier("f2");
      const auto f3 = step_classifier("f3");

      check(analytic::std_acc_max(f1, region, 0.5) == 0.75, "band worst-case accuracy");
      check(analytic::std_acc_exact(f2, region, 5.5) == 0.25, "sphere accuracy at 5.5");
      check(analytic::gen_acc_exact(f2, region, 2.0) == 1.0,
            "constrained sphere accuracy at the class gap");
      check(analytic::gen_acc_max_class_region(f3, region, 4.0) == 1.0,
            "region-constrained accuracy of the matched step");
      for (const auto* f : {&f1, &f2, &f3}) {
        const auto c = analytic::accuracy_curve(analytic::CurveKind::STD_MAX, *f, region, 6.3);
        check(analytic::ara(c) == 1.5, "worst-case curve area 1.5");
      }
      {
        const auto data = sample_region(region, 64, 7);
        const NearestNeighborClassifier nn(data, Metric::L2);
        EvalConfig cfg;
        bool all_one = true;
        for (double e : {0.0, 0.3, 1.7})
          all_one = all_one && genuine_adv_acc_max(nn, data, e, cfg) == 1.0;
        check(all_one, "1-NN keeps constrained worst-case accuracy at 1");
      }
      {
        const auto demo = make_ensemble_demo_dataset();
        EnsembleConfig cfg;
        cfg.sigma = 0.0;
        cfg.members = 16;
        const NoisyEnsembleClassifier ens(demo, Metric::L2, cfg);
        bool same = true;
        for (std::size_t i = 0; i < demo.size(); ++i)
          same = same && ens.predict(demo.point(i)) ==
                             predict_1nn(demo.point(i), demo, Metric::L2).label;
        check(same, "zero-noise ensemble matches plain nearest neighbor");
      }
      std::printf(failures == 0 ? "all selftests passed\n" : "%d selftest(s) failed\n",
                  failures);
      return failures == 0 ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
