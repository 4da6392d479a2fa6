// fairpca: fit fair/plain PCA subspaces, sweep target dimensions, explore
// the multi-start frontier, and run the downstream-classifier composition
// study. Outputs are deterministic given the config (wall-clock columns
// aside) and written atomically.

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fairpca/fairpca.hpp"

namespace fs = std::filesystem;
using namespace fairpca;

namespace {

struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string data, schema, sensitive;
  std::string mode = "pairwise";
  std::string penalty = "squared";
  std::string lr;  // empty: per-command default
  double alpha = -1.0;
  bool alpha_given = false;
  int r = 0;  // 0: per-command default
  int r_min = 2, r_max = 10;
  int iters = 2000;
  std::uint64_t seed = 0;
  int restarts = 4;
  std::string out = "fairpca_out";
  bool no_normalize = false;
  bool exclude_sensitive = false;
  bool no_standardize = false;
  bool warm_start = false;
  double test_fraction = 0.3;
  int synthetic_n = 0;  // > 0 selects the synthetic mirrored fixture
  int synthetic_d = 2;
  double synthetic_angle = 0.7853981633974483;
  bool raw_group_losses = false;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string config_hash(const std::string& command, const Options& o) {
  std::ostringstream ss;
  ss << command << '|' << o.data << '|' << o.schema << '|' << o.sensitive
     << '|' << o.mode << '|' << o.penalty << '|' << o.lr << '|' << o.alpha
     << '|' << o.alpha_given << '|' << o.r << '|' << o.r_min << '|' << o.r_max
     << '|' << o.iters << '|' << o.seed << '|' << o.restarts << '|'
     << o.no_normalize << '|' << o.exclude_sensitive << '|' << o.no_standardize
     << '|' << o.warm_start << '|' << o.test_fraction << '|' << o.synthetic_n
     << '|' << o.synthetic_d << '|' << o.synthetic_angle;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, fnv1a(ss.str()));
  return buf;
}

void atomic_write(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw config_error("cannot write " + tmp.string());
    out << content;
  }
  fs::rename(tmp, path);
}

Mode parse_mode(const std::string& s) {
  if (s == "single") return Mode::kSingle;
  if (s == "pairwise") return Mode::kPairwise;
  throw config_error("unknown mode '" + s + "'");
}

Penalty parse_penalty(const std::string& s) {
  if (s == "squared") return Penalty::kSquared;
  if (s == "exp") return Penalty::kExponential;
  throw config_error("unknown penalty '" + s + "'");
}

LineSearch parse_lr(const std::string& s, LineSearch fallback) {
  if (s.empty()) return fallback;
  if (s == "backtracking") return LineSearch::kBacktracking;
  if (s == "inv-sqrt") return LineSearch::kFixedInvSqrt;
  throw config_error("unknown --lr '" + s + "'");
}

GroupedDataset load_dataset(const Options& o) {
  if (!o.data.empty()) {
    if (o.schema.empty()) throw config_error("--data requires --schema");
    DatasetSchema schema = DatasetSchema::from_json_file(o.schema);
    if (!o.sensitive.empty()) schema.set_sensitive(o.sensitive);
    const RawTable table = load_csv(o.data, schema);
    PreprocessOptions opts;
    opts.include_sensitive = !o.exclude_sensitive;
    opts.standardize = !o.no_standardize;
    GroupedDataset gd = preprocess(table, opts);
    for (const std::string& w : gd.warnings) {
      std::cerr << "warning: " << w << "\n";
    }
    std::cerr << "loaded " << table.total_rows << " rows, kept "
              << table.row_count << " (" << table.dropped_missing
              << " missing, " << table.dropped_excluded
              << " excluded), d = " << gd.dim() << ", k = "
              << gd.group_count() << "\n";
    return gd;
  }
  if (o.synthetic_n > 0) {
    return synthetic_mirrored_groups(o.synthetic_n, o.synthetic_d,
                                     o.synthetic_angle, o.seed);
  }
  throw config_error("either --data/--schema or --synthetic-n is required");
}

FairPcaProblem make_problem(const GroupedDataset& gd, int r, Mode mode,
                            Penalty penalty, const Options& o) {
  if (r < 1 || r > gd.dim()) {
    throw config_error("target dimension r = " + std::to_string(r) +
                       " outside [1, " + std::to_string(gd.dim()) + "]");
  }
  std::optional<double> alpha;
  if (o.alpha_given) {
    if (o.alpha < 0.0) throw config_error("--alpha must be >= 0");
    alpha = o.alpha;
  }
  const GroupLossScale scale = o.raw_group_losses ? GroupLossScale::kRaw
                                                  : GroupLossScale::kPerSample;
  return FairPcaProblem::from_groups(split_groups(gd), r, mode, penalty, alpha,
                                     scale);
}

SolverConfig make_solver_config(const Options& o, LineSearch fallback) {
  SolverConfig config;
  config.max_iters = o.iters;
  config.line_search = parse_lr(o.lr, fallback);
  config.seed = o.seed;
  config.restarts = o.restarts;
  config.normalize = !o.no_normalize;
  config.validate();
  return config;
}

Subspace initial_subspace(const FairPcaProblem& problem, const Options& o) {
  if (o.warm_start) {
    return top_r_eigensubspace(problem.global_gram(), problem.target_dim());
  }
  return random_orthonormal(problem.dim(), problem.target_dim(), o.seed);
}

std::string subspace_text(const Subspace& u) {
  std::ostringstream ss;
  ss << u.dim() << "\n" << u.target_dim() << "\n";
  for (Eigen::Index i = 0; i < u.dim(); ++i) {
    for (Eigen::Index j = 0; j < u.target_dim(); ++j) {
      ss << (j ? " " : "") << fmt(u.basis()(i, j));
    }
    ss << "\n";
  }
  return ss.str();
}

std::string trace_csv(const SolverTrace& trace, const std::string& hash) {
  std::ostringstream ss;
  ss << "# config-hash " << hash << "\n";
  const Eigen::Index m =
      trace.iterations.empty() ? 0 : trace.iterations[0].objectives.size();
  ss << "t,eta,descent_norm,wall_ms";
  for (Eigen::Index i = 0; i < m; ++i) ss << ",f_" << i;
  for (Eigen::Index i = 0; i < m; ++i) ss << ",lambda_" << i;
  ss << "\n";
  for (size_t t = 0; t < trace.iterations.size(); ++t) {
    const IterationRecord& rec = trace.iterations[t];
    ss << (t + 1) << ',' << fmt(rec.step_size) << ',' << fmt(rec.descent_norm)
       << ',' << fmt(rec.wall_ms);
    for (Eigen::Index i = 0; i < m; ++i) ss << ',' << fmt(rec.objectives[i]);
    for (Eigen::Index i = 0; i < m; ++i) ss << ',' << fmt(rec.weights[i]);
    ss << "\n";
  }
  return ss.str();
}

const char* lr_name(LineSearch ls) {
  return ls == LineSearch::kBacktracking ? "backtracking" : "inv-sqrt";
}

// --- minimal SVG line chart -------------------------------------------------

struct Series {
  std::string name;
  std::vector<double> x, y;
};

std::string svg_chart(const std::string& title, const std::string& x_label,
                      const std::string& y_label,
                      const std::vector<Series>& series) {
  const double width = 640, height = 420;
  const double left = 70, right = 610, top = 50, bottom = 370;
  double x_min = 1e300, x_max = -1e300, y_min = 1e300, y_max = -1e300;
  for (const Series& s : series) {
    for (double v : s.x) { x_min = std::min(x_min, v); x_max = std::max(x_max, v); }
    for (double v : s.y) { y_min = std::min(y_min, v); y_max = std::max(y_max, v); }
  }
  if (!(x_max > x_min)) x_max = x_min + 1.0;
  if (!(y_max > y_min)) y_max = y_min + 1.0;
  y_min = std::min(y_min, 0.0);
  auto px = [&](double x) { return left + (right - left) * (x - x_min) / (x_max - x_min); };
  auto py = [&](double y) { return bottom - (bottom - top) * (y - y_min) / (y_max - y_min); };
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};

  std::ostringstream ss;
  ss << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width
     << "' height='" << height << "'>\n";
  ss << "<rect width='100%' height='100%' fill='white'/>\n";
  ss << "<text x='" << (width / 2) << "' y='25' text-anchor='middle' "
        "font-size='16'>" << title << "</text>\n";
  ss << "<line x1='" << left << "' y1='" << bottom << "' x2='" << right
     << "' y2='" << bottom << "' stroke='black'/>\n";
  ss << "<line x1='" << left << "' y1='" << top << "' x2='" << left
     << "' y2='" << bottom << "' stroke='black'/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = x_min + (x_max - x_min) * i / 4.0;
    const double yv = y_min + (y_max - y_min) * i / 4.0;
    char xbuf[32], ybuf[32];
    std::snprintf(xbuf, sizeof(xbuf), "%g", xv);
    std::snprintf(ybuf, sizeof(ybuf), "%.3g", yv);
    ss << "<text x='" << px(xv) << "' y='" << (bottom + 20)
       << "' text-anchor='middle' font-size='11'>" << xbuf << "</text>\n";
    ss << "<text x='" << (left - 8) << "' y='" << (py(yv) + 4)
       << "' text-anchor='end' font-size='11'>" << ybuf << "</text>\n";
  }
  ss << "<text x='" << (width / 2) << "' y='" << (height - 10)
     << "' text-anchor='middle' font-size='13'>" << x_label << "</text>\n";
  ss << "<text x='18' y='" << ((top + bottom) / 2)
     << "' text-anchor='middle' font-size='13' transform='rotate(-90 18 "
     << ((top + bottom) / 2) << ")'>" << y_label << "</text>\n";
  for (size_t s = 0; s < series.size(); ++s) {
    const char* color = colors[s % 4];
    std::ostringstream pts;
    for (size_t i = 0; i < series[s].x.size(); ++i) {
      pts << px(series[s].x[i]) << ',' << py(series[s].y[i]) << ' ';
    }
    ss << "<polyline fill='none' stroke='" << color
       << "' stroke-width='2' points='" << pts.str() << "'/>\n";
    ss << "<text x='" << (right - 150) << "' y='" << (top + 18 * s)
       << "' font-size='12' fill='" << color << "'>" << series[s].name
       << "</text>\n";
  }
  ss << "</svg>\n";
  return ss.str();
}

// --- commands ----------------------------------------------------------------

int cmd_fit(const Options& o) {
  const std::string hash = config_hash("fit", o);
  const GroupedDataset gd = load_dataset(o);
  const int r = o.r > 0 ? o.r : 2;
  const auto problem =
      make_problem(gd, r, parse_mode(o.mode), parse_penalty(o.penalty), o);
  const SolverConfig config = make_solver_config(o, LineSearch::kBacktracking);

  const auto result = pareto_fair_pca(problem, config, initial_subspace(problem, o));
  const Subspace baseline = top_r_eigensubspace(problem.global_gram(), r);
  const FairnessReport report = fairness_report(problem, result.subspace, baseline);

  const fs::path out(o.out);
  atomic_write(out / "subspace.txt", subspace_text(result.subspace));
  atomic_write(out / "trace.csv", trace_csv(result.trace, hash));

  std::ostringstream rep;
  rep << "# config-hash " << hash << "\n";
  write_report_kv(rep, report, gd.group_names);
  rep << "mode " << o.mode << "\n";
  rep << "penalty " << o.penalty << "\n";
  rep << "alpha " << fmt(problem.alpha()) << "\n";
  const auto gaps = eigen_gap_diagnostics(problem.weighted_group_grams());
  rep << "alpha_bound_appendix " << fmt(gaps.appendix_bound) << "\n";
  rep << "eigen_gap_main_text " << fmt(gaps.main_text_gamma) << "\n";
  rep << "line_search " << lr_name(config.line_search) << "\n";
  rep << "iterations " << result.trace.iterations.size() << "\n";
  rep << "termination " << to_string(result.reason) << "\n";
  atomic_write(out / "report.txt", rep.str());

  std::cout << "fit: r=" << r << " total_loss=" << fmt(report.total_loss)
            << " avg_disparity=" << fmt(report.avg_disparity)
            << " baseline_avg_disparity=" << fmt(report.baseline_avg_disparity)
            << " (" << to_string(result.reason) << ", "
            << result.trace.iterations.size() << " iters)\n";
  return 0;
}

int cmd_sweep(const Options& o) {
  const std::string hash = config_hash("sweep", o);
  const GroupedDataset gd = load_dataset(o);
  if (o.r_min < 1 || o.r_max < o.r_min || o.r_max > gd.dim()) {
    throw config_error("invalid r range");
  }
  const Penalty penalty = parse_penalty(o.penalty);
  const int k = gd.group_count();

  std::ostringstream csv;
  csv << "# config-hash " << hash << "\n";
  csv << "r,method,status,iterations,wall_ms,total_loss,avg_disparity,"
         "avg_pairwise_disparity";
  for (const std::string& g : gd.group_names) csv << ",loss_" << g;
  for (const std::string& g : gd.group_names) csv << ",disp_" << g;
  csv << "\n";

  const char* methods[] = {"plain", "fair-pairwise", "fair-single"};
  std::map<std::string, Series> disparity_series, pairwise_series, loss_series;

  for (int r = o.r_min; r <= o.r_max; ++r) {
    for (const char* method : methods) {
      csv << r << ',' << method << ',';
      try {
        const Mode mode = std::string(method) == "fair-single"
                              ? Mode::kSingle
                              : Mode::kPairwise;
        const auto problem = make_problem(gd, r, mode, penalty, o);
        const auto tic = std::chrono::steady_clock::now();
        Subspace u = top_r_eigensubspace(problem.global_gram(), r);
        size_t iterations = 0;
        if (std::string(method) != "plain") {
          const SolverConfig config =
              make_solver_config(o, LineSearch::kFixedInvSqrt);
          const auto result =
              pareto_fair_pca(problem, config, initial_subspace(problem, o));
          u = result.subspace;
          iterations = result.trace.iterations.size();
        }
        const double wall_ms = std::chrono::duration<double, std::milli>(
                                   std::chrono::steady_clock::now() - tic)
                                   .count();
        const double total = reconstruction_loss(
            problem.global_gram(), problem.total_energy(), u.basis());
        double avg = 0.0;
        std::vector<double> losses, disps;
        for (Eigen::Index i = 0; i < k; ++i) {
          losses.push_back(group_loss(problem, i, u.basis()));
          disps.push_back(disparity_error(problem, i, u.basis()));
          avg += disps.back();
        }
        avg /= static_cast<double>(k);
        const double pairwise_gap = mean_pairwise_gap(disps);
        csv << "ok," << iterations << ',' << fmt(wall_ms) << ',' << fmt(total)
            << ',' << fmt(avg) << ',' << fmt(pairwise_gap);
        for (double v : losses) csv << ',' << fmt(v);
        for (double v : disps) csv << ',' << fmt(v);
        csv << "\n";
        disparity_series[method].name = method;
        disparity_series[method].x.push_back(r);
        disparity_series[method].y.push_back(avg);
        pairwise_series[method].name = method;
        pairwise_series[method].x.push_back(r);
        pairwise_series[method].y.push_back(pairwise_gap);
        loss_series[method].name = method;
        loss_series[method].x.push_back(r);
        loss_series[method].y.push_back(total);
      } catch (const std::exception& e) {
        std::string what = e.what();
        for (char& c : what) {
          if (c == ',' || c == '\n') c = ';';
        }
        csv << "error: " << what << ",,,,,";
        for (int i = 0; i < 2 * k; ++i) csv << ',';
        csv << "\n";
      }
    }
  }

  const fs::path out(o.out);
  atomic_write(out / "sweep.csv", csv.str());
  std::vector<Series> ds, ps, ls;
  for (const char* m : methods) {
    if (disparity_series.count(m)) ds.push_back(disparity_series[m]);
    if (pairwise_series.count(m)) ps.push_back(pairwise_series[m]);
    if (loss_series.count(m)) ls.push_back(loss_series[m]);
  }
  atomic_write(out / "sweep_avg_disparity.svg",
               svg_chart("Average disparity error vs target dimension", "r",
                         "average disparity error", ds));
  atomic_write(out / "sweep_avg_pairwise_disparity.svg",
               svg_chart("Average pairwise disparity error vs target dimension",
                         "r", "average |E_i - E_j| over pairs", ps));
  atomic_write(out / "sweep_total_loss.svg",
               svg_chart("Total reconstruction loss vs target dimension", "r",
                         "total reconstruction loss", ls));
  std::cout << "sweep: wrote " << (out / "sweep.csv").string() << "\n";
  return 0;
}

int cmd_compose(const Options& o) {
  const std::string hash = config_hash("compose", o);
  const GroupedDataset gd = load_dataset(o);
  if (!gd.labels.has_value()) {
    throw config_error("compose requires a schema with a label column");
  }
  if (gd.group_count() != 2) {
    throw config_error("compose requires a binary sensitive feature");
  }
  const int r = o.r > 0 ? o.r : 10;

  // Subspaces are fit on the full dataset; the split only affects the
  // downstream classifier study.
  const auto problem =
      make_problem(gd, r, parse_mode(o.mode), parse_penalty(o.penalty), o);
  const SolverConfig config = make_solver_config(o, LineSearch::kFixedInvSqrt);
  const auto fair = pareto_fair_pca(problem, config, initial_subspace(problem, o));
  const Subspace plain = top_r_eigensubspace(problem.global_gram(), r);

  const auto [train, test] = train_test_split(gd, o.test_fraction, o.seed);
  for (const std::string& w : train.warnings) std::cerr << "warning: " << w << "\n";

  std::ostringstream csv;
  csv << "# config-hash " << hash << "\n";
  csv << "method,group,accuracy,tpr,deo\n";
  std::map<std::string, double> deo_by_method;
  const struct {
    const char* name;
    const Subspace* u;
  } methods[] = {{"plain", &plain}, {"fair", &fair.subspace}};
  for (const auto& m : methods) {
    const Matrix z_train = train.matrix * m.u->basis();
    const Matrix z_test = test.matrix * m.u->basis();
    ClassifierConfig cc;
    cc.seed = o.seed;
    const auto model = train_linear_classifier(z_train, *train.labels, cc);
    const auto metrics = group_metrics(model, z_test, *test.labels, test.group_ids);
    const double d = deo(model, z_test, *test.labels, test.group_ids);
    deo_by_method[m.name] = d;
    for (int g = 0; g < gd.group_count(); ++g) {
      csv << m.name << ',' << gd.group_names[static_cast<size_t>(g)] << ','
          << fmt(metrics.accuracy[static_cast<size_t>(g)]) << ','
          << fmt(metrics.tpr[static_cast<size_t>(g)]) << ",\n";
    }
    csv << m.name << ",all,,," << fmt(d) << "\n";
  }

  atomic_write(fs::path(o.out) / "compose.csv", csv.str());
  std::cout << "compose: r=" << r << " deo_plain=" << fmt(deo_by_method["plain"])
            << " deo_fair=" << fmt(deo_by_method["fair"]) << "\n";
  return 0;
}

int cmd_frontier(const Options& o) {
  const std::string hash = config_hash("frontier", o);
  const GroupedDataset gd = load_dataset(o);
  const int r = o.r > 0 ? o.r : 2;
  const auto problem =
      make_problem(gd, r, parse_mode(o.mode), parse_penalty(o.penalty), o);
  const SolverConfig config = make_solver_config(o, LineSearch::kBacktracking);
  const auto frontier = pareto_frontier(problem, config);

  std::ostringstream csv;
  csv << "# config-hash " << hash << "\n";
  csv << "run,stationary,termination,iterations";
  for (Eigen::Index i = 0; i < problem.objective_count(); ++i) csv << ",f_" << i;
  csv << "\n";
  const fs::path out(o.out);
  for (size_t run = 0; run < frontier.size(); ++run) {
    const auto& result = frontier[run];
    const ObjectiveVector f =
        evaluate_objectives(problem, result.subspace.basis());
    csv << run << ',' << (result.stationary ? 1 : 0) << ','
        << to_string(result.reason) << ',' << result.trace.iterations.size();
    for (Eigen::Index i = 0; i < f.size(); ++i) csv << ',' << fmt(f[i]);
    csv << "\n";
    atomic_write(out / ("subspace_" + std::to_string(run) + ".txt"),
                 subspace_text(result.subspace));
  }
  atomic_write(out / "frontier.csv", csv.str());
  std::cout << "frontier: kept " << frontier.size() << " of " << o.restarts
            << " runs\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pareto fair PCA: multi-objective fair subspace learning"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--data", o.data, "input CSV path");
    cmd->add_option("--schema", o.schema, "dataset schema JSON path");
    cmd->add_option("--sensitive", o.sensitive, "override the sensitive column");
    cmd->add_option("--mode", o.mode, "single | pairwise")
        ->check(CLI::IsMember({"single", "pairwise"}));
    cmd->add_option("--penalty", o.penalty, "squared | exp")
        ->check(CLI::IsMember({"squared", "exp"}));
    cmd->add_option("--alpha", o.alpha,
                    "regularization override (default: eigen-gap bound)");
    cmd->add_option("--r", o.r, "target dimension");
    cmd->add_option("--iters", o.iters, "iteration budget");
    cmd->add_option("--lr", o.lr, "backtracking | inv-sqrt")
        ->check(CLI::IsMember({"backtracking", "inv-sqrt"}));
    cmd->add_option("--seed", o.seed, "random seed");
    cmd->add_option("--restarts", o.restarts, "number of restarts");
    cmd->add_option("--out", o.out, "output directory");
    cmd->add_flag("--no-normalize", o.no_normalize,
                  "skip gradient normalization");
    cmd->add_flag("--exclude-sensitive", o.exclude_sensitive,
                  "drop the sensitive column from the feature matrix");
    cmd->add_flag("--no-standardize", o.no_standardize,
                  "skip z-scoring of numeric columns");
    cmd->add_flag("--warm-start", o.warm_start,
                  "initialize from the plain PCA subspace");
    cmd->add_flag("--raw-group-losses", o.raw_group_losses,
                  "use unnormalized group losses in the fairness terms");
    cmd->add_option("--synthetic-n", o.synthetic_n,
                    "per-group sample count for the synthetic fixture");
    cmd->add_option("--synthetic-d", o.synthetic_d, "synthetic dimension");
    cmd->add_option("--synthetic-angle", o.synthetic_angle,
                    "synthetic mirror angle (radians)");
  };

  CLI::App* fit = app.add_subcommand("fit", "fit one fair subspace");
  add_common(fit);
  CLI::App* sweep = app.add_subcommand("sweep", "sweep target dimensions");
  add_common(sweep);
  sweep->add_option("--r-min", o.r_min, "sweep lower bound");
  sweep->add_option("--r-max", o.r_max, "sweep upper bound");
  CLI::App* compose =
      app.add_subcommand("compose", "downstream classifier study");
  add_common(compose);
  compose->add_option("--test-fraction", o.test_fraction, "test split share");
  CLI::App* frontier =
      app.add_subcommand("frontier", "multi-start Pareto frontier");
  add_common(frontier);

  // --alpha presence matters: absence selects the computed bound.
  for (CLI::App* cmd : {fit, sweep, compose, frontier}) {
    cmd->callback([&o, cmd] { o.alpha_given = cmd->count("--alpha") > 0; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (fit->parsed()) return cmd_fit(o);
    if (sweep->parsed()) return cmd_sweep(o);
    if (compose->parsed()) return cmd_compose(o);
    if (frontier->parsed()) return cmd_frontier(o);
    return 1;
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const load_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const invalid_input_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const dimension_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  }
}
