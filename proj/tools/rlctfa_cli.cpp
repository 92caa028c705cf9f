// rlctfa: command-line front end for the learning-coefficient toolkit.
//
// Exit codes: 0 success, 1 runtime or numerical failure, 2 usage or parse error.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rlctfa/evidence.hpp"
#include "rlctfa/io.hpp"
#include "rlctfa/kernels.hpp"
#include "rlctfa/learning_table.hpp"
#include "rlctfa/newton.hpp"
#include "rlctfa/parallel.hpp"
#include "rlctfa/scenarios.hpp"
#include "rlctfa/selection.hpp"
#include "rlctfa/volume.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

// Bad user input (as opposed to a failed computation).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string out;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::string isa = "auto";
};

void add_common(CLI::App* cmd, Common& c, bool seeded) {
  cmd->add_option("--out", c.out, "Directory for output files and manifest.json");
  if (seeded) {
    cmd->add_option("--seed", c.seed, "Base seed");
    cmd->add_option("--threads", c.threads, "Worker threads (default: all cores)");
    cmd->add_option("--isa", c.isa, "Kernel variant")->check(CLI::IsMember({"auto", "scalar", "avx2"}));
  }
}

unsigned resolve_threads(const Common& c) { return c.threads == 0 ? rlctfa::default_threads() : c.threads; }

void apply_isa(const Common& c) {
  using rlctfa::kernels::Isa;
  if (c.isa == "scalar") {
    rlctfa::kernels::set_active_isa(Isa::Scalar);
  } else if (c.isa == "avx2") {
    if (rlctfa::kernels::set_active_isa(Isa::Avx2) != Isa::Avx2) {
      throw UsageError("--isa avx2: not available on this machine or build");
    }
  } else {
    rlctfa::kernels::set_active_isa(rlctfa::kernels::detect_isa());
  }
}

// Writes outputs plus manifest.json under --out. `argv` is the invocation
// minus --out, which is what replay re-runs.
class Outputs {
 public:
  Outputs(std::string dir, std::string command, std::vector<std::string> argv)
      : dir_(std::move(dir)), command_(std::move(command)), argv_(std::move(argv)),
        start_(std::chrono::steady_clock::now()) {
    if (!dir_.empty()) fs::create_directories(dir_);
  }

  bool enabled() const { return !dir_.empty(); }

  void write(const std::string& name, const std::string& content) {
    if (!enabled()) return;
    rlctfa::io::write_file((fs::path(dir_) / name).string(), content);
    files_.push_back(name);
  }

  void finish(const json& config, std::uint64_t seed) {
    if (!enabled()) return;
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    json m;
    m["command"] = command_;
    m["argv"] = argv_;
    m["config"] = config;
    m["seed"] = seed;
    m["tool_version"] = kVersion;
    m["wall_clock_seconds"] = secs;
    m["outputs"] = files_;
    rlctfa::io::write_file((fs::path(dir_) / "manifest.json").string(), m.dump(2) + "\n");
  }

 private:
  std::string dir_;
  std::string command_;
  std::vector<std::string> argv_;
  std::vector<std::string> files_;
  std::chrono::steady_clock::time_point start_;
};

std::vector<std::string> strip_out(const std::vector<std::string>& args) {
  std::vector<std::string> kept;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--out") {
      ++i;
      continue;
    }
    if (args[i].rfind("--out=", 0) == 0) continue;
    kept.push_back(args[i]);
  }
  return kept;
}

rlctfa::FactorModelPoint load_point(const std::string& scenario, const std::string& sigma_file) {
  if (!sigma_file.empty()) return rlctfa::io::read_point(rlctfa::io::read_file(sigma_file));
  try {
    return rlctfa::builtin_scenario(scenario);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

std::string f17(double v) { return rlctfa::io::format_double(v); }

// ---------------------------------------------------------------- table

int cmd_table(int p, int k_max, const std::string& format, Outputs& out) {
  const auto table = rlctfa::sbic_penalty_matrix(p, k_max);
  const std::string body =
      format == "json" ? rlctfa::io::penalty_table_json(table).dump(2) + "\n" : rlctfa::io::penalty_table_csv(table);
  if (out.enabled()) {
    out.write(format == "json" ? "table.json" : "table.csv", body);
  } else {
    std::cout << body;
  }
  out.finish({{"p", p}, {"kmax", k_max}, {"format", format}}, 0);
  return 0;
}

// ------------------------------------------------------------- monomial

int cmd_monomial(const std::string& file, const std::string& tau_text, Outputs& out) {
  rlctfa::IdealInput input = rlctfa::parse_ideal(rlctfa::io::read_file(file));
  if (!tau_text.empty()) {
    std::vector<int> tau;
    std::stringstream ss(tau_text);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        tau.push_back(std::stoi(cell));
      } catch (const std::exception&) {
        throw UsageError("--tau: not an integer: '" + cell + "'");
      }
    }
    if (static_cast<int>(tau.size()) != input.ideal.dim()) throw UsageError("--tau: length must equal dim");
    for (int t : tau) {
      if (t < 0) throw UsageError("--tau: negative entry");
    }
    input.tau.tau = tau;
  }
  const auto pair = rlctfa::rlct_monomial(input.ideal, input.tau);
  const json result = {{"lambda", pair.lambda().str()}, {"mult", pair.mult()}};
  std::cout << result.dump() << "\n";
  out.write("rlct.json", result.dump(2) + "\n");
  out.finish({{"ideal_file", file}, {"tau", input.tau.tau}}, 0);
  return 0;
}

// --------------------------------------------------------------- volume

struct VolumeArgs {
  std::string scenario = "generic3";
  std::string sigma_file;
  int k = 1;
  long long samples = 10'000'000;
  int points = 6;
  double top_fraction = 0.05;
  long long min_count = 1000;
  double ratio = 0.0;
  std::vector<double> eps;
  double radius = 0.0;
  bool loglog = false;
};

int cmd_volume(const VolumeArgs& a, const Common& c, Outputs& out) {
  const auto point = load_point(a.scenario, a.sigma_file);
  const unsigned threads = resolve_threads(c);
  rlctfa::VolumeConfig cfg;
  cfg.box_radius = a.radius > 0.0 ? a.radius : rlctfa::default_box_radius(point);
  if (!a.eps.empty()) {
    cfg.eps_grid = a.eps;
  } else if (a.ratio > 0.0) {
    cfg.eps_grid = rlctfa::geometric_eps_grid(point, a.k, cfg.box_radius, c.seed, a.top_fraction, a.points, a.ratio);
  } else {
    cfg.eps_grid =
        rlctfa::calibrate_eps_grid(point, a.k, cfg.box_radius, c.seed, a.samples, a.top_fraction, a.points, a.min_count);
  }
  cfg.samples = a.samples;
  cfg.seed = c.seed;
  cfg.threads = threads;
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const auto vol = rlctfa::estimate_levelset_volumes(point, a.k, cfg);
  const auto fit = rlctfa::fit_exponent(vol, a.loglog);
  const double learning = (fit.ell_hat + point.p()) / 2.0;

  json summary;
  summary["p"] = point.p();
  summary["k"] = a.k;
  summary["box_radius"] = f17(cfg.box_radius);
  summary["samples_per_eps"] = cfg.samples;
  summary["ell_hat"] = f17(fit.ell_hat);
  summary["ell_std_error"] = f17(fit.std_error);
  summary["residual_rms"] = f17(fit.residual_rms);
  summary["levels_used"] = fit.points_used;
  summary["learning_coefficient_hat"] = f17(learning);
  if (fit.mult_minus_one) summary["mult_minus_one_hat"] = f17(*fit.mult_minus_one);
  std::cout << summary.dump(2) << "\n";

  out.write("volume.csv", rlctfa::io::volume_csv(vol));
  out.write("summary.json", summary.dump(2) + "\n");
  if (out.enabled()) {
    rlctfa::io::PlotSeries series;
    for (std::size_t e = 0; e < vol.eps.size(); ++e) {
      if (vol.counts[e] > 0) series.points.emplace_back(std::log(vol.eps[e]), std::log(vol.fraction[e]));
    }
    // Intercept through the centroid of the plotted points.
    double mx = 0, my = 0;
    for (const auto& [x, y] : series.points) {
      mx += x;
      my += y;
    }
    if (!series.points.empty()) {
      mx /= static_cast<double>(series.points.size());
      my /= static_cast<double>(series.points.size());
    }
    series.slope = fit.ell_hat;
    series.intercept = my - fit.ell_hat * mx;
    series.label = "slope " + std::to_string(fit.ell_hat);
    out.write("volume.svg", rlctfa::io::svg_scatter_with_fit({series}, "Level-set volume", "log eps", "log V(eps)"));
  }

  json config = {{"scenario", a.sigma_file.empty() ? a.scenario : ""},
                 {"sigma_file", a.sigma_file},
                 {"k", a.k},
                 {"samples", a.samples},
                 {"eps_grid", cfg.eps_grid},
                 {"box_radius", cfg.box_radius},
                 {"threads", threads},
                 {"loglog", a.loglog}};
  out.finish(config, c.seed);
  return 0;
}

// ------------------------------------------------------------- evidence

struct EvidenceArgs {
  std::string scenario = "diag3";
  std::string sigma_file;
  int k = 1;
  std::vector<long> n_grid{50, 100, 200, 400, 800};
  int replicates = 20;
  long long draws = 100'000;
  double psi_rate = 1.0;
  double lambda_sd = 1.0;
  std::optional<double> self_test;
  std::string method = "importance";
};

int cmd_evidence(const EvidenceArgs& a, const Common& c, Outputs& out) {
  if (a.self_test) {
    // Noiseless check of the regression: F_n = slope * log n + 1.
    std::vector<std::pair<long, double>> pts;
    for (long n : a.n_grid) pts.emplace_back(n, *a.self_test * std::log(static_cast<double>(n)) + 1.0);
    const auto fit = rlctfa::fit_learning_coefficient(pts);
    const json result = {{"self_test", true}, {"ell_hat", f17(fit.ell_hat)}, {"intercept", f17(fit.intercept)}};
    std::cout << result.dump(2) << "\n";
    out.write("summary.json", result.dump(2) + "\n");
    out.finish({{"self_test", *a.self_test}, {"n_grid", a.n_grid}}, c.seed);
    return 0;
  }

  const auto point = load_point(a.scenario, a.sigma_file);
  const unsigned threads = resolve_threads(c);
  const rlctfa::PriorSpec prior{a.psi_rate, a.lambda_sd};
  try {
    prior.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  rlctfa::EvidenceOptions opts;
  opts.threads = threads;
  opts.method = a.method == "prior" ? rlctfa::EvidenceMethod::PriorSampling : rlctfa::EvidenceMethod::Importance;
  const auto exp = rlctfa::run_evidence_experiment(point, a.k, prior, a.n_grid, a.replicates, a.draws, c.seed, opts);

  std::string csv = "replicate,n,k,log_marginal,stderr,F_n\n";
  for (const auto& pt : exp.points) {
    csv += std::to_string(pt.replicate) + "," + std::to_string(pt.n) + "," + std::to_string(pt.k) + "," +
           f17(pt.log_marginal) + "," + f17(pt.std_error) + "," + f17(pt.f_n) + "\n";
  }
  std::string fits_csv = "replicate,ell_hat,intercept,std_error\n";
  double mean = 0.0;
  for (std::size_t r = 0; r < exp.fits.size(); ++r) {
    const auto& f = exp.fits[r];
    fits_csv += std::to_string(r) + "," + f17(f.ell_hat) + "," + f17(f.intercept) + "," + f17(f.std_error) + "\n";
    mean += f.ell_hat;
  }
  mean /= static_cast<double>(exp.fits.size());

  // Pooled fit over the replicate-averaged F_n.
  std::vector<std::pair<long, double>> avg;
  for (std::size_t i = 0; i < exp.points.size(); ++i) {
    const auto& pt = exp.points[i];
    auto it = std::find_if(avg.begin(), avg.end(), [&](const auto& q) { return q.first == pt.n; });
    if (it == avg.end()) {
      avg.emplace_back(pt.n, pt.f_n);
    } else {
      it->second += pt.f_n;
    }
  }
  for (auto& q : avg) q.second /= a.replicates;
  const auto pooled = rlctfa::fit_learning_coefficient(avg);

  json summary = {{"k", a.k},
                  {"replicates", a.replicates},
                  {"draws", a.draws},
                  {"n_grid", a.n_grid},
                  {"mean_ell_hat", f17(mean)},
                  {"pooled_ell_hat", f17(pooled.ell_hat)},
                  {"pooled_intercept", f17(pooled.intercept)},
                  {"pooled_std_error", f17(pooled.std_error)}};
  std::cout << summary.dump(2) << "\n";

  out.write("evidence.csv", csv);
  out.write("fits.csv", fits_csv);
  out.write("summary.json", summary.dump(2) + "\n");
  if (out.enabled()) {
    rlctfa::io::PlotSeries series;
    for (const auto& pt : exp.points) series.points.emplace_back(std::log(static_cast<double>(pt.n)), pt.f_n);
    series.slope = pooled.ell_hat;
    series.intercept = pooled.intercept;
    series.label = "pooled slope " + std::to_string(pooled.ell_hat);
    out.write("evidence.svg", rlctfa::io::svg_scatter_with_fit({series}, "Evidence deviation", "log n", "F_n"));
  }

  json config = {{"scenario", a.sigma_file.empty() ? a.scenario : ""},
                 {"sigma_file", a.sigma_file},
                 {"k", a.k},
                 {"n_grid", a.n_grid},
                 {"replicates", a.replicates},
                 {"draws", a.draws},
                 {"prior", {{"psi_rate", a.psi_rate}, {"lambda_sd", a.lambda_sd}}},
                 {"method", a.method},
                 {"threads", threads}};
  out.finish(config, c.seed);
  return 0;
}

// ----------------------------------------------------------------- sbic

int cmd_sbic(rlctfa::SelectionConfig cfg, const Common& c, Outputs& out) {
  cfg.seed = c.seed;
  cfg.threads = resolve_threads(c);
  if (cfg.k_max < 0 || cfg.k_max > cfg.p || cfg.true_r < 0 || cfg.true_r > cfg.p || cfg.n < 2 || cfg.replicates < 1) {
    throw UsageError("sbic: need 0 <= kmax, true-r <= p, n >= 2, replicates >= 1");
  }
  const auto res = rlctfa::run_selection_experiment(cfg);
  std::string csv = "criterion";
  for (int k = 0; k <= cfg.k_max; ++k) csv += ",freq_k" + std::to_string(k);
  csv += "\n";
  auto row = [&](const char* name, auto freq) {
    csv += name;
    for (int k = 0; k <= cfg.k_max; ++k) csv += "," + f17(freq(k));
    csv += "\n";
  };
  row("bic", [&](int k) { return res.bic_frequency(k); });
  row("sbic", [&](int k) { return res.sbic_frequency(k); });
  std::cout << csv;
  out.write("selection.csv", csv);
  json config = {{"p", cfg.p},         {"kmax", cfg.k_max},     {"true_r", cfg.true_r},
                 {"n", cfg.n},         {"replicates", cfg.replicates},
                 {"threads", cfg.threads}, {"regular_penalties", cfg.regular_penalties}};
  out.finish(config, c.seed);
  return 0;
}

int run(const std::vector<std::string>& args);

// --------------------------------------------------------------- replay

int cmd_replay(const std::string& manifest_file, const std::string& out_dir) {
  json m;
  try {
    m = json::parse(rlctfa::io::read_file(manifest_file));
  } catch (const json::parse_error& e) {
    throw UsageError(std::string("manifest: ") + e.what());
  }
  if (!m.contains("argv") || !m["argv"].is_array()) throw UsageError("manifest: missing argv");
  auto args = m["argv"].get<std::vector<std::string>>();
  if (!args.empty() && args.front() == "replay") throw UsageError("manifest: cannot replay a replay");
  if (!out_dir.empty()) {
    args.push_back("--out");
    args.push_back(out_dir);
  }
  return run(args);
}

int run(const std::vector<std::string>& args) {
  CLI::App app{"Learning coefficients of factor analysis models"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  Common common;

  auto* table = app.add_subcommand("table", "Learning-coefficient table used by sBIC");
  int t_p = 0, t_kmax = 0;
  std::string t_format = "csv";
  table->add_option("--p", t_p, "Number of observed variables")->required()->check(CLI::Range(1, 1000));
  table->add_option("--kmax", t_kmax, "Largest number of factors")->required()->check(CLI::NonNegativeNumber);
  table->add_option("--format", t_format)->check(CLI::IsMember({"csv", "json"}));
  add_common(table, common, false);

  auto* monomial = app.add_subcommand("monomial", "RLCT of a monomial ideal");
  std::string m_file, m_tau;
  monomial->add_option("ideal", m_file, "Ideal file (JSON: dim, generators, tau)")->required();
  monomial->add_option("--tau", m_tau, "Comma-separated amplitude exponent (overrides the file)");
  add_common(monomial, common, false);

  auto* volume = app.add_subcommand("volume", "Level-set volume oracle for the fiber exponent");
  VolumeArgs va;
  auto* v_scen = volume->add_option("--scenario", va.scenario)->check(CLI::IsMember(rlctfa::builtin_scenario_names()));
  volume->add_option("--sigma", va.sigma_file, "Covariance file (CSV or JSON)")->excludes(v_scen);
  volume->add_option("--k", va.k)->check(CLI::Range(1, 16));
  volume->add_option("--samples", va.samples, "Samples per eps level");
  volume->add_option("--points", va.points, "Number of eps levels")->check(CLI::Range(3, 40));
  volume->add_option("--top-fraction", va.top_fraction, "Box fraction below the largest eps");
  volume->add_option("--min-count", va.min_count, "Target hits at the smallest eps");
  volume->add_option("--ratio", va.ratio, "Fixed eps ratio between levels instead of a count target");
  volume->add_option("--eps", va.eps, "Explicit decreasing eps grid")->delimiter(',');
  volume->add_option("--radius", va.radius, "Box half-width (default 2 sqrt(max sigma_ii))");
  volume->add_flag("--loglog", va.loglog, "Also regress on log log(1/eps)");
  add_common(volume, common, true);

  auto* evidence = app.add_subcommand("evidence", "Monte-Carlo evidence and log n slope");
  EvidenceArgs ea;
  auto* e_scen = evidence->add_option("--scenario", ea.scenario)->check(CLI::IsMember(rlctfa::builtin_scenario_names()));
  evidence->add_option("--sigma", ea.sigma_file, "Covariance file (CSV or JSON)")->excludes(e_scen);
  evidence->add_option("--k", ea.k)->check(CLI::Range(0, 16));
  evidence->add_option("--n-grid", ea.n_grid, "Sample sizes")->delimiter(',');
  evidence->add_option("--replicates", ea.replicates)->check(CLI::PositiveNumber);
  evidence->add_option("--draws", ea.draws, "Prior draws per estimate");
  evidence->add_option("--method", ea.method, "Estimator")->check(CLI::IsMember({"prior", "importance"}));
  evidence->add_option("--psi-rate", ea.psi_rate);
  evidence->add_option("--lambda-sd", ea.lambda_sd);
  evidence->add_option("--self-test", ea.self_test, "Fit noiseless F_n = SLOPE log n + 1 instead");
  add_common(evidence, common, true);

  auto* sbic = app.add_subcommand("sbic", "BIC versus sBIC selection frequencies");
  rlctfa::SelectionConfig sc;
  sbic->add_option("--p", sc.p)->check(CLI::Range(1, 16));
  sbic->add_option("--kmax", sc.k_max);
  sbic->add_option("--true-r", sc.true_r);
  sbic->add_option("--n", sc.n);
  sbic->add_option("--replicates", sc.replicates);
  sbic->add_flag("--regular-penalties", sc.regular_penalties, "Force every penalty to (d/2, 1)");
  add_common(sbic, common, true);

  auto* replay = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
  std::string r_manifest, r_out;
  replay->add_option("manifest", r_manifest)->required();
  replay->add_option("--out", r_out);

  // CLI11 wants the arguments reversed when given as a vector.
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  const auto recorded = strip_out(args);
  try {
    if (*table) {
      Outputs out(common.out, "table", recorded);
      return cmd_table(t_p, t_kmax, t_format, out);
    }
    if (*monomial) {
      Outputs out(common.out, "monomial", recorded);
      return cmd_monomial(m_file, m_tau, out);
    }
    if (*replay) return cmd_replay(r_manifest, r_out);
    apply_isa(common);
    if (*volume) {
      Outputs out(common.out, "volume", recorded);
      return cmd_volume(va, common, out);
    }
    if (*evidence) {
      Outputs out(common.out, "evidence", recorded);
      return cmd_evidence(ea, common, out);
    }
    if (*sbic) {
      Outputs out(common.out, "sbic", recorded);
      return cmd_sbic(sc, common, out);
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const rlctfa::IdealParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const rlctfa::io::FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args);
}
