#include "commands.hpp"

#include <cmath>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "pco/diagnostics.hpp"
#include "pco/error.hpp"
#include "pco/io.hpp"
#include "pco/selection.hpp"
#include "pco/simulation.hpp"

namespace pco::cli {

namespace {

struct Common {
  std::string config;
  std::string out = ".";
  std::string loss;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
};

std::string join(const std::string& dir, const std::string& name) { return (std::filesystem::path(dir) / name).string(); }

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorKind::Config, "cannot create output directory '" + dir + "': " + ec.message());
}

Json load_config(const std::string& path) {
  if (path.empty()) fail(ErrorKind::Config, "--config is required");
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const Error& e) {
    fail(ErrorKind::Config, e.what());
  }
  return parse_json_text(text, path);
}

LossMap pick_loss(const Common& c, const Json& cfg, const std::string& fallback) {
  std::string name = c.loss;
  if (name.empty()) name = cfg.is_object() ? get_string(cfg, "loss", "", fallback) : fallback;
  try {
    return LossMap{loss_from_string(name)};
  } catch (const Error&) {
    fail(ErrorKind::Config, "loss must be one|identity|square, found '" + name + "'");
  }
}

Scenario scenario_from(const Json& cfg, const Common& c, const std::string& path) {
  Scenario s = Scenario::from_json(cfg, path);
  if (c.seed) s.seed = *c.seed;
  return s;
}

// Grid config: {"points": [[...], ...]} or {"lo": [...], "hi": [...], "count": [...]}.
std::vector<std::vector<double>> grid_points(const Json& g, std::size_t d) {
  std::vector<std::vector<double>> pts;
  if (g.is_object() && g.contains("points")) {
    const Json& arr = g.at("points");
    if (!arr.is_array()) fail(ErrorKind::Config, "config field 'grid.points' must be an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string at = "grid.points[" + std::to_string(i) + "]";
      std::vector<double> p;
      if (arr[i].is_number()) {
        p.push_back(arr[i].get<double>());
      } else if (arr[i].is_array()) {
        for (const auto& v : arr[i]) {
          if (!v.is_number()) fail(ErrorKind::Config, "config field '" + at + "' must hold numbers");
          p.push_back(v.get<double>());
        }
      } else {
        fail(ErrorKind::Config, "config field '" + at + "' must be a number or an array");
      }
      if (p.size() != d)
        fail(ErrorKind::DimensionMismatch, "grid point " + std::to_string(i) + " has dimension " +
                                               std::to_string(p.size()) + ", data has " + std::to_string(d));
      pts.push_back(std::move(p));
    }
    return pts;
  }
  const auto vec = [&](const char* key) {
    const Json& v = require(g, key, "grid");
    if (v.is_number()) return std::vector<double>(d, v.get<double>());
    auto a = get_number_array(g, key, "grid");
    if (a.size() != d) fail(ErrorKind::DimensionMismatch, std::string("grid.") + key + " has the wrong dimension");
    return a;
  };
  const auto lo = vec("lo");
  const auto hi = vec("hi");
  const auto cnt = vec("count");
  std::vector<std::size_t> count(d);
  std::size_t total = 1;
  for (std::size_t q = 0; q < d; ++q) {
    if (cnt[q] < 1 || cnt[q] != std::floor(cnt[q])) fail(ErrorKind::Config, "config field 'grid.count' must hold positive integers");
    count[q] = static_cast<std::size_t>(cnt[q]);
    total *= count[q];
  }
  std::vector<std::size_t> idx(d, 0);
  for (std::size_t t = 0; t < total; ++t) {
    std::vector<double> p(d);
    for (std::size_t q = 0; q < d; ++q)
      p[q] = count[q] == 1 ? lo[q] : lo[q] + (hi[q] - lo[q]) * static_cast<double>(idx[q]) / static_cast<double>(count[q] - 1);
    pts.push_back(std::move(p));
    for (std::size_t q = d; q-- > 0;) {
      if (++idx[q] < count[q]) break;
      idx[q] = 0;
    }
  }
  return pts;
}

int cmd_simulate(const Common& c, std::uint64_t replication, std::ostream& out) {
  const Json cfg = load_config(c.config);
  const Scenario scn = scenario_from(cfg, c, "scenario");
  const LossMap loss = pick_loss(c, cfg, "one");
  const Sample sample = generate(scn, replication, loss);
  ensure_dir(c.out);
  write_text_file(join(c.out, "data.csv"), sample_to_csv(sample));
  Json echo = scn.to_json();
  echo["replication"] = replication;
  write_text_file(join(c.out, "scenario.json"), echo.dump(2) + "\n");
  out << "wrote " << join(c.out, "data.csv") << " (" << sample.n() << " rows)\n";
  return kOk;
}

int cmd_select(const Common& c, const std::string& data, std::ostream& out) {
  const Json cfg = load_config(c.config);
  const LossMap loss = pick_loss(c, cfg, "one");
  if (data.empty()) fail(ErrorKind::Config, "--data is required");
  const Sample sample = read_sample_csv(data, loss);
  const Json& fam_cfg = cfg.contains("family") ? cfg.at("family") : cfg;
  const KernelFamily family = family_from_json(fam_cfg, sample.n(), cfg.contains("family") ? "family" : "");
  if (family.dim() != sample.d())
    fail(ErrorKind::DimensionMismatch, "family dimension " + std::to_string(family.dim()) +
                                           " does not match data dimension " + std::to_string(sample.d()));
  const SelectionReport rep = pco_select(family, sample);
  ensure_dir(c.out);
  write_text_file(join(c.out, "selection.json"), rep.to_json());
  write_text_file(join(c.out, "selection.csv"), rep.to_csv());
  out << "selected " << rep.rows[rep.chosen_index].label << "\n";
  return kOk;
}

int cmd_estimate(const Common& c, const std::string& data, const std::string& spec_path, const std::string& grid_path,
                 std::ostream& out) {
  const Json cfg = c.config.empty() ? Json::object() : load_config(c.config);
  const LossMap loss = pick_loss(c, cfg, "one");
  if (data.empty()) fail(ErrorKind::Config, "--data is required");
  const Json spec_cfg = spec_path.empty() ? require(cfg, "kernel", "") : load_config(spec_path);
  const Json grid_cfg = grid_path.empty() ? require(cfg, "grid", "") : load_config(grid_path);
  const Sample sample = read_sample_csv(data, loss);
  const KernelSpec spec = kernel_from_json(spec_cfg, spec_path.empty() ? "kernel" : "");
  if (spec.dim() != sample.d())
    fail(ErrorKind::DimensionMismatch, "kernel dimension " + std::to_string(spec.dim()) + " does not match data dimension " +
                                           std::to_string(sample.d()));
  const auto pts = grid_points(grid_cfg, sample.d());

  std::optional<KernelSpec> den;
  QuotientConfig qc = QuotientConfig::defaults(sample.n());
  if (grid_cfg.is_object() && grid_cfg.contains("denominator")) {
    den = kernel_from_json(grid_cfg.at("denominator"), "grid.denominator");
    if (den->dim() != sample.d()) fail(ErrorKind::DimensionMismatch, "denominator kernel has the wrong dimension");
    qc.beta = get_number(grid_cfg, "beta", "grid", qc.beta);
    if (!(qc.beta > 0.0)) fail(ErrorKind::Config, "config field 'grid.beta' must be positive");
  }

  std::vector<double> values(pts.size());
  std::vector<std::optional<double>> ratio(pts.size());
  parallel_for(pts.size(), [&](std::size_t i) {
    values[i] = estimate(spec, sample, pts[i]);
    if (den) ratio[i] = quotient_estimate(spec, *den, sample, qc, pts[i]);
  });

  std::ostringstream os;
  for (std::size_t q = 0; q < sample.d(); ++q) os << "x" << q + 1 << ",";
  os << "s_hat" << (den ? ",quotient,in_domain" : "") << "\n";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (double v : pts[i]) os << format_double(v) << ",";
    os << format_double(values[i]);
    if (den) os << "," << (ratio[i] ? format_double(*ratio[i]) : std::string()) << "," << (ratio[i] ? 1 : 0);
    os << "\n";
  }
  ensure_dir(c.out);
  write_text_file(join(c.out, "estimate.csv"), os.str());
  out << "wrote " << join(c.out, "estimate.csv") << " (" << pts.size() << " points)\n";
  return kOk;
}

KernelFamily family_for_scenario(const Json& cfg, const Scenario& scn) {
  return family_from_json(require(cfg, "family", ""), scn.n, "family");
}

VerificationReport run_suite(const std::string& suite, const Common& c, const Json& cfg) {
  const std::uint64_t seed = c.seed.value_or(get_count(cfg, "seed", "", 1));
  if (suite == "sin-lemma") {
    return check_sin_lemma(get_count(cfg, "grid", "", 10000), static_cast<int>(get_count(cfg, "p_max", "", 199)),
                           static_cast<int>(get_count(cfg, "q_max", "", 200)));
  }
  if (suite == "assumption-1") {
    const Scenario scn = scenario_from(require(cfg, "scenario", ""), c, "scenario");
    Assumption1Options opts;
    opts.draws = get_count(cfg, "draws", "", opts.draws);
    opts.seed = seed;
    return check_assumption_1(family_for_scenario(cfg, scn), scn, pick_loss(c, cfg, "one"), opts);
  }
  if (suite == "assumption-1-sweep") {
    const Scenario scn = scenario_from(require(cfg, "scenario", ""), c, "scenario");
    std::vector<std::size_t> ns;
    for (double v : get_number_array(cfg, "n_values", "")) {
      if (v < 1 || v != std::floor(v)) fail(ErrorKind::Config, "config field 'n_values' must hold positive integers");
      ns.push_back(static_cast<std::size_t>(v));
    }
    const Json fam = require(cfg, "family", "");
    return sweep_assumption_1_item2([&](std::size_t n) { return family_from_json(fam, n, "family"); }, scn,
                                    pick_loss(c, cfg, "one"), ns);
  }
  if (suite == "assumption-3.3") {
    const std::size_t n = get_count(cfg, "n", "", 1000000);
    return check_assumption_3_3(family_from_json(require(cfg, "family", ""), n, "family"), get_count(cfg, "draws", "", 1000),
                                seed);
  }
  if (suite == "trig-assumption-2") {
    const Scenario scn = scenario_from(require(cfg, "scenario", ""), c, "scenario");
    std::vector<int> ms;
    for (double v : get_number_array(cfg, "m_max_values", "")) {
      if (v < 1 || v != std::floor(v)) fail(ErrorKind::Config, "config field 'm_max_values' must hold positive integers");
      ms.push_back(static_cast<int>(v));
    }
    return check_trig_assumption_2(scn, pick_loss(c, cfg, "one"), ms, get_count(cfg, "draws", "", 2000), seed);
  }
  if (suite == "legendre") {
    const Scenario scn = scenario_from(require(cfg, "scenario", ""), c, "scenario");
    return check_legendre_condition(scn, static_cast<int>(get_count(cfg, "m_max", "", 50)), get_count(cfg, "grid", "", 2001));
  }
  fail(ErrorKind::Config,
       "--suite must be sin-lemma|assumption-1|assumption-1-sweep|assumption-3.3|trig-assumption-2|legendre, found '" +
           suite + "'");
}

int cmd_verify(const Common& c, const std::string& suite, std::ostream& out) {
  Json cfg = Json::object();
  if (!c.config.empty()) cfg = load_config(c.config);
  else if (suite != "sin-lemma") fail(ErrorKind::Config, "--config is required for suite '" + suite + "'");
  VerificationReport rep;
  try {
    rep = run_suite(suite, c, cfg);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InvalidArgument) fail(ErrorKind::Config, e.what());
    throw;
  }
  ensure_dir(c.out);
  write_text_file(join(c.out, "verification.json"), rep.to_json());
  out << suite << ": " << to_string(rep.verdict) << "\n";
  return rep.verdict == Verdict::Fail ? kVerification : kOk;
}

int cmd_report(const Common& c, std::ostream& out) {
  const Json cfg = load_config(c.config);
  const Scenario base = scenario_from(require(cfg, "scenario", ""), c, "scenario");
  const LossMap loss = pick_loss(c, cfg, "one");
  const Json fam_cfg = require(cfg, "family", "");
  OracleOptions opts;
  if (cfg.contains("with_bounds")) {
    if (!cfg.at("with_bounds").is_boolean()) fail(ErrorKind::Config, "config field 'with_bounds' must be a boolean");
    opts.with_bounds = cfg.at("with_bounds").get<bool>();
  }
  std::vector<std::size_t> ns;
  if (cfg.contains("n_values")) {
    for (double v : get_number_array(cfg, "n_values", "")) {
      if (v < 1 || v != std::floor(v)) fail(ErrorKind::Config, "config field 'n_values' must hold positive integers");
      ns.push_back(static_cast<std::size_t>(v));
    }
  }

  const RiskReport main_rep = oracle_experiment(family_from_json(fam_cfg, base.n, "family"), base, loss, opts);
  ensure_dir(c.out);
  write_text_file(join(c.out, "risk_report.json"), main_rep.to_json());
  write_text_file(join(c.out, "risk_vs_kernel.csv"), main_rep.to_csv());

  std::ostringstream os;
  os << "n,oracle_index,oracle_risk,oracle_se,pco_risk,pco_se,ratio,ratio_se,k0_fraction\n";
  const auto row = [&](const RiskReport& r) {
    os << r.n << "," << r.oracle_index << "," << format_double(r.oracle().mean) << "," << format_double(r.oracle().se) << ","
       << format_double(r.pco.mean) << "," << format_double(r.pco.se) << "," << format_double(r.ratio) << ","
       << format_double(r.ratio_se) << "," << format_double(r.k0_fraction) << "\n";
  };
  if (ns.empty()) {
    row(main_rep);
  } else {
    for (std::size_t n : ns) {
      Scenario s = base;
      s.n = n;
      if (n == base.n) {
        row(main_rep);
        continue;
      }
      row(oracle_experiment(family_from_json(fam_cfg, n, "family"), s, loss, {}));
    }
  }
  write_text_file(join(c.out, "ratio_vs_n.csv"), os.str());
  out << "oracle " << main_rep.kernels[main_rep.oracle_index].label << ", ratio " << format_double(main_rep.ratio) << "\n";
  return kOk;
}

void add_common(CLI::App* sub, Common& c, bool config_required) {
  auto* opt = sub->add_option("--config", c.config, "JSON configuration file");
  if (config_required) opt->required();
  sub->add_option("--out", c.out, "output directory")->capture_default_str();
  sub->add_option("--loss", c.loss, "loss map: one|identity|square");
  sub->add_option("--seed", c.seed, "override the configured seed");
  sub->add_option("--threads", c.threads, "worker cap (0 = all cores)");
}

int exit_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::Config: return kConfig;
    case ErrorKind::Data: return kData;
    case ErrorKind::DimensionMismatch: return kDimension;
    case ErrorKind::InvalidArgument: return kOther;
  }
  return kOther;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Kernel selection by penalized comparison to overfitting"};
  app.require_subcommand(1);
  Common c;
  std::uint64_t replication = 0;
  std::string data, spec, grid, suite;

  auto* sim = app.add_subcommand("simulate", "draw a dataset from a scenario");
  add_common(sim, c, true);
  sim->add_option("--replication", replication, "replication index")->capture_default_str();

  auto* sel = app.add_subcommand("select", "run the selection on a dataset");
  add_common(sel, c, true);
  sel->add_option("--data", data, "dataset CSV")->required();

  auto* est = app.add_subcommand("estimate", "evaluate an estimator on a grid");
  add_common(est, c, false);
  est->add_option("--data", data, "dataset CSV")->required();
  est->add_option("--spec", spec, "kernel JSON");
  est->add_option("--grid", grid, "grid JSON");

  auto* ver = app.add_subcommand("verify", "run a verification suite");
  add_common(ver, c, false);
  ver->add_option("--suite", suite, "suite name")->required();

  auto* rep = app.add_subcommand("report", "run a risk experiment");
  add_common(rep, c, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfig;
  }

  set_thread_count(c.threads);
  try {
    if (*sim) return cmd_simulate(c, replication, out);
    if (*sel) return cmd_select(c, data, out);
    if (*est) return cmd_estimate(c, data, spec, grid, out);
    if (*ver) return cmd_verify(c, suite, out);
    if (*rep) return cmd_report(c, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kOther;
  }
  return kOther;
}

}  // namespace pco::cli
