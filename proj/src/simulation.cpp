#include "pco/simulation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/distributions/normal.hpp>

#include "pco/error.hpp"
#include "pco/rng.hpp"

namespace pco {

namespace {

constexpr double kTgMean = 0.5;
constexpr double kTgSd = 0.15;
constexpr double kNoiseCut = 5.0;

const boost::math::normal_distribution<double>& std_normal() {
  static const boost::math::normal_distribution<double> dist(0.0, 1.0);
  return dist;
}

double tg_mass() {
  static const double z = boost::math::cdf(std_normal(), (1.0 - kTgMean) / kTgSd) -
                          boost::math::cdf(std_normal(), (0.0 - kTgMean) / kTgSd);
  return z;
}

double noise_variance_raw() {
  const double z = 2.0 * boost::math::cdf(std_normal(), kNoiseCut) - 1.0;
  return 1.0 - 2.0 * kNoiseCut * boost::math::pdf(std_normal(), kNoiseCut) / z;
}

double unit_density(DensityKind kind, double u) {
  if (!(u >= 0.0 && u <= 1.0)) return 0.0;
  switch (kind) {
    case DensityKind::Uniform01: return 1.0;
    case DensityKind::Triangle: return u < 0.5 ? 4.0 * u : 4.0 * (1.0 - u);
    case DensityKind::TruncatedGaussian: {
      const double t = (u - kTgMean) / kTgSd;
      return std::exp(-0.5 * t * t) / (kTgSd * std::sqrt(2.0 * std::numbers::pi) * tg_mass());
    }
    case DensityKind::Parabolic: return 6.0 * u * (1.0 - u);
  }
  return 0.0;
}

double unit_quantile(DensityKind kind, double p) {
  switch (kind) {
    case DensityKind::Uniform01: return p;
    case DensityKind::Triangle: return p < 0.5 ? std::sqrt(p / 2.0) : 1.0 - std::sqrt((1.0 - p) / 2.0);
    case DensityKind::TruncatedGaussian: {
      const double lo = boost::math::cdf(std_normal(), (0.0 - kTgMean) / kTgSd);
      const double u = kTgMean + kTgSd * boost::math::quantile(std_normal(), lo + p * tg_mass());
      return std::clamp(u, 0.0, 1.0);
    }
    case DensityKind::Parabolic:
      // 3u^2 - 2u^3 = p with u = 1/2 + sin(a) gives sin(3a) = 2p - 1.
      return 0.5 + std::sin(std::asin(2.0 * p - 1.0) / 3.0);
  }
  return p;
}

double unit_density_sup(DensityKind kind) {
  switch (kind) {
    case DensityKind::Uniform01: return 1.0;
    case DensityKind::Triangle: return 2.0;
    case DensityKind::TruncatedGaussian: return unit_density(kind, kTgMean);
    case DensityKind::Parabolic: return 1.5;
  }
  return 1.0;
}

// Scenario dimensions are capped at 3, so the unit coordinates fit on the stack.
struct UnitPoint {
  std::array<double, 3> u{};
  std::size_t d = 0;
  [[nodiscard]] const double* begin() const { return u.data(); }
  [[nodiscard]] const double* end() const { return u.data() + d; }
  [[nodiscard]] std::size_t size() const { return d; }
};

UnitPoint unit_coords(const Scenario& scn, Point x) {
  if (x.size() > 3) fail(ErrorKind::DimensionMismatch, "scenario points have at most 3 coordinates");
  UnitPoint p;
  p.d = x.size();
  const double len = scn.support.length();
  for (std::size_t q = 0; q < x.size(); ++q) p.u[q] = (x[q] - scn.support.lo) / len;
  return p;
}

double draw_noise(NoiseKind kind, CounterRng& rng) {
  const double p = rng.uniform();
  if (kind == NoiseKind::UniformSym) return std::sqrt(3.0) * (2.0 * p - 1.0);
  static const double lo = boost::math::cdf(std_normal(), -kNoiseCut);
  static const double mass = 1.0 - 2.0 * lo;
  static const double scale = 1.0 / std::sqrt(noise_variance_raw());
  return scale * boost::math::quantile(std_normal(), lo + p * mass);
}

template <class E>
E parse_enum(const std::string& value, const std::string& what, std::initializer_list<std::pair<const char*, E>> opts) {
  std::string allowed;
  for (const auto& [name, e] : opts) {
    if (value == name) return e;
    allowed += (allowed.empty() ? "" : "|") + std::string(name);
  }
  fail(ErrorKind::Config, "config field '" + what + "' must be " + allowed + ", found '" + value + "'");
}

}  // namespace

std::string to_string(DensityKind k) {
  switch (k) {
    case DensityKind::Uniform01: return "uniform";
    case DensityKind::Triangle: return "triangle";
    case DensityKind::TruncatedGaussian: return "truncated_gaussian";
    case DensityKind::Parabolic: return "parabolic";
  }
  return "?";
}

std::string to_string(RegressionKind k) {
  switch (k) {
    case RegressionKind::Zero: return "zero";
    case RegressionKind::Sine: return "sine";
    case RegressionKind::Polynomial: return "polynomial";
    case RegressionKind::Constant: return "constant";
  }
  return "?";
}

std::string to_string(SigmaKind k) {
  switch (k) {
    case SigmaKind::Zero: return "zero";
    case SigmaKind::Constant: return "constant";
    case SigmaKind::Affine: return "affine";
  }
  return "?";
}

std::string to_string(NoiseKind k) { return k == NoiseKind::Gaussian ? "gaussian" : "uniform"; }

Json Scenario::to_json() const {
  Json j;
  j["schema_version"] = 1;
  j["label"] = label;
  j["d"] = d;
  j["density"] = to_string(density);
  j["regression"] = to_string(regression);
  if (regression == RegressionKind::Constant) j["regression_value"] = regression_value;
  j["sigma"] = to_string(sigma);
  if (sigma == SigmaKind::Constant) j["sigma_value"] = sigma_value;
  if (sigma == SigmaKind::Affine) j["sigma_affine"] = {sigma_a0, sigma_a1};
  j["noise"] = to_string(noise);
  j["support"] = {support.lo, support.hi};
  j["n"] = n;
  j["replications"] = replications;
  j["seed"] = seed;
  return j;
}

Scenario Scenario::from_json(const Json& j, const std::string& path) {
  if (!j.is_object()) fail(ErrorKind::Config, "config field '" + path + "' must be an object");
  const auto f = [&](const char* key) { return path.empty() ? std::string(key) : path + "." + key; };
  Scenario s;
  if (j.contains("schema_version") && get_count(j, "schema_version", path) != 1)
    fail(ErrorKind::Config, "config field '" + f("schema_version") + "' must be 1");
  s.label = get_string(j, "label", path, "");
  s.d = get_count(j, "d", path, 1);
  s.density = parse_enum<DensityKind>(get_string(j, "density", path, "uniform"), f("density"),
                                      {{"uniform", DensityKind::Uniform01},
                                       {"triangle", DensityKind::Triangle},
                                       {"truncated_gaussian", DensityKind::TruncatedGaussian},
                                       {"parabolic", DensityKind::Parabolic}});
  s.regression = parse_enum<RegressionKind>(get_string(j, "regression", path, "zero"), f("regression"),
                                            {{"zero", RegressionKind::Zero},
                                             {"sine", RegressionKind::Sine},
                                             {"polynomial", RegressionKind::Polynomial},
                                             {"constant", RegressionKind::Constant}});
  if (s.regression == RegressionKind::Constant) s.regression_value = get_number(j, "regression_value", path);
  s.sigma = parse_enum<SigmaKind>(get_string(j, "sigma", path, "zero"), f("sigma"),
                                  {{"zero", SigmaKind::Zero}, {"constant", SigmaKind::Constant}, {"affine", SigmaKind::Affine}});
  if (s.sigma == SigmaKind::Constant) s.sigma_value = get_number(j, "sigma_value", path);
  if (s.sigma == SigmaKind::Affine) {
    const auto a = get_number_array(j, "sigma_affine", path);
    if (a.size() != 2) fail(ErrorKind::Config, "config field '" + f("sigma_affine") + "' must hold [a0, a1]");
    s.sigma_a0 = a[0];
    s.sigma_a1 = a[1];
  }
  s.noise = parse_enum<NoiseKind>(get_string(j, "noise", path, "gaussian"), f("noise"),
                                  {{"gaussian", NoiseKind::Gaussian}, {"uniform", NoiseKind::UniformSym}});
  if (j.contains("support")) {
    const auto sup = get_number_array(j, "support", path);
    if (sup.size() != 2) fail(ErrorKind::Config, "config field '" + f("support") + "' must hold [lo, hi]");
    s.support = Interval{sup[0], sup[1]};
  }
  s.n = get_count(j, "n", path, s.n);
  s.replications = get_count(j, "replications", path, s.replications);
  if (j.contains("seed")) {
    const Json& v = j.at("seed");
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
      fail(ErrorKind::Config, "config field '" + f("seed") + "' must be a nonnegative integer");
    s.seed = v.get<std::uint64_t>();
  }
  try {
    s.validate();
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Config) throw;
    fail(ErrorKind::Config, "config field '" + path + "': " + e.what());
  }
  return s;
}

void Scenario::validate() const {
  if (d < 1 || d > 3) fail(ErrorKind::Config, "scenario dimension must be 1, 2 or 3");
  if (n < 1) fail(ErrorKind::Config, "scenario n must be positive");
  if (replications < 1) fail(ErrorKind::Config, "scenario replications must be positive");
  if (!(support.hi > support.lo) || !std::isfinite(support.lo) || !std::isfinite(support.hi))
    fail(ErrorKind::Config, "scenario support must satisfy lo < hi");
  if (sigma == SigmaKind::Constant && !(sigma_value >= 0.0)) fail(ErrorKind::Config, "sigma_value must be >= 0");
  if (sigma == SigmaKind::Affine && !(sigma_a0 >= 0.0 && sigma_a0 + sigma_a1 >= 0.0))
    fail(ErrorKind::Config, "affine sigma must be nonnegative on [0, 1]");
  if (!std::isfinite(regression_value)) fail(ErrorKind::Config, "regression_value must be finite");
}

double density(const Scenario& scn, Point x) {
  const double len = scn.support.length();
  double v = 1.0;
  for (double u : unit_coords(scn, x)) v *= unit_density(scn.density, u) / len;
  return v;
}

double density_sup(const Scenario& scn) {
  return std::pow(unit_density_sup(scn.density) / scn.support.length(), static_cast<double>(scn.d));
}

double regression(const Scenario& scn, Point x) {
  const auto u = unit_coords(scn, x);
  switch (scn.regression) {
    case RegressionKind::Zero: return 0.0;
    case RegressionKind::Sine: {
      double v = 1.0;
      for (double t : u) v *= std::sin(2.0 * std::numbers::pi * t);
      return v;
    }
    case RegressionKind::Polynomial: {
      double v = 0.0;
      for (double t : u) v += 2.0 * t * t - t;
      return v;
    }
    case RegressionKind::Constant: return scn.regression_value;
  }
  return 0.0;
}

double noise_sd(const Scenario& scn, Point x) {
  switch (scn.sigma) {
    case SigmaKind::Zero: return 0.0;
    case SigmaKind::Constant: return scn.sigma_value;
    case SigmaKind::Affine: {
      const auto u = unit_coords(scn, x);
      double m = 0.0;
      for (double t : u) m += t;
      return scn.sigma_a0 + scn.sigma_a1 * m / static_cast<double>(u.size());
    }
  }
  return 0.0;
}

DensitySmoothness density_smoothness(const Scenario& scn) {
  if (scn.d != 1) fail(ErrorKind::InvalidArgument, "density_smoothness: only d = 1 is supported");
  DensitySmoothness r;
  switch (scn.density) {
    case DensityKind::Uniform01: r = {true, 0.0, 0.0}; break;
    case DensityKind::Triangle: r = {false, 4.0, 0.0}; break;
    case DensityKind::TruncatedGaussian: {
      // |f'| peaks at one standard deviation, |f''| at the mode or at sqrt(3) deviations.
      const double s2 = kTgSd * kTgSd;
      const double d1 = unit_density(scn.density, kTgMean + kTgSd) / kTgSd;
      const double d2 = std::max(unit_density(scn.density, kTgMean) / s2,
                                 2.0 * unit_density(scn.density, kTgMean + std::sqrt(3.0) * kTgSd) / s2);
      r = {true, d1, d2};
      break;
    }
    case DensityKind::Parabolic: r = {true, 6.0, 12.0}; break;
  }
  const double len = scn.support.length();
  r.d1 /= len * len;
  r.d2 /= len * len * len;
  return r;
}

double noise_fourth_moment(NoiseKind kind) {
  if (kind == NoiseKind::UniformSym) return 9.0 / 5.0;
  const double a = kNoiseCut;
  const double z = 2.0 * boost::math::cdf(std_normal(), a) - 1.0;
  const double raw = 3.0 - 2.0 * boost::math::pdf(std_normal(), a) * (a * a * a + 3.0 * a) / z;
  const double var = noise_variance_raw();
  return raw / (var * var);
}

double conditional_loss_moment(const Scenario& scn, LossMap loss, Point x, int power) {
  if (power != 1 && power != 2) fail(ErrorKind::InvalidArgument, "conditional_loss_moment: power must be 1 or 2");
  const double b = regression(scn, x);
  const double s = noise_sd(scn, x);
  const double b2 = b * b;
  const double s2 = s * s;
  switch (loss.kind) {
    case LossKind::One: return 1.0;
    case LossKind::Identity: return power == 1 ? b : b2 + s2;
    case LossKind::Square:
      return power == 1 ? b2 + s2 : b2 * b2 + 6.0 * b2 * s2 + s2 * s2 * noise_fourth_moment(scn.noise);
  }
  return 0.0;
}

double true_s(const Scenario& scn, LossMap loss, Point x) {
  const double f = density(scn, x);
  return f == 0.0 ? 0.0 : conditional_loss_moment(scn, loss, x, 1) * f;
}

std::vector<PanelSpec> support_panels(const Scenario& scn) {
  PanelSpec p;
  p.lo = scn.support.lo;
  p.hi = scn.support.hi;
  p.max_width = scn.support.length() / 8.0;
  if (scn.density == DensityKind::Triangle) p.breaks.push_back(scn.support.lo + 0.5 * scn.support.length());
  return std::vector<PanelSpec>(scn.d, p);
}

ReferenceFunction truth_reference(const Scenario& scn, LossMap loss) {
  Scenario copy = scn;
  return ReferenceFunction::truth([copy, loss](Point x) { return true_s(copy, loss, x); }, support_panels(scn));
}

double loss_second_moment(const Scenario& scn, LossMap loss) {
  return integrate_box(support_panels(scn),
                       [&](std::span<const double> x) { return density(scn, x) * conditional_loss_moment(scn, loss, x, 2); });
}

double sbar_true(const KernelSpec& spec, const Scenario& scn, LossMap loss) {
  if (spec.dim() != scn.d) fail(ErrorKind::DimensionMismatch, "sbar_true: dimension mismatch");
  if (spec.is_bandwidth()) {
    const std::vector<double> origin(scn.d, 0.0);
    return section_sq_norm(spec, origin) * loss_second_moment(scn, loss);
  }
  auto dims = support_panels(scn);
  for (std::size_t q = 0; q < dims.size(); ++q) dims[q] = intersect(dims[q], spec.window(q, 0.0));
  return integrate_box(dims, [&](std::span<const double> x) {
    return density(scn, x) * conditional_loss_moment(scn, loss, x, 2) * section_sq_norm(spec, x);
  });
}

Sample generate(const Scenario& scn, std::uint64_t replication, LossMap loss) {
  CounterRng xr(scn.seed, replication, 0);
  CounterRng er(scn.seed, replication, 1);
  std::vector<double> x(scn.n * scn.d);
  std::vector<double> y(scn.n);
  const double len = scn.support.length();
  for (std::size_t i = 0; i < scn.n; ++i) {
    for (std::size_t q = 0; q < scn.d; ++q) x[i * scn.d + q] = scn.support.lo + len * unit_quantile(scn.density, xr.uniform());
    const Point xi(x.data() + i * scn.d, scn.d);
    const double eps = draw_noise(scn.noise, er);
    y[i] = regression(scn, xi) + noise_sd(scn, xi) * eps;
  }
  return Sample(std::move(x), scn.d, std::move(y), loss);
}

MeanSe mean_se(std::span<const double> values) {
  MeanSe r;
  const std::size_t m = values.size();
  if (m == 0) return r;
  r.mean = pairwise_sum(values) / static_cast<double>(m);
  if (m < 2) return r;
  std::vector<double> dev(m);
  for (std::size_t i = 0; i < m; ++i) dev[i] = (values[i] - r.mean) * (values[i] - r.mean);
  r.se = std::sqrt(pairwise_sum(dev) / static_cast<double>(m - 1) / static_cast<double>(m));
  return r;
}

double exact_risk(GramTables& tables, const KernelSpec& spec, const ReferenceFunction& truth, double truth_sq_norm) {
  const Sample& s = tables.sample();
  const double n = static_cast<double>(s.n());
  std::vector<double> cross(s.n());
  for (std::size_t i = 0; i < s.n(); ++i) cross[i] = s.weight(i) * truth.section_inner(spec, s.x(i));
  return tables.weighted_total(spec, spec) / (n * n) - 2.0 * pairwise_sum(cross) / n + truth_sq_norm;
}

MeanSe mc_risk(const KernelSpec& spec, const Scenario& scn, LossMap loss) {
  scn.validate();
  const ReferenceFunction truth = truth_reference(scn, loss);
  const double truth_sq = truth.sq_norm();
  std::vector<double> risks(scn.replications);
  parallel_for(scn.replications, [&](std::size_t r) {
    GramTables tables(generate(scn, r, loss));
    risks[r] = exact_risk(tables, spec, truth, truth_sq);
  });
  return mean_se(risks);
}

RiskReport oracle_experiment(const KernelFamily& family, const Scenario& scn, LossMap loss, const OracleOptions& opts) {
  scn.validate();
  if (family.specs.empty()) fail(ErrorKind::InvalidArgument, "oracle_experiment: empty family");
  if (family.dim() != scn.d) fail(ErrorKind::DimensionMismatch, "oracle_experiment: family and scenario dimensions differ");
  const std::size_t reps = scn.replications;
  const std::size_t k = family.size();
  const ReferenceFunction truth = truth_reference(scn, loss);
  const double truth_sq = truth.sq_norm();

  std::vector<double> risks(reps * k);
  std::vector<std::size_t> chosen(reps);
  parallel_for(reps, [&](std::size_t r) {
    GramTables tables(generate(scn, r, loss));
    chosen[r] = pco_select_index(family, tables);
    for (std::size_t i = 0; i < k; ++i) risks[r * k + i] = exact_risk(tables, family.specs[i], truth, truth_sq);
  });

  RiskReport rep;
  rep.scenario = scn.to_json();
  rep.n = scn.n;
  rep.replications = reps;
  rep.loss = loss.kind;
  rep.k0_index = family.k0_index;
  rep.with_bounds = opts.with_bounds;
  const double logn = std::log(static_cast<double>(scn.n));
  rep.remainder = 5.0 * std::pow(logn, 5.0) / static_cast<double>(scn.n);

  std::vector<double> column(reps);
  rep.kernels.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t r = 0; r < reps; ++r) column[r] = risks[r * k + i];
    rep.kernels[i].label = family.specs[i].label();
    rep.kernels[i].risk = mean_se(column);
  }
  for (std::size_t i = 1; i < k; ++i)
    if (rep.kernels[i].risk.mean < rep.kernels[rep.oracle_index].risk.mean) rep.oracle_index = i;

  std::vector<double> pco(reps);
  rep.chosen_counts.assign(k, 0);
  for (std::size_t r = 0; r < reps; ++r) {
    pco[r] = risks[r * k + chosen[r]];
    ++rep.chosen_counts[chosen[r]];
  }
  rep.pco = mean_se(pco);
  rep.k0_fraction = static_cast<double>(rep.chosen_counts[family.k0_index]) / static_cast<double>(reps);

  const double om = rep.oracle().mean;
  if (om > 0.0) {
    rep.ratio = rep.pco.mean / om;
    std::vector<double> lin(reps);
    for (std::size_t r = 0; r < reps; ++r) lin[r] = pco[r] - rep.ratio * risks[r * k + rep.oracle_index];
    rep.ratio_se = mean_se(lin).se / om;
  } else {
    rep.ratio = rep.pco.mean > 0.0 ? INFINITY : 1.0;
  }
  rep.oracle_inequality_ok = rep.pco.mean <= 2.0 * om + rep.remainder;

  if (opts.with_bounds) {
    parallel_for(k, [&](std::size_t i) {
      const KernelSpec& s = family.specs[i];
      const ReferenceFunction sk = ReferenceFunction::smoothed(s, truth);
      KernelRisk& kr = rep.kernels[i];
      kr.bias_sq = std::max(0.0, sk.sq_norm() - 2.0 * sk.inner(truth) + truth_sq);
      kr.sbar = sbar_true(s, scn, loss);
      kr.bound_ok = kr.bias_sq + kr.sbar / static_cast<double>(scn.n) <= 2.0 * kr.risk.mean + rep.remainder;
    });
  }
  return rep;
}

std::string RiskReport::to_json() const {
  Json j;
  j["schema_version"] = 1;
  j["kind"] = "risk_report";
  j["scenario"] = scenario;
  j["n"] = n;
  j["replications"] = replications;
  j["loss"] = to_string(loss);
  j["oracle_index"] = oracle_index;
  j["oracle_label"] = kernels.empty() ? "" : kernels[oracle_index].label;
  j["oracle_risk"] = kernels.empty() ? 0.0 : oracle().mean;
  j["oracle_se"] = kernels.empty() ? 0.0 : oracle().se;
  j["k0_index"] = k0_index;
  j["pco_risk"] = pco.mean;
  j["pco_se"] = pco.se;
  j["ratio"] = ratio;
  j["ratio_se"] = ratio_se;
  j["k0_fraction"] = k0_fraction;
  j["bounds"] = {{"theta", theta},
                 {"remainder", remainder},
                 {"oracle_inequality_ok", oracle_inequality_ok},
                 {"per_kernel_computed", with_bounds}};
  Json arr = Json::array();
  for (std::size_t i = 0; i < kernels.size(); ++i) {
    Json r;
    r["index"] = i;
    r["label"] = kernels[i].label;
    r["risk"] = kernels[i].risk.mean;
    r["se"] = kernels[i].risk.se;
    r["chosen_count"] = chosen_counts.empty() ? 0 : chosen_counts[i];
    if (with_bounds) {
      r["bias_sq"] = kernels[i].bias_sq;
      r["sbar"] = kernels[i].sbar;
      r["bound_ok"] = kernels[i].bound_ok;
    }
    arr.push_back(std::move(r));
  }
  j["kernels"] = std::move(arr);
  return j.dump(2) + "\n";
}

std::string RiskReport::to_csv() const {
  std::ostringstream os;
  os << "index,label,risk,se,chosen_count,oracle\n";
  for (std::size_t i = 0; i < kernels.size(); ++i) {
    os << i << "," << csv_quote(kernels[i].label) << "," << format_double(kernels[i].risk.mean) << ","
       << format_double(kernels[i].risk.se) << "," << (chosen_counts.empty() ? 0 : chosen_counts[i]) << ","
       << (i == oracle_index ? 1 : 0) << "\n";
  }
  return os.str();
}

bool StatSummary::within(double k) const { return std::abs(observed.mean - target) <= k * observed.se; }

std::string ConcentrationReport::to_json() const {
  const auto item = [](const StatSummary& s) {
    return Json{{"mean", s.observed.mean}, {"se", s.observed.se}, {"target", s.target}, {"within_3se", s.within(3.0)}};
  };
  Json j;
  j["schema_version"] = 1;
  j["kind"] = "concentration_report";
  j["n"] = n;
  j["replications"] = replications;
  j["u"] = item(u);
  j["v"] = item(v);
  j["w"] = item(w);
  j["passed"] = passed();
  return j.dump(2) + "\n";
}

ConcentrationReport concentration_experiment(const KernelSpec& a, const KernelSpec& b, const Scenario& scn,
                                             LossMap loss) {
  scn.validate();
  if (a.dim() != scn.d || b.dim() != scn.d)
    fail(ErrorKind::DimensionMismatch, "concentration_experiment: kernel and scenario dimensions differ");
  const ReferenceFunction truth = truth_reference(scn, loss);
  const ReferenceFunction sa = ReferenceFunction::smoothed(a, truth);
  const ReferenceFunction sb = ReferenceFunction::smoothed(b, truth);
  const double sa_sb = sa.inner(sb);
  const double sa_sq = sa.sq_norm();
  const double sa_dot_g = sa_sb - sa.inner(truth);

  const std::size_t reps = scn.replications;
  std::vector<double> u(reps), v(reps), w(reps);
  parallel_for(reps, [&](std::size_t r) {
    const Sample sample = generate(scn, r, loss);
    GramTables tables(sample);
    u[r] = u_statistic(tables, a, b, sa, sb, sa_sb);
    v[r] = v_statistic(a, sample, sa, sa_sq);
    w[r] = w_statistic(a, sample, sb, truth, sa_dot_g);
  });

  ConcentrationReport rep;
  rep.n = scn.n;
  rep.replications = reps;
  rep.u = {mean_se(u), 0.0};
  rep.v = {mean_se(v), sbar_true(a, scn, loss) - sa_sq};
  rep.w = {mean_se(w), 0.0};
  return rep;
}

}  // namespace pco
