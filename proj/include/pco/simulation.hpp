#pragma once

// Synthetic scenarios Y = b(X) + sigma(X) eps with known f, b, sigma, the
// targets s = E(l(Y) | X = x) f(x) they induce, and Monte Carlo risk and
// oracle experiments built on exact L2 risks.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pco/io.hpp"
#include "pco/selection.hpp"

namespace pco {

enum class DensityKind { Uniform01, Triangle, TruncatedGaussian, Parabolic };
enum class RegressionKind { Zero, Sine, Polynomial, Constant };
enum class SigmaKind { Zero, Constant, Affine };
enum class NoiseKind { Gaussian, UniformSym };

std::string to_string(DensityKind k);
std::string to_string(RegressionKind k);
std::string to_string(SigmaKind k);
std::string to_string(NoiseKind k);

/// Every coordinate of X is drawn from f on [0, 1] and then mapped affinely
/// onto `support`; densities carry the Jacobian of that map. b and sigma are
/// functions of the unmapped coordinates u in [0, 1]^d:
///   Sine: prod_q sin(2 pi u_q); Polynomial: sum_q (2 u_q^2 - u_q).
///   Affine sigma: a0 + a1 * mean_q u_q.
/// TruncatedGaussian is N(0.5, 0.15^2) restricted to [0, 1]; Parabolic is
/// 6u(1 - u). Gaussian noise is N(0, 1) truncated to [-5, 5] and rescaled to
/// unit variance; UniformSym is uniform on [-sqrt3, sqrt3].
struct Scenario {
  std::size_t d = 1;
  DensityKind density = DensityKind::Uniform01;
  RegressionKind regression = RegressionKind::Zero;
  double regression_value = 0.0;
  SigmaKind sigma = SigmaKind::Zero;
  double sigma_value = 0.0;
  double sigma_a0 = 0.0;
  double sigma_a1 = 0.0;
  NoiseKind noise = NoiseKind::Gaussian;
  Interval support{0.0, 1.0};
  std::size_t n = 100;
  std::size_t replications = 100;
  std::uint64_t seed = 1;
  std::string label;

  [[nodiscard]] Json to_json() const;
  static Scenario from_json(const Json& j, const std::string& path = "scenario");
  void validate() const;
};

double density(const Scenario& scn, Point x);
double density_sup(const Scenario& scn);
double regression(const Scenario& scn, Point x);
double noise_sd(const Scenario& scn, Point x);
/// sup |f'| and sup |f''| over the support for d = 1; c2 is false when f
/// is not twice continuously differentiable there.
struct DensitySmoothness {
  bool c2 = false;
  double d1 = 0.0;
  double d2 = 0.0;
};
DensitySmoothness density_smoothness(const Scenario& scn);
/// E(eps^4) for the scenario's noise law.
double noise_fourth_moment(NoiseKind kind);

/// E(l(Y)^power | X = x) for power 1 or 2.
double conditional_loss_moment(const Scenario& scn, LossMap loss, Point x, int power);
double true_s(const Scenario& scn, LossMap loss, Point x);
/// Per-coordinate quadrature layout of the support box.
std::vector<PanelSpec> support_panels(const Scenario& scn);
ReferenceFunction truth_reference(const Scenario& scn, LossMap loss);

/// E(l(Y_1)^2).
double loss_second_moment(const Scenario& scn, LossMap loss);
/// E ||K(X_1, .) l(Y_1)||^2 by quadrature in x (closed form for bandwidth kernels).
double sbar_true(const KernelSpec& spec, const Scenario& scn, LossMap loss);

Sample generate(const Scenario& scn, std::uint64_t replication, LossMap loss);

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};
MeanSe mean_se(std::span<const double> values);

/// ||s_hat_K - s||^2 over R^d, from Gram sums and <K(X_i, .), s>.
double exact_risk(GramTables& tables, const KernelSpec& spec, const ReferenceFunction& truth, double truth_sq_norm);

MeanSe mc_risk(const KernelSpec& spec, const Scenario& scn, LossMap loss);

struct KernelRisk {
  std::string label;
  MeanSe risk;
  double bias_sq = 0.0;
  double sbar = 0.0;
  /// ||s_K - s||^2 + sbar/n <= 2 risk + 5 log(n)^5 / n.
  bool bound_ok = true;
};

struct RiskReport {
  Json scenario;
  std::size_t n = 0;
  std::size_t replications = 0;
  LossKind loss = LossKind::One;
  std::vector<KernelRisk> kernels;
  std::size_t oracle_index = 0;
  std::size_t k0_index = 0;
  MeanSe pco;
  double ratio = 0.0;
  double ratio_se = 0.0;
  std::vector<std::size_t> chosen_counts;
  double k0_fraction = 0.0;
  bool with_bounds = false;
  double theta = 0.5;
  double remainder = 0.0;
  /// pco risk <= 2 oracle risk + 5 log(n)^5 / n.
  bool oracle_inequality_ok = true;

  [[nodiscard]] const MeanSe& oracle() const { return kernels.at(oracle_index).risk; }
  [[nodiscard]] std::string to_json() const;
  [[nodiscard]] std::string to_csv() const;
};

struct OracleOptions {
  /// Also compute ||s_K - s||^2 and sbar_K for the per-kernel bound check.
  bool with_bounds = false;
};

/// Per replication: draw a sample, run the selection, and record the exact
/// risk of every member; the PCO risk is the risk of the selected member.
RiskReport oracle_experiment(const KernelFamily& family, const Scenario& scn, LossMap loss,
                             const OracleOptions& opts = {});

struct StatSummary {
  MeanSe observed;
  double target = 0.0;
  [[nodiscard]] bool within(double k) const;
};

struct ConcentrationReport {
  std::size_t n = 0;
  std::size_t replications = 0;
  StatSummary u;
  StatSummary v;
  StatSummary w;
  [[nodiscard]] bool passed() const { return u.within(3.0) && v.within(3.0) && w.within(3.0); }
  [[nodiscard]] std::string to_json() const;
};

/// Replicates the U, V and W statistics for the pair (a, b) with their
/// targets 0, sbar_a - ||s_a||^2 and 0.
ConcentrationReport concentration_experiment(const KernelSpec& a, const KernelSpec& b, const Scenario& scn,
                                             LossMap loss);

}  // namespace pco
