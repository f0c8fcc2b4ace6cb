#pragma once

// Numerical checks of the structural conditions the selection relies on.
// Every check reports bound, observed value and margin = bound - observed.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pco/simulation.hpp"

namespace pco {

struct CheckItem {
  std::string name;
  double observed = 0.0;
  double bound = 0.0;
  double margin = 0.0;
  bool passed = false;
  std::string note;
  Json detail;
};

enum class Verdict { Pass, Fail, NotSatisfied };
std::string to_string(Verdict v);

struct VerificationReport {
  std::string suite;
  Json config;
  std::vector<CheckItem> items;
  Verdict verdict = Verdict::Pass;
  std::vector<std::string> notes;

  /// Sets the verdict from the items: Pass when every item passed.
  void finalize();
  [[nodiscard]] std::string to_json() const;
};

struct Assumption1Options {
  /// Draws of (X_2, Y_2) for item (3).
  std::size_t draws = 512;
  std::uint64_t seed = 1;
  /// Relative slack for quadrature error in items (2) and (4).
  double tolerance = 1e-9;
};

/// Items (1)-(4) of the variance and cross-term conditions. Item (1) uses
/// sup_x' ||K(x', .)||^2; item (2) the exact ||s_K||^2; item (3) averages
/// E_X1 <K(X1,.), K'(x2,.) l(y2)>^2 (by quadrature in X1) over draws of
/// (x2, y2); item (4) integrates E <K(X1,.), psi>^2 for every psi of a
/// fixed unit-norm dictionary.
VerificationReport check_assumption_1(const KernelFamily& family, const Scenario& scn, LossMap loss,
                                      const Assumption1Options& opts = {});

/// Item (2) across sample sizes: max_K ||s_K||^2 for the family built at
/// each n. Flags strictly increasing sequences.
VerificationReport sweep_assumption_1_item2(const std::function<KernelFamily(std::size_t)>& family_at,
                                            const Scenario& scn, LossMap loss, std::span<const std::size_t> ns);

/// sup over members and `draws` random x' of ||K(x', .)||_1^2 against the
/// analytic bound (1 for bandwidth and histogram families). Bases with no
/// such bound get verdict NotSatisfied when the sup grows with m.
VerificationReport check_assumption_3_3(const KernelFamily& family, std::size_t draws = 1000, std::uint64_t seed = 1);

/// T(m_max) = E max_{m, m' <= m_max} <K_m(X1, .), s_{K_m'}>^2 for the
/// trigonometric basis, estimated on independent draws per m_max, with a
/// one-sided 95% weighted least-squares test for a positive slope in m_max.
VerificationReport check_trig_assumption_2(const Scenario& scn, LossMap loss, std::span<const int> m_max_values,
                                           std::size_t draws = 2000, std::uint64_t seed = 1);

/// |sum_{j=p+1}^{q} sin(jx)/j| <= 2 / ((1+p) sin(x/2)) for x_k = 2 pi k/(grid+1),
/// k = 1..grid and 1 <= p < q <= q_max with p <= p_max.
struct SinLemmaResult {
  std::size_t checked = 0;
  std::size_t violations = 0;
  double min_margin = 0.0;
  double worst_x = 0.0;
  int worst_p = 0;
  int worst_q = 0;
};
SinLemmaResult sin_lemma_sweep(std::size_t grid, int p_max, int q_max);
VerificationReport check_sin_lemma(std::size_t grid, int p_max, int q_max);

/// max over m <= m_max and an x' grid of |sum_{j<=m} E(xi_j(X1)) xi_j(x')|
/// against 2 max(2 ||f'||, ||f''||) zeta(3/2). Requires a d = 1 scenario
/// supported on [-1, 1] with a C^2 density.
VerificationReport check_legendre_condition(const Scenario& scn, int m_max, std::size_t grid = 2001);

}  // namespace pco
