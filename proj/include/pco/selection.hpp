#pragma once

// Penalized comparison to overfitting: pick the kernel minimizing
// ||s_hat_K - s_hat_K0||^2 + pen(K) over a finite family.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "pco/estimator.hpp"

namespace pco {

/// (2/n^2) sum_i <K(., X_i), K0(., X_i)> l(Y_i)^2.
double penalty(const KernelSpec& spec, const KernelSpec& k0, const Sample& sample);
double penalty(GramTables& tables, const KernelSpec& spec, const KernelSpec& k0);

struct SelectionRow {
  std::string label;
  std::string spec_json;
  double distance = 0.0;
  double penalty = 0.0;
  double total = 0.0;
};

struct SelectionReport {
  std::vector<SelectionRow> rows;
  std::size_t chosen_index = 0;
  std::size_t k0_index = 0;
  std::size_t n = 0;
  LossKind loss = LossKind::One;
  /// Notes about assumptions the run relied on (e.g. K0 choice for bases
  /// where sum_j phi_j^2 is not known to peak at m_max).
  std::vector<std::string> notes;

  [[nodiscard]] std::string to_json() const;
  [[nodiscard]] std::string to_csv() const;
};

/// Runs the criterion over the whole family. Ties in the total go to the
/// smoothest kernel, then to the lowest index.
SelectionReport pco_select(const KernelFamily& family, const Sample& sample);
SelectionReport pco_select(const KernelFamily& family, GramTables& tables);

/// Index of the selected member only; shares `tables` with other callers.
std::size_t pco_select_index(const KernelFamily& family, GramTables& tables);

struct QuotientConfig {
  double beta = 0.0;

  /// beta_j = j^(-1/4) at j = n.
  static QuotientConfig defaults(std::size_t n);
};

/// s_hat_{k_num, l}(x) / s_hat_{k_den, 1}(x) when the denominator is at
/// least beta (boundary included); std::nullopt outside that set.
std::optional<double> quotient_estimate(const KernelSpec& k_num, const KernelSpec& k_den, const Sample& sample_num_loss,
                                        const QuotientConfig& cfg, Point x);

}  // namespace pco
