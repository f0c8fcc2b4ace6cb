#pragma once

// The estimator s_hat_{K,l}(x) = (1/n) sum_i K(X_i, x) l(Y_i) and the L2
// geometry between such estimators.

#include <cstddef>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pco/kernels.hpp"
#include "pco/reference.hpp"

namespace pco {

enum class LossKind { One, Identity, Square };

std::string to_string(LossKind kind);
LossKind loss_from_string(const std::string& name);

struct LossMap {
  LossKind kind = LossKind::One;

  double operator()(double y) const {
    switch (kind) {
      case LossKind::One: return 1.0;
      case LossKind::Identity: return y;
      case LossKind::Square: return y * y;
    }
    return 0.0;
  }
};

/// n observations (X_i, Y_i) with X stored row major, plus the loss map.
class Sample {
 public:
  Sample(std::vector<double> x, std::size_t d, std::vector<double> y, LossMap loss);

  [[nodiscard]] std::size_t n() const { return y_.size(); }
  [[nodiscard]] std::size_t d() const { return d_; }
  [[nodiscard]] Point x(std::size_t i) const { return {x_.data() + i * d_, d_}; }
  [[nodiscard]] double y(std::size_t i) const { return y_[i]; }
  [[nodiscard]] LossMap loss() const { return loss_; }
  /// l(Y_i).
  [[nodiscard]] double weight(std::size_t i) const { return w_[i]; }
  [[nodiscard]] std::span<const double> weights() const { return w_; }
  [[nodiscard]] const std::vector<double>& x_data() const { return x_; }
  [[nodiscard]] const std::vector<double>& y_data() const { return y_; }

  [[nodiscard]] Sample with_loss(LossMap loss) const { return Sample(x_, d_, y_, loss); }

 private:
  std::vector<double> x_;
  std::size_t d_;
  std::vector<double> y_;
  LossMap loss_;
  std::vector<double> w_;
};

double estimate(const KernelSpec& spec, const Sample& sample, Point x);

/// How sums of Gram entries are formed. Coefficient sums the estimator
/// coefficients in the basis (projection kernels only); Gram sums the
/// n x n section inner products. Auto picks Coefficient when possible.
enum class InnerRoute { Auto, Gram, Coefficient };

/// Cache of l-weighted Gram sums for one sample.
///
/// weighted_total(a, b) = sum_{i,j} l_i l_j <K_a(X_i, .), K_b(X_j, .)>,
/// weighted_diagonal(a, b) = sum_i l_i^2 <K_a(X_i, .), K_b(X_i, .)>.
/// Both are symmetric in (a, b) bit for bit. Results depend only on the
/// sample and the specs, never on the thread count.
class GramTables {
 public:
  static constexpr std::size_t kDefaultByteCap = std::size_t{256} << 20;

  explicit GramTables(const Sample& sample, std::size_t byte_cap = kDefaultByteCap);

  [[nodiscard]] const Sample& sample() const { return sample_; }

  double weighted_total(const KernelSpec& a, const KernelSpec& b, InnerRoute route = InnerRoute::Auto);
  double weighted_diagonal(const KernelSpec& a, const KernelSpec& b);

  /// Fills the total and diagonal caches for every listed pair; Gaussian
  /// pairs share one pass over the sample pairs.
  void prepare(std::span<const std::pair<KernelSpec, KernelSpec>> pairs);

  /// Full matrix G_ij = <K_a(X_i, .), K_b(X_j, .)>, row major. Matrices are
  /// kept under a byte cap with least-recently-used eviction.
  std::shared_ptr<const std::vector<double>> matrix(const KernelSpec& a, const KernelSpec& b);
  [[nodiscard]] std::size_t cached_matrix_bytes() const;

 private:
  using Key = std::pair<std::string, std::string>;

  struct Sums {
    double total = 0.0;
    double diagonal = 0.0;
  };

  Sums compute_generic(const KernelSpec& a, const KernelSpec& b);
  Sums compute_coefficient(const KernelSpec& a, const KernelSpec& b);
  double diagonal_direct(const KernelSpec& a, const KernelSpec& b) const;
  void compute_gaussian_batch(const std::vector<std::pair<KernelSpec, KernelSpec>>& pairs);
  const std::vector<double>& coefficients(const KernelSpec& spec);
  void store(const Key& key, Sums sums);
  bool lookup(const Key& key, Sums& out) const;

  Sample sample_;
  std::size_t byte_cap_;
  mutable std::mutex mu_;
  std::map<Key, Sums> sums_;
  std::map<Key, Sums> gram_route_sums_;
  std::map<std::string, std::vector<double>> coefficients_;
  std::list<std::pair<Key, std::shared_ptr<const std::vector<double>>>> lru_;
  std::size_t matrix_bytes_ = 0;
};

/// <s_hat_a, s_hat_b>_2 = weighted_total / n^2.
double estimator_inner(const KernelSpec& a, const KernelSpec& b, const Sample& sample,
                       InnerRoute route = InnerRoute::Auto);
double estimator_inner(GramTables& tables, const KernelSpec& a, const KernelSpec& b,
                       InnerRoute route = InnerRoute::Auto);

/// ||s_hat_a - s_hat_k0||^2. Rounding can push the expansion slightly
/// below zero; the result is clamped at 0 and a warning is emitted when the
/// raw value is below -1e-10 relative to the terms.
double criterion_distance(const KernelSpec& a, const KernelSpec& k0, const Sample& sample);
double criterion_distance(GramTables& tables, const KernelSpec& a, const KernelSpec& k0);

/// (1/n) sum_i ||K(X_i, .)||^2 l(Y_i)^2.
double sbar_empirical(const KernelSpec& spec, const Sample& sample);

/// sum_{i != j} <K_a(X_i,.) l_i - s_a, K_b(X_j,.) l_j - s_b>.
double u_statistic(const KernelSpec& a, const KernelSpec& b, const Sample& sample, const ReferenceFunction& s_mean_a,
                   const ReferenceFunction& s_mean_b);
double u_statistic(GramTables& tables, const KernelSpec& a, const KernelSpec& b, const ReferenceFunction& s_mean_a,
                   const ReferenceFunction& s_mean_b, double sa_sb_inner);

/// (1/n) sum_i ||K(X_i,.) l_i - s_K||^2.
double v_statistic(const KernelSpec& spec, const Sample& sample, const ReferenceFunction& s_mean);
double v_statistic(const KernelSpec& spec, const Sample& sample, const ReferenceFunction& s_mean,
                   double s_mean_sq_norm);

/// <s_hat_a - s_a, s_b - s> with s_a the kernel mean of a under s_true.
double w_statistic(const KernelSpec& a, const KernelSpec& b, const Sample& sample, const ReferenceFunction& s_mean_b,
                   const ReferenceFunction& s_true);
double w_statistic(const KernelSpec& a, const Sample& sample, const ReferenceFunction& s_mean_b,
                   const ReferenceFunction& s_true, double sa_dot_g);

}  // namespace pco
