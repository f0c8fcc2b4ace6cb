#pragma once

// Product kernels K(x', x) on R^d x R^d: bandwidth kernels built from a
// one-dimensional smoothing kernel, and (weighted) projection kernels built
// from an orthonormal basis. All L2 geometry is between sections K(x', .).

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "pco/bases.hpp"
#include "pco/numerics.hpp"

namespace pco {

enum class BaseKernelKind { Gaussian, Epanechnikov };

std::string to_string(BaseKernelKind kind);
BaseKernelKind base_kernel_from_string(const std::string& name);

struct BaseKernel {
  BaseKernelKind kind = BaseKernelKind::Gaussian;

  double operator()(double u) const;
  [[nodiscard]] double l1_norm() const { return 1.0; }
  [[nodiscard]] double l2_norm_sq() const;
  [[nodiscard]] double at_zero() const;
  /// Support radius in units of the bandwidth. Gaussian tails are cut at
  /// 8 standard deviations (mass beyond is below 1.3e-15).
  [[nodiscard]] double radius() const;

  bool operator==(const BaseKernel&) const = default;
};

struct BandwidthKernel {
  BaseKernel base;
  std::vector<double> h;

  bool operator==(const BandwidthKernel&) const = default;
};

struct ProjectionKernel {
  BasisFamily basis{BasisKind::Trigonometric};
  std::vector<int> m;
  /// Weights w_1, w_2, ... in [0, 1]; empty means all ones.
  std::vector<double> w;

  [[nodiscard]] double weight(int j) const { return w.empty() ? 1.0 : w[static_cast<std::size_t>(j - 1)]; }
  [[nodiscard]] bool weighted() const { return !w.empty(); }

  bool operator==(const ProjectionKernel&) const = default;
};

class KernelSpec {
 public:
  static KernelSpec bandwidth(BaseKernel base, std::vector<double> h);
  static KernelSpec projection(BasisFamily basis, std::vector<int> m, std::vector<double> w = {});

  [[nodiscard]] std::size_t dim() const;
  [[nodiscard]] bool is_bandwidth() const { return std::holds_alternative<BandwidthKernel>(v_); }
  [[nodiscard]] bool is_projection() const { return std::holds_alternative<ProjectionKernel>(v_); }
  [[nodiscard]] const BandwidthKernel& as_bandwidth() const { return std::get<BandwidthKernel>(v_); }
  [[nodiscard]] const ProjectionKernel& as_projection() const { return std::get<ProjectionKernel>(v_); }

  /// Larger is smoother: prod h_q for bandwidth kernels, 1 / prod m_q for
  /// projection kernels. Used for tie-breaking and family capping.
  [[nodiscard]] double smoothness() const;

  /// Compact human-readable label, e.g. "gaussian h=0.1,0.2".
  [[nodiscard]] std::string label() const;

  /// Quadrature window covering the support of u -> K(center, u) in
  /// coordinate q, resolving its features.
  [[nodiscard]] PanelSpec window(std::size_t q, double center) const;

  bool operator==(const KernelSpec&) const = default;

 private:
  explicit KernelSpec(std::variant<BandwidthKernel, ProjectionKernel> v) : v_(std::move(v)) {}
  std::variant<BandwidthKernel, ProjectionKernel> v_;
};

using Point = std::span<const double>;

/// Exact, unique text key for a spec (hex floats); used for caching.
std::string spec_key(const KernelSpec& spec);

double kernel_eval(const KernelSpec& spec, Point x_prime, Point x);

/// <K_a(xa, .), K_b(xb, .)>_2. Gaussian pairs and projection pairs use
/// closed forms; other bandwidth pairs integrate the piecewise-polynomial
/// product exactly per coordinate.
double section_inner(const KernelSpec& a, Point xa, const KernelSpec& b, Point xb);

/// Brute-force <K_a(xa, .), K_b(xb, .)>_2 by Gauss-Legendre quadrature of
/// the kernel factors, one coordinate at a time. Used as an oracle.
double section_inner_quadrature(const KernelSpec& a, Point xa, const KernelSpec& b, Point xb, int order = 32);

double section_sq_norm(const KernelSpec& spec, Point x_prime);

/// sup_x |K(x, x)|.
double diag_sup(const KernelSpec& spec);

/// ||K(x', .)||_1.
double section_l1_norm(const KernelSpec& spec, Point x_prime);

struct KernelFamily {
  std::vector<KernelSpec> specs;
  std::size_t n = 0;
  std::size_t k0_index = 0;

  [[nodiscard]] std::size_t size() const { return specs.size(); }
  [[nodiscard]] std::size_t dim() const { return specs.empty() ? 0 : specs.front().dim(); }
  [[nodiscard]] const KernelSpec& k0() const { return specs.at(k0_index); }
};

/// Argmax of diag_sup; ties go to the least smooth kernel, then the lowest index.
std::size_t find_overfitting_k0(std::span<const KernelSpec> specs);
std::size_t find_overfitting_k0(const KernelFamily& family);

/// Family over grid^d. If the grid has more than n^(1/d) values the n
/// smoothest tuples are kept, plus the overfitting tuple (all coordinates
/// at the smallest grid value).
KernelFamily make_bandwidth_family(BaseKernel base, double h_min, std::span<const double> grid, std::size_t d,
                                   std::size_t n);

/// h_min * (1 / h_min)^(k / (count - 1)), k = 0..count-1.
std::vector<double> geometric_grid(double h_min, std::size_t count);

/// Family over {1..m_max}^d; requires m_max^d <= n.
KernelFamily make_projection_family(BasisFamily basis, int m_max, std::size_t d, std::size_t n,
                                    std::vector<double> w = {});

/// Checks the family invariants (shared dimension and variant, |specs| <= n,
/// k0 maximizes diag_sup) and throws on violation.
void validate_family(const KernelFamily& family);

}  // namespace pco
