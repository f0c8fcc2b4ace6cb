#pragma once

// Orthonormal families B_m = {phi_1^m, ..., phi_m^m} on a reference interval.

#include <span>
#include <string>
#include <vector>

#include "pco/numerics.hpp"

namespace pco {

enum class BasisKind {
  Trigonometric,     // chi_1 = 1, chi_{2j} = sqrt2 cos(2 pi j x), chi_{2j+1} = sqrt2 sin(2 pi j x) on [0,1]
  RegularHistogram,  // psi_j^m = sqrt(m) 1_[(j-1)/m, j/m) on [0,1]
  Legendre,          // member j is sqrt((2j+1)/2) Q_j on [-1,1], j = 1..m
};

std::string to_string(BasisKind kind);
BasisKind basis_kind_from_string(const std::string& name);

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
  [[nodiscard]] double length() const { return hi - lo; }
  [[nodiscard]] bool contains(double x) const { return x >= lo && x <= hi; }
};

class BasisFamily {
 public:
  static constexpr int kDefaultCap = 4096;

  explicit BasisFamily(BasisKind kind, int cap = kDefaultCap);

  [[nodiscard]] BasisKind kind() const { return kind_; }
  [[nodiscard]] int cap() const { return cap_; }
  [[nodiscard]] Interval support() const;

  /// Constant m_B with sup_x sum_j phi_j^m(x)^2 <= m_B * m for all m <= cap.
  /// Trigonometric: 2 (sup is m or m+1). Histogram: 1. Legendre: the sup is
  /// m(m+2)/2, so no constant works uniformly in m; (cap+2)/2 is returned.
  [[nodiscard]] double uniform_bound() const;

  /// phi_j^m(x) does not depend on m.
  [[nodiscard]] bool nested() const { return kind_ != BasisKind::RegularHistogram; }

  /// Cut points of B_m inside the support (histogram cell edges).
  [[nodiscard]] std::vector<double> breakpoints(int m) const;

  /// Panel layout resolving every member of B_m (and products of two).
  [[nodiscard]] PanelSpec panels(int m) const;

  bool operator==(const BasisFamily&) const = default;

 private:
  BasisKind kind_;
  int cap_;
};

/// phi_j^m(x); 0 outside the support. Throws on j outside [1, m] or m > cap.
double eval_basis(const BasisFamily& family, int m, int j, double x);

/// Writes phi_1^m(x), ..., phi_m^m(x) into out[0..m).
void eval_basis_all(const BasisFamily& family, int m, double x, std::span<double> out);

/// <phi_j^m, phi_j'^m'>_2 in closed form.
double basis_cross_gram(const BasisFamily& family, int m, int j, int m2, int j2);

/// sup_x sum_{j<=m} phi_j^m(x)^2.
double sup_squared_sum(const BasisFamily& family, int m);

/// Index (1-based) of the histogram cell of B_m holding x, or 0 outside [0,1).
int histogram_cell(int m, double x);

}  // namespace pco
