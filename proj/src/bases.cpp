#include "pco/bases.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pco/error.hpp"

namespace pco {

namespace {

void check_indices(const BasisFamily& family, int m, int j) {
  if (m < 1) fail(ErrorKind::InvalidArgument, "basis: m must be >= 1");
  if (m > family.cap())
    fail(ErrorKind::InvalidArgument,
         "basis: m = " + std::to_string(m) + " exceeds family cap " + std::to_string(family.cap()));
  if (j < 1 || j > m)
    fail(ErrorKind::InvalidArgument,
         "basis: index j = " + std::to_string(j) + " outside [1, " + std::to_string(m) + "]");
}

double trig_member(int j, double x) {
  if (x < 0.0 || x > 1.0) return 0.0;
  if (j == 1) return 1.0;
  const double freq = 2.0 * std::numbers::pi * static_cast<double>(j / 2);
  return j % 2 == 0 ? std::numbers::sqrt2 * std::cos(freq * x) : std::numbers::sqrt2 * std::sin(freq * x);
}

// Fills q[0..count) with Q_1(x), ..., Q_count(x).
void legendre_values(int count, double x, std::span<double> q) {
  double prev = 1.0;
  double cur = x;
  for (int k = 1; k <= count; ++k) {
    q[k - 1] = cur;
    const double next = ((2.0 * k + 1.0) * x * cur - k * prev) / (k + 1.0);
    prev = cur;
    cur = next;
  }
}

double legendre_scale(int j) { return std::sqrt((2.0 * j + 1.0) / 2.0); }

}  // namespace

std::string to_string(BasisKind kind) {
  switch (kind) {
    case BasisKind::Trigonometric: return "trigonometric";
    case BasisKind::RegularHistogram: return "histogram";
    case BasisKind::Legendre: return "legendre";
  }
  return "unknown";
}

BasisKind basis_kind_from_string(const std::string& name) {
  if (name == "trigonometric" || name == "trig") return BasisKind::Trigonometric;
  if (name == "histogram" || name == "regular_histogram") return BasisKind::RegularHistogram;
  if (name == "legendre") return BasisKind::Legendre;
  fail(ErrorKind::Config, "unknown basis '" + name + "' (expected trigonometric|histogram|legendre)");
}

BasisFamily::BasisFamily(BasisKind kind, int cap) : kind_(kind), cap_(cap) {
  if (cap < 1) fail(ErrorKind::InvalidArgument, "basis: cap must be >= 1");
}

Interval BasisFamily::support() const {
  if (kind_ == BasisKind::Legendre) return {-1.0, 1.0};
  return {0.0, 1.0};
}

double BasisFamily::uniform_bound() const {
  switch (kind_) {
    case BasisKind::Trigonometric: return 2.0;
    case BasisKind::RegularHistogram: return 1.0;
    case BasisKind::Legendre: return (cap_ + 2.0) / 2.0;
  }
  return 0.0;
}

std::vector<double> BasisFamily::breakpoints(int m) const {
  std::vector<double> out;
  if (kind_ == BasisKind::RegularHistogram)
    for (int j = 1; j < m; ++j) out.push_back(static_cast<double>(j) / m);
  return out;
}

PanelSpec BasisFamily::panels(int m) const {
  const Interval s = support();
  PanelSpec p;
  p.lo = s.lo;
  p.hi = s.hi;
  p.breaks = breakpoints(m);
  p.order = 16;
  switch (kind_) {
    case BasisKind::RegularHistogram: p.max_width = 1.0 / m; break;
    case BasisKind::Trigonometric:
    case BasisKind::Legendre: p.max_width = s.length() / std::max(1, 2 * m); break;
  }
  return p;
}

int histogram_cell(int m, double x) {
  if (!(x >= 0.0 && x < 1.0)) return 0;
  const int j = static_cast<int>(std::floor(x * m)) + 1;
  return std::min(j, m);
}

double eval_basis(const BasisFamily& family, int m, int j, double x) {
  check_indices(family, m, j);
  switch (family.kind()) {
    case BasisKind::Trigonometric: return trig_member(j, x);
    case BasisKind::RegularHistogram: return histogram_cell(m, x) == j ? std::sqrt(static_cast<double>(m)) : 0.0;
    case BasisKind::Legendre: {
      if (x < -1.0 || x > 1.0) return 0.0;
      std::vector<double> q(static_cast<std::size_t>(j));
      legendre_values(j, x, q);
      return legendre_scale(j) * q[j - 1];
    }
  }
  return 0.0;
}

void eval_basis_all(const BasisFamily& family, int m, double x, std::span<double> out) {
  check_indices(family, m, 1);
  if (out.size() < static_cast<std::size_t>(m)) fail(ErrorKind::InvalidArgument, "eval_basis_all: output too small");
  switch (family.kind()) {
    case BasisKind::Trigonometric:
      for (int j = 1; j <= m; ++j) out[j - 1] = trig_member(j, x);
      break;
    case BasisKind::RegularHistogram: {
      std::fill(out.begin(), out.begin() + m, 0.0);
      const int cell = histogram_cell(m, x);
      if (cell > 0) out[cell - 1] = std::sqrt(static_cast<double>(m));
      break;
    }
    case BasisKind::Legendre:
      if (x < -1.0 || x > 1.0) {
        std::fill(out.begin(), out.begin() + m, 0.0);
        break;
      }
      legendre_values(m, x, out);
      for (int j = 1; j <= m; ++j) out[j - 1] *= legendre_scale(j);
      break;
  }
}

double basis_cross_gram(const BasisFamily& family, int m, int j, int m2, int j2) {
  check_indices(family, m, j);
  check_indices(family, m2, j2);
  if (family.nested()) return j == j2 ? 1.0 : 0.0;
  const double lo = std::max(static_cast<double>(j - 1) / m, static_cast<double>(j2 - 1) / m2);
  const double hi = std::min(static_cast<double>(j) / m, static_cast<double>(j2) / m2);
  if (!(hi > lo)) return 0.0;
  return std::sqrt(static_cast<double>(m) * m2) * (hi - lo);
}

double sup_squared_sum(const BasisFamily& family, int m) {
  check_indices(family, m, 1);
  switch (family.kind()) {
    case BasisKind::RegularHistogram: return m;
    // 1 + sum over complete (cos, sin) pairs of 2, plus 2 cos^2 for a
    // trailing cosine when m is even; that cosine peaks at x = 0.
    case BasisKind::Trigonometric: return m % 2 == 1 ? m : m + 1;
    // |Q_j| <= 1 with equality at x = +-1.
    case BasisKind::Legendre: return m * (m + 2.0) / 2.0;
  }
  return 0.0;
}

}  // namespace pco
