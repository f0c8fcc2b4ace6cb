#include <cmath>
#include <vector>

#include "doctest.h"
#include "pco/bases.hpp"
#include "pco/error.hpp"

using namespace pco;

namespace {

// Explicit sum P_n(x) = 2^-n sum_k (-1)^k C(n,k) C(2n-2k,n) x^(n-2k).
long double legendre_explicit(int n, long double x) {
  long double s = 0.0L;
  for (int k = 0; 2 * k <= n; ++k) {
    long double c1 = 1.0L, c2 = 1.0L;
    for (int i = 1; i <= k; ++i) c1 = c1 * (n - k + i) / i;
    for (int i = 1; i <= n; ++i) c2 = c2 * (n - 2 * k + i) / i;
    s += ((k % 2) ? -1.0L : 1.0L) * c1 * c2 * std::pow(x, n - 2 * k);
  }
  return s / std::pow(2.0L, n);
}

// Gram matrix entry by 64 Gauss-Legendre nodes per unit length.
double gram_by_quadrature(const BasisFamily& b, int m, int j, int m2, int j2) {
  const Interval s = b.support();
  PanelSpec p{s.lo, s.hi, 1.0 / 16.0, {}, 4};
  for (int k = 1; k < m; ++k) p.breaks.push_back(s.lo + s.length() * k / m);
  for (int k = 1; k < m2; ++k) p.breaks.push_back(s.lo + s.length() * k / m2);
  if (b.nested()) p.breaks.clear();
  p.order = 16;
  p.max_width = 0.25;
  return integrate_1d(p, [&](double x) { return eval_basis(b, m, j, x) * eval_basis(b, m2, j2, x); });
}

}  // namespace

TEST_CASE("basis names round trip") {
  for (BasisKind k : {BasisKind::Trigonometric, BasisKind::RegularHistogram, BasisKind::Legendre})
    CHECK(basis_kind_from_string(to_string(k)) == k);
  CHECK_THROWS_AS(basis_kind_from_string("wavelet"), Error);
}

TEST_CASE("trigonometric members match their closed forms") {
  const BasisFamily b(BasisKind::Trigonometric);
  CHECK(eval_basis(b, 5, 1, 0.3) == 1.0);
  CHECK(eval_basis(b, 5, 2, 0.3) == doctest::Approx(std::sqrt(2.0) * std::cos(2 * M_PI * 0.3)));
  CHECK(eval_basis(b, 5, 3, 0.3) == doctest::Approx(std::sqrt(2.0) * std::sin(2 * M_PI * 0.3)));
  CHECK(eval_basis(b, 5, 4, 0.3) == doctest::Approx(std::sqrt(2.0) * std::cos(4 * M_PI * 0.3)));
  CHECK(eval_basis(b, 5, 2, 1.5) == 0.0);
}

TEST_CASE("Legendre members are normalized Legendre polynomials from degree one") {
  const BasisFamily b(BasisKind::Legendre);
  for (int j = 1; j <= 20; ++j)
    for (double x : {-1.0, -0.73, 0.0, 0.41, 0.99, 1.0}) {
      const double ref = std::sqrt((2.0 * j + 1.0) / 2.0) * static_cast<double>(legendre_explicit(j, x));
      CHECK(eval_basis(b, 20, j, x) == doctest::Approx(ref).epsilon(1e-12));
    }
  CHECK(eval_basis(b, 3, 1, 1.5) == 0.0);
}

TEST_CASE("histogram members are scaled cell indicators") {
  const BasisFamily b(BasisKind::RegularHistogram);
  CHECK(eval_basis(b, 4, 2, 0.3) == doctest::Approx(2.0));
  CHECK(eval_basis(b, 4, 3, 0.3) == 0.0);
  CHECK(histogram_cell(4, 0.0) == 1);
  CHECK(histogram_cell(4, 0.25) == 2);
  CHECK(histogram_cell(4, 0.999999) == 4);
  CHECK(histogram_cell(4, 1.0) == 0);
  CHECK(histogram_cell(4, -0.1) == 0);
  CHECK(b.breakpoints(4) == std::vector<double>{0.25, 0.5, 0.75});
}

TEST_CASE("every shipped basis is orthonormal under quadrature") {
  for (BasisKind k : {BasisKind::Trigonometric, BasisKind::RegularHistogram, BasisKind::Legendre}) {
    const BasisFamily b(k);
    for (int m : {1, 4, 9}) {
      for (int i = 1; i <= m; ++i)
        for (int j = 1; j <= m; ++j)
          CHECK(gram_by_quadrature(b, m, i, m, j) == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-12).scale(1.0));
    }
  }
}

TEST_CASE("cross Gram matches quadrature across dimensions") {
  for (BasisKind k : {BasisKind::Trigonometric, BasisKind::RegularHistogram, BasisKind::Legendre}) {
    const BasisFamily b(k);
    for (int m : {2, 3, 5})
      for (int m2 : {2, 4, 7})
        for (int i = 1; i <= m; ++i)
          for (int j = 1; j <= m2; ++j)
            CHECK(basis_cross_gram(b, m, i, m2, j) == doctest::Approx(gram_by_quadrature(b, m, i, m2, j)).epsilon(1e-12).scale(1.0));
  }
  const BasisFamily h(BasisKind::RegularHistogram);
  CHECK(basis_cross_gram(h, 2, 1, 4, 1) == doctest::Approx(std::sqrt(8.0) * 0.25));
}

TEST_CASE("nested bases do not depend on m") {
  for (BasisKind k : {BasisKind::Trigonometric, BasisKind::Legendre}) {
    const BasisFamily b(k);
    CHECK(b.nested());
    for (double x : {0.1, 0.5, 0.9}) CHECK(eval_basis(b, 3, 2, x) == eval_basis(b, 11, 2, x));
  }
  CHECK_FALSE(BasisFamily(BasisKind::RegularHistogram).nested());
}

TEST_CASE("sup of the squared sum agrees with a dense grid") {
  for (BasisKind k : {BasisKind::Trigonometric, BasisKind::RegularHistogram, BasisKind::Legendre}) {
    const BasisFamily b(k);
    const Interval s = b.support();
    for (int m = 1; m <= 12; ++m) {
      double best = 0.0;
      std::vector<double> v(m);
      for (int g = 0; g <= 20000; ++g) {
        const double x = s.lo + s.length() * g / 20000.0;
        eval_basis_all(b, m, std::min(x, std::nextafter(s.hi, s.lo)), v);
        double t = 0.0;
        for (double y : v) t += y * y;
        best = std::max(best, t);
      }
      CHECK(sup_squared_sum(b, m) == doctest::Approx(best).epsilon(1e-6));
      CHECK(sup_squared_sum(b, m) <= b.uniform_bound() * m + 1e-12);
    }
  }
  CHECK(sup_squared_sum(BasisFamily(BasisKind::Legendre), 1) == doctest::Approx(1.5));
}

TEST_CASE("eval_basis_all agrees with single evaluations") {
  for (BasisKind k : {BasisKind::Trigonometric, BasisKind::RegularHistogram, BasisKind::Legendre}) {
    const BasisFamily b(k);
    std::vector<double> v(7);
    eval_basis_all(b, 7, 0.37, v);
    for (int j = 1; j <= 7; ++j) CHECK(v[j - 1] == doctest::Approx(eval_basis(b, 7, j, 0.37)).epsilon(1e-14));
  }
}

TEST_CASE("index and cap violations are rejected") {
  const BasisFamily b(BasisKind::Trigonometric, 8);
  CHECK_THROWS_AS(eval_basis(b, 9, 1, 0.5), Error);
  CHECK_THROWS_AS(eval_basis(b, 4, 5, 0.5), Error);
  CHECK_THROWS_AS(eval_basis(b, 4, 0, 0.5), Error);
  std::vector<double> small(2);
  CHECK_THROWS_AS(eval_basis_all(b, 4, 0.5, small), Error);
}
