#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "oracle.hpp"
#include "pco/error.hpp"
#include "pco/io.hpp"
#include "pco/selection.hpp"

using namespace pco;

namespace {

Sample random_sample(std::size_t n, LossKind loss, std::uint64_t seed, double noise = 0.3) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = u(gen);
    y[i] = std::sin(2.0 * M_PI * x[i]) + noise * z(gen);
  }
  return Sample(std::move(x), 1, std::move(y), LossMap{loss});
}

// Criterion for Gaussian kernels from closed-form pair integrals.
double gaussian_criterion(const Sample& s, double h, double h0) {
  const std::size_t n = s.n();
  auto total = [&](double ha, double hb) {
    long double acc = 0.0L;
    const double sd = std::sqrt(ha * ha + hb * hb);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) acc += s.weight(i) * s.weight(j) * oracle::gauss_pdf(s.x(i)[0] - s.x(j)[0], sd);
    return static_cast<double>(acc) / (static_cast<double>(n) * n);
  };
  const double dist = total(h, h) - 2.0 * total(h, h0) + total(h0, h0);
  long double pen = 0.0L;
  for (std::size_t i = 0; i < n; ++i) pen += s.weight(i) * s.weight(i) * oracle::gauss_pdf(0.0, std::sqrt(h * h + h0 * h0));
  return dist + 2.0 * static_cast<double>(pen) / (static_cast<double>(n) * n);
}

}  // namespace

TEST_CASE("Gaussian penalty under the unit loss") {
  const Sample s = random_sample(40, LossKind::One, 1);
  for (double h : {0.05, 0.2, 0.7}) {
    const double h0 = 0.025;
    const auto k = KernelSpec::bandwidth(BaseKernel{}, {h});
    const auto k0 = KernelSpec::bandwidth(BaseKernel{}, {h0});
    const double ref = (2.0 / 40.0) / std::sqrt(2.0 * M_PI * (h * h + h0 * h0));
    CHECK(penalty(k, k0, s) == doctest::Approx(ref).epsilon(1e-13));
  }
}

TEST_CASE("projection penalty under the square loss") {
  const Sample s = random_sample(30, LossKind::Square, 2);
  const BasisFamily trig(BasisKind::Trigonometric);
  const auto k = KernelSpec::projection(trig, {3});
  const auto k0 = KernelSpec::projection(trig, {9});
  long double ref = 0.0L;
  for (std::size_t i = 0; i < s.n(); ++i) ref += 3.0 * s.weight(i) * s.weight(i);
  CHECK(penalty(k, k0, s) == doctest::Approx(2.0 * static_cast<double>(ref) / 900.0).epsilon(1e-12));
}

TEST_CASE("selection agrees with a brute-force criterion") {
  const Sample s = random_sample(200, LossKind::Identity, 3);
  const auto fam = make_bandwidth_family(BaseKernel{}, 0.005, geometric_grid(0.005, 10), 1, 200);
  const double h0 = fam.k0().as_bandwidth().h[0];
  std::size_t best = 0;
  double best_v = INFINITY;
  for (std::size_t k = 0; k < fam.size(); ++k) {
    const double v = gaussian_criterion(s, fam.specs[k].as_bandwidth().h[0], h0);
    if (v < best_v) {
      best_v = v;
      best = k;
    }
  }
  const auto rep = pco_select(fam, s);
  CHECK(rep.chosen_index == best);
  CHECK(rep.k0_index == fam.k0_index);
  REQUIRE(rep.rows.size() == fam.size());
  for (std::size_t k = 0; k < fam.size(); ++k) {
    const double ref = gaussian_criterion(s, fam.specs[k].as_bandwidth().h[0], h0);
    CHECK(rep.rows[k].total == doctest::Approx(ref).epsilon(1e-10).scale(1e-12));
    CHECK(rep.rows[k].total == doctest::Approx(rep.rows[k].distance + rep.rows[k].penalty));
    CHECK(rep.rows[k].penalty >= 0.0);
  }
  GramTables t(s);
  CHECK(pco_select_index(fam, t) == best);
}

TEST_CASE("criterion ties go to the smoothest kernel") {
  std::vector<double> x{0.1, 0.4, 0.8}, y{0.0, 0.0, 0.0};
  const Sample s(x, 1, y, LossMap{LossKind::Identity});
  KernelFamily fam;
  fam.n = 3;
  fam.specs = {KernelSpec::bandwidth(BaseKernel{}, {0.4}), KernelSpec::bandwidth(BaseKernel{}, {0.9}),
               KernelSpec::bandwidth(BaseKernel{}, {0.35})};
  fam.k0_index = find_overfitting_k0(fam);
  CHECK(fam.k0_index == 2);
  CHECK(pco_select(fam, s).chosen_index == 1);

  const BasisFamily trig(BasisKind::Trigonometric);
  const auto pf = make_projection_family(trig, 3, 1, 3);
  CHECK(pco_select(pf, s).chosen_index == 0);
}

TEST_CASE("a singleton family selects its only member") {
  const Sample s = random_sample(10, LossKind::Identity, 4);
  KernelFamily fam;
  fam.n = 10;
  fam.specs = {KernelSpec::bandwidth(BaseKernel{}, {0.3})};
  const auto rep = pco_select(fam, s);
  CHECK(rep.chosen_index == 0);
  CHECK(rep.rows[0].distance == 0.0);
}

TEST_CASE("selection reports serialize") {
  const Sample s = random_sample(50, LossKind::Identity, 5);
  const auto fam = make_projection_family(BasisFamily(BasisKind::RegularHistogram), 6, 1, 50);
  const auto rep = pco_select(fam, s);
  const Json j = Json::parse(rep.to_json());
  CHECK(j["kind"] == "selection_report");
  CHECK(j["schema_version"] == 1);
  CHECK(j["rows"].size() == 6);
  CHECK(j["chosen_index"] == rep.chosen_index);
  CHECK(j["rows"][rep.chosen_index]["chosen"] == true);
  CHECK(kernel_from_json(j["rows"][2]["spec"]) == fam.specs[2]);
  const std::string csv = rep.to_csv();
  CHECK(csv.rfind("index,spec,distance,penalty,total,chosen\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);
}

TEST_CASE("quotient estimator domain includes its boundary") {
  const Sample s({0.5}, 1, {3.0}, LossMap{LossKind::Identity});
  const auto k = KernelSpec::bandwidth(BaseKernel{BaseKernelKind::Epanechnikov}, {0.5});
  const std::vector<double> x{0.7};
  const double den = estimate(k, s.with_loss(LossMap{LossKind::One}), x);
  CHECK(den == doctest::Approx(0.75 * (1.0 - 0.16) / 0.5));
  const auto at = quotient_estimate(k, k, s, QuotientConfig{den}, x);
  REQUIRE(at.has_value());
  CHECK(*at == doctest::Approx(3.0));
  CHECK_FALSE(quotient_estimate(k, k, s, QuotientConfig{std::nextafter(den, 10.0)}, x).has_value());
  const std::vector<double> far{1.5};
  CHECK_FALSE(quotient_estimate(k, k, s, QuotientConfig{0.01}, far).has_value());
  CHECK_THROWS_AS(quotient_estimate(k, k, s, QuotientConfig{0.0}, x), Error);
  CHECK(QuotientConfig::defaults(10000).beta == doctest::Approx(0.1));
}
