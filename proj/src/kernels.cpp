#include "pco/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "pco/error.hpp"

namespace pco {

namespace {

constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934;

void check_dims(const KernelSpec& spec, Point a, Point b) {
  if (a.size() != spec.dim() || b.size() != spec.dim())
    fail(ErrorKind::DimensionMismatch, "kernel of dimension " + std::to_string(spec.dim()) +
                                           " evaluated at points of dimension " + std::to_string(a.size()) +
                                           " and " + std::to_string(b.size()));
}

// sum_{j <= m} w_j phi_j(x) phi_j(y) for one coordinate of a projection kernel.
double projection_factor(const ProjectionKernel& p, int m, double x, double y) {
  const BasisFamily& basis = p.basis;
  switch (basis.kind()) {
    case BasisKind::RegularHistogram: {
      const int cx = histogram_cell(m, x);
      if (cx == 0 || cx != histogram_cell(m, y)) return 0.0;
      return p.weight(cx) * m;
    }
    case BasisKind::Trigonometric: {
      if (x < 0.0 || x > 1.0 || y < 0.0 || y > 1.0) return 0.0;
      double s = p.weight(1);
      for (int j = 2; j <= m; ++j) s += p.weight(j) * eval_basis(basis, m, j, x) * eval_basis(basis, m, j, y);
      return s;
    }
    case BasisKind::Legendre: {
      if (x < -1.0 || x > 1.0 || y < -1.0 || y > 1.0) return 0.0;
      std::vector<double> vx(static_cast<std::size_t>(m)), vy(static_cast<std::size_t>(m));
      eval_basis_all(basis, m, x, vx);
      eval_basis_all(basis, m, y, vy);
      double s = 0.0;
      for (int j = 1; j <= m; ++j) s += p.weight(j) * vx[j - 1] * vy[j - 1];
      return s;
    }
  }
  return 0.0;
}

// One coordinate of <K_a(xa, .), K_b(xb, .)> for two projection kernels.
double projection_inner_factor(const ProjectionKernel& a, int ma, double xa, const ProjectionKernel& b, int mb,
                               double xb) {
  const BasisFamily& basis = a.basis;
  if (basis.kind() == BasisKind::RegularHistogram) {
    const int ca = histogram_cell(ma, xa);
    const int cb = histogram_cell(mb, xb);
    if (ca == 0 || cb == 0) return 0.0;
    return a.weight(ca) * b.weight(cb) * std::sqrt(static_cast<double>(ma) * mb) *
           basis_cross_gram(basis, ma, ca, mb, cb);
  }
  const int mm = std::min(ma, mb);
  const Interval s = basis.support();
  if (!s.contains(xa) || !s.contains(xb)) return 0.0;
  std::vector<double> va(static_cast<std::size_t>(mm)), vb(static_cast<std::size_t>(mm));
  eval_basis_all(basis, mm, xa, va);
  eval_basis_all(basis, mm, xb, vb);
  double sum = 0.0;
  for (int j = 1; j <= mm; ++j) sum += a.weight(j) * b.weight(j) * va[j - 1] * vb[j - 1];
  return sum;
}

double bandwidth_inner_factor(const BaseKernel& ka, double ha, double xa, const BaseKernel& kb, double hb,
                              double xb) {
  if (ka.kind == BaseKernelKind::Gaussian && kb.kind == BaseKernelKind::Gaussian) {
    const double var = ha * ha + hb * hb;
    const double d = xa - xb;
    return std::exp(-d * d / (2.0 * var)) / std::sqrt(2.0 * std::numbers::pi * var);
  }
  // Piecewise polynomial (or polynomial times Gaussian) product: integrate
  // over the overlap of the two windows with breakpoints at window edges.
  PanelSpec wa{xa - ka.radius() * ha, xa + ka.radius() * ha, ha, {}, 16};
  PanelSpec wb{xb - kb.radius() * hb, xb + kb.radius() * hb, hb, {}, 16};
  const PanelSpec w = intersect(wa, wb);
  return integrate_1d(w, [&](double u) { return ka((xa - u) / ha) / ha * kb((xb - u) / hb) / hb; });
}

double weighted_sup_grid(const ProjectionKernel& p, int m) {
  const Interval s = p.basis.support();
  constexpr int kGrid = 10000;
  std::vector<double> v(static_cast<std::size_t>(m));
  double best = 0.0;
  for (int g = 0; g <= kGrid; ++g) {
    const double x = s.lo + s.length() * g / kGrid;
    eval_basis_all(p.basis, m, x, v);
    double sum = 0.0;
    for (int j = 1; j <= m; ++j) sum += p.weight(j) * v[j - 1] * v[j - 1];
    best = std::max(best, std::abs(sum));
  }
  return best;
}

}  // namespace

std::string to_string(BaseKernelKind kind) {
  return kind == BaseKernelKind::Gaussian ? "gaussian" : "epanechnikov";
}

BaseKernelKind base_kernel_from_string(const std::string& name) {
  if (name == "gaussian") return BaseKernelKind::Gaussian;
  if (name == "epanechnikov") return BaseKernelKind::Epanechnikov;
  fail(ErrorKind::Config, "unknown base kernel '" + name + "' (expected gaussian|epanechnikov)");
}

double BaseKernel::operator()(double u) const {
  if (kind == BaseKernelKind::Gaussian) return kInvSqrt2Pi * std::exp(-0.5 * u * u);
  return std::abs(u) <= 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
}

double BaseKernel::l2_norm_sq() const {
  return kind == BaseKernelKind::Gaussian ? 0.5 / std::sqrt(std::numbers::pi) : 0.6;
}

double BaseKernel::at_zero() const { return kind == BaseKernelKind::Gaussian ? kInvSqrt2Pi : 0.75; }

double BaseKernel::radius() const { return kind == BaseKernelKind::Gaussian ? 8.0 : 1.0; }

KernelSpec KernelSpec::bandwidth(BaseKernel base, std::vector<double> h) {
  if (h.empty()) fail(ErrorKind::InvalidArgument, "bandwidth kernel needs at least one coordinate");
  for (double v : h)
    if (!(v > 0.0) || !std::isfinite(v)) fail(ErrorKind::InvalidArgument, "bandwidths must be positive and finite");
  return KernelSpec(BandwidthKernel{base, std::move(h)});
}

KernelSpec KernelSpec::projection(BasisFamily basis, std::vector<int> m, std::vector<double> w) {
  if (m.empty()) fail(ErrorKind::InvalidArgument, "projection kernel needs at least one coordinate");
  int m_top = 0;
  for (int v : m) {
    if (v < 1 || v > basis.cap())
      fail(ErrorKind::InvalidArgument, "projection dimension " + std::to_string(v) + " outside [1, cap]");
    m_top = std::max(m_top, v);
  }
  if (!w.empty()) {
    if (w.size() < static_cast<std::size_t>(m_top))
      fail(ErrorKind::InvalidArgument, "weight vector shorter than the largest dimension");
    for (double v : w)
      if (!(v >= 0.0 && v <= 1.0)) fail(ErrorKind::InvalidArgument, "projection weights must lie in [0, 1]");
  }
  return KernelSpec(ProjectionKernel{basis, std::move(m), std::move(w)});
}

std::size_t KernelSpec::dim() const {
  return is_bandwidth() ? as_bandwidth().h.size() : as_projection().m.size();
}

double KernelSpec::smoothness() const {
  double s = 1.0;
  if (is_bandwidth()) {
    for (double h : as_bandwidth().h) s *= h;
    return s;
  }
  for (int m : as_projection().m) s *= m;
  return 1.0 / s;
}

std::string KernelSpec::label() const {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.precision(17);
  if (is_bandwidth()) {
    os << to_string(as_bandwidth().base.kind) << " h=";
    const auto& h = as_bandwidth().h;
    for (std::size_t q = 0; q < h.size(); ++q) os << (q ? "," : "") << h[q];
  } else {
    const auto& p = as_projection();
    os << to_string(p.basis.kind()) << (p.weighted() ? " weighted" : "") << " m=";
    for (std::size_t q = 0; q < p.m.size(); ++q) os << (q ? "," : "") << p.m[q];
  }
  return os.str();
}

std::string spec_key(const KernelSpec& spec) {
  std::string key;
  char buf[64];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%a,", v);
    key += buf;
  };
  if (spec.is_bandwidth()) {
    const auto& k = spec.as_bandwidth();
    key = "b:" + to_string(k.base.kind) + ":";
    for (double h : k.h) put(h);
  } else {
    const auto& p = spec.as_projection();
    key = "p:" + to_string(p.basis.kind()) + ":" + std::to_string(p.basis.cap()) + ":";
    for (int m : p.m) key += std::to_string(m) + ",";
    key += ":";
    for (double w : p.w) put(w);
  }
  return key;
}

PanelSpec KernelSpec::window(std::size_t q, double center) const {
  if (is_bandwidth()) {
    const auto& k = as_bandwidth();
    const double h = k.h.at(q);
    const double r = k.base.radius() * h;
    return PanelSpec{center - r, center + r, 2.0 * h, {}, 16};
  }
  const auto& p = as_projection();
  return p.basis.panels(p.m.at(q));
}

double kernel_eval(const KernelSpec& spec, Point x_prime, Point x) {
  check_dims(spec, x_prime, x);
  double value = 1.0;
  if (spec.is_bandwidth()) {
    const auto& k = spec.as_bandwidth();
    for (std::size_t q = 0; q < x.size(); ++q) value *= k.base((x_prime[q] - x[q]) / k.h[q]) / k.h[q];
    return value;
  }
  const auto& p = spec.as_projection();
  for (std::size_t q = 0; q < x.size() && value != 0.0; ++q) value *= projection_factor(p, p.m[q], x[q], x_prime[q]);
  return value;
}

double section_inner(const KernelSpec& a, Point xa, const KernelSpec& b, Point xb) {
  check_dims(a, xa, xb);
  if (a.dim() != b.dim()) fail(ErrorKind::DimensionMismatch, "section_inner: kernels of different dimension");
  double value = 1.0;
  if (a.is_bandwidth() && b.is_bandwidth()) {
    const auto& ka = a.as_bandwidth();
    const auto& kb = b.as_bandwidth();
    for (std::size_t q = 0; q < xa.size() && value != 0.0; ++q)
      value *= bandwidth_inner_factor(ka.base, ka.h[q], xa[q], kb.base, kb.h[q], xb[q]);
    return value;
  }
  if (a.is_projection() && b.is_projection()) {
    const auto& pa = a.as_projection();
    const auto& pb = b.as_projection();
    if (pa.basis.kind() != pb.basis.kind())
      fail(ErrorKind::InvalidArgument, "section_inner: projection kernels over different bases");
    for (std::size_t q = 0; q < xa.size() && value != 0.0; ++q)
      value *= projection_inner_factor(pa, pa.m[q], xa[q], pb, pb.m[q], xb[q]);
    return value;
  }
  fail(ErrorKind::InvalidArgument, "section_inner: variant mismatch (bandwidth vs projection)");
}

double section_inner_quadrature(const KernelSpec& a, Point xa, const KernelSpec& b, Point xb, int order) {
  check_dims(a, xa, xb);
  // Both kernels are products over coordinates, so the integral is the
  // product of one-dimensional integrals.
  auto factor = [](const KernelSpec& k, std::size_t q, double center, double u) {
    if (k.is_bandwidth()) {
      const auto& bw = k.as_bandwidth();
      return bw.base((center - u) / bw.h[q]) / bw.h[q];
    }
    const auto& p = k.as_projection();
    return projection_factor(p, p.m[q], u, center);
  };
  double value = 1.0;
  for (std::size_t q = 0; q < a.dim() && value != 0.0; ++q) {
    PanelSpec w = intersect(a.window(q, xa[q]), b.window(q, xb[q]));
    w.order = order;
    // Kernel windows carry the breakpoints a projection needs; histogram
    // cells of both kernels are in the union already.
    if (w.empty()) return 0.0;
    value *= integrate_1d(w, [&](double u) { return factor(a, q, xa[q], u) * factor(b, q, xb[q], u); });
  }
  return value;
}

double section_sq_norm(const KernelSpec& spec, Point x_prime) {
  if (spec.is_bandwidth()) {
    if (x_prime.size() != spec.dim()) fail(ErrorKind::DimensionMismatch, "section_sq_norm: dimension mismatch");
    const auto& k = spec.as_bandwidth();
    double v = 1.0;
    for (double h : k.h) v *= k.base.l2_norm_sq() / h;
    return v;
  }
  return section_inner(spec, x_prime, spec, x_prime);
}

double diag_sup(const KernelSpec& spec) {
  double v = 1.0;
  if (spec.is_bandwidth()) {
    const auto& k = spec.as_bandwidth();
    for (double h : k.h) v *= std::abs(k.base.at_zero()) / h;
    return v;
  }
  const auto& p = spec.as_projection();
  for (int m : p.m) {
    if (p.basis.kind() == BasisKind::RegularHistogram) {
      double wmax = 0.0;
      for (int j = 1; j <= m; ++j) wmax = std::max(wmax, p.weight(j));
      v *= wmax * m;
    } else if (!p.weighted()) {
      v *= sup_squared_sum(p.basis, m);
    } else {
      v *= weighted_sup_grid(p, m);
    }
  }
  return v;
}

double section_l1_norm(const KernelSpec& spec, Point x_prime) {
  if (x_prime.size() != spec.dim()) fail(ErrorKind::DimensionMismatch, "section_l1_norm: dimension mismatch");
  double v = 1.0;
  if (spec.is_bandwidth()) {
    const auto& k = spec.as_bandwidth();
    for (std::size_t q = 0; q < k.h.size(); ++q) v *= k.base.l1_norm();
    return v;
  }
  const auto& p = spec.as_projection();
  for (std::size_t q = 0; q < p.m.size() && v != 0.0; ++q) {
    const int m = p.m[q];
    if (p.basis.kind() == BasisKind::RegularHistogram) {
      const int c = histogram_cell(m, x_prime[q]);
      v *= c == 0 ? 0.0 : p.weight(c);
      continue;
    }
    PanelSpec w = p.basis.panels(m);
    w.max_width /= 8.0;  // |.| has kinks at the sign changes
    v *= integrate_1d(w, [&](double u) { return std::abs(projection_factor(p, m, x_prime[q], u)); });
  }
  return v;
}

std::size_t find_overfitting_k0(std::span<const KernelSpec> specs) {
  if (specs.empty()) fail(ErrorKind::InvalidArgument, "find_overfitting_k0: empty family");
  std::size_t best = 0;
  double best_sup = diag_sup(specs[0]);
  for (std::size_t i = 1; i < specs.size(); ++i) {
    const double s = diag_sup(specs[i]);
    // Ties go to the least smooth kernel, then to the lowest index.
    if (s > best_sup || (s == best_sup && specs[i].smoothness() < specs[best].smoothness())) {
      best = i;
      best_sup = s;
    }
  }
  return best;
}

std::size_t find_overfitting_k0(const KernelFamily& family) { return find_overfitting_k0(family.specs); }

std::vector<double> geometric_grid(double h_min, std::size_t count) {
  if (count == 0) fail(ErrorKind::InvalidArgument, "geometric_grid: count must be positive");
  if (!(h_min > 0.0 && h_min <= 1.0)) fail(ErrorKind::InvalidArgument, "geometric_grid: h_min must lie in (0, 1]");
  std::vector<double> g(count);
  for (std::size_t k = 0; k < count; ++k) {
    g[k] = count == 1 ? h_min : h_min * std::pow(1.0 / h_min, static_cast<double>(k) / (count - 1));
  }
  g.front() = h_min;
  if (count > 1) g.back() = 1.0;
  return g;
}

KernelFamily make_bandwidth_family(BaseKernel base, double h_min, std::span<const double> grid, std::size_t d,
                                   std::size_t n) {
  if (grid.empty()) fail(ErrorKind::InvalidArgument, "bandwidth family: empty grid");
  if (d == 0 || n == 0) fail(ErrorKind::InvalidArgument, "bandwidth family: d and n must be positive");
  const double floor_h = std::pow(static_cast<double>(n), -1.0 / static_cast<double>(d));
  constexpr double kSlack = 1e-12;
  if (h_min < floor_h * (1.0 - kSlack) || h_min > 1.0)
    fail(ErrorKind::InvalidArgument, "bandwidth family: h_min must lie in [n^(-1/d), 1]");
  std::vector<double> values(grid.begin(), grid.end());
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  for (double h : values)
    if (h < h_min * (1.0 - kSlack) || h > 1.0 * (1.0 + kSlack))
      fail(ErrorKind::InvalidArgument, "bandwidth family: grid values must lie in [h_min, 1]");

  // Lexicographic tuples, first coordinate slowest.
  std::vector<std::vector<double>> tuples;
  std::vector<std::size_t> idx(d, 0);
  for (bool more = true; more;) {
    std::vector<double> h(d);
    for (std::size_t q = 0; q < d; ++q) h[q] = values[idx[q]];
    tuples.push_back(std::move(h));
    more = false;
    for (std::size_t q = d; q-- > 0;) {
      if (++idx[q] < values.size()) {
        more = true;
        break;
      }
      idx[q] = 0;
    }
  }

  if (tuples.size() > n) {
    std::vector<std::size_t> order(tuples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    auto prod = [&](std::size_t i) {
      double p = 1.0;
      for (double h : tuples[i]) p *= h;
      return p;
    };
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return prod(a) > prod(b); });
    std::vector<bool> keep(tuples.size(), false);
    keep[0] = true;  // all coordinates at the smallest value
    std::size_t kept = 1;
    for (std::size_t i : order) {
      if (kept == n) break;
      if (!keep[i]) {
        keep[i] = true;
        ++kept;
      }
    }
    std::vector<std::vector<double>> capped;
    for (std::size_t i = 0; i < tuples.size(); ++i)
      if (keep[i]) capped.push_back(tuples[i]);
    tuples = std::move(capped);
  }

  KernelFamily fam;
  fam.n = n;
  for (auto& h : tuples) fam.specs.push_back(KernelSpec::bandwidth(base, std::move(h)));
  fam.k0_index = find_overfitting_k0(fam);
  return fam;
}

KernelFamily make_projection_family(BasisFamily basis, int m_max, std::size_t d, std::size_t n,
                                    std::vector<double> w) {
  if (m_max < 1 || d == 0) fail(ErrorKind::InvalidArgument, "projection family: m_max and d must be positive");
  const double total = std::pow(static_cast<double>(m_max), static_cast<double>(d));
  if (total > static_cast<double>(n))
    fail(ErrorKind::InvalidArgument, "projection family: m_max^d = " + std::to_string(static_cast<long long>(total)) +
                                         " exceeds n = " + std::to_string(n));
  if (m_max > basis.cap()) fail(ErrorKind::InvalidArgument, "projection family: m_max exceeds basis cap");
  KernelFamily fam;
  fam.n = n;
  std::vector<int> m(d, 1);
  while (true) {
    fam.specs.push_back(KernelSpec::projection(basis, m, w));
    std::size_t q = d;
    bool done = true;
    while (q > 0) {
      --q;
      if (++m[q] <= m_max) {
        done = false;
        break;
      }
      m[q] = 1;
    }
    if (done) break;
  }
  fam.k0_index = find_overfitting_k0(fam);
  return fam;
}

void validate_family(const KernelFamily& family) {
  if (family.specs.empty()) fail(ErrorKind::InvalidArgument, "kernel family is empty");
  if (family.specs.size() > family.n)
    fail(ErrorKind::InvalidArgument, "kernel family has more members than the sample size it serves");
  const std::size_t d = family.specs.front().dim();
  const bool bw = family.specs.front().is_bandwidth();
  for (const auto& s : family.specs) {
    if (s.dim() != d) fail(ErrorKind::DimensionMismatch, "kernel family mixes dimensions");
    if (s.is_bandwidth() != bw) fail(ErrorKind::InvalidArgument, "kernel family mixes variants");
  }
  if (family.k0_index >= family.specs.size()) fail(ErrorKind::InvalidArgument, "k0 index out of range");
  if (diag_sup(family.k0()) < diag_sup(family.specs[find_overfitting_k0(family)]))
    fail(ErrorKind::InvalidArgument, "k0 does not maximize sup |K(x, x)| over the family");
}

}  // namespace pco
