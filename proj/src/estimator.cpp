#include "pco/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pco/error.hpp"

namespace pco {

namespace {

bool gaussian_pair(const KernelSpec& a, const KernelSpec& b) {
  return a.is_bandwidth() && b.is_bandwidth() && a.as_bandwidth().base.kind == BaseKernelKind::Gaussian &&
         b.as_bandwidth().base.kind == BaseKernelKind::Gaussian;
}

bool coefficient_pair(const KernelSpec& a, const KernelSpec& b) {
  return a.is_projection() && b.is_projection() && a.as_projection().basis.kind() == b.as_projection().basis.kind();
}

void check_pair(const KernelSpec& a, const KernelSpec& b, const Sample& s) {
  if (a.dim() != s.d() || b.dim() != s.d())
    fail(ErrorKind::DimensionMismatch, "kernel dimension does not match the sample dimension " + std::to_string(s.d()));
  if (a.is_bandwidth() != b.is_bandwidth())
    fail(ErrorKind::InvalidArgument, "kernels of different variants (bandwidth vs projection)");
  if (coefficient_pair(a, b) || a.is_bandwidth()) return;
  fail(ErrorKind::InvalidArgument, "projection kernels over different bases");
}

std::size_t tensor_size(const std::vector<int>& m) {
  std::size_t s = 1;
  for (int v : m) s *= static_cast<std::size_t>(v);
  return s;
}

// Sum over J of A_J times the cross-Gram image of B in the index space of A.
double coefficient_dot(const BasisFamily& basis, const std::vector<int>& ma, const std::vector<double>& ca,
                       const std::vector<int>& mb, const std::vector<double>& cb) {
  const std::size_t d = ma.size();
  std::vector<double> terms;
  if (basis.nested()) {
    // Only J <= min(ma, mb) coordinatewise contribute, with cross-Gram 1.
    std::vector<int> mm(d);
    for (std::size_t q = 0; q < d; ++q) mm[q] = std::min(ma[q], mb[q]);
    std::vector<std::size_t> idx(d, 0);
    terms.reserve(tensor_size(mm));
    for (bool more = true; more;) {
      std::size_t la = 0;
      std::size_t lb = 0;
      for (std::size_t q = 0; q < d; ++q) {
        la = la * static_cast<std::size_t>(ma[q]) + idx[q];
        lb = lb * static_cast<std::size_t>(mb[q]) + idx[q];
      }
      terms.push_back(ca[la] * cb[lb]);
      more = false;
      for (std::size_t q = d; q-- > 0;) {
        if (++idx[q] < static_cast<std::size_t>(mm[q])) {
          more = true;
          break;
        }
        idx[q] = 0;
      }
    }
    return pairwise_sum(terms);
  }
  // Histogram: per-coordinate lists of overlapping cells.
  struct Entry {
    std::size_t ja;
    std::size_t jb;
    double v;
  };
  std::vector<std::vector<Entry>> lists(d);
  for (std::size_t q = 0; q < d; ++q) {
    for (int ja = 1; ja <= ma[q]; ++ja)
      for (int jb = 1; jb <= mb[q]; ++jb) {
        const double v = basis_cross_gram(basis, ma[q], ja, mb[q], jb);
        if (v != 0.0) lists[q].push_back({static_cast<std::size_t>(ja - 1), static_cast<std::size_t>(jb - 1), v});
      }
    if (lists[q].empty()) return 0.0;
  }
  std::vector<std::size_t> pos(d, 0);
  for (bool more = true; more;) {
    std::size_t la = 0;
    std::size_t lb = 0;
    double v = 1.0;
    for (std::size_t q = 0; q < d; ++q) {
      const Entry& e = lists[q][pos[q]];
      la = la * static_cast<std::size_t>(ma[q]) + e.ja;
      lb = lb * static_cast<std::size_t>(mb[q]) + e.jb;
      v *= e.v;
    }
    terms.push_back(ca[la] * v * cb[lb]);
    more = false;
    for (std::size_t q = d; q-- > 0;) {
      if (++pos[q] < lists[q].size()) {
        more = true;
        break;
      }
      pos[q] = 0;
    }
  }
  return pairwise_sum(terms);
}

}  // namespace

std::string to_string(LossKind kind) {
  switch (kind) {
    case LossKind::One: return "one";
    case LossKind::Identity: return "identity";
    case LossKind::Square: return "square";
  }
  return "unknown";
}

LossKind loss_from_string(const std::string& name) {
  if (name == "one") return LossKind::One;
  if (name == "identity") return LossKind::Identity;
  if (name == "square") return LossKind::Square;
  fail(ErrorKind::Config, "unknown loss '" + name + "' (expected one|identity|square)");
}

Sample::Sample(std::vector<double> x, std::size_t d, std::vector<double> y, LossMap loss)
    : x_(std::move(x)), d_(d), y_(std::move(y)), loss_(loss) {
  if (d_ == 0) fail(ErrorKind::Data, "sample: dimension must be at least 1");
  if (y_.empty()) fail(ErrorKind::Data, "sample: no observations");
  if (x_.size() != y_.size() * d_)
    fail(ErrorKind::Data, "sample: X has " + std::to_string(x_.size()) + " entries, expected n*d = " +
                              std::to_string(y_.size() * d_));
  for (double v : x_)
    if (!std::isfinite(v)) fail(ErrorKind::Data, "sample: non-finite X entry");
  for (double v : y_)
    if (!std::isfinite(v)) fail(ErrorKind::Data, "sample: non-finite Y entry");
  w_.resize(y_.size());
  for (std::size_t i = 0; i < y_.size(); ++i) w_[i] = loss_(y_[i]);
}

double estimate(const KernelSpec& spec, const Sample& sample, Point x) {
  if (x.size() != sample.d() || spec.dim() != sample.d())
    fail(ErrorKind::DimensionMismatch, "estimate: dimension mismatch");
  std::vector<double> terms(sample.n());
  for (std::size_t i = 0; i < sample.n(); ++i) terms[i] = kernel_eval(spec, sample.x(i), x) * sample.weight(i);
  return pairwise_sum(terms) / static_cast<double>(sample.n());
}

// --- GramTables --------------------------------------------------------------

GramTables::GramTables(const Sample& sample, std::size_t byte_cap) : sample_(sample), byte_cap_(byte_cap) {}

bool GramTables::lookup(const Key& key, Sums& out) const {
  std::lock_guard lock(mu_);
  auto it = sums_.find(key);
  if (it == sums_.end()) return false;
  out = it->second;
  return true;
}

void GramTables::store(const Key& key, Sums sums) {
  std::lock_guard lock(mu_);
  sums_.emplace(key, sums);
}

double GramTables::diagonal_direct(const KernelSpec& a, const KernelSpec& b) const {
  const std::size_t n = sample_.n();
  std::vector<double> terms(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = sample_.weight(i);
    terms[i] = w * w * section_inner(a, sample_.x(i), b, sample_.x(i));
  }
  return pairwise_sum(terms);
}

GramTables::Sums GramTables::compute_generic(const KernelSpec& a, const KernelSpec& b) {
  const std::size_t n = sample_.n();
  std::vector<double> rows(n);
  std::vector<double> diag(n);
  parallel_for(n, [&](std::size_t i) {
    std::vector<double> terms(n);
    for (std::size_t j = 0; j < n; ++j) {
      const double g = section_inner(a, sample_.x(i), b, sample_.x(j));
      terms[j] = sample_.weight(j) * g;
      if (j == i) diag[i] = sample_.weight(i) * sample_.weight(i) * g;
    }
    rows[i] = sample_.weight(i) * pairwise_sum(terms);
  });
  return {pairwise_sum(rows), pairwise_sum(diag)};
}

const std::vector<double>& GramTables::coefficients(const KernelSpec& spec) {
  const std::string key = spec_key(spec);
  {
    std::lock_guard lock(mu_);
    auto it = coefficients_.find(key);
    if (it != coefficients_.end()) return it->second;
  }
  const auto& p = spec.as_projection();
  const std::size_t n = sample_.n();
  const std::size_t d = p.m.size();
  // vals[q][i * m_q + j] = w_j phi_j^{m_q}(X_iq)
  std::vector<std::vector<double>> vals(d);
  for (std::size_t q = 0; q < d; ++q) {
    const auto mq = static_cast<std::size_t>(p.m[q]);
    vals[q].resize(n * mq);
    for (std::size_t i = 0; i < n; ++i) {
      std::span<double> row(vals[q].data() + i * mq, mq);
      eval_basis_all(p.basis, p.m[q], sample_.x(i)[q], row);
      for (std::size_t j = 0; j < mq; ++j) row[j] *= p.weight(static_cast<int>(j) + 1);
    }
  }
  const std::size_t count = tensor_size(p.m);
  std::vector<double> coef(count);
  parallel_for(count, [&](std::size_t lin) {
    std::vector<std::size_t> jdx(d);
    std::size_t rest = lin;
    for (std::size_t q = d; q-- > 0;) {
      jdx[q] = rest % static_cast<std::size_t>(p.m[q]);
      rest /= static_cast<std::size_t>(p.m[q]);
    }
    std::vector<double> terms(n);
    for (std::size_t i = 0; i < n; ++i) {
      double v = sample_.weight(i);
      for (std::size_t q = 0; q < d; ++q) v *= vals[q][i * static_cast<std::size_t>(p.m[q]) + jdx[q]];
      terms[i] = v;
    }
    coef[lin] = pairwise_sum(terms);
  });
  std::lock_guard lock(mu_);
  return coefficients_.emplace(key, std::move(coef)).first->second;
}

GramTables::Sums GramTables::compute_coefficient(const KernelSpec& a, const KernelSpec& b) {
  const auto& ca = coefficients(a);
  const auto& cb = coefficients(b);
  const double total = coefficient_dot(a.as_projection().basis, a.as_projection().m, ca, b.as_projection().m, cb);
  return {total, diagonal_direct(a, b)};
}

void GramTables::compute_gaussian_batch(const std::vector<std::pair<KernelSpec, KernelSpec>>& pairs) {
  const std::size_t n = sample_.n();
  const std::size_t d = sample_.d();
  // Distinct per-coordinate variance vectors h_a^2 + h_b^2.
  std::vector<std::vector<double>> vars;
  std::vector<std::size_t> pair_var(pairs.size());
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    std::vector<double> v(d);
    for (std::size_t q = 0; q < d; ++q) {
      const double ha = pairs[p].first.as_bandwidth().h[q];
      const double hb = pairs[p].second.as_bandwidth().h[q];
      v[q] = ha * ha + hb * hb;
    }
    auto it = std::find(vars.begin(), vars.end(), v);
    pair_var[p] = static_cast<std::size_t>(it - vars.begin());
    if (it == vars.end()) vars.push_back(std::move(v));
  }
  const std::size_t nv = vars.size();
  std::vector<double> norm(nv);
  std::vector<double> inv2(nv * d);
  for (std::size_t u = 0; u < nv; ++u) {
    norm[u] = 1.0;
    for (std::size_t q = 0; q < d; ++q) {
      norm[u] /= std::sqrt(2.0 * std::numbers::pi * vars[u][q]);
      inv2[u * d + q] = 1.0 / (2.0 * vars[u][q]);
    }
  }
  // upper[u * n + i] = l_i * sum_{j > i} l_j G_ij
  std::vector<double> upper(nv * n, 0.0);
  constexpr double kUnderflow = 750.0;
  parallel_for(n, [&](std::size_t i) {
    const std::size_t len = n - i - 1;
    if (len == 0) return;
    std::vector<double> terms(nv * len);
    std::vector<double> delta(d);
    const Point xi = sample_.x(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      const Point xj = sample_.x(j);
      for (std::size_t q = 0; q < d; ++q) {
        const double t = xi[q] - xj[q];
        delta[q] = t * t;
      }
      const double wj = sample_.weight(j);
      for (std::size_t u = 0; u < nv; ++u) {
        double e = 0.0;
        for (std::size_t q = 0; q < d; ++q) e += delta[q] * inv2[u * d + q];
        terms[u * len + (j - i - 1)] = e > kUnderflow ? 0.0 : wj * std::exp(-e);
      }
    }
    for (std::size_t u = 0; u < nv; ++u)
      upper[u * n + i] = sample_.weight(i) * pairwise_sum(std::span<const double>(terms.data() + u * len, len));
  });
  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i) sq[i] = sample_.weight(i) * sample_.weight(i);
  const double sum_sq = pairwise_sum(sq);
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const std::size_t u = pair_var[p];
    const double off = norm[u] * pairwise_sum(std::span<const double>(upper.data() + u * n, n));
    const double diag = norm[u] * sum_sq;
    store({spec_key(pairs[p].first), spec_key(pairs[p].second)}, {diag + 2.0 * off, diag});
  }
}

void GramTables::prepare(std::span<const std::pair<KernelSpec, KernelSpec>> pairs) {
  std::vector<std::pair<KernelSpec, KernelSpec>> gaussian;
  std::vector<std::pair<KernelSpec, KernelSpec>> other;
  std::vector<Key> seen;
  for (const auto& [a0, b0] : pairs) {
    check_pair(a0, b0, sample_);
    std::string ka = spec_key(a0);
    std::string kb = spec_key(b0);
    const bool swap = kb < ka;
    Key key = swap ? Key{kb, ka} : Key{ka, kb};
    Sums dummy;
    if (lookup(key, dummy) || std::find(seen.begin(), seen.end(), key) != seen.end()) continue;
    seen.push_back(key);
    auto pr = swap ? std::make_pair(b0, a0) : std::make_pair(a0, b0);
    (gaussian_pair(a0, b0) ? gaussian : other).push_back(std::move(pr));
  }
  if (!gaussian.empty()) compute_gaussian_batch(gaussian);
  for (const auto& [a, b] : other) weighted_total(a, b);
}

double GramTables::weighted_total(const KernelSpec& a0, const KernelSpec& b0, InnerRoute route) {
  check_pair(a0, b0, sample_);
  const std::string ka = spec_key(a0);
  const std::string kb = spec_key(b0);
  const bool swap = kb < ka;
  const KernelSpec& a = swap ? b0 : a0;
  const KernelSpec& b = swap ? a0 : b0;
  const Key key = swap ? Key{kb, ka} : Key{ka, kb};

  const bool coefficient_ok = coefficient_pair(a, b);
  if (route == InnerRoute::Coefficient && !coefficient_ok)
    fail(ErrorKind::InvalidArgument, "coefficient route needs two projection kernels over one basis");
  if (route == InnerRoute::Gram && coefficient_ok) {
    {
      std::lock_guard lock(mu_);
      auto it = gram_route_sums_.find(key);
      if (it != gram_route_sums_.end()) return it->second.total;
    }
    const Sums s = compute_generic(a, b);
    std::lock_guard lock(mu_);
    gram_route_sums_.emplace(key, s);
    return s.total;
  }

  Sums s;
  if (lookup(key, s)) return s.total;
  if (gaussian_pair(a, b)) {
    compute_gaussian_batch({{a, b}});
    lookup(key, s);
    return s.total;
  }
  s = coefficient_ok ? compute_coefficient(a, b) : compute_generic(a, b);
  store(key, s);
  return s.total;
}

double GramTables::weighted_diagonal(const KernelSpec& a0, const KernelSpec& b0) {
  check_pair(a0, b0, sample_);
  const std::string ka = spec_key(a0);
  const std::string kb = spec_key(b0);
  const Key key = kb < ka ? Key{kb, ka} : Key{ka, kb};
  Sums s;
  if (!lookup(key, s)) {
    weighted_total(a0, b0);
    lookup(key, s);
  }
  return s.diagonal;
}

std::shared_ptr<const std::vector<double>> GramTables::matrix(const KernelSpec& a, const KernelSpec& b) {
  check_pair(a, b, sample_);
  const Key key{spec_key(a), spec_key(b)};
  {
    std::lock_guard lock(mu_);
    for (auto it = lru_.begin(); it != lru_.end(); ++it) {
      if (it->first == key) {
        lru_.splice(lru_.begin(), lru_, it);
        return lru_.front().second;
      }
    }
  }
  const std::size_t n = sample_.n();
  auto m = std::make_shared<std::vector<double>>(n * n);
  parallel_for(n, [&](std::size_t i) {
    for (std::size_t j = 0; j < n; ++j) (*m)[i * n + j] = section_inner(a, sample_.x(i), b, sample_.x(j));
  });
  const std::size_t bytes = m->size() * sizeof(double);
  std::lock_guard lock(mu_);
  lru_.emplace_front(key, m);
  matrix_bytes_ += bytes;
  while (matrix_bytes_ > byte_cap_ && lru_.size() > 1) {
    matrix_bytes_ -= lru_.back().second->size() * sizeof(double);
    lru_.pop_back();
  }
  return m;
}

std::size_t GramTables::cached_matrix_bytes() const {
  std::lock_guard lock(mu_);
  return matrix_bytes_;
}

// --- estimator geometry -----------------------------------------------------

double estimator_inner(GramTables& tables, const KernelSpec& a, const KernelSpec& b, InnerRoute route) {
  const double n = static_cast<double>(tables.sample().n());
  return tables.weighted_total(a, b, route) / (n * n);
}

double estimator_inner(const KernelSpec& a, const KernelSpec& b, const Sample& sample, InnerRoute route) {
  GramTables tables(sample);
  return estimator_inner(tables, a, b, route);
}

double criterion_distance(GramTables& tables, const KernelSpec& a, const KernelSpec& k0) {
  const double aa = estimator_inner(tables, a, a);
  const double ak = estimator_inner(tables, a, k0);
  const double kk = estimator_inner(tables, k0, k0);
  const double raw = aa - 2.0 * ak + kk;
  if (raw >= 0.0) return raw;
  if (raw < -1e-10 * (std::abs(aa) + std::abs(kk)))
    warn("criterion_distance: expansion gave " + std::to_string(raw) + " for " + a.label() + "; clamped to 0");
  return 0.0;
}

double criterion_distance(const KernelSpec& a, const KernelSpec& k0, const Sample& sample) {
  GramTables tables(sample);
  return criterion_distance(tables, a, k0);
}

double sbar_empirical(const KernelSpec& spec, const Sample& sample) {
  if (spec.dim() != sample.d()) fail(ErrorKind::DimensionMismatch, "sbar_empirical: dimension mismatch");
  const std::size_t n = sample.n();
  std::vector<double> terms(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = sample.weight(i);
    terms[i] = section_sq_norm(spec, sample.x(i)) * w * w;
  }
  return pairwise_sum(terms) / static_cast<double>(n);
}

double u_statistic(GramTables& tables, const KernelSpec& a, const KernelSpec& b, const ReferenceFunction& s_mean_a,
                   const ReferenceFunction& s_mean_b, double sa_sb_inner) {
  const Sample& s = tables.sample();
  const std::size_t n = s.n();
  const double off = tables.weighted_total(a, b) - tables.weighted_diagonal(a, b);
  std::vector<double> ta(n);
  std::vector<double> tb(n);
  for (std::size_t i = 0; i < n; ++i) {
    ta[i] = s.weight(i) * s_mean_b.section_inner(a, s.x(i));
    tb[i] = s.weight(i) * s_mean_a.section_inner(b, s.x(i));
  }
  const double nm1 = static_cast<double>(n) - 1.0;
  return off - nm1 * pairwise_sum(ta) - nm1 * pairwise_sum(tb) + static_cast<double>(n) * nm1 * sa_sb_inner;
}

double u_statistic(const KernelSpec& a, const KernelSpec& b, const Sample& sample, const ReferenceFunction& s_mean_a,
                   const ReferenceFunction& s_mean_b) {
  GramTables tables(sample);
  return u_statistic(tables, a, b, s_mean_a, s_mean_b, s_mean_a.inner(s_mean_b));
}

double v_statistic(const KernelSpec& spec, const Sample& sample, const ReferenceFunction& s_mean,
                   double s_mean_sq_norm) {
  if (spec.dim() != sample.d()) fail(ErrorKind::DimensionMismatch, "v_statistic: dimension mismatch");
  const std::size_t n = sample.n();
  std::vector<double> terms(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = sample.weight(i);
    terms[i] = w * w * section_sq_norm(spec, sample.x(i)) - 2.0 * w * s_mean.section_inner(spec, sample.x(i));
  }
  return pairwise_sum(terms) / static_cast<double>(n) + s_mean_sq_norm;
}

double v_statistic(const KernelSpec& spec, const Sample& sample, const ReferenceFunction& s_mean) {
  return v_statistic(spec, sample, s_mean, s_mean.sq_norm());
}

double w_statistic(const KernelSpec& a, const Sample& sample, const ReferenceFunction& s_mean_b,
                   const ReferenceFunction& s_true, double sa_dot_g) {
  if (a.dim() != sample.d()) fail(ErrorKind::DimensionMismatch, "w_statistic: dimension mismatch");
  const std::size_t n = sample.n();
  std::vector<double> terms(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Point x = sample.x(i);
    terms[i] = sample.weight(i) * (s_mean_b.section_inner(a, x) - s_true.section_inner(a, x));
  }
  return pairwise_sum(terms) / static_cast<double>(n) - sa_dot_g;
}

double w_statistic(const KernelSpec& a, const KernelSpec& b, const Sample& sample, const ReferenceFunction& s_mean_b,
                   const ReferenceFunction& s_true) {
  if (b.dim() != a.dim()) fail(ErrorKind::DimensionMismatch, "w_statistic: kernel dimensions differ");
  const ReferenceFunction s_mean_a = ReferenceFunction::smoothed(a, s_true);
  const double sa_dot_g = s_mean_a.inner(s_mean_b) - s_mean_a.inner(s_true);
  return w_statistic(a, sample, s_mean_b, s_true, sa_dot_g);
}

}  // namespace pco
