#include "pco/reference.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <optional>

#include "pco/error.hpp"

namespace pco {

namespace {

enum class RefKind { Zero, Truth, Smoothed };

// Tensor multi-index J over prod_q [1, m_q], first coordinate slowest.
std::size_t tensor_size(const std::vector<int>& m) {
  std::size_t s = 1;
  for (int v : m) s *= static_cast<std::size_t>(v);
  return s;
}

// Neumaier-compensated accumulator; deterministic for a fixed term order.
struct Accum {
  double sum = 0.0;
  double comp = 0.0;
  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v))
      comp += (sum - t) + v;
    else
      comp += (v - t) + sum;
    sum = t;
  }
  [[nodiscard]] double value() const { return sum + comp; }
};

double tensor_weight(const ProjectionKernel& p, std::size_t linear) {
  if (!p.weighted()) return 1.0;
  double w = 1.0;
  for (std::size_t q = p.m.size(); q-- > 0;) {
    const auto mq = static_cast<std::size_t>(p.m[q]);
    w *= p.weight(static_cast<int>(linear % mq) + 1);
    linear /= mq;
  }
  return w;
}

// d_J = sum_{J'} prod_q <phi_{j_q}^{to_q}, phi_{j'_q}^{from_q}> c_{J'}.
std::vector<double> transfer(const BasisFamily& basis, const std::vector<int>& from, const std::vector<double>& c,
                             const std::vector<int>& to) {
  struct Entry {
    int jt;
    int jf;
    double v;
  };
  const std::size_t d = from.size();
  std::vector<std::vector<Entry>> lists(d);
  for (std::size_t q = 0; q < d; ++q) {
    if (basis.nested()) {
      for (int j = 1; j <= std::min(from[q], to[q]); ++j) lists[q].push_back({j, j, 1.0});
    } else {
      for (int jt = 1; jt <= to[q]; ++jt)
        for (int jf = 1; jf <= from[q]; ++jf) {
          const double v = basis_cross_gram(basis, to[q], jt, from[q], jf);
          if (v != 0.0) lists[q].push_back({jt, jf, v});
        }
    }
    if (lists[q].empty()) return std::vector<double>(tensor_size(to), 0.0);
  }
  std::vector<Accum> acc(tensor_size(to));
  std::vector<std::size_t> pos(d, 0);
  for (bool more = true; more;) {
    std::size_t it = 0;
    std::size_t jf_lin = 0;
    double v = 1.0;
    for (std::size_t q = 0; q < d; ++q) {
      const Entry& e = lists[q][pos[q]];
      it = it * static_cast<std::size_t>(to[q]) + static_cast<std::size_t>(e.jt - 1);
      jf_lin = jf_lin * static_cast<std::size_t>(from[q]) + static_cast<std::size_t>(e.jf - 1);
      v *= e.v;
    }
    acc[it].add(v * c[jf_lin]);
    more = false;
    for (std::size_t q = d; q-- > 0;) {
      if (++pos[q] < lists[q].size()) {
        more = true;
        break;
      }
      pos[q] = 0;
    }
  }
  std::vector<double> out(acc.size());
  for (std::size_t i = 0; i < acc.size(); ++i) out[i] = acc[i].value();
  return out;
}

// sum_J c_J prod_q phi_{j_q}^{m_q}(x_q).
double eval_expansion(const BasisFamily& basis, const std::vector<int>& m, const std::vector<double>& c, Point x) {
  const std::size_t d = m.size();
  std::vector<std::vector<double>> vals(d);
  for (std::size_t q = 0; q < d; ++q) {
    vals[q].resize(static_cast<std::size_t>(m[q]));
    eval_basis_all(basis, m[q], x[q], vals[q]);
  }
  Accum acc;
  std::vector<std::size_t> idx(d, 0);
  for (std::size_t lin = 0; lin < c.size(); ++lin) {
    double v = c[lin];
    for (std::size_t q = 0; q < d && v != 0.0; ++q) v *= vals[q][idx[q]];
    acc.add(v);
    for (std::size_t q = d; q-- > 0;) {
      if (++idx[q] < static_cast<std::size_t>(m[q])) break;
      idx[q] = 0;
    }
  }
  return acc.value();
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> t(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) t[i] = a[i] * b[i];
  return pairwise_sum(t);
}

// Window, in coordinate q, of u -> <A(x, .), B(u, .)> for bandwidth kernels.
PanelSpec pair_window(const KernelSpec& a, const KernelSpec& b, std::size_t q, double x) {
  const auto& ka = a.as_bandwidth();
  const auto& kb = b.as_bandwidth();
  const double ha = ka.h[q];
  const double hb = kb.h[q];
  PanelSpec w;
  w.order = 16;
  if (ka.base.kind == BaseKernelKind::Gaussian && kb.base.kind == BaseKernelKind::Gaussian) {
    const double sd = std::sqrt(ha * ha + hb * hb);
    w.lo = x - 8.0 * sd;
    w.hi = x + 8.0 * sd;
    w.max_width = sd;
    return w;
  }
  const double r = ka.base.radius() * ha + kb.base.radius() * hb;
  w.lo = x - r;
  w.hi = x + r;
  w.max_width = std::min(ha, hb);
  const double inner = std::abs(ka.base.radius() * ha - kb.base.radius() * hb);
  w.breaks = {x - inner, x + inner, x};
  return w;
}

}  // namespace

struct ReferenceFunction::Impl {
  RefKind kind = RefKind::Zero;
  std::size_t d = 1;
  Fn fn;
  std::vector<PanelSpec> support;
  std::optional<KernelSpec> kernel;
  std::shared_ptr<const Impl> base;

  mutable std::mutex mu;
  mutable std::map<std::pair<int, std::vector<int>>, std::vector<double>> coeff_cache;

  // t_J = <s, Phi_J^m> for a truth function.
  const std::vector<double>& coefficients(const BasisFamily& basis, const std::vector<int>& m) const {
    const auto key = std::make_pair(static_cast<int>(basis.kind()), m);
    {
      std::lock_guard lock(mu);
      auto it = coeff_cache.find(key);
      if (it != coeff_cache.end()) return it->second;
    }
    std::vector<double> t = compute_coefficients(basis, m);
    std::lock_guard lock(mu);
    return coeff_cache.emplace(key, std::move(t)).first->second;
  }

  std::vector<double> compute_coefficients(const BasisFamily& basis, const std::vector<int>& m) const {
    std::vector<QuadNodes> nodes(d);
    std::vector<std::vector<double>> vals(d);
    for (std::size_t q = 0; q < d; ++q) {
      PanelSpec p = intersect(support[q], basis.panels(m[q]));
      nodes[q] = composite_nodes(p);
      if (nodes[q].x.empty()) return std::vector<double>(tensor_size(m), 0.0);
      const auto mq = static_cast<std::size_t>(m[q]);
      vals[q].resize(nodes[q].x.size() * mq);
      for (std::size_t k = 0; k < nodes[q].x.size(); ++k)
        eval_basis_all(basis, m[q], nodes[q].x[k], std::span<double>(vals[q].data() + k * mq, mq));
    }
    const std::size_t count = tensor_size(m);
    std::vector<Accum> acc(count);
    std::vector<std::size_t> node(d, 0);
    std::vector<double> point(d);
    std::vector<std::size_t> jdx(d);
    for (bool more = true; more;) {
      double w = 1.0;
      for (std::size_t q = 0; q < d; ++q) {
        point[q] = nodes[q].x[node[q]];
        w *= nodes[q].w[node[q]];
      }
      const double sw = w * fn(point);
      if (sw != 0.0) {
        std::fill(jdx.begin(), jdx.end(), 0);
        for (std::size_t lin = 0; lin < count; ++lin) {
          double v = sw;
          for (std::size_t q = 0; q < d; ++q)
            v *= vals[q][node[q] * static_cast<std::size_t>(m[q]) + jdx[q]];
          acc[lin].add(v);
          for (std::size_t q = d; q-- > 0;) {
            if (++jdx[q] < static_cast<std::size_t>(m[q])) break;
            jdx[q] = 0;
          }
        }
      }
      more = false;
      for (std::size_t q = d; q-- > 0;) {
        if (++node[q] < nodes[q].x.size()) {
          more = true;
          break;
        }
        node[q] = 0;
      }
    }
    std::vector<double> t(count);
    for (std::size_t i = 0; i < count; ++i) t[i] = acc[i].value();
    return t;
  }

  // Coefficients of s_K in the basis of its own projection kernel.
  std::vector<double> smoothed_coefficients() const {
    const auto& p = kernel->as_projection();
    std::vector<double> c = base->coefficients(p.basis, p.m);
    for (std::size_t i = 0; i < c.size(); ++i) c[i] *= tensor_weight(p, i);
    return c;
  }
};

ReferenceFunction ReferenceFunction::zero(std::size_t d) {
  auto impl = std::make_shared<Impl>();
  impl->kind = RefKind::Zero;
  impl->d = d;
  return ReferenceFunction(impl);
}

ReferenceFunction ReferenceFunction::truth(Fn s, std::vector<PanelSpec> support) {
  if (support.empty()) fail(ErrorKind::InvalidArgument, "reference: truth needs a support box");
  auto impl = std::make_shared<Impl>();
  impl->kind = RefKind::Truth;
  impl->d = support.size();
  impl->fn = std::move(s);
  impl->support = std::move(support);
  return ReferenceFunction(impl);
}

ReferenceFunction ReferenceFunction::smoothed(const KernelSpec& kernel, const ReferenceFunction& truth) {
  if (truth.impl_->kind == RefKind::Zero) return zero(truth.dim());
  if (truth.impl_->kind != RefKind::Truth)
    fail(ErrorKind::InvalidArgument, "reference: only a truth function can be smoothed");
  if (kernel.dim() != truth.dim()) fail(ErrorKind::DimensionMismatch, "reference: kernel and truth dimensions differ");
  auto impl = std::make_shared<Impl>();
  impl->kind = RefKind::Smoothed;
  impl->d = truth.dim();
  impl->kernel = kernel;
  impl->base = truth.impl_;
  impl->support = truth.impl_->support;
  return ReferenceFunction(impl);
}

std::size_t ReferenceFunction::dim() const { return impl_->d; }

bool ReferenceFunction::is_zero() const { return impl_->kind == RefKind::Zero; }

double ReferenceFunction::value(Point x) const {
  if (x.size() != impl_->d) fail(ErrorKind::DimensionMismatch, "reference: point dimension mismatch");
  switch (impl_->kind) {
    case RefKind::Zero: return 0.0;
    case RefKind::Truth: return impl_->fn(x);
    case RefKind::Smoothed: return ReferenceFunction(impl_->base).section_inner(*impl_->kernel, x);
  }
  return 0.0;
}

double ReferenceFunction::section_inner(const KernelSpec& spec, Point x) const {
  const Impl& me = *impl_;
  if (x.size() != me.d || spec.dim() != me.d)
    fail(ErrorKind::DimensionMismatch, "reference: section_inner dimension mismatch");
  if (me.kind == RefKind::Zero) return 0.0;

  if (spec.is_projection()) {
    const auto& p = spec.as_projection();
    std::vector<double> c;
    if (me.kind == RefKind::Truth) {
      c = me.coefficients(p.basis, p.m);
    } else {
      if (!me.kernel->is_projection() || me.kernel->as_projection().basis.kind() != p.basis.kind())
        fail(ErrorKind::InvalidArgument, "reference: projection kernels over different bases");
      c = transfer(p.basis, me.kernel->as_projection().m, me.smoothed_coefficients(), p.m);
    }
    for (std::size_t i = 0; i < c.size(); ++i) c[i] *= tensor_weight(p, i);
    return eval_expansion(p.basis, p.m, c, x);
  }

  std::vector<PanelSpec> dims(me.d);
  if (me.kind == RefKind::Truth) {
    for (std::size_t q = 0; q < me.d; ++q) dims[q] = intersect(spec.window(q, x[q]), me.support[q]);
    return integrate_box(dims, [&](std::span<const double> u) { return kernel_eval(spec, x, u) * me.fn(u); });
  }
  const KernelSpec& k = *me.kernel;
  if (!k.is_bandwidth()) fail(ErrorKind::InvalidArgument, "reference: variant mismatch (bandwidth vs projection)");
  for (std::size_t q = 0; q < me.d; ++q) dims[q] = intersect(pair_window(spec, k, q, x[q]), me.support[q]);
  return integrate_box(dims, [&](std::span<const double> u) { return me.base->fn(u) * pco::section_inner(spec, x, k, u); });
}

double ReferenceFunction::inner(const ReferenceFunction& other) const {
  const Impl& a = *impl_;
  const Impl& b = *other.impl_;
  if (a.d != b.d) fail(ErrorKind::DimensionMismatch, "reference: inner product dimension mismatch");
  if (a.kind == RefKind::Zero || b.kind == RefKind::Zero) return 0.0;
  if (a.kind == RefKind::Truth && b.kind == RefKind::Smoothed) return other.inner(*this);

  if (a.kind == RefKind::Truth) {
    std::vector<PanelSpec> dims(a.d);
    for (std::size_t q = 0; q < a.d; ++q) dims[q] = intersect(a.support[q], b.support[q]);
    return integrate_box(dims, [&](std::span<const double> u) { return a.fn(u) * b.fn(u); });
  }

  // a is smoothed by kernel K: <s_K, g> = int s(u) <K(u, .), g> du.
  const KernelSpec& k = *a.kernel;
  if (k.is_projection()) {
    const auto& p = k.as_projection();
    const std::vector<double> ca = a.smoothed_coefficients();
    if (b.kind == RefKind::Truth) return dot(ca, b.coefficients(p.basis, p.m));
    if (!b.kernel->is_projection() || b.kernel->as_projection().basis.kind() != p.basis.kind())
      fail(ErrorKind::InvalidArgument, "reference: projection kernels over different bases");
    return dot(ca, transfer(p.basis, b.kernel->as_projection().m, b.smoothed_coefficients(), p.m));
  }
  std::vector<PanelSpec> dims = a.support;
  const auto& h = k.as_bandwidth().h;
  for (std::size_t q = 0; q < a.d; ++q) dims[q].max_width = std::min(dims[q].max_width, h[q]);
  return integrate_box(dims, [&](std::span<const double> u) { return a.base->fn(u) * other.section_inner(k, u); });
}

}  // namespace pco
