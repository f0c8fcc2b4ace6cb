#include "pco/numerics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <thread>

namespace pco {

namespace {

constexpr std::size_t kLeafSize = 8;

double pairwise_sum_rec(const double* v, std::size_t n) {
  if (n <= kLeafSize) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum_rec(v, half) + pairwise_sum_rec(v + half, n - half);
}

GaussRule make_rule(int order) {
  GaussRule rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  const int half = (order + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = 1.0;
      double p2 = 0.0;
      for (int j = 1; j <= order; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
      }
      pp = order * (z * p1 - p2) / (z * z - 1.0);
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= 1e-15) break;
    }
    // Recompute the derivative at the converged root for the weight.
    double p1 = 1.0;
    double p2 = 0.0;
    for (int j = 1; j <= order; ++j) {
      const double p3 = p2;
      p2 = p1;
      p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
    }
    pp = order * (z * p1 - p2) / (z * z - 1.0);
    const double w = 2.0 / ((1.0 - z * z) * pp * pp);
    rule.nodes[i] = -z;
    rule.nodes[order - 1 - i] = z;
    rule.weights[i] = w;
    rule.weights[order - 1 - i] = w;
  }
  if (order % 2 == 1) rule.nodes[order / 2] = 0.0;
  return rule;
}

std::atomic<unsigned> g_threads{0};
thread_local bool t_inside_parallel = false;

}  // namespace

double pairwise_sum(std::span<const double> values) {
  return pairwise_sum_rec(values.data(), values.size());
}

const GaussRule& gauss_legendre_rule(int order) {
  if (order < 1) throw std::invalid_argument("gauss_legendre_rule: order must be >= 1");
  static std::mutex mu;
  static std::map<int, GaussRule> cache;
  std::lock_guard lock(mu);
  auto it = cache.find(order);
  if (it == cache.end()) it = cache.emplace(order, make_rule(order)).first;
  return it->second;
}

PanelSpec intersect(const PanelSpec& a, const PanelSpec& b) {
  PanelSpec out;
  out.lo = std::max(a.lo, b.lo);
  out.hi = std::min(a.hi, b.hi);
  out.max_width = std::min(a.max_width, b.max_width);
  out.order = std::max(a.order, b.order);
  out.breaks = a.breaks;
  out.breaks.insert(out.breaks.end(), b.breaks.begin(), b.breaks.end());
  return out;
}

QuadNodes composite_nodes(const PanelSpec& spec) {
  QuadNodes q;
  if (spec.empty()) return q;
  std::vector<double> cuts{spec.lo};
  for (double b : spec.breaks)
    if (b > spec.lo && b < spec.hi) cuts.push_back(b);
  cuts.push_back(spec.hi);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  const GaussRule& rule = gauss_legendre_rule(spec.order);
  const double width = spec.max_width > 0.0 ? spec.max_width : (spec.hi - spec.lo);
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    const double a = cuts[c];
    const double b = cuts[c + 1];
    const auto panels = static_cast<std::size_t>(std::max(1.0, std::ceil((b - a) / width - 1e-9)));
    const double step = (b - a) / static_cast<double>(panels);
    for (std::size_t p = 0; p < panels; ++p) {
      const double pa = a + step * static_cast<double>(p);
      const double pb = (p + 1 == panels) ? b : pa + step;
      const double mid = 0.5 * (pa + pb);
      const double rad = 0.5 * (pb - pa);
      for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
        q.x.push_back(mid + rad * rule.nodes[k]);
        q.w.push_back(rad * rule.weights[k]);
      }
    }
  }
  return q;
}

double integrate_box(std::span<const PanelSpec> dims,
                     const std::function<double(std::span<const double>)>& f) {
  const std::size_t d = dims.size();
  if (d == 0) return 0.0;
  std::vector<QuadNodes> per_dim;
  per_dim.reserve(d);
  for (const auto& spec : dims) {
    if (spec.empty()) return 0.0;
    per_dim.push_back(composite_nodes(spec));
  }
  if (d == 1) {
    std::vector<double> terms(per_dim[0].x.size());
    double x = 0.0;
    for (std::size_t i = 0; i < terms.size(); ++i) {
      x = per_dim[0].x[i];
      terms[i] = per_dim[0].w[i] * f(std::span<const double>(&x, 1));
    }
    return pairwise_sum(terms);
  }
  // Innermost dimension summed pairwise, outer dimensions accumulated the
  // same way level by level through an odometer over the leading indices.
  std::vector<std::size_t> idx(d, 0);
  std::vector<double> point(d);
  const std::size_t inner = per_dim[d - 1].x.size();
  std::vector<double> row(inner);
  std::vector<double> outer_terms;
  std::size_t outer_count = 1;
  for (std::size_t q = 0; q + 1 < d; ++q) outer_count *= per_dim[q].x.size();
  outer_terms.reserve(outer_count);
  for (std::size_t o = 0; o < outer_count; ++o) {
    double w_outer = 1.0;
    for (std::size_t q = 0; q + 1 < d; ++q) {
      point[q] = per_dim[q].x[idx[q]];
      w_outer *= per_dim[q].w[idx[q]];
    }
    for (std::size_t k = 0; k < inner; ++k) {
      point[d - 1] = per_dim[d - 1].x[k];
      row[k] = per_dim[d - 1].w[k] * f(point);
    }
    outer_terms.push_back(w_outer * pairwise_sum(row));
    for (std::size_t q = d - 1; q-- > 0;) {
      if (++idx[q] < per_dim[q].x.size()) break;
      idx[q] = 0;
    }
  }
  return pairwise_sum(outer_terms);
}

double zeta_upper_bound(double s, int terms) {
  if (!(s > 1.0)) throw std::invalid_argument("zeta_upper_bound: s must exceed 1");
  const double n = static_cast<double>(terms);
  std::vector<double> head(static_cast<std::size_t>(terms - 1));
  for (int k = 1; k < terms; ++k) head[k - 1] = std::pow(static_cast<double>(k), -s);
  const double tail = std::pow(n, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(n, -s) +
                      s * std::pow(n, -s - 1.0) / 12.0;
  // Next Euler-Maclaurin term bounds the remainder in absolute value.
  const double remainder = s * (s + 1.0) * (s + 2.0) * std::pow(n, -s - 3.0) / 720.0;
  return pairwise_sum(head) + tail + remainder;
}

void set_thread_count(unsigned count) { g_threads.store(count); }

unsigned thread_count() {
  const unsigned t = g_threads.load();
  if (t != 0) return t;
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min<std::size_t>(thread_count(), n);
  if (workers <= 1 || t_inside_parallel) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = n * w / workers;
    const std::size_t end = n * (w + 1) / workers;
    pool.emplace_back([&, w, begin, end] {
      t_inside_parallel = true;
      try {
        for (std::size_t i = begin; i < end; ++i) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace pco
