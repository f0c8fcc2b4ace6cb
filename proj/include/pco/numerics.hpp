#pragma once

// Numerical plumbing shared by every module: reproducible summation,
// composite Gauss-Legendre quadrature and a deterministic parallel loop.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace pco {

/// Sum with a fixed binary reduction tree (blocks of 8 summed left to
/// right, then halves combined recursively). The result depends only on
/// the order of the input, never on how the caller was scheduled.
double pairwise_sum(std::span<const double> values);

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Cached rule of the given order (Newton iteration on P_order).
const GaussRule& gauss_legendre_rule(int order);

/// Description of a one-dimensional composite rule: [lo, hi] is cut at
/// every breakpoint inside it, every resulting piece is split into panels
/// no wider than max_width, and each panel gets an `order`-point rule.
struct PanelSpec {
  double lo = 0.0;
  double hi = 0.0;
  double max_width = 1.0;
  std::vector<double> breaks;
  int order = 16;

  [[nodiscard]] bool empty() const { return !(hi > lo); }
};

/// Intersection of two windows: overlap of the intervals, union of the
/// breakpoints, the finer panel width and the larger order.
PanelSpec intersect(const PanelSpec& a, const PanelSpec& b);

struct QuadNodes {
  std::vector<double> x;
  std::vector<double> w;
};

QuadNodes composite_nodes(const PanelSpec& spec);

template <class F>
double integrate_1d(const PanelSpec& spec, F&& f) {
  if (spec.empty()) return 0.0;
  const QuadNodes q = composite_nodes(spec);
  std::vector<double> terms(q.x.size());
  for (std::size_t i = 0; i < q.x.size(); ++i) terms[i] = q.w[i] * f(q.x[i]);
  return pairwise_sum(terms);
}

/// Tensor-product rule over a box; `f` receives a point as a span.
double integrate_box(std::span<const PanelSpec> dims,
                     const std::function<double(std::span<const double>)>& f);

/// Riemann zeta at s > 1 by Euler-Maclaurin with `terms` explicit terms.
/// Returns an upper bound: the truncation error of the expansion used is
/// added to the estimate.
double zeta_upper_bound(double s, int terms = 1000);

// --- parallelism -----------------------------------------------------------

/// Worker cap for parallel_for; 0 selects the hardware concurrency.
void set_thread_count(unsigned count);
unsigned thread_count();

/// Runs body(i) for i in [0, n) over contiguous static blocks. Each index is
/// processed exactly once, so writes to per-index slots are race free and
/// the combined result never depends on the worker count. Nested calls run
/// serially on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace pco
