#pragma once

// Deterministic functions on R^d that the statistics compare estimators to:
// zero, a known target s, and its kernel mean s_K(x) = int K(u, x) s(u) du.
// Only available when s is known analytically (simulation mode).

#include <functional>
#include <memory>
#include <vector>

#include "pco/kernels.hpp"

namespace pco {

class ReferenceFunction {
 public:
  using Fn = std::function<double(Point)>;

  static ReferenceFunction zero(std::size_t d);
  /// `support` bounds the box outside which s vanishes; each coordinate's
  /// panel layout should resolve s (breakpoints at kinks).
  static ReferenceFunction truth(Fn s, std::vector<PanelSpec> support);
  /// s_K for a truth function.
  static ReferenceFunction smoothed(const KernelSpec& kernel, const ReferenceFunction& truth);

  [[nodiscard]] std::size_t dim() const;
  [[nodiscard]] bool is_zero() const;

  [[nodiscard]] double value(Point x) const;
  /// <K(x, .), this>_2.
  [[nodiscard]] double section_inner(const KernelSpec& spec, Point x) const;
  /// <this, other>_2.
  [[nodiscard]] double inner(const ReferenceFunction& other) const;
  [[nodiscard]] double sq_norm() const { return inner(*this); }

  struct Impl;

 private:
  explicit ReferenceFunction(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

}  // namespace pco
