#pragma once

#include <array>
#include <cstdint>

namespace pco {

/// Philox4x32-10 keyed by (seed, replication, stream). Every draw is a pure
/// function of those keys and a running counter, so replications can be
/// generated in any order or in parallel and still match bit for bit.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, std::uint64_t replication, std::uint32_t stream);

  result_type operator()();
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform();

 private:
  void refill();

  std::array<std::uint32_t, 2> key_{};
  std::array<std::uint32_t, 4> counter_{};
  std::array<std::uint32_t, 4> block_{};
  int used_ = 4;
};

}  // namespace pco
