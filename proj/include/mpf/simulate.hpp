#pragma once

#include <cstdint>

#include "mpf/basis.hpp"
#include "mpf/panel.hpp"

namespace mpf {

/// Counter-based generator: draw `i` of stream `s` under seed `k` is
/// splitmix64(key(k, s) + (i + 1) * 0x9E3779B97F4A7C15), where
/// key(k, s) = splitmix64(k ^ splitmix64(s + 0x9E3779B97F4A7C15)) and
/// splitmix64 is the standard 64-bit finalizer. Every draw is a pure
/// function of (seed, stream, counter), so streams never interfere.
class CounterRng {
public:
  CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept;

  std::uint64_t bits(std::uint64_t counter) const noexcept;
  /// Uniform on (0, 1): the top 53 bits plus one half ulp.
  double uniform(std::uint64_t counter) const noexcept;
  /// Uniform integer in [0, bound), bound > 0, by 128-bit multiply-shift.
  std::uint64_t below(std::uint64_t counter, std::uint64_t bound) const noexcept;
  /// Standard normal from Box-Muller on draws 2c and 2c + 1 (cosine branch).
  double normal(std::uint64_t counter) const noexcept;

private:
  std::uint64_t key_;
};

/// Stream identifiers under one seed.
enum class RngStream : std::uint64_t {
  Features = 1,
  Coefficients = 2,
  Noise = 3,
  Mask = 4,
  Folds = 5,
};

struct SimConfig {
  std::size_t n_locations = 1000;
  std::size_t p_predictors = 10;
  std::size_t q_aheads = 30;
  std::size_t true_df = 3;
  double snr = 1.0;
  bool noiseless = false;  // sigma = 0 regardless of snr
  double missing_frac = 0.1;
  std::uint64_t seed = 0;

  void validate() const;
};

/// One forecast time (t = 1), predictors x1..xp observed at t - 1, aheads
/// 0..q-1. Responses Y = X Theta^T H^T + E with X, Theta standard normal and
/// H the orthonormal polynomial basis of degree true_df - 1.
struct SimulationResult {
  DesignSet design;
  Matrix theta;       // true_df x p
  BasisMatrix basis;  // q x true_df
  Matrix signal;      // noiseless n x q
  Matrix response;    // noisy n x q including masked cells
  double sigma = 0.0;
};

/// sigma^2 = empirical (population) variance of the signal entries / snr.
/// Exactly round(missing_frac * n * q) cells are masked, chosen by a partial
/// Fisher-Yates shuffle.
SimulationResult simulate(const SimConfig& cfg);

/// Task matching the simulated design: response "y", predictors x1..xp at
/// lag 1, aheads 0..q-1.
TaskSpec simulation_task(const SimConfig& cfg);

/// Long-format panel of the simulated data; masked response cells are absent.
PanelDataset simulation_panel(const SimulationResult& sim);

}  // namespace mpf
