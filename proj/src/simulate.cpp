#include "mpf/simulate.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

namespace mpf {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::string location_name(std::size_t i, std::size_t n) {
  const std::size_t width = std::max<std::size_t>(4, std::to_string(n).size());
  std::string digits = std::to_string(i + 1);
  return "loc" + std::string(width - digits.size(), '0') + digits;
}

}  // namespace

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept
    : key_(splitmix64(seed ^ splitmix64(stream + kGolden))) {}

std::uint64_t CounterRng::bits(std::uint64_t counter) const noexcept {
  return splitmix64(key_ + (counter + 1) * kGolden);
}

double CounterRng::uniform(std::uint64_t counter) const noexcept {
  return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t CounterRng::below(std::uint64_t counter, std::uint64_t bound) const noexcept {
  const unsigned __int128 wide =
      static_cast<unsigned __int128>(bits(counter)) * bound;
  return static_cast<std::uint64_t>(wide >> 64);
}

double CounterRng::normal(std::uint64_t counter) const noexcept {
  const double u1 = uniform(2 * counter);
  const double u2 = uniform(2 * counter + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

void SimConfig::validate() const {
  if (n_locations == 0 || p_predictors == 0 || q_aheads == 0 || true_df == 0) {
    throw Error(ErrorCode::InvalidArgument, "simulation sizes must be positive");
  }
  if (true_df > q_aheads) {
    throw Error(ErrorCode::InvalidArgument, "true_df must not exceed q_aheads");
  }
  if (!noiseless && !(snr > 0.0 && std::isfinite(snr))) {
    throw Error(ErrorCode::InvalidArgument, "snr must be positive");
  }
  if (!(missing_frac >= 0.0 && missing_frac < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "missing_frac must lie in [0, 1)");
  }
}

TaskSpec simulation_task(const SimConfig& cfg) {
  TaskSpec task;
  task.response = "y";
  for (std::size_t k = 0; k < cfg.p_predictors; ++k) {
    task.predictors.push_back({"x" + std::to_string(k + 1), {1}});
  }
  task.aheads.resize(cfg.q_aheads);
  std::iota(task.aheads.begin(), task.aheads.end(), 0);
  return task;
}

SimulationResult simulate(const SimConfig& cfg) {
  cfg.validate();
  const std::size_t n = cfg.n_locations;
  const std::size_t p = cfg.p_predictors;
  const std::size_t q = cfg.q_aheads;
  const std::size_t d = cfg.true_df;

  const CounterRng features(cfg.seed, static_cast<std::uint64_t>(RngStream::Features));
  const CounterRng coefs(cfg.seed, static_cast<std::uint64_t>(RngStream::Coefficients));
  const CounterRng noise(cfg.seed, static_cast<std::uint64_t>(RngStream::Noise));
  const CounterRng masks(cfg.seed, static_cast<std::uint64_t>(RngStream::Mask));

  Matrix x(n, p);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < p; ++k) x(i, k) = features.normal(i * p + k);
  Matrix theta(d, p);
  for (std::size_t l = 0; l < d; ++l)
    for (std::size_t k = 0; k < p; ++k) theta(l, k) = coefs.normal(l * p + k);

  const TaskSpec task = simulation_task(cfg);
  BasisSpec spec;
  spec.degrees_of_freedom = d;
  spec.aheads.assign(task.aheads.begin(), task.aheads.end());
  BasisMatrix basis = build_basis(spec);

  Matrix signal = (x * theta.transpose()) * basis.h.transpose();

  double sigma = 0.0;
  if (!cfg.noiseless) {
    const auto vals = signal.values();
    const double mean =
        std::accumulate(vals.begin(), vals.end(), 0.0) / static_cast<double>(vals.size());
    double var = 0.0;
    for (double v : vals) var += (v - mean) * (v - mean);
    var /= static_cast<double>(vals.size());
    sigma = std::sqrt(var / cfg.snr);
  }

  Matrix response = signal;
  if (sigma > 0.0) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < q; ++j) response(i, j) += sigma * noise.normal(i * q + j);
  }

  const std::size_t total = n * q;
  const auto n_missing =
      static_cast<std::size_t>(std::llround(cfg.missing_frac * static_cast<double>(total)));
  std::vector<std::size_t> cells(total);
  std::iota(cells.begin(), cells.end(), std::size_t{0});
  for (std::size_t i = 0; i < n_missing; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(masks.below(i, total - i));
    std::swap(cells[i], cells[j]);
  }
  Matrix w(n, q, 1.0);
  for (std::size_t i = 0; i < n_missing; ++i) w(cells[i] / q, cells[i] % q) = 0.0;

  DesignSet design;
  design.x = x;
  design.y = hadamard(response, w);
  design.w = std::move(w);
  for (std::size_t i = 0; i < n; ++i) design.row_index.push_back({location_name(i, n), 1});
  for (const auto& pred : task.predictors) design.column_index.push_back({pred.variable, 1});
  design.aheads = task.aheads;

  return {std::move(design), std::move(theta), std::move(basis), std::move(signal),
          std::move(response), sigma};
}

PanelDataset simulation_panel(const SimulationResult& sim) {
  PanelDataset panel;
  const auto& d = sim.design;
  for (std::size_t i = 0; i < d.rows(); ++i) {
    const auto& loc = d.row_index[i].location;
    const TimeIndex t = d.row_index[i].forecast_time;
    for (std::size_t k = 0; k < d.column_index.size(); ++k) {
      panel.records.push_back({loc, t - d.column_index[k].lag, d.column_index[k].variable,
                               d.x(i, k), std::nullopt});
    }
    for (std::size_t j = 0; j < d.aheads.size(); ++j) {
      if (d.w(i, j) == 0.0) continue;
      panel.records.push_back({loc, t + d.aheads[j], "y", d.y(i, j), std::nullopt});
    }
  }
  return panel;
}

}  // namespace mpf
