#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "mpf/panel.hpp"

namespace mpf {

enum class FoldScheme { ByLocation, ByTime };

FoldScheme parse_fold_scheme(std::string_view name);
std::string_view to_string(FoldScheme scheme) noexcept;

/// Fold id per design row. ByLocation shuffles the distinct locations with
/// the Folds stream of `seed` and deals them round-robin; ByTime cuts the
/// sorted distinct forecast times into `folds` contiguous blocks.
std::vector<std::size_t> assign_folds(const DesignSet& design, std::size_t folds,
                                      FoldScheme scheme, std::uint64_t seed);

struct CvRow {
  std::size_t df = 0;
  std::vector<double> fold_mae;
  double mean_mae = 0.0;
};

struct CvResult {
  std::size_t best_df = 0;
  std::vector<CvRow> table;
};

/// Smooth fit per (fold, d): the complete-response path when the training
/// part is fully observed, the masked path otherwise. The d with the lowest
/// mean held-out MAE wins; ties go to the smaller d. Fit errors are rethrown
/// with the fold id as index.
CvResult cv_select_df(const DesignSet& design, const std::vector<std::size_t>& df_grid,
                      std::size_t folds, FoldScheme scheme = FoldScheme::ByLocation,
                      std::uint64_t seed = 0);

}  // namespace mpf
