#include "mpf/cv.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <string>

#include "mpf/basis.hpp"
#include "mpf/ls_forecaster.hpp"
#include "mpf/metrics.hpp"
#include "mpf/simulate.hpp"

namespace mpf {

FoldScheme parse_fold_scheme(std::string_view name) {
  if (name == "by_location") return FoldScheme::ByLocation;
  if (name == "by_time") return FoldScheme::ByTime;
  throw Error(ErrorCode::InvalidArgument, "unknown fold scheme '" + std::string(name) + "'");
}

std::string_view to_string(FoldScheme scheme) noexcept {
  return scheme == FoldScheme::ByLocation ? "by_location" : "by_time";
}

std::vector<std::size_t> assign_folds(const DesignSet& design, std::size_t folds,
                                      FoldScheme scheme, std::uint64_t seed) {
  if (folds < 2) throw Error(ErrorCode::InvalidArgument, "need at least 2 folds");
  std::vector<std::size_t> out(design.rows());
  if (scheme == FoldScheme::ByLocation) {
    std::set<std::string> distinct;
    for (const auto& key : design.row_index) distinct.insert(key.location);
    std::vector<std::string> locs(distinct.begin(), distinct.end());
    if (locs.size() < folds) {
      throw Error(ErrorCode::InvalidArgument, "fewer locations than folds");
    }
    const CounterRng rng(seed, static_cast<std::uint64_t>(RngStream::Folds));
    for (std::size_t i = 0; i + 1 < locs.size(); ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.below(i, locs.size() - i));
      std::swap(locs[i], locs[j]);
    }
    std::map<std::string, std::size_t> fold_of;
    for (std::size_t i = 0; i < locs.size(); ++i) fold_of[locs[i]] = i % folds;
    for (std::size_t r = 0; r < design.rows(); ++r) {
      out[r] = fold_of.at(design.row_index[r].location);
    }
  } else {
    std::set<TimeIndex> distinct;
    for (const auto& key : design.row_index) distinct.insert(key.forecast_time);
    std::vector<TimeIndex> times(distinct.begin(), distinct.end());
    if (times.size() < folds) {
      throw Error(ErrorCode::InvalidArgument, "fewer forecast times than folds");
    }
    std::map<TimeIndex, std::size_t> fold_of;
    for (std::size_t i = 0; i < times.size(); ++i) fold_of[times[i]] = i * folds / times.size();
    for (std::size_t r = 0; r < design.rows(); ++r) {
      out[r] = fold_of.at(design.row_index[r].forecast_time);
    }
  }
  return out;
}

CvResult cv_select_df(const DesignSet& design, const std::vector<std::size_t>& df_grid,
                      std::size_t folds, FoldScheme scheme, std::uint64_t seed) {
  if (df_grid.empty()) throw Error(ErrorCode::InvalidArgument, "empty df grid");
  const auto fold_of = assign_folds(design, folds, scheme, seed);

  CvResult result;
  for (std::size_t df : df_grid) result.table.push_back({df, {}, 0.0});

  BasisSpec spec;
  spec.aheads.assign(design.aheads.begin(), design.aheads.end());

  for (std::size_t f = 0; f < folds; ++f) {
    std::vector<std::size_t> train_rows, test_rows;
    for (std::size_t r = 0; r < design.rows(); ++r) {
      (fold_of[r] == f ? test_rows : train_rows).push_back(r);
    }
    const DesignSet train = design.subset(train_rows);
    const DesignSet test = design.subset(test_rows);
    for (auto& row : result.table) {
      spec.degrees_of_freedom = row.df;
      try {
        const BasisMatrix basis = build_basis(spec);
        const CoefficientSet coef = train.complete() ? fit_smooth(train, basis)
                                                     : fit_smooth_weighted(train, basis);
        const ForecastFrame pred = predict(coef, test.x, test.row_index);
        row.fold_mae.push_back(masked_mae(test, pred.values));
      } catch (const Error& e) {
        throw Error(e.code(), "fold " + std::to_string(f) + ": " + e.what(), f);
      }
    }
  }

  for (auto& row : result.table) {
    row.mean_mae = std::accumulate(row.fold_mae.begin(), row.fold_mae.end(), 0.0) /
                   static_cast<double>(row.fold_mae.size());
  }
  const CvRow* best = &result.table.front();
  for (const auto& row : result.table) {
    if (row.mean_mae < best->mean_mae ||
        (row.mean_mae == best->mean_mae && row.df < best->df)) {
      best = &row;
    }
  }
  result.best_df = best->df;
  return result;
}

}  // namespace mpf
