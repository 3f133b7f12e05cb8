#include "mpf/panel.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <tuple>
#include <unordered_map>

#include "mpf/csv.hpp"

namespace mpf {

namespace {

bool all_digits(std::string_view s) {
  return !s.empty() &&
         std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

std::optional<TimeIndex> try_parse_time(std::string_view s) {
  if (all_digits(s)) {
    TimeIndex v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return v;
  }
  // YYYY-MM-DD
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  if (!all_digits(s.substr(0, 4)) || !all_digits(s.substr(5, 2)) ||
      !all_digits(s.substr(8, 2))) {
    return std::nullopt;
  }
  int y = 0;
  unsigned m = 0, d = 0;
  std::from_chars(s.data(), s.data() + 4, y);
  std::from_chars(s.data() + 5, s.data() + 7, m);
  std::from_chars(s.data() + 8, s.data() + 10, d);
  const std::chrono::year_month_day ymd{std::chrono::year{y},
                                        std::chrono::month{m},
                                        std::chrono::day{d}};
  if (!ymd.ok()) return std::nullopt;
  return std::chrono::sys_days{ymd}.time_since_epoch().count();
}

bool looks_iso(std::string_view s) { return s.size() == 10 && s[4] == '-'; }

}  // namespace

TimeIndex parse_time(std::string_view text) {
  if (auto t = try_parse_time(text)) return *t;
  throw Error(ErrorCode::ParseError,
              "not a day index or ISO date: '" + std::string(text) + "'");
}

std::string format_time(TimeIndex t, bool iso) {
  if (!iso) return std::to_string(t);
  const std::chrono::year_month_day ymd{
      std::chrono::sys_days{std::chrono::days{t}}};
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()));
  return buf;
}

PanelDataset read_panel(std::istream& in) {
  PanelDataset panel;
  std::string line;
  std::size_t line_no = 0;

  auto strip = [](std::string& s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
  };

  if (!std::getline(in, line)) {
    throw Error(ErrorCode::ParseError, "missing header row", 1);
  }
  ++line_no;
  strip(line);
  if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
  if (line == "geo_id,time_value,signal,value,issue") {
    panel.has_issue = true;
  } else if (line != "geo_id,time_value,signal,value") {
    throw Error(ErrorCode::ParseError, "unexpected header '" + line + "'", 1);
  }
  const std::size_t expected = panel.has_issue ? 5 : 4;

  std::set<std::tuple<std::string, TimeIndex, std::string, std::optional<TimeIndex>>>
      seen;
  bool saw_iso = false, saw_int = false;
  while (std::getline(in, line)) {
    ++line_no;
    strip(line);
    if (line.empty()) continue;
    auto fields = split_csv(line);
    if (!fields || fields->size() != expected) {
      throw Error(ErrorCode::ParseError,
                  "line " + std::to_string(line_no) + ": expected " +
                      std::to_string(expected) + " fields",
                  line_no);
    }
    auto& f = *fields;
    auto fail = [&](const std::string& what) {
      return Error(ErrorCode::ParseError,
                   "line " + std::to_string(line_no) + ": " + what, line_no);
    };
    Observation obs;
    obs.location = f[0];
    obs.variable = f[2];
    if (obs.location.empty()) throw fail("empty geo_id");
    if (obs.variable.empty()) throw fail("empty signal");
    auto t = try_parse_time(f[1]);
    if (!t) throw fail("bad time_value '" + f[1] + "'");
    obs.time = *t;
    (looks_iso(f[1]) ? saw_iso : saw_int) = true;

    const std::string& v = f[3];
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), obs.value);
    if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) {
      throw fail("bad value '" + v + "'");
    }
    if (!std::isfinite(obs.value)) throw fail("non-finite value '" + v + "'");

    if (panel.has_issue && !f[4].empty()) {
      auto issue = try_parse_time(f[4]);
      if (!issue) throw fail("bad issue '" + f[4] + "'");
      obs.issue = *issue;
    }
    if (!seen.emplace(obs.location, obs.time, obs.variable, obs.issue).second) {
      throw Error(ErrorCode::DuplicateRecord,
                  "line " + std::to_string(line_no) + ": duplicate (" +
                      obs.location + ", " + f[1] + ", " + obs.variable + ")",
                  line_no);
    }
    panel.records.push_back(std::move(obs));
  }
  panel.iso_dates = saw_iso && !saw_int;
  return panel;
}

PanelDataset load_panel(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::ParseError, "cannot open '" + path.string() + "'");
  }
  return read_panel(in);
}

void write_panel(std::ostream& out, const PanelDataset& panel) {
  out << "geo_id,time_value,signal,value" << (panel.has_issue ? ",issue" : "")
      << '\n';
  for (const auto& r : panel.records) {
    out << quote_if_needed(r.location) << ',' << format_time(r.time, panel.iso_dates)
        << ',' << quote_if_needed(r.variable) << ',' << format_double(r.value);
    if (panel.has_issue) {
      out << ',';
      if (r.issue) out << format_time(*r.issue, panel.iso_dates);
    }
    out << '\n';
  }
}

std::size_t TaskSpec::m() const noexcept {
  std::size_t m = 0;
  for (const auto& p : predictors) m += p.lags.size();
  return m;
}

void TaskSpec::validate() const {
  if (response.empty()) {
    throw Error(ErrorCode::InvalidArgument, "task has no response variable");
  }
  if (aheads.empty()) throw Error(ErrorCode::InvalidArgument, "task has no aheads");
  for (std::size_t i = 0; i < aheads.size(); ++i) {
    if (aheads[i] < 0 || (i > 0 && aheads[i] <= aheads[i - 1])) {
      throw Error(ErrorCode::InvalidArgument,
                  "aheads must be non-negative and strictly increasing");
    }
  }
  if (m() == 0) throw Error(ErrorCode::InvalidArgument, "task has no predictors");
  for (const auto& p : predictors) {
    if (p.lags.empty()) {
      throw Error(ErrorCode::InvalidArgument,
                  "predictor '" + p.variable + "' has no lags");
    }
    std::set<int> distinct(p.lags.begin(), p.lags.end());
    if (distinct.size() != p.lags.size()) {
      throw Error(ErrorCode::InvalidArgument,
                  "duplicate lag for predictor '" + p.variable + "'");
    }
    if (!p.lags.empty() && *distinct.begin() < 0) {
      throw Error(ErrorCode::InvalidArgument,
                  "negative lag for predictor '" + p.variable + "'");
    }
  }
  if (!std::is_sorted(forecast_times.begin(), forecast_times.end())) {
    throw Error(ErrorCode::InvalidArgument, "forecast times must be sorted");
  }
}

std::size_t DesignSet::observed_cells() const noexcept {
  std::size_t n = 0;
  for (double v : w.values()) n += v != 0.0;
  return n;
}

bool DesignSet::complete() const noexcept {
  return std::all_of(w.values().begin(), w.values().end(),
                     [](double v) { return v != 0.0; });
}

DesignSet DesignSet::subset(std::span<const std::size_t> rows) const {
  DesignSet out;
  out.x = x.select_rows(rows);
  out.y = y.select_rows(rows);
  out.w = w.select_rows(rows);
  out.row_index.reserve(rows.size());
  for (std::size_t r : rows) out.row_index.push_back(row_index[r]);
  out.column_index = column_index;
  out.aheads = aheads;
  return out;
}

namespace {

struct CellKey {
  std::size_t variable;
  std::size_t location;
  TimeIndex time;
  friend bool operator==(const CellKey&, const CellKey&) = default;
};

struct CellKeyHash {
  std::size_t operator()(const CellKey& k) const noexcept {
    std::size_t h = std::hash<std::size_t>{}(k.variable);
    h = h * 1000003u ^ std::hash<std::size_t>{}(k.location);
    h = h * 1000003u ^ std::hash<TimeIndex>{}(k.time);
    return h;
  }
};

struct Resolved {
  double value;
  TimeIndex issue;
  bool explicit_issue;
};

}  // namespace

DesignSet build_design(const PanelDataset& panel, const TaskSpec& task,
                       const DesignOptions& options) {
  task.validate();

  std::map<std::string, std::size_t> variables;
  std::map<std::string, std::size_t> locations;
  for (const auto& r : panel.records) {
    variables.emplace(r.variable, variables.size());
    locations.emplace(r.location, locations.size());
  }
  auto variable_id = [&](const std::string& name) {
    auto it = variables.find(name);
    if (it == variables.end()) {
      throw Error(ErrorCode::UnknownVariable,
                  "variable '" + name + "' not present in panel");
    }
    return it->second;
  };
  const std::size_t response_id = variable_id(task.response);
  std::vector<std::size_t> predictor_ids;
  for (const auto& p : task.predictors) predictor_ids.push_back(variable_id(p.variable));

  std::set<std::size_t> used(predictor_ids.begin(), predictor_ids.end());
  used.insert(response_id);

  std::unordered_map<CellKey, Resolved, CellKeyHash> cells;
  std::set<TimeIndex> all_times;
  for (const auto& r : panel.records) {
    const std::size_t var = variables.at(r.variable);
    if (!used.count(var)) continue;
    const TimeIndex issue = r.issue.value_or(r.time);
    if (task.as_of && issue > *task.as_of) continue;
    if (var == predictor_ids.front()) {
      all_times.insert(r.time + task.predictors.front().lags.front());
    }
    const CellKey key{var, locations.at(r.location), r.time};
    const Resolved candidate{r.value, issue, r.issue.has_value()};
    auto [it, inserted] = cells.emplace(key, candidate);
    if (!inserted) {
      const auto& cur = it->second;
      if (std::tie(candidate.issue, candidate.explicit_issue) >
          std::tie(cur.issue, cur.explicit_issue)) {
        it->second = candidate;
      }
    }
  }

  std::vector<TimeIndex> times = task.forecast_times;
  if (times.empty()) times.assign(all_times.begin(), all_times.end());

  const std::size_t m = task.m();
  const std::size_t q = task.q();
  std::vector<double> xs, ys, ws;
  std::vector<RowKey> row_index;
  std::vector<double> feat(m), resp(q), mask(q);

  for (TimeIndex t : times) {
    for (const auto& [loc_name, loc] : locations) {
      bool ok = true;
      std::size_t col = 0;
      for (std::size_t k = 0; k < task.predictors.size() && ok; ++k) {
        for (int lag : task.predictors[k].lags) {
          auto it = cells.find({predictor_ids[k], loc, t - lag});
          if (it == cells.end()) {
            ok = false;
            break;
          }
          feat[col++] = it->second.value;
        }
      }
      if (!ok) continue;
      bool any = false;
      for (std::size_t j = 0; j < q; ++j) {
        auto it = cells.find({response_id, loc, t + task.aheads[j]});
        if (it != cells.end()) {
          resp[j] = it->second.value;
          mask[j] = 1.0;
          any = true;
        } else {
          resp[j] = 0.0;
          mask[j] = 0.0;
        }
      }
      if (!any && !options.retain_empty) continue;
      xs.insert(xs.end(), feat.begin(), feat.end());
      ys.insert(ys.end(), resp.begin(), resp.end());
      ws.insert(ws.end(), mask.begin(), mask.end());
      row_index.push_back({loc_name, t});
    }
  }

  if (row_index.empty()) {
    throw Error(ErrorCode::EmptyDesign,
                "no (location, forecast time) has complete predictors and an "
                "observed response");
  }

  DesignSet design;
  const std::size_t n = row_index.size();
  design.x = Matrix(n, m, std::move(xs));
  design.y = Matrix(n, q, std::move(ys));
  design.w = Matrix(n, q, std::move(ws));
  design.row_index = std::move(row_index);
  for (const auto& p : task.predictors)
    for (int lag : p.lags) design.column_index.push_back({p.variable, lag});
  design.aheads = task.aheads;
  return design;
}

std::pair<DesignSet, DesignSet> split_by_time(const DesignSet& design,
                                              TimeIndex cutoff) {
  std::vector<std::size_t> early, late;
  for (std::size_t r = 0; r < design.rows(); ++r) {
    (design.row_index[r].forecast_time <= cutoff ? early : late).push_back(r);
  }
  return {design.subset(early), design.subset(late)};
}

}  // namespace mpf
