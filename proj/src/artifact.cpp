#include "mpf/artifact.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "json.hpp"

namespace mpf {

using nlohmann::json;

namespace {

[[noreturn]] void schema_error(const std::string& what) {
  throw Error(ErrorCode::SchemaError, what);
}

TimeIndex time_from_json(const json& j) {
  if (j.is_number_integer()) return j.get<TimeIndex>();
  if (j.is_string()) return parse_time(j.get<std::string>());
  schema_error("time must be an integer day index or ISO date string");
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    rows.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", rows}};
}

Matrix matrix_from_json(const json& j) {
  const auto rows = j.at("rows").get<std::size_t>();
  const auto cols = j.at("cols").get<std::size_t>();
  const auto& data = j.at("data");
  if (!data.is_array() || data.size() != rows) schema_error("matrix row count mismatch");
  std::vector<double> values;
  values.reserve(rows * cols);
  for (const auto& row : data) {
    if (!row.is_array() || row.size() != cols) schema_error("matrix column count mismatch");
    for (const auto& v : row) values.push_back(v.get<double>());
  }
  return Matrix(rows, cols, std::move(values));
}

json task_to_json(const TaskSpec& task) {
  json preds = json::array();
  for (const auto& p : task.predictors) {
    preds.push_back({{"variable", p.variable}, {"lags", p.lags}});
  }
  json j = {{"response", task.response},
            {"predictors", preds},
            {"aheads", task.aheads},
            {"forecast_times", task.forecast_times}};
  j["as_of"] = task.as_of ? json(*task.as_of) : json(nullptr);
  return j;
}

TaskSpec task_from_json(const json& j) {
  TaskSpec task;
  task.response = j.at("response").get<std::string>();
  for (const auto& p : j.at("predictors")) {
    task.predictors.push_back(
        {p.at("variable").get<std::string>(), p.at("lags").get<std::vector<int>>()});
  }
  task.aheads = j.at("aheads").get<std::vector<int>>();
  if (j.contains("forecast_times")) {
    for (const auto& t : j.at("forecast_times")) task.forecast_times.push_back(time_from_json(t));
  }
  if (j.contains("as_of") && !j.at("as_of").is_null()) {
    task.as_of = time_from_json(j.at("as_of"));
  }
  task.validate();
  return task;
}

json margins_to_json(const CalibrationMargins& c) {
  return {{"lower_tau", c.lower_tau.value()},
          {"upper_tau", c.upper_tau.value()},
          {"q_lower", c.q_lower},
          {"q_upper", c.q_upper},
          {"level", c.level}};
}

CalibrationMargins margins_from_json(const json& j) {
  return {QuantileLevel{j.at("lower_tau").get<double>()},
          QuantileLevel{j.at("upper_tau").get<double>()}, j.at("q_lower").get<double>(),
          j.at("q_upper").get<double>(), j.at("level").get<double>()};
}

json optional_time(const std::optional<TimeIndex>& t) {
  return t ? json(*t) : json(nullptr);
}

std::optional<TimeIndex> optional_time_from(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<TimeIndex>();
}

void check_payload(const ModelArtifact& a, const Matrix& payload) {
  const std::size_t m = a.task.m();
  const std::size_t q = a.task.q();
  const std::size_t rows =
      a.kind == ModelKind::Baseline ? q : a.basis->degrees_of_freedom;
  if (payload.rows() != rows || payload.cols() != m) {
    schema_error("coefficient payload is " + std::to_string(payload.rows()) + "x" +
                 std::to_string(payload.cols()) + ", expected " + std::to_string(rows) +
                 "x" + std::to_string(m));
  }
}

void validate(const ModelArtifact& a) {
  if (a.format_version != kArtifactFormatVersion) {
    schema_error("unsupported artifact format_version " + std::to_string(a.format_version));
  }
  if (a.kind == ModelKind::Smooth) {
    if (!a.basis) schema_error("smooth artifact without basis");
    if (a.basis->aheads.size() != a.task.q()) schema_error("basis aheads differ from task");
    for (std::size_t j = 0; j < a.task.q(); ++j) {
      if (a.basis->aheads[j] != static_cast<double>(a.task.aheads[j])) {
        schema_error("basis aheads differ from task");
      }
    }
    if (a.basis->degrees_of_freedom < 1 || a.basis->degrees_of_freedom > a.task.q()) {
      schema_error("basis degrees of freedom out of range");
    }
  }
  if (a.point.has_value() == a.is_quantile()) {
    schema_error("artifact needs exactly one of a point or a quantile payload");
  }
  if (a.point) check_payload(a, *a.point);
  if (a.quantile_levels.size() != a.quantile_payloads.size()) {
    schema_error("quantile level count differs from payload count");
  }
  for (const auto& p : a.quantile_payloads) check_payload(a, p);
}

CoefficientSet make_coefficients(const ModelArtifact& a, const Matrix& payload) {
  CoefficientSet coef;
  coef.kind = a.kind;
  for (const auto& p : a.task.predictors)
    for (int lag : p.lags) coef.column_index.push_back({p.variable, lag});
  coef.aheads = a.task.aheads;
  if (a.kind == ModelKind::Baseline) {
    coef.b = payload;
  } else {
    coef.theta = payload;
    coef.basis = build_basis(*a.basis);
  }
  return coef;
}

}  // namespace

CoefficientSet ModelArtifact::point_coefficients() const {
  if (!point) throw Error(ErrorCode::SchemaError, "artifact has no point payload");
  return make_coefficients(*this, *point);
}

CoefficientSet ModelArtifact::quantile_coefficients(std::size_t i) const {
  if (i >= quantile_payloads.size()) {
    throw Error(ErrorCode::SchemaError, "quantile payload index out of range");
  }
  return make_coefficients(*this, quantile_payloads[i]);
}

ModelArtifact ModelArtifact::from_point(const TaskSpec& task, const CoefficientSet& coef) {
  ModelArtifact a;
  a.task = task;
  a.kind = coef.kind;
  if (coef.kind == ModelKind::Smooth) {
    a.basis = coef.basis->spec;
    a.point = *coef.theta;
  } else {
    a.point = *coef.b;
  }
  return a;
}

ModelArtifact ModelArtifact::from_quantiles(const TaskSpec& task,
                                            const QuantileCoefficientSet& coefs) {
  ModelArtifact a;
  a.task = task;
  a.kind = coefs.fits.front().kind;
  if (a.kind == ModelKind::Smooth) a.basis = coefs.fits.front().basis->spec;
  for (std::size_t i = 0; i < coefs.levels.size(); ++i) {
    a.quantile_levels.push_back(coefs.levels[i].value());
    const auto& fit = coefs.fits[i];
    a.quantile_payloads.push_back(fit.kind == ModelKind::Smooth ? *fit.theta : *fit.b);
  }
  return a;
}

void write_artifact(std::ostream& out, const ModelArtifact& a) {
  validate(a);
  json j;
  j["format_version"] = a.format_version;
  j["task"] = task_to_json(a.task);
  j["kind"] = std::string(to_string(a.kind));
  if (a.basis) {
    j["basis"] = {{"family", std::string(to_string(a.basis->family))},
                  {"degrees_of_freedom", a.basis->degrees_of_freedom},
                  {"aheads", a.basis->aheads}};
  }
  if (a.point) j["coefficients"] = matrix_to_json(*a.point);
  if (a.is_quantile()) {
    json qs = json::array();
    for (std::size_t i = 0; i < a.quantile_levels.size(); ++i) {
      qs.push_back({{"tau", a.quantile_levels[i]},
                    {"coefficients", matrix_to_json(a.quantile_payloads[i])}});
    }
    j["quantiles"] = qs;
  }
  if (a.margins) j["calibration"] = margins_to_json(*a.margins);
  const auto& md = a.metadata;
  j["metadata"] = {{"rows", md.rows},
                   {"observed_cells", md.observed_cells},
                   {"first_forecast_time", optional_time(md.first_forecast_time)},
                   {"last_forecast_time", optional_time(md.last_forecast_time)},
                   {"objective", md.objective},
                   {"objective_values", md.objective_values},
                   {"ridge_jitter", md.ridge_jitter},
                   {"iso_dates", md.iso_dates}};
  out << j.dump(2) << '\n';
}

ModelArtifact read_artifact(std::istream& in) {
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    schema_error(std::string("artifact is not valid JSON: ") + e.what());
  }
  try {
    ModelArtifact a;
    a.format_version = j.at("format_version").get<int>();
    if (a.format_version != kArtifactFormatVersion) {
      schema_error("unsupported artifact format_version " + std::to_string(a.format_version));
    }
    a.task = task_from_json(j.at("task"));
    a.kind = parse_model_kind(j.at("kind").get<std::string>());
    if (j.contains("basis")) {
      const auto& b = j.at("basis");
      BasisSpec spec;
      spec.family = parse_basis_family(b.at("family").get<std::string>());
      spec.degrees_of_freedom = b.at("degrees_of_freedom").get<std::size_t>();
      spec.aheads = b.at("aheads").get<std::vector<double>>();
      a.basis = spec;
    }
    if (j.contains("coefficients")) a.point = matrix_from_json(j.at("coefficients"));
    if (j.contains("quantiles")) {
      for (const auto& qj : j.at("quantiles")) {
        a.quantile_levels.push_back(QuantileLevel{qj.at("tau").get<double>()}.value());
        a.quantile_payloads.push_back(matrix_from_json(qj.at("coefficients")));
      }
    }
    if (j.contains("calibration")) a.margins = margins_from_json(j.at("calibration"));
    if (j.contains("metadata")) {
      const auto& md = j.at("metadata");
      a.metadata.rows = md.at("rows").get<std::size_t>();
      a.metadata.observed_cells = md.at("observed_cells").get<std::size_t>();
      a.metadata.first_forecast_time = optional_time_from(md, "first_forecast_time");
      a.metadata.last_forecast_time = optional_time_from(md, "last_forecast_time");
      a.metadata.objective = md.at("objective").get<std::string>();
      a.metadata.objective_values = md.at("objective_values").get<std::vector<double>>();
      a.metadata.ridge_jitter = md.at("ridge_jitter").get<double>();
      a.metadata.iso_dates = md.at("iso_dates").get<bool>();
    }
    validate(a);
    return a;
  } catch (const json::exception& e) {
    schema_error(std::string("malformed artifact: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::SchemaError) throw;
    schema_error(e.what());
  }
}

ModelArtifact load_artifact(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) schema_error("cannot open artifact '" + path.string() + "'");
  return read_artifact(in);
}

void save_artifact(const std::filesystem::path& path, const ModelArtifact& artifact) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write '" + path.string() + "'");
  write_artifact(out, artifact);
}

TaskSpec read_task_config(std::istream& in) {
  json j;
  try {
    j = json::parse(in);
    if (j.contains("format_version") && j.contains("task")) return task_from_json(j.at("task"));
    return task_from_json(j);
  } catch (const json::exception& e) {
    schema_error(std::string("malformed task config: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::SchemaError) throw;
    schema_error(e.what());
  }
}

TaskSpec load_task_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) schema_error("cannot open config '" + path.string() + "'");
  return read_task_config(in);
}

void write_task_config(std::ostream& out, const TaskSpec& task) {
  out << task_to_json(task).dump(2) << '\n';
}

}  // namespace mpf
