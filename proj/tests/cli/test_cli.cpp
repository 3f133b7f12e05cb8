#include "doctest.h"

#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "mpf/panel.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path& work_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::path(MPF_TEST_TMP) / "cli";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string path(const std::string& name) { return (work_dir() / name).string(); }

int run(const std::string& args, const std::string& log_name = "last.log") {
  const std::string cmd = std::string(MPF_CLI) + " " + args + " > " + path(log_name + ".out") +
                          " 2> " + path(log_name);
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& file) {
  std::ifstream in(file, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& file) {
  std::vector<std::string> out;
  std::ifstream in(file);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

json load_json(const std::string& file) { return json::parse(slurp(file)); }

double sum(const json& values) {
  double s = 0;
  for (const auto& v : values) s += v.get<double>();
  return s;
}

double overall_mae(const std::string& metrics_csv) {
  const auto rows = lines(metrics_csv);
  REQUIRE(rows.size() >= 2);
  REQUIRE(rows[0] == "scope,ahead,mae,lmr,umr,m");
  // overall,,<mae>,...
  std::stringstream row(rows[1]);
  std::string field;
  for (int i = 0; i < 3; ++i) std::getline(row, field, ',');
  return std::stod(field);
}

void write_file(const std::string& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  out << text;
}

// Splits a simulated panel by location: the first `keep` locations go to
// `a`, the rest to `b`.
void split_panel(const std::string& src, std::size_t keep, const std::string& a,
                 const std::string& b) {
  const auto rows = lines(src);
  std::ofstream fa(a), fb(b);
  fa << rows[0] << '\n';
  fb << rows[0] << '\n';
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const int loc = std::stoi(rows[i].substr(3, 4));
    (static_cast<std::size_t>(loc) <= keep ? fa : fb) << rows[i] << '\n';
  }
}

}  // namespace

TEST_CASE("simulate writes three deterministic files") {
  const std::string flags = "--n 10 --p 2 --q 5 --true-df 2 --snr 1 --missing-frac 0 --seed 7";
  REQUIRE(run("simulate " + flags + " --out " + path("sim_a")) == 0);
  REQUIRE(run("simulate " + flags + " --out " + path("sim_b")) == 0);
  for (const char* f : {"panel.csv", "truth.csv", "truth_model.json"}) {
    CHECK(fs::exists(path(std::string("sim_a/") + f)));
    CHECK(slurp(path(std::string("sim_a/") + f)) == slurp(path(std::string("sim_b/") + f)));
  }
  // 10 locations x (2 predictors + 5 response cells).
  CHECK(lines(path("sim_a/panel.csv")).size() == 1 + 10 * 7);
}

TEST_CASE("usage errors exit with 2") {
  CHECK(run("simulate --missing-frac 1.0 --out " + path("bad")) == 2);
  CHECK(run("simulate --n 10 --true-df 40 --out " + path("bad")) == 2);
  CHECK(run("fit --bogus") == 2);
  CHECK(run("") == 2);
  CHECK(run("frobnicate") == 2);
}

TEST_CASE("paper-scale simulation masks 10% of 30000 cells") {
  REQUIRE(run("simulate --n 1000 --p 10 --q 30 --true-df 3 --snr 1 --missing-frac 0.1 "
              "--seed 1 --out " + path("paper")) == 0);
  const auto truth = lines(path("paper/truth.csv"));
  REQUIRE(truth.size() == 1 + 30000);
  std::size_t masked = 0;
  for (std::size_t i = 1; i < truth.size(); ++i) masked += truth[i].back() == '0';
  CHECK(masked == 3000);
  std::size_t responses = 0;
  for (const auto& row : lines(path("paper/panel.csv"))) responses += row.find(",y,") != std::string::npos;
  CHECK(responses == 27000);
}

TEST_CASE("baseline and full smooth report equal training SSE") {
  REQUIRE(run("simulate --n 150 --p 4 --q 8 --true-df 3 --missing-frac 0 --seed 2 --out " +
              path("eq")) == 0);
  const std::string common =
      "fit --train " + path("eq/panel.csv") + " --config " + path("eq/truth_model.json");
  REQUIRE(run(common + " --model baseline --out " + path("eq/base.json")) == 0);
  REQUIRE(run(common + " --model smooth --df 8 --out " + path("eq/full.json")) == 0);
  const auto base = load_json(path("eq/base.json"));
  const auto full = load_json(path("eq/full.json"));
  CHECK(base["metadata"]["objective_values"].size() == 8);
  CHECK(full["metadata"]["objective_values"].size() == 1);
  const double a = sum(base["metadata"]["objective_values"]);
  const double b = sum(full["metadata"]["objective_values"]);
  CHECK(std::abs(a - b) <= 1e-6 * a);
  CHECK(run(common + " --model smooth --df 9 --out " + path("eq/x.json")) == 2);
  CHECK(run(common + " --model lasso --out " + path("eq/x.json")) == 2);
}

TEST_CASE("quantile fit stores one payload per level") {
  REQUIRE(run("simulate --n 80 --p 3 --q 6 --true-df 2 --seed 3 --out " + path("qf")) == 0);
  REQUIRE(run("fit --train " + path("qf/panel.csv") + " --config " +
              path("qf/truth_model.json") + " --model smooth --df 2 --quantiles 0.2,0.5,0.8 --out " +
              path("qf/q.json")) == 0);
  const auto a = load_json(path("qf/q.json"));
  REQUIRE(a["quantiles"].size() == 3);
  CHECK(a["quantiles"][1]["tau"] == 0.5);
  CHECK(a["quantiles"][0]["coefficients"]["rows"] == 2);
  CHECK(run("fit --train " + path("qf/panel.csv") + " --config " + path("qf/truth_model.json") +
            " --quantiles 0.8,0.2 --out " + path("qf/x.json")) == 2);
}

TEST_CASE("predict then evaluate on a saturated noiseless model gives zero MAE") {
  REQUIRE(run("simulate --n 50 --p 3 --q 6 --true-df 2 --snr noiseless --missing-frac 0.2 "
              "--seed 4 --out " + path("nl")) == 0);
  REQUIRE(run("fit --train " + path("nl/panel.csv") + " --config " +
              path("nl/truth_model.json") + " --model smooth --df 2 --out " + path("nl/m.json")) == 0);
  REQUIRE(run("predict --model " + path("nl/m.json") + " --data " + path("nl/panel.csv") +
              " --out " + path("nl/fc.csv")) == 0);
  const auto fc = lines(path("nl/fc.csv"));
  CHECK(fc[0] == "geo_id,forecast_time,ahead,quantile,value,lower,upper");
  CHECK(fc.size() == 1 + 50 * 6);
  REQUIRE(run("evaluate --model " + path("nl/m.json") + " --data " + path("nl/panel.csv") +
              " --forecasts " + path("nl/fc.csv") + " --out " + path("nl/metrics.csv")) == 0);
  CHECK(overall_mae(path("nl/metrics.csv")) <= 1e-10);
  const auto metrics = lines(path("nl/metrics.csv"));
  CHECK(metrics.size() == 1 + 1 + 6);
}

TEST_CASE("smooth refit at the true d beats baseline on held-out locations") {
  REQUIRE(run("simulate --n 200 --seed 5 --out " + path("fig")) == 0);
  split_panel(path("fig/panel.csv"), 100, path("fig/train.csv"), path("fig/test.csv"));
  const std::string cfg = " --config " + path("fig/truth_model.json");
  REQUIRE(run("fit --train " + path("fig/train.csv") + cfg + " --model baseline --out " +
              path("fig/base.json")) == 0);
  REQUIRE(run("fit --train " + path("fig/train.csv") + cfg + " --model smooth --df 3 --out " +
              path("fig/smooth.json")) == 0);
  REQUIRE(run("evaluate --model " + path("fig/base.json") + " --data " + path("fig/test.csv") +
              " --out " + path("fig/base.csv")) == 0);
  REQUIRE(run("evaluate --model " + path("fig/smooth.json") + " --data " + path("fig/test.csv") +
              " --out " + path("fig/smooth.csv")) == 0);
  const double base = overall_mae(path("fig/base.csv"));
  const double smooth = overall_mae(path("fig/smooth.csv"));
  MESSAGE("held-out MAE baseline " << base << ", smooth d=3 " << smooth);
  CHECK(smooth < base);
}

TEST_CASE("four calibration weeks end the fit part on 3 September") {
  // Daily AR-style panel for 20 counties; forecast times 10 Jul - 1 Oct 2021.
  std::ostringstream panel;
  panel << "geo_id,time_value,signal,value\n";
  const mpf::TimeIndex start = mpf::parse_time("2021-06-01");
  const mpf::TimeIndex end = mpf::parse_time("2021-10-29");
  std::uint64_t state = 12345;
  auto uniform = [&] {
    state = state * 6364136223846793005ULL + 1442695040888963407ULL;
    return static_cast<double>(state >> 11) / 9007199254740992.0;
  };
  for (int c = 0; c < 20; ++c) {
    double level = 50 + 10 * c;
    for (mpf::TimeIndex t = start; t <= end; ++t) {
      level = 0.9 * level + 0.1 * (50 + 10 * c) + 8 * (uniform() - 0.5);
      panel << "c" << c << ',' << mpf::format_time(t, true) << ",cases," << level << '\n';
    }
  }
  write_file(path("cal_panel.csv"), panel.str());
  std::ostringstream times;
  for (mpf::TimeIndex t = mpf::parse_time("2021-07-10"); t <= mpf::parse_time("2021-10-01"); ++t) {
    times << (times.tellp() > 0 ? "," : "") << '"' << mpf::format_time(t, true) << '"';
  }
  write_file(path("cal_task.json"),
             R"({"response": "cases", "predictors": [{"variable": "cases", "lags": [1, 7]}],)"
             R"( "aheads": [0, 7, 14], "as_of": "2021-10-01", "forecast_times": [)" +
                 times.str() + "]}");
  REQUIRE(run("fit --train " + path("cal_panel.csv") + " --config " + path("cal_task.json") +
              " --model smooth --df 2 --quantiles 0.2,0.5,0.8 --out " + path("cal_q.json")) == 0);
  REQUIRE(run("calibrate --model " + path("cal_q.json") + " --data " + path("cal_panel.csv") +
              " --cal-weeks 4 --level 0.8 --out " + path("cal_done.json")) == 0);
  const auto a = load_json(path("cal_done.json"));
  CHECK(a["metadata"]["first_forecast_time"] == mpf::parse_time("2021-07-10"));
  CHECK(a["metadata"]["last_forecast_time"] == mpf::parse_time("2021-09-03"));
  CHECK(a["calibration"]["level"] == 0.8);
  CHECK(slurp(path("last.log")).find("2021-09-03") != std::string::npos);

  // Calibrated forecasts carry the widened interval on every row.
  REQUIRE(run("predict --model " + path("cal_done.json") + " --data " + path("cal_panel.csv") +
              " --clamp-zero --out " + path("cal_fc.csv")) == 0);
  const auto fc = lines(path("cal_fc.csv"));
  REQUIRE(fc.size() > 1);
  CHECK(fc[1].substr(0, 14) == "c0,2021-06-08,");
  CHECK(fc[1].find(",,") == std::string::npos);

  CHECK(run("calibrate --model " + path("cal_q.json") + " --data " + path("cal_panel.csv") +
            " --level 1.5 --out " + path("x.json")) == 2);
}

TEST_CASE("fit and predict are bit-identical across runs and through the artifact") {
  REQUIRE(run("simulate --n 60 --p 3 --q 7 --true-df 3 --seed 6 --out " + path("det")) == 0);
  const std::string fit = "fit --train " + path("det/panel.csv") + " --config " +
                          path("det/truth_model.json") + " --model smooth --df 3 --out ";
  REQUIRE(run(fit + path("det/a.json")) == 0);
  REQUIRE(run(fit + path("det/b.json")) == 0);
  CHECK(slurp(path("det/a.json")) == slurp(path("det/b.json")));

  const std::string pred = "predict --data " + path("det/panel.csv") + " --model ";
  REQUIRE(run(pred + path("det/a.json") + " --out " + path("det/fa.csv")) == 0);
  REQUIRE(run(pred + path("det/b.json") + " --out " + path("det/fb.csv")) == 0);
  CHECK(slurp(path("det/fa.csv")) == slurp(path("det/fb.csv")));

  // In-memory prediction inside evaluate matches the forecasts read back from disk.
  REQUIRE(run("evaluate --model " + path("det/a.json") + " --data " + path("det/panel.csv") +
              " --out " + path("det/m1.csv")) == 0);
  REQUIRE(run("evaluate --model " + path("det/a.json") + " --data " + path("det/panel.csv") +
              " --forecasts " + path("det/fa.csv") + " --out " + path("det/m2.csv")) == 0);
  CHECK(slurp(path("det/m1.csv")) == slurp(path("det/m2.csv")));

  REQUIRE(run("cv --train " + path("det/panel.csv") + " --config " + path("det/truth_model.json") +
              " --df-grid 1,2,3,4 --folds 3 --seed 2 --out " + path("det/cv1.csv")) == 0);
  REQUIRE(run("cv --train " + path("det/panel.csv") + " --config " + path("det/truth_model.json") +
              " --df-grid 1,2,3,4 --folds 3 --seed 2 --out " + path("det/cv2.csv")) == 0);
  CHECK(slurp(path("det/cv1.csv")) == slurp(path("det/cv2.csv")));
  CHECK(lines(path("det/cv1.csv")).size() == 1 + 4 * 4);
}

TEST_CASE("numerical and data failures map to exit codes 3 and 4") {
  REQUIRE(run("simulate --n 5 --p 8 --q 4 --true-df 2 --seed 7 --out " + path("tiny")) == 0);
  CHECK(run("fit --train " + path("tiny/panel.csv") + " --config " +
            path("tiny/truth_model.json") + " --model baseline --out " + path("tiny/m.json")) == 3);
  const std::string err = slurp(path("last.log"));
  CHECK(err.find("InsufficientRows") != std::string::npos);

  write_file(path("bad_panel.csv"), "geo,time,signal,value\n");
  CHECK(run("fit --train " + path("bad_panel.csv") + " --config " +
            path("tiny/truth_model.json") + " --out " + path("x.json")) == 4);
  write_file(path("bad_model.json"), R"({"format_version": 7})");
  CHECK(run("predict --model " + path("bad_model.json") + " --data " + path("tiny/panel.csv")) == 4);

  REQUIRE(run("simulate --n 30 --p 2 --q 4 --true-df 2 --seed 8 --out " + path("mis")) == 0);
  REQUIRE(run("fit --train " + path("mis/panel.csv") + " --config " + path("mis/truth_model.json") +
              " --out " + path("mis/m.json")) == 0);
  write_file(path("mis/other.json"),
             R"({"response": "y", "predictors": [{"variable": "x1", "lags": [2]}], "aheads": [0]})");
  CHECK(run("predict --model " + path("mis/m.json") + " --config " + path("mis/other.json") +
            " --data " + path("mis/panel.csv")) == 4);
}
