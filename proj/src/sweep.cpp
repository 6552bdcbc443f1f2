// SPDX-License-Identifier: Apache-2.0
#include "mxisac/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <condition_variable>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <thread>

#include "json.hpp"
#include "mxisac/error.hpp"
#include "mxisac/io.hpp"

namespace mxisac {

using nlohmann::json;

const char* to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::snr: return "snr";
    case SweepAxis::scnr_threshold: return "scnr_threshold";
    case SweepAxis::rf_chains: return "rf_chains";
    case SweepAxis::subarray_scale: return "subarray_scale";
    case SweepAxis::user_distance: return "user_distance";
    case SweepAxis::subarray_count: return "subarray_count";
    case SweepAxis::layout: return "layout";
  }
  return "unknown";
}

SweepAxis sweep_axis_from_string(const std::string& s) {
  for (SweepAxis a : {SweepAxis::snr, SweepAxis::scnr_threshold, SweepAxis::rf_chains, SweepAxis::subarray_scale,
                      SweepAxis::user_distance, SweepAxis::subarray_count, SweepAxis::layout})
    if (s == to_string(a)) return a;
  throw Error(ErrorKind::configuration, "axis: unknown value '" + s + "'");
}

void ExperimentSpec::validate() const {
  base.validate();
  if (values.empty()) throw Error(ErrorKind::configuration, "values: must be nonempty");
  if (repetitions < 1) throw Error(ErrorKind::configuration, "repetitions: must be >= 1");
  if (algorithms.empty()) throw Error(ErrorKind::configuration, "algorithms: must be nonempty");
}

ExperimentSpec spec_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::parse, std::string("sweep file: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorKind::parse, "sweep file: top level must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    static const std::vector<std::string> allowed{"base", "desk_scale", "axis", "values", "algorithms",
                                                  "repetitions", "seed", "output"};
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
      throw Error(ErrorKind::configuration, it.key() + ": unknown key");
  }
  ExperimentSpec s;
  try {
    const bool desk = j.value("desk_scale", false);
    s.base = config_from_json_text(j.contains("base") ? j["base"].dump() : "", desk);
    if (!j.contains("axis")) throw Error(ErrorKind::configuration, "axis: required");
    s.axis = sweep_axis_from_string(j["axis"].get<std::string>());
    if (!j.contains("values") || !j["values"].is_array())
      throw Error(ErrorKind::configuration, "values: required array");
    for (const auto& v : j["values"]) {
      if (v.is_string())
        s.values.push_back(v.get<std::string>());
      else if (v.is_null())
        s.values.push_back("none");
      else if (v.is_number())
        s.values.push_back(fmt_num(v.get<double>()));
      else
        throw Error(ErrorKind::parse, "values: entries must be numbers or strings");
    }
    if (j.contains("algorithms")) {
      s.algorithms.clear();
      for (const auto& a : j["algorithms"]) s.algorithms.push_back(algorithm_from_string(a.get<std::string>()));
    }
    s.repetitions = j.value("repetitions", 1);
    s.seed = j.value("seed", std::uint64_t{1});
    s.output_path = j.value("output", std::string());
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse, std::string("sweep file: ") + e.what());
  }
  s.validate();
  return s;
}

ExperimentSpec load_spec(const std::string& path) { return spec_from_json_text(read_file(path)); }

namespace {

double number(const std::string& v, const char* axis) {
  std::size_t pos = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != v.size()) throw Error(ErrorKind::configuration, std::string(axis) + ": value '" + v + "' is not a number");
  return x;
}

int integer(const std::string& v, const char* axis) {
  const double x = number(v, axis);
  if (x != std::floor(x)) throw Error(ErrorKind::configuration, std::string(axis) + ": value '" + v + "' is not an integer");
  return static_cast<int>(x);
}

std::string csv_safe(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

}  // namespace

ScenarioConfig apply_axis(const ExperimentSpec& spec, const std::string& value, int repetition,
                          PrepareOptions& options) {
  ScenarioConfig c = spec.base;
  c.seed = derive_seed(spec.seed, static_cast<std::uint64_t>(repetition));
  options = {};
  switch (spec.axis) {
    case SweepAxis::snr:
      options.received_snr_db = number(value, "snr");
      break;
    case SweepAxis::scnr_threshold:
      c.scnr_threshold = (value == "none") ? 0.0 : db_to_linear(number(value, "scnr_threshold"));
      break;
    case SweepAxis::rf_chains:
      c.rf_per_subarray = integer(value, "rf_chains");
      break;
    case SweepAxis::subarray_scale: {
      // Fixed total antennas and fixed aperture; M changes, K = N / M.
      const int N = spec.base.N();
      const int M = integer(value, "subarray_scale");
      if (M < 1 || N % M != 0)
        throw Error(ErrorKind::configuration, "subarray_scale: M must divide N = " + std::to_string(N));
      const double d = spec.base.element_spacing();
      const double S = (spec.base.K - 1) * spec.base.spacing_factor * d + (spec.base.M - 1) * d;
      c.M = M;
      c.K = N / M;
      c.spacing_factor = c.K > 1 ? (S - (M - 1) * d) / ((c.K - 1) * d) : M;
      break;
    }
    case SweepAxis::user_distance:
      c.user.r = number(value, "user_distance");
      break;
    case SweepAxis::subarray_count:
      c.K = integer(value, "subarray_count");
      break;
    case SweepAxis::layout:
      c.layout = layout_from_string(value);
      break;
  }
  c.validate();
  return c;
}

std::string sweep_header(const ExperimentSpec&) { return "axis,value,repetition," + result_header(); }

std::string sweep_line(const SweepRow& r) {
  return r.axis_value + "," + std::to_string(r.repetition) + "," + result_line(r.result);
}

int workers_from_env() {
  const char* v = std::getenv("MXISAC_WORKERS");
  if (!v) return 1;
  const int n = std::atoi(v);
  return n >= 1 ? n : 1;
}

namespace {

std::vector<SweepRow> run_cell(const ExperimentSpec& spec, const std::string& value, int rep) {
  std::vector<SweepRow> rows;
  try {
    PrepareOptions po;
    const ScenarioConfig c = apply_axis(spec, value, rep, po);
    const Prepared pr = prepare_scenario(c, po);
    for (Algorithm a : spec.algorithms) {
      ResultRow r;
      try {
        r = run_prepared(pr, a, spec.run).row;
      } catch (const Error& e) {
        r.algorithm = to_string(a);
        r.seed = c.seed;
        r.se_bits = r.scnr_db = r.scnr_fixed_db = r.power_exact = r.power_proxy = std::nan("");
        r.status = csv_safe(std::string("error: ") + e.what());
      }
      rows.push_back({value, rep, r});
    }
  } catch (const Error& e) {
    for (Algorithm a : spec.algorithms) {
      ResultRow r;
      r.algorithm = to_string(a);
      r.se_bits = r.scnr_db = r.scnr_fixed_db = r.power_exact = r.power_proxy = std::nan("");
      r.status = csv_safe(std::string("error: ") + e.what());
      rows.push_back({value, rep, r});
    }
  }
  return rows;
}

}  // namespace

SweepResult run_sweep(const ExperimentSpec& spec, int workers) {
  spec.validate();
  const int reps = spec.repetitions;
  const int cells = static_cast<int>(spec.values.size()) * reps;
  std::vector<std::optional<std::vector<SweepRow>>> done(static_cast<std::size_t>(cells));
  std::mutex mu;
  std::condition_variable cv;
  std::atomic<int> next{0};

  auto worker = [&] {
    for (int i = next++; i < cells; i = next++) {
      auto rows = run_cell(spec, spec.values[static_cast<std::size_t>(i / reps)], i % reps);
      {
        std::lock_guard<std::mutex> lock(mu);
        done[static_cast<std::size_t>(i)] = std::move(rows);
      }
      cv.notify_all();
    }
  };

  std::ofstream out, timing;
  if (!spec.output_path.empty()) {
    out.open(spec.output_path, std::ios::binary);
    timing.open(spec.output_path + ".timing.csv", std::ios::binary);
    if (!out || !timing) throw Error(ErrorKind::io, "cannot write '" + spec.output_path + "'");
    out << sweep_header(spec) << "\n" << std::flush;
    timing << "value,repetition,algorithm,wall_time_ms\n";
  }

  std::vector<std::thread> pool;
  const int n_threads = std::max(1, std::min(workers, cells)) - 1;
  for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  if (n_threads == 0) worker();

  SweepResult result;
  for (int i = 0; i < cells; ++i) {
    std::vector<SweepRow> rows;
    {
      std::unique_lock<std::mutex> lock(mu);
      // The main thread also works when no pool was started, so by then all
      // cells are finished.
      cv.wait(lock, [&] { return done[static_cast<std::size_t>(i)].has_value(); });
      rows = std::move(*done[static_cast<std::size_t>(i)]);
    }
    for (auto& r : rows) {
      if (out.is_open()) {
        out << to_string(spec.axis) << "," << sweep_line(r) << "\n";
        timing << r.axis_value << "," << r.repetition << "," << r.result.algorithm << ","
               << fmt_num(r.result.wall_time_ms) << "\n";
      }
      result.rows.push_back(std::move(r));
    }
    if (out.is_open()) out.flush();
  }
  for (auto& t : pool) t.join();

  if (!spec.output_path.empty()) write_file(spec.output_path + ".summary.csv", summary_csv(spec, result));
  return result;
}

std::string summary_csv(const ExperimentSpec& spec, const SweepResult& result) {
  std::string s = "axis,value,algorithm,n_ok,n_total,se_mean,se_std,scnr_db_mean,scnr_db_std\n";
  for (const auto& v : spec.values)
    for (Algorithm a : spec.algorithms) {
      std::vector<double> se, sc;
      int total = 0;
      for (const auto& r : result.rows)
        if (r.axis_value == v && r.result.algorithm == to_string(a)) {
          ++total;
          if (r.result.status == "ok") {
            se.push_back(r.result.se_bits);
            sc.push_back(r.result.scnr_db);
          }
        }
      auto stats = [](const std::vector<double>& x) {
        if (x.empty()) return std::pair<double, double>(std::nan(""), std::nan(""));
        double m = 0.0;
        for (double e : x) m += e;
        m /= static_cast<double>(x.size());
        double var = 0.0;
        for (double e : x) var += (e - m) * (e - m);
        return std::pair<double, double>(m, x.size() > 1 ? std::sqrt(var / static_cast<double>(x.size() - 1)) : 0.0);
      };
      const auto [sm, ss] = stats(se);
      const auto [cm, cs] = stats(sc);
      s += std::string(to_string(spec.axis)) + "," + v + "," + to_string(a) + "," + std::to_string(se.size()) + "," +
           std::to_string(total) + "," + fmt_num(sm) + "," + fmt_num(ss) + "," + fmt_num(cm) + "," + fmt_num(cs) +
           "\n";
    }
  return s;
}

}  // namespace mxisac
