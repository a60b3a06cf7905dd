#pragma once

// CSV series I/O, JSON serialization of reports and configs, run manifests.
// Needs nlohmann/json (json.hpp) on the include path; see vendor/.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "core.hpp"
#include "diagnostics.hpp"
#include "distributions.hpp"
#include "estimate.hpp"
#include "montecarlo.hpp"

namespace marma {

using json = nlohmann::ordered_json;

/// Input problems, each mapped to its own CLI exit code.
class InputError : public std::runtime_error {
 public:
  enum class Kind { unreadable, non_numeric, too_short, invalid };
  InputError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  [[nodiscard]] Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// 17 significant digits; round-trips every double.
[[nodiscard]] inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline bool parse_number(const std::string& s, double& out) {
  if (s.empty()) return false;
  std::size_t used = 0;
  try {
    out = std::stod(s, &used);
  } catch (const std::exception&) {
    return false;
  }
  return used == s.size() && std::isfinite(out);
}

inline std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string c;
  while (std::getline(ss, c, sep)) cells.push_back(trim(c));
  if (!line.empty() && line.back() == sep) cells.emplace_back();
  return cells;
}

}  // namespace detail

/// One numeric column (by index) from a comma-separated file. A first row
/// that does not parse is taken as a header.
[[nodiscard]] inline std::vector<double> read_series_csv(const std::string& path, std::size_t column = 0) {
  std::ifstream in(path);
  if (!in) throw InputError(InputError::Kind::unreadable, "cannot read '" + path + "'");
  std::vector<double> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split(line, ',');
    if (column >= cells.size())
      throw InputError(InputError::Kind::non_numeric, path + ":" + std::to_string(lineno) + ": missing column " +
                                                         std::to_string(column));
    double v = 0.0;
    if (!detail::parse_number(cells[column], v)) {
      if (out.empty() && lineno == 1) continue;  // header
      throw InputError(InputError::Kind::non_numeric,
                       path + ":" + std::to_string(lineno) + ": non-numeric cell '" + cells[column] + "'");
    }
    out.push_back(v);
  }
  if (in.bad()) throw InputError(InputError::Kind::unreadable, "read error on '" + path + "'");
  return out;
}

/// Columns of equal length under a header row.
inline void write_csv(const std::string& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& columns) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
  out << '\n';
  const std::size_t n = columns.empty() ? 0 : columns.front().size();
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << format_double(columns[c][r]);
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

/// FNV-1a, 64 bit, as 16 hex digits.
[[nodiscard]] inline std::string fnv1a_hex(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------
// JSON

/// Non-finite values become null (JSON has no NaN).
[[nodiscard]] inline json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

[[nodiscard]] inline json num_array(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

[[nodiscard]] inline json to_json(const ModelOrder& o) { return json::array({o.r, o.s, o.rp, o.sp}); }

[[nodiscard]] inline json to_json(const ParamVector& p) {
  json j;
  j["phi_plus"] = num_array(p.phi_plus);
  j["phi_star"] = num_array(p.phi_star);
  j["theta_plus"] = num_array(p.theta_plus);
  j["theta_star"] = num_array(p.theta_star);
  return j;
}

[[nodiscard]] inline json to_json(const TestResult& t) { return json{{"stat", num(t.stat)}, {"p", num(t.p)}}; }

[[nodiscard]] inline json to_json(const std::vector<TestResult>& v) {
  json a = json::array();
  for (const auto& t : v) a.push_back(to_json(t));
  return a;
}

[[nodiscard]] inline json to_json(const DiagnosticsReport& d) {
  json j;
  j["m"] = d.m;
  j["jb"] = to_json(d.jb);
  j["lb"] = to_json(d.lb);
  j["j_abs"] = to_json(d.j_abs);
  j["c_abs"] = to_json(d.c_abs);
  j["j_sq"] = to_json(d.j_sq);
  j["c_sq"] = to_json(d.c_sq);
  return j;
}

[[nodiscard]] inline json to_json(const EstimationResult& r) {
  json j;
  j["order"] = to_json(r.order);
  j["label"] = r.order.to_string();
  j["feasible"] = r.feasible;
  if (!r.error.empty()) j["error"] = r.error;
  j["theta_hat"] = to_json(r.theta_hat);
  j["rt_value"] = num(r.rt_value);
  j["k2_star"] = num(r.k2_star);
  j["k3_star"] = num(r.k3_star);
  j["stderrs"] = num_array(r.stderrs);
  if (!r.stderr_note.empty()) j["stderr_note"] = r.stderr_note;
  j["heavy_tail_warning"] = r.heavy_tail_warning;
  j["prelim_theta"] = to_json(r.prelim_theta);
  json t;
  t["generations_run"] = r.optimizer_trace.generations_run;
  t["evaluations"] = r.optimizer_trace.evaluations;
  t["refine_iterations"] = r.optimizer_trace.refine_iterations;
  t["stalled"] = r.optimizer_trace.stalled;
  t["best_per_generation"] = num_array(r.optimizer_trace.best_per_generation);
  j["optimizer_trace"] = t;
  if (r.residual_diag) j["residual_diag"] = to_json(*r.residual_diag);
  return j;
}

[[nodiscard]] inline json to_json(const IdentificationReport& r) {
  json j;
  j["verdict"] = verdict_name(r.verdict);
  j["jarque_bera"] = {{"y", to_json(r.jarque_bera_y)}, {"pseudo_causal_residuals", to_json(r.jarque_bera_resid)}};
  json crit = json::array();
  for (const auto& c : r.criteria)
    crit.push_back({{"p", c.p}, {"q", c.q}, {"bic", num(c.bic)}, {"aic", num(c.aic)}, {"k2", num(c.k2)}});
  j["selected_pq"] = {{"p", r.p}, {"q", r.q}, {"criteria", crit}};
  j["pseudo_causal_theta"] = to_json(r.pseudo_causal_theta);
  json cands = json::array();
  for (const auto& c : r.candidates) cands.push_back(to_json(c));
  j["candidates"] = cands;
  j["winner"] = r.winner ? json(*r.winner) : json(nullptr);
  if (r.winner) j["winner_order"] = to_json(r.candidates[*r.winner].order);
  return j;
}

[[nodiscard]] inline json to_json(const ErrorDistribution& d) { return to_string(d); }

[[nodiscard]] inline json to_json(const McResult& r, bool with_replications = false) {
  json j;
  j["label"] = r.cell.label;
  j["dgp_order"] = to_json(r.cell.dgp_order);
  j["dgp_theta"] = to_json(r.cell.dgp_theta);
  j["dist"] = to_json(r.cell.dist);
  j["T"] = r.cell.T;
  j["M"] = r.cell.M;
  j["master_seed"] = r.cell.master_seed;
  j["identification_rate"] = num(r.identification_rate);
  j["identified"] = r.identified;
  j["misidentified"] = r.misidentified;
  j["failures"] = r.failures;
  j["mean"] = num_array(r.mean);
  j["std"] = num_array(r.stddev);
  json sel = json::array();
  for (const auto& [o, n] : r.selections) sel.push_back({{"order", to_json(o)}, {"count", n}});
  j["selections"] = sel;
  if (r.gaussian_flag) j["note"] = "Gaussian: identification not expected";
  if (with_replications) {
    json reps = json::array();
    for (const auto& o : r.replications)
      reps.push_back({{"failed", o.failed}, {"identified", o.identified}, {"selected", to_json(o.selected)},
                      {"theta_hat", num_array(o.theta_hat)}});
    j["replications"] = reps;
  }
  return j;
}

/// One row per cell: label, order, dist, T, M, rate, then mean/std per
/// coefficient in factor order.
[[nodiscard]] inline std::string mc_table_csv(const std::vector<McResult>& results) {
  std::size_t width = 0;
  for (const auto& r : results) width = std::max(width, r.cell.dgp_order.num_params());
  std::ostringstream os;
  os << "label,r,s,rp,sp,dist,T,M,identification_rate,identified,misidentified,failures";
  for (std::size_t k = 1; k <= width; ++k) os << ",true_" << k << ",mean_" << k << ",std_" << k;
  os << ",note\n";
  for (const auto& r : results) {
    const auto& c = r.cell;
    os << c.label << ',' << c.dgp_order.r << ',' << c.dgp_order.s << ',' << c.dgp_order.rp << ',' << c.dgp_order.sp
       << ',' << to_string(c.dist) << ',' << c.T << ',' << c.M << ',' << format_double(r.identification_rate) << ','
       << r.identified << ',' << r.misidentified << ',' << r.failures;
    const auto truth = c.dgp_theta.flat();
    for (std::size_t k = 0; k < width; ++k) {
      if (k < truth.size())
        os << ',' << format_double(truth[k]) << ',' << format_double(r.mean[k]) << ',' << format_double(r.stddev[k]);
      else
        os << ",,,";
    }
    os << ',' << (r.gaussian_flag ? "Gaussian: identification not expected" : "") << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Configuration

/// Flat key-value config; keys mirror the EstimatorConfig/GAConfig fields.
/// Unknown keys are rejected so typos do not pass silently.
inline void apply_config(EstimatorConfig& cfg, const json& j) {
  if (!j.is_object()) throw InputError(InputError::Kind::invalid, "config must be a JSON object");
  for (const auto& [key, v] : j.items()) {
    try {
      if (key == "m") cfg.m = v.get<double>();
      else if (key == "n") cfg.n = v.get<double>();
      else if (key == "grid_stride") cfg.grid_stride = v.get<std::size_t>();
      else if (key == "refine") cfg.refine = v.get<bool>();
      else if (key == "seed_from_prelim") cfg.seed_from_prelim = v.get<bool>();
      else if (key == "compute_stderr") cfg.compute_stderr = v.get<bool>();
      else if (key == "threads") cfg.threads = v.get<unsigned>();
      else if (key == "population") cfg.ga.population = v.get<std::size_t>();
      else if (key == "generations") cfg.ga.generations = v.get<std::size_t>();
      else if (key == "crossover_rate") cfg.ga.crossover_rate = v.get<double>();
      else if (key == "mutation_rate") cfg.ga.mutation_rate = v.get<double>();
      else if (key == "mutation_scale") cfg.ga.mutation_scale = v.get<double>();
      else if (key == "elite") cfg.ga.elite = v.get<std::size_t>();
      else if (key == "seed") cfg.ga.seed = v.get<std::uint64_t>();
      else if (key == "stall_generations") cfg.ga.stall_generations = v.get<std::size_t>();
      else if (key == "coefficient_box") cfg.ga.coefficient_box = v.get<double>();
      else throw InputError(InputError::Kind::invalid, "unknown config key '" + key + "'");
    } catch (const json::exception& e) {
      throw InputError(InputError::Kind::invalid, "config key '" + key + "': " + e.what());
    }
  }
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw InputError(InputError::Kind::invalid, e.what());
  }
}

[[nodiscard]] inline json config_to_json(const EstimatorConfig& c) {
  json j;
  j["m"] = c.m;
  j["n"] = c.n;
  j["grid_stride"] = c.grid_stride;
  j["refine"] = c.refine;
  j["seed_from_prelim"] = c.seed_from_prelim;
  j["compute_stderr"] = c.compute_stderr;
  j["population"] = c.ga.population;
  j["generations"] = c.ga.generations;
  j["crossover_rate"] = c.ga.crossover_rate;
  j["mutation_rate"] = c.ga.mutation_rate;
  j["mutation_scale"] = c.ga.mutation_scale;
  j["elite"] = c.ga.elite;
  j["seed"] = c.ga.seed;
  j["stall_generations"] = c.ga.stall_generations;
  j["coefficient_box"] = c.ga.coefficient_box;
  return j;
}

[[nodiscard]] inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError(InputError::Kind::unreadable, "cannot read '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InputError(InputError::Kind::invalid, "'" + path + "' is not valid JSON: " + e.what());
  }
}

[[nodiscard]] inline ModelOrder parse_order(const std::vector<std::size_t>& v) {
  if (v.size() != 4) throw InputError(InputError::Kind::invalid, "order needs four entries r,s,rp,sp");
  return {v[0], v[1], v[2], v[3]};
}

/// A cell: {"order":[r,s,rp,sp], "theta":[...], "dist":"alpha-stable:...",
/// "T":300, "M":200, "seed":1, "label":"..."}.
[[nodiscard]] inline McCell cell_from_json(const json& j) {
  try {
    McCell c;
    c.dgp_order = parse_order(j.at("order").get<std::vector<std::size_t>>());
    c.dgp_theta = ParamVector::from_flat(c.dgp_order, j.at("theta").get<std::vector<double>>());
    c.dist = parse_distribution(j.at("dist").get<std::string>());
    c.T = j.value("T", std::size_t{300});
    c.M = j.value("M", std::size_t{200});
    c.master_seed = j.value("seed", std::uint64_t{1});
    c.label = j.value("label", c.dgp_order.to_string());
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw InputError(InputError::Kind::invalid, std::string("bad cell: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw InputError(InputError::Kind::invalid, std::string("bad cell: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Manifest

struct RunManifest {
  std::string command;
  std::vector<std::string> inputs;
  std::string config_digest;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> artifacts;
  std::string tool_version;
  double wall_time = 0.0;
  json arguments = json::object();

  [[nodiscard]] json to_json() const {
    json j;
    j["command"] = command;
    j["inputs"] = inputs;
    j["config_digest"] = config_digest;
    j["seeds"] = seeds;
    j["artifacts"] = artifacts;
    j["tool_version"] = tool_version;
    j["arguments"] = arguments;
    j["wall_time"] = wall_time;
    return j;
  }
};

}  // namespace marma
