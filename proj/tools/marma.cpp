// marma command-line tool: simulate, spectrum, estimate, identify,
// residuals, diagnose, montecarlo.

#include <chrono>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <marma/io.hpp>
#include <marma/marma.hpp>

namespace fs = std::filesystem;
using namespace marma;

namespace {

enum Exit : int {
  kOk = 0,
  kBadInput = 2,
  kNotIdentified = 3,
  kGridGate = 4,
  kInternal = 5,
  kNonNumeric = 6,
  kTooShort = 7,
};

struct GridGateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InfeasibleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string input;
  std::size_t column = 0;
  std::string out;
  std::string order;
  std::string theta;
  std::string dist = "alpha-stable:1.2,0.25,1,0";
  std::size_t T = 300;
  std::uint64_t seed = 1;
  std::size_t M = 200;
  std::size_t pmax = 2, qmax = 2;
  std::size_t stride = 0;  // 0: not given
  unsigned threads = 0;    // 0: available cores
  std::string config;
  std::string cells;
  std::size_t lags = 5;
  bool bispectrum = false;
  bool replications = false;
};

std::vector<double> parse_list(const std::string& s, const char* what) {
  std::vector<double> out;
  if (s.empty()) return out;
  std::stringstream ss(s);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    double v = 0.0;
    if (!detail::parse_number(detail::trim(cell), v))
      throw InputError(InputError::Kind::invalid, std::string("bad ") + what + " entry '" + cell + "'");
    out.push_back(v);
  }
  return out;
}

ModelOrder order_flag(const std::string& s) {
  std::vector<std::size_t> v;
  for (double x : parse_list(s, "--order")) {
    if (x < 0 || x != std::floor(x) || x > 8) throw InputError(InputError::Kind::invalid, "--order needs small non-negative integers");
    v.push_back(static_cast<std::size_t>(x));
  }
  return parse_order(v);
}

ParamVector theta_flag(const ModelOrder& o, const std::string& s) {
  const auto v = parse_list(s, "--theta");
  if (v.size() != o.num_params())
    throw InputError(InputError::Kind::invalid, "--theta has " + std::to_string(v.size()) + " values, " +
                                                    o.to_string() + " needs " + std::to_string(o.num_params()));
  return ParamVector::from_flat(o, v);
}

unsigned thread_count(unsigned requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

EstimatorConfig make_config(const Options& o) {
  EstimatorConfig cfg;
  if (!o.config.empty()) apply_config(cfg, read_json_file(o.config));
  if (o.stride > 0) cfg.grid_stride = o.stride;
  cfg.threads = thread_count(o.threads);
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw InputError(InputError::Kind::invalid, e.what());
  }
  return cfg;
}

std::vector<double> load_series(const Options& o, std::size_t min_len) {
  if (o.input.empty()) throw InputError(InputError::Kind::invalid, "--input is required");
  auto y = read_series_csv(o.input, o.column);
  if (y.size() < min_len)
    throw InputError(InputError::Kind::too_short, "series has " + std::to_string(y.size()) + " values, need at least " +
                                                      std::to_string(min_len));
  return y;
}

fs::path out_dir(const Options& o) {
  if (o.out.empty()) throw InputError(InputError::Kind::invalid, "--out is required");
  fs::path p(o.out);
  fs::create_directories(p);
  return p;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json diagnostics_json(const DiagnosticsReport& d) {
  json j = to_json(d);
  json table = json::array();
  for (std::size_t k = 0; k < d.m; ++k)
    table.push_back({{"lag", k + 1}, {"ljung_box_p", num(d.lb[k].p)}, {"c_abs_p", num(d.c_abs[k].p)},
                     {"c_sq_p", num(d.c_sq[k].p)}});
  j["table"] = table;
  return j;
}

class Run {
 public:
  Run(std::string command, const Options& o) : t0_(std::chrono::steady_clock::now()) {
    m_.command = std::move(command);
    m_.tool_version = MARMA_VERSION_STRING;
    if (!o.input.empty()) m_.inputs.push_back(o.input);
    if (!o.config.empty()) m_.inputs.push_back(o.config);
    if (!o.cells.empty()) m_.inputs.push_back(o.cells);
  }
  void config(const EstimatorConfig& c) {
    const json j = config_to_json(c);
    m_.config_digest = fnv1a_hex(j.dump());
    m_.arguments["config"] = j;
    m_.arguments["threads"] = c.threads;
  }
  json& args() { return m_.arguments; }
  void seed(std::uint64_t s) { m_.seeds.push_back(s); }
  void text(const fs::path& p, const std::string& s) {
    write_text(p.string(), s);
    m_.artifacts.push_back(p.string());
  }
  void csv(const fs::path& p, const std::vector<std::string>& h, const std::vector<std::vector<double>>& c) {
    write_csv(p.string(), h, c);
    m_.artifacts.push_back(p.string());
  }
  void finish(const fs::path& manifest_path) {
    m_.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    write_text(manifest_path.string(), dump(m_.to_json()));
  }

 private:
  RunManifest m_;
  std::chrono::steady_clock::time_point t0_;
};

int cmd_simulate(const Options& o) {
  const auto order = order_flag(o.order);
  const auto theta = theta_flag(order, o.theta);
  ErrorDistribution dist;
  try {
    dist = parse_distribution(o.dist);
  } catch (const std::invalid_argument& e) {
    throw InputError(InputError::Kind::invalid, e.what());
  }
  if (o.out.empty()) throw InputError(InputError::Kind::invalid, "--out is required");
  const auto y = simulate_marma(order, theta, dist, o.T, o.seed);
  const fs::path out(o.out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  Run run("simulate", o);
  run.args() = {{"order", to_json(order)}, {"theta", to_json(theta)}, {"dist", to_string(dist)}, {"T", o.T}};
  run.seed(o.seed);
  run.csv(out, {"y"}, {y});
  run.finish(out.string() + ".manifest.json");
  return kOk;
}

int cmd_spectrum(const Options& o) {
  const auto y = load_series(o, kMinEstimationLength);
  const std::size_t T = y.size();
  const std::size_t stride = o.stride > 0 ? o.stride : 1;
  if (o.bispectrum && T > kMaxMaterializedT && o.stride == 0)
    throw GridGateError("bifrequency grid for T = " + std::to_string(T) + " exceeds " +
                        std::to_string(kMaxMaterializedT) + "; pass --stride");
  const auto dir = out_dir(o);
  const SpectralData s(y);
  Run run("spectrum", o);
  run.args() = {{"T", T}, {"bispectrum", o.bispectrum}, {"stride", stride}};
  std::vector<double> w(T), I2(T);
  for (std::size_t j = 0; j < T; ++j) {
    w[j] = s.grid().omega(j);
    I2[j] = s.periodogram()[j];
  }
  run.csv(dir / "periodogram.csv", {"omega", "I2"}, {w, I2});
  if (o.bispectrum) {
    std::vector<double> wj, wi, re, im;
    for (std::size_t j = 1; j < T; j += stride)
      for (std::size_t i = 1; i < T; i += stride) {
        const cplx b = s.biperiodogram(j, i);
        wj.push_back(s.grid().omega(j));
        wi.push_back(s.grid().omega(i));
        re.push_back(b.real());
        im.push_back(b.imag());
      }
    run.csv(dir / "biperiodogram.csv", {"omega_j", "omega_i", "re_I3", "im_I3"}, {wj, wi, re, im});
  }
  run.finish(dir / "manifest.json");
  return kOk;
}

int cmd_estimate(const Options& o) {
  const auto y = load_series(o, kMinEstimationLength);
  const auto order = order_flag(o.order);
  if (!order.estimable()) throw InputError(InputError::Kind::invalid, "--order has no coefficients");
  const auto cfg = make_config(o);
  const auto dir = out_dir(o);
  Run run("estimate", o);
  run.config(cfg);
  run.args()["order"] = to_json(order);
  run.seed(cfg.ga.seed);
  auto r = estimate_model(y, order, cfg);
  if (!r.feasible) throw InfeasibleError(r.error);
  const SpectralData s(y);
  const auto res = extract_residuals(s, r.order, r.theta_hat).values;
  const auto diag = diagnose(res, std::min(o.lags, res.size() / 4));
  r.residual_diag = diag;
  run.text(dir / "estimate.json", dump(to_json(r)));
  run.csv(dir / "residuals.csv", {"residual"}, {res});
  run.text(dir / "diagnostics.json", dump(diagnostics_json(diag)));
  run.finish(dir / "manifest.json");
  return kOk;
}

int cmd_identify(const Options& o) {
  const auto y = load_series(o, kMinEstimationLength);
  const auto cfg = make_config(o);
  const auto dir = out_dir(o);
  Run run("identify", o);
  run.config(cfg);
  run.args()["pmax"] = o.pmax;
  run.args()["qmax"] = o.qmax;
  run.seed(cfg.ga.seed);
  const auto rep = identify(y, o.pmax, o.qmax, cfg, o.lags);
  run.text(dir / "report.json", dump(to_json(rep)));
  if (rep.winner) {
    run.csv(dir / "residuals.csv", {"residual"}, {rep.winner_residuals});
    if (rep.winner_diag) run.text(dir / "diagnostics.json", dump(diagnostics_json(*rep.winner_diag)));
  }
  run.finish(dir / "manifest.json");
  if (rep.verdict == Verdict::failed) {
    std::cerr << "marma: identification failed: no feasible candidate\n";
    return kNotIdentified;
  }
  return kOk;
}

int cmd_residuals(const Options& o) {
  const auto y = load_series(o, kMinEstimationLength);
  const auto order = order_flag(o.order);
  const auto theta = theta_flag(order, o.theta);
  const auto dir = out_dir(o);
  Run run("residuals", o);
  run.args() = {{"order", to_json(order)}, {"theta", to_json(theta)}, {"lags", o.lags}};
  const auto res = extract_residuals(SpectralData(y), order, theta).values;
  run.csv(dir / "residuals.csv", {"residual"}, {res});
  run.text(dir / "diagnostics.json", dump(diagnostics_json(diagnose(res, o.lags))));
  run.finish(dir / "manifest.json");
  return kOk;
}

int cmd_diagnose(const Options& o) {
  const auto e = load_series(o, 4 * o.lags);
  const auto dir = out_dir(o);
  Run run("diagnose", o);
  run.args() = {{"lags", o.lags}};
  run.text(dir / "diagnostics.json", dump(diagnostics_json(diagnose(e, o.lags))));
  run.finish(dir / "manifest.json");
  return kOk;
}

int cmd_montecarlo(const Options& o) {
  const auto cfg = make_config(o);
  std::vector<McCell> cells;
  if (!o.cells.empty()) {
    const auto j = read_json_file(o.cells);
    if (!j.is_array()) throw InputError(InputError::Kind::invalid, "--cells must hold a JSON array");
    for (const auto& c : j) cells.push_back(cell_from_json(c));
  } else {
    McCell c;
    c.dgp_order = order_flag(o.order);
    c.dgp_theta = theta_flag(c.dgp_order, o.theta);
    try {
      c.dist = parse_distribution(o.dist);
      c.T = o.T;
      c.M = o.M;
      c.master_seed = o.seed;
      c.label = c.dgp_order.to_string();
      c.validate();
    } catch (const std::invalid_argument& e) {
      throw InputError(InputError::Kind::invalid, e.what());
    }
    cells.push_back(c);
  }
  const auto dir = out_dir(o);
  Run run("montecarlo", o);
  run.config(cfg);
  for (const auto& c : cells) run.seed(c.master_seed);
  const auto results = run_suite(cells, cfg);
  json j = json::array();
  for (const auto& r : results) j.push_back(to_json(r, o.replications));
  run.text(dir / "montecarlo.json", dump(j));
  run.text(dir / "montecarlo.csv", mc_table_csv(results));
  run.finish(dir / "manifest.json");
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mixed causal/noncausal ARMA: simulation, spectral estimation, identification"};
  app.set_version_flag("--version", std::string(MARMA_VERSION_STRING));
  app.require_subcommand(1);
  Options o;

  auto add_input = [&](CLI::App* c) {
    c->add_option("--input,-i", o.input, "CSV series (one numeric column, optional header)")->required();
    c->add_option("--column", o.column, "zero-based column index")->capture_default_str();
  };
  auto add_model = [&](CLI::App* c, bool with_theta) {
    c->add_option("--order", o.order, "r,s,rp,sp")->required();
    if (with_theta) c->add_option("--theta", o.theta, "coefficients in factor order phi+,phi*,theta+,theta*");
  };
  auto add_est = [&](CLI::App* c) {
    c->add_option("--config", o.config, "JSON estimator config");
    c->add_option("--stride", o.stride, "bifrequency grid stride");
    c->add_option("--threads", o.threads, "worker threads (default: available cores)");
  };

  auto* sim = app.add_subcommand("simulate", "simulate a MARMA series to CSV");
  add_model(sim, true);
  sim->add_option("--dist", o.dist, "alpha-stable:a,b,eta,delta | skew-t:nu,gamma | gaussian:sigma")->capture_default_str();
  sim->add_option("--T", o.T, "length")->capture_default_str();
  sim->add_option("--seed", o.seed)->capture_default_str();
  sim->add_option("--out,-o", o.out, "output CSV")->required();

  auto* spec = app.add_subcommand("spectrum", "periodogram and biperiodogram grids");
  add_input(spec);
  spec->add_flag("--bispectrum", o.bispectrum, "also write the bifrequency grid");
  spec->add_option("--stride", o.stride, "bifrequency grid stride");
  spec->add_option("--out,-o", o.out, "output directory")->required();

  auto* est = app.add_subcommand("estimate", "estimate one root configuration");
  add_input(est);
  add_model(est, false);
  add_est(est);
  est->add_option("--lags", o.lags)->capture_default_str();
  est->add_option("--out,-o", o.out, "output directory")->required();

  auto* idf = app.add_subcommand("identify", "full identification pipeline");
  add_input(idf);
  idf->add_option("--pmax", o.pmax)->capture_default_str();
  idf->add_option("--qmax", o.qmax)->capture_default_str();
  add_est(idf);
  idf->add_option("--lags", o.lags)->capture_default_str();
  idf->add_option("--out,-o", o.out, "output directory")->required();

  auto* res = app.add_subcommand("residuals", "residuals at given coefficients, with diagnostics");
  add_input(res);
  add_model(res, true);
  res->add_option("--lags", o.lags)->capture_default_str();
  res->add_option("--out,-o", o.out, "output directory")->required();

  auto* dia = app.add_subcommand("diagnose", "iid diagnostics of a residual series");
  add_input(dia);
  dia->add_option("--lags", o.lags)->capture_default_str();
  dia->add_option("--out,-o", o.out, "output directory")->required();

  auto* mc = app.add_subcommand("montecarlo", "identification rates over simulated replications");
  mc->add_option("--order", o.order, "r,s,rp,sp");
  mc->add_option("--theta", o.theta);
  mc->add_option("--dist", o.dist)->capture_default_str();
  mc->add_option("--T", o.T)->capture_default_str();
  mc->add_option("--M", o.M)->capture_default_str();
  mc->add_option("--seed", o.seed)->capture_default_str();
  mc->add_option("--cells", o.cells, "JSON array of cells instead of --order/--theta");
  mc->add_flag("--replications", o.replications, "include per-replication outcomes");
  add_est(mc);
  mc->add_option("--out,-o", o.out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kBadInput;
  }

  try {
    if (*sim) return cmd_simulate(o);
    if (*spec) return cmd_spectrum(o);
    if (*est) return cmd_estimate(o);
    if (*idf) return cmd_identify(o);
    if (*res) return cmd_residuals(o);
    if (*dia) return cmd_diagnose(o);
    if (*mc) return cmd_montecarlo(o);
  } catch (const InputError& e) {
    std::cerr << "marma: " << e.what() << '\n';
    switch (e.kind()) {
      case InputError::Kind::non_numeric: return kNonNumeric;
      case InputError::Kind::too_short: return kTooShort;
      default: return kBadInput;
    }
  } catch (const GridGateError& e) {
    std::cerr << "marma: " << e.what() << '\n';
    return kGridGate;
  } catch (const InfeasibleError& e) {
    std::cerr << "marma: " << e.what() << '\n';
    return kNotIdentified;
  } catch (const std::invalid_argument& e) {
    std::cerr << "marma: " << e.what() << '\n';
    return kBadInput;
  } catch (const std::exception& e) {
    std::cerr << "marma: internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kInternal;
}
