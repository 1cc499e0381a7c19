#include "cli/commands.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "bagl/backtest.hpp"
#include "bagl/baselines.hpp"
#include "bagl/errors.hpp"
#include "bagl/gibbs.hpp"
#include "bagl/market_data.hpp"
#include "bagl/sim_eval.hpp"

namespace bagl::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw InvariantError("SHA-256 computation failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

namespace {

const std::set<std::string> kCommonKeys = {"seed", "jobs", "out"};
const std::set<std::string> kChainKeys = {"burn_in", "keep", "r", "s", "har_steps"};

std::set<std::string> keys(std::initializer_list<std::set<std::string>> groups, std::set<std::string> own) {
  for (const auto& g : groups) own.insert(g.begin(), g.end());
  return own;
}

ChainConfig chain_from(const RunConfig& cfg) {
  ChainConfig c;
  c.burn_in = cfg.get_long("burn_in", c.burn_in);
  c.keep = cfg.get_long("keep", c.keep);
  c.hyper.r = cfg.get_double("r", c.hyper.r);
  c.hyper.s = cfg.get_double("s", c.hyper.s);
  c.har_steps = static_cast<int>(cfg.get_long("har_steps", c.har_steps));
  c.seed = cfg.get_u64("seed", c.seed);
  c.validate();
  return c;
}

int jobs_from(const RunConfig& cfg) {
  const long jobs = cfg.get_long("jobs", 1);
  if (jobs < 1) throw ConfigError("jobs must be >= 1");
  return static_cast<int>(jobs);
}

json chain_metadata(const ChainConfig& c) {
  return {{"seed", c.seed}, {"burn_in", c.burn_in}, {"keep", c.keep}, {"r", c.hyper.r}, {"s", c.hyper.s},
          {"har_steps", c.har_steps}};
}

ReturnPanel load_returns(const std::string& path, std::ostream& err) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open returns file '" + path + "'");
  std::string first;
  std::getline(in, first);
  if (first.rfind("date,", 0) == 0) return read_panel_csv(path);
  auto parsed = parse_french_returns_file(path);
  for (const auto& w : parsed.warnings) err << "warning: " << w << '\n';
  return std::move(parsed.panel);
}

/// Output files held in memory until every computation has succeeded.
class Artifacts {
 public:
  void add(const std::string& name, std::string content) { files_[name] = std::move(content); }

  template <typename Writer>
  void add_stream(const std::string& name, Writer&& writer) {
    std::ostringstream out;
    writer(out);
    add(name, out.str());
  }

  void commit(const std::string& dir, const json& metadata) {
    add("metadata.json", metadata.dump(2) + "\n");
    std::string manifest;
    for (const auto& [name, content] : files_) manifest += sha256_hex(content) + "  " + name + "\n";
    fs::create_directories(dir);
    for (const auto& [name, content] : files_) write(dir, name, content);
    write(dir, "manifest.txt", manifest);
  }

 private:
  static void write(const std::string& dir, const std::string& name, const std::string& content) {
    std::ofstream out(fs::path(dir) / name, std::ios::binary);
    out << content;
    if (!out) throw DataError("cannot write '" + (fs::path(dir) / name).string() + "'");
  }

  std::map<std::string, std::string> files_;
};

json base_metadata(const std::string& command, const RunConfig& cfg) {
  json config = json::object();
  for (const auto& [k, v] : cfg.entries()) config[k] = v;
  return {{"command", command}, {"version", "0.1.0"}, {"config", config}};
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int guarded(const std::function<void()>& body, std::ostream& err) {
  try {
    body();
    return kOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const EstimatorError& e) {
    err << "estimator error: " << e.what() << '\n';
    return kEstimatorError;
  } catch (const InvariantError& e) {
    err << "invariant violated: " << e.what() << '\n';
    return kInvariantError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
}

EstimatorSpec estimator_from(const std::string& name, const RunConfig& cfg, const ChainConfig& chain) {
  EstimatorSpec spec;
  spec.kind = parse_estimator_kind(name);
  spec.chain = chain;
  spec.center = cfg.get_bool("center", false);
  if (spec.kind == EstimatorKind::external_file) {
    cfg.require_existing_path("external_path");
    spec.path = cfg.require("external_path");
  }
  spec.validate();
  return spec;
}

}  // namespace

int cmd_estimate(const RunConfig& cfg, std::ostream& err) {
  return guarded([&] {
    const auto t0 = std::chrono::steady_clock::now();
    cfg.check_known(keys({kCommonKeys, kChainKeys}, {"returns", "factors", "estimator", "external_path", "center",
                                                     "window_end", "window_length", "excess_returns"}),
                    "estimate");
    const std::string out_dir = cfg.require("out");
    cfg.require_existing_path("returns");
    if (cfg.has("factors")) cfg.require_existing_path("factors");
    const ChainConfig chain = chain_from(cfg);
    const EstimatorSpec spec = estimator_from(cfg.get("estimator", "bada_pd"), cfg, chain);
    const std::optional<YearMonth> window_end =
        cfg.has("window_end") ? std::optional(YearMonth::parse(cfg.get("window_end", ""))) : std::nullopt;
    const long window_length = cfg.get_long("window_length", 0);
    if (window_length < 0) throw ConfigError("window_length must be >= 0");
    ResidualizeOptions ropts;
    ropts.excess_returns = cfg.get_bool("excess_returns", true);

    ReturnPanel panel = load_returns(cfg.require("returns"), err);
    if (cfg.has("factors")) panel = residualize(panel, parse_french_factors_file(cfg.require("factors")), ropts);
    if (window_end || window_length > 0) {
      const YearMonth end = window_end.value_or(panel.dates().back());
      const Index length = window_length > 0 ? window_length : panel.row_of(end) + 1;
      panel = window(panel, end, length);
    }

    const SymmetricMatrix omega = estimate_precision(spec, panel, window_end, chain.seed);
    if (!is_positive_definite(omega)) throw EstimatorError("estimated precision is not positive definite");

    Artifacts art;
    art.add_stream("precision.csv", [&](std::ostream& o) { write_matrix_csv(o, omega); });
    json meta = base_metadata("estimate", cfg);
    meta["estimator"] = to_string(spec.kind);
    meta["n"] = panel.n();
    meta["p"] = panel.p();
    meta["window_first"] = panel.dates().front().compact();
    meta["window_last"] = panel.dates().back().compact();
    if (spec.kind == EstimatorKind::bada_pd) meta["chain"] = chain_metadata(chain);
    meta["seed"] = chain.seed;
    meta["runtime_seconds"] = seconds_since(t0);
    art.commit(out_dir, meta);
  }, err);
}

int cmd_backtest(const RunConfig& cfg, std::ostream& err) {
  return guarded([&] {
    const auto t0 = std::chrono::steady_clock::now();
    cfg.check_known(keys({kCommonKeys, kChainKeys},
                         {"returns", "factors", "scenario", "p", "n", "oos_start", "oos_end", "strategies",
                          "external_path", "realize", "residual_span", "rebalance_every", "annualize", "center",
                          "excess_returns", "decimals"}),
                    "backtest");
    const std::string out_dir = cfg.require("out");
    cfg.require_existing_path("returns");
    cfg.require_existing_path("factors");

    Scenario scenario = Scenario::preset(cfg.get("scenario", "a"));
    scenario.p = cfg.get_long("p", scenario.p);
    scenario.n = cfg.get_long("n", scenario.n);
    if (cfg.has("oos_start")) scenario.oos_start = YearMonth::parse(cfg.get("oos_start", ""));
    if (cfg.has("oos_end")) scenario.oos_end = YearMonth::parse(cfg.get("oos_end", ""));
    scenario.validate();

    BacktestOptions opts;
    opts.seed = cfg.get_u64("seed", 1);
    opts.jobs = jobs_from(cfg);
    opts.rebalance_every = static_cast<int>(cfg.get_long("rebalance_every", 3));
    opts.annualize = cfg.get_bool("annualize", true);
    opts.residualize.excess_returns = cfg.get_bool("excess_returns", true);
    const std::string realize = cfg.get("realize", "original");
    if (realize != "original" && realize != "residual") throw ConfigError("realize must be original or residual");
    opts.realize_on_residuals = realize == "residual";
    const std::string span = cfg.get("residual_span", "full_sample");
    if (span == "full_sample") opts.residual_span = ResidualSpan::full_sample;
    else if (span == "expanding") opts.residual_span = ResidualSpan::expanding;
    else throw ConfigError("residual_span must be full_sample or expanding");
    opts.validate();
    const long decimals = cfg.get_long("decimals", 3);
    if (decimals < 0 || decimals > 17) throw ConfigError("decimals must lie in [0, 17]");

    const ChainConfig chain = chain_from(cfg);
    std::vector<std::string> names = cfg.get_list("strategies");
    if (names.empty()) names = {"ew", "bada_pd", "ledoit_wolf", "rmt_clip"};
    std::vector<EstimatorSpec> specs;
    for (const auto& name : names) specs.push_back(estimator_from(name, cfg, chain));

    const ReturnPanel panel = load_returns(cfg.require("returns"), err);
    const FactorPanel factors = parse_french_factors_file(cfg.require("factors"));

    std::vector<BacktestReport> reports;
    for (const auto& spec : specs) reports.push_back(run_backtest(panel, factors, scenario, spec, opts));
    const auto rows = compare_strategies(reports);

    Artifacts art;
    art.add_stream("comparison.csv", [&](std::ostream& o) { write_comparison_csv(o, rows); });
    art.add_stream("comparison_rounded.csv",
                   [&](std::ostream& o) { write_comparison_csv(o, rows, static_cast<int>(decimals)); });
    art.add_stream("returns.csv", [&](std::ostream& o) { write_returns_csv(o, reports); });
    json strategies = json::array();
    for (const auto& r : reports) {
      if (r.available)
        art.add_stream("weights_" + r.strategy + ".csv", [&](std::ostream& o) { write_weights_csv(o, r.weights); });
      strategies.push_back({{"strategy", r.strategy},
                            {"available", r.available},
                            {"failure", r.failure},
                            {"rebalances", r.rebalance_dates.size()},
                            {"runtime_seconds", r.runtime_seconds}});
    }
    json meta = base_metadata("backtest", cfg);
    meta["scenario"] = {{"label", scenario.label},
                        {"p", scenario.p},
                        {"n", scenario.n},
                        {"oos_start", scenario.oos_start.compact()},
                        {"oos_end", scenario.oos_end.compact()}};
    meta["seed"] = opts.seed;
    meta["chain"] = chain_metadata(chain);
    meta["realize"] = realize;
    meta["residual_span"] = span;
    meta["strategies"] = strategies;
    meta["runtime_seconds"] = seconds_since(t0);
    art.commit(out_dir, meta);
    for (const auto& r : reports)
      if (!r.available) err << "note: strategy " << r.strategy << " is NA (" << r.failure << ")\n";
  }, err);
}

int cmd_simulate(const RunConfig& cfg, std::ostream& err) {
  return guarded([&] {
    const auto t0 = std::chrono::steady_clock::now();
    cfg.check_known(keys({kCommonKeys, kChainKeys}, {"p", "n", "chains", "threshold", "coverage", "eigen_mode",
                                                     "score_mode", "hpdi_mass", "trace_top_k"}),
                    "simulate");
    const std::string out_dir = cfg.require("out");
    SimulationConfig sim;
    sim.p = cfg.get_long("p", sim.p);
    sim.n = cfg.get_long("n", sim.n);
    sim.chain = chain_from(cfg);
    sim.chain.trace_top_k = static_cast<int>(cfg.get_long("trace_top_k", 0));
    sim.n_chains = static_cast<int>(cfg.get_long("chains", sim.n_chains));
    sim.jobs = jobs_from(cfg);
    sim.threshold = cfg.get_double("threshold", sim.threshold);
    sim.coverage = cfg.get_double("coverage", sim.coverage);
    sim.hpdi_mass = cfg.get_double("hpdi_mass", sim.hpdi_mass);
    sim.seed = cfg.get_u64("seed", sim.seed);
    const std::string eigen_mode = cfg.get("eigen_mode", "squared");
    if (eigen_mode == "squared") sim.eigen_mode = EigenContribution::squared;
    else if (eigen_mode == "linear") sim.eigen_mode = EigenContribution::linear;
    else throw ConfigError("eigen_mode must be squared or linear");
    const std::string score_mode = cfg.get("score_mode", "pairs");
    if (score_mode == "pairs") sim.score_mode = ScoreMode::off_diagonal_pairs;
    else if (score_mode == "elements") sim.score_mode = ScoreMode::all_elements;
    else throw ConfigError("score_mode must be pairs or elements");
    sim.validate();

    const SimulationReport rep = run_simulation(sim);

    Artifacts art;
    art.add_stream("structure.csv", [&](std::ostream& o) { write_structure_csv(o, rep.score); });
    art.add_stream("estimate.csv", [&](std::ostream& o) { write_matrix_csv(o, rep.estimate); });
    art.add_stream("truth.csv", [&](std::ostream& o) { write_matrix_csv(o, rep.truth); });
    art.add_stream("data.csv", [&](std::ostream& o) { write_panel_csv(o, rep.data); });
    if (!rep.convergence.rows.empty())
      art.add_stream("convergence.csv", [&](std::ostream& o) { write_convergence_csv(o, rep.convergence); });
    for (std::size_t c = 0; c < rep.chains.size(); ++c) {
      art.add_stream("traces_chain" + std::to_string(c + 1) + ".csv",
                     [&](std::ostream& o) { write_eigen_traces_csv(o, rep.chains[c].eigen_traces); });
    }
    json meta = base_metadata("simulate", cfg);
    meta["p"] = sim.p;
    meta["n"] = sim.n;
    meta["seed"] = sim.seed;
    meta["chains"] = sim.n_chains;
    meta["chain"] = chain_metadata(sim.chain);
    meta["trace_top_k"] = rep.chains.empty() ? 0 : rep.chains.front().config.trace_top_k;
    meta["runtime_seconds"] = seconds_since(t0);
    art.commit(out_dir, meta);
  }, err);
}

int cmd_diagnose(const RunConfig& cfg, std::ostream& err) {
  return guarded([&] {
    const auto t0 = std::chrono::steady_clock::now();
    cfg.check_known(keys({kCommonKeys}, {"traces", "mass"}), "diagnose");
    const std::string out_dir = cfg.require("out");
    const auto files = cfg.get_list("traces");
    if (files.size() < 2) throw ConfigError("diagnose needs at least two trace files in 'traces'");
    for (const auto& f : files)
      if (!fs::exists(f)) throw ConfigError("trace file '" + f + "' does not exist");
    const double mass = cfg.get_double("mass", 0.95);
    if (!(mass > 0.0 && mass < 1.0)) throw ConfigError("mass must lie in (0, 1)");

    std::vector<std::vector<std::vector<double>>> traces;
    for (const auto& f : files) {
      std::ifstream in(f);
      if (!in) throw DataError("cannot open trace file '" + f + "'");
      traces.push_back(read_eigen_traces_csv(in));
    }
    const ConvergenceReport report = convergence_report(traces, mass);

    Artifacts art;
    art.add_stream("convergence.csv", [&](std::ostream& o) { write_convergence_csv(o, report); });
    json meta = base_metadata("diagnose", cfg);
    meta["chains"] = report.n_chains;
    meta["k"] = report.k;
    meta["seed"] = cfg.get_u64("seed", 1);
    meta["runtime_seconds"] = seconds_since(t0);
    art.commit(out_dir, meta);
  }, err);
}

int run_command(const std::string& command, const RunConfig& cfg, std::ostream& err) {
  if (command == "estimate") return cmd_estimate(cfg, err);
  if (command == "backtest") return cmd_backtest(cfg, err);
  if (command == "simulate") return cmd_simulate(cfg, err);
  if (command == "diagnose") return cmd_diagnose(cfg, err);
  err << "unknown command '" << command << "'\n";
  return kUsage;
}

}  // namespace bagl::cli
