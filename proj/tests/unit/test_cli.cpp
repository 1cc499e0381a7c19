#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "bagl/errors.hpp"
#include "cli/commands.hpp"
#include "support/synthetic.hpp"

using namespace bagl;
using namespace bagl::cli;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct Files {
  std::string dir;
  std::string returns;
  std::string factors;
};

const Files& files() {
  static const Files f = [] {
    Files out;
    out.dir = testing::scratch_dir("cli_inputs");
    const auto market = testing::synthetic_market(21, 100, 240, YearMonth(2001, 1));
    out.returns = out.dir + "/returns.csv";
    out.factors = out.dir + "/factors.csv";
    testing::write_french_returns(out.returns, market.returns);
    testing::write_french_factors(out.factors, market.factors);
    return out;
  }();
  return f;
}

RunConfig estimate_config(const std::string& out) {
  RunConfig cfg = RunConfig::parse("# small chain\nburn_in = 20\nkeep = 20\nwindow_end = 201012\nwindow_length = 6\n");
  cfg.set("returns", files().returns);
  cfg.set("factors", files().factors);
  cfg.set("out", out);
  return cfg;
}

}  // namespace

TEST_CASE("config parsing") {
  const auto cfg = RunConfig::parse("a = 1\n# comment\n\nb=x, y ,,z\nflag = yes\n");
  CHECK(cfg.get_long("a", 0) == 1);
  CHECK(cfg.get_list("b") == std::vector<std::string>{"x", "y", "z"});
  CHECK(cfg.get_bool("flag", false));
  CHECK_THROWS_AS(RunConfig::parse("novalue\n"), ConfigError);
  CHECK_THROWS_AS((void)cfg.get_double("b", 0.0), ConfigError);

  RunConfig aliases;
  aliases.set_assignment("estimator.kind=ledoit_wolf");
  aliases.set_assignment("estimator.path=/tmp/x");
  CHECK(aliases.get("estimator", "") == "ledoit_wolf");
  CHECK(aliases.get("external_path", "") == "/tmp/x");
  CHECK_THROWS_AS(cfg.check_known({"a", "b"}, "estimate"), ConfigError);
}

TEST_CASE("sha256 of known strings") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("estimate writes precision, metadata and manifest") {
  const std::string out = testing::scratch_dir("cli_estimate") + "/run";
  std::ostringstream err;
  REQUIRE(run_command("estimate", estimate_config(out), err) == kOk);
  for (const char* name : {"precision.csv", "metadata.json", "manifest.txt"}) CHECK(fs::exists(fs::path(out) / name));

  const auto meta = nlohmann::json::parse(slurp(fs::path(out) / "metadata.json"));
  CHECK(meta["command"] == "estimate");
  CHECK(meta["seed"] == 1);
  CHECK(meta["n"] == 6);
  CHECK(meta["p"] == 100);
  CHECK(meta["window_last"] == "201012");

  std::istringstream manifest(slurp(fs::path(out) / "manifest.txt"));
  std::string line;
  int entries = 0;
  while (std::getline(manifest, line)) {
    const auto gap = line.find("  ");
    REQUIRE(gap == 64);
    CHECK(sha256_hex(slurp(fs::path(out) / line.substr(gap + 2))) == line.substr(0, gap));
    ++entries;
  }
  CHECK(entries == 2);
}

TEST_CASE("estimate replays byte for byte") {
  const std::string a = testing::scratch_dir("cli_replay_a");
  const std::string b = testing::scratch_dir("cli_replay_b");
  std::ostringstream err;
  REQUIRE(run_command("estimate", estimate_config(a + "/run"), err) == kOk);
  REQUIRE(run_command("estimate", estimate_config(b + "/run"), err) == kOk);
  CHECK(slurp(a + "/run/precision.csv") == slurp(b + "/run/precision.csv"));
  auto other = estimate_config(b + "/seed2");
  other.set("seed", "2");
  REQUIRE(run_command("estimate", other, err) == kOk);
  CHECK(slurp(a + "/run/precision.csv") != slurp(b + "/seed2/precision.csv"));
}

TEST_CASE("singular sample covariance is an estimator failure") {
  const std::string out = testing::scratch_dir("cli_singular") + "/run";
  auto cfg = estimate_config(out);
  cfg.set("estimator", "sample");
  cfg.set("window_length", "3");
  std::ostringstream err;
  CHECK(run_command("estimate", cfg, err) == kEstimatorError);
  CHECK(err.str().find("singular") != std::string::npos);
  CHECK_FALSE(fs::exists(out));
}

TEST_CASE("config errors fail before any output exists") {
  const std::string root = testing::scratch_dir("cli_config");
  std::ostringstream err;

  auto missing = estimate_config(root + "/a");
  missing.set("factors", root + "/nope.csv");
  CHECK(run_command("estimate", missing, err) == kConfigError);
  CHECK_FALSE(fs::exists(root + "/a"));

  auto unknown = estimate_config(root + "/b");
  unknown.set("bogus", "1");
  CHECK(run_command("estimate", unknown, err) == kConfigError);
  CHECK(err.str().find("bogus") != std::string::npos);

  auto bad_kind = estimate_config(root + "/c");
  bad_kind.set("estimator", "magic");
  CHECK(run_command("estimate", bad_kind, err) == kConfigError);

  auto bad_chain = estimate_config(root + "/d");
  bad_chain.set("r", "-1");
  CHECK(run_command("estimate", bad_chain, err) == kConfigError);

  RunConfig no_out;
  CHECK(run_command("simulate", no_out, err) == kConfigError);
  CHECK(run_command("frobnicate", no_out, err) == kUsage);
  for (const char* name : {"a", "b", "c", "d"}) CHECK_FALSE(fs::exists(root + "/" + name));
}

TEST_CASE("data errors map to their exit code") {
  const std::string root = testing::scratch_dir("cli_data");
  std::ofstream(root + "/broken.csv") << "nothing useful here\n";
  auto cfg = estimate_config(root + "/run");
  cfg.set("returns", root + "/broken.csv");
  std::ostringstream err;
  CHECK(run_command("estimate", cfg, err) == kDataError);
}

TEST_CASE("backtest writes the comparison tables") {
  const std::string out = testing::scratch_dir("cli_backtest") + "/run";
  RunConfig cfg = RunConfig::parse(
      "scenario = c\np = 8\noos_start = 201101\noos_end = 201112\nstrategies = ew, ledoit_wolf, sample\n"
      "burn_in = 10\nkeep = 10\n");
  cfg.set("returns", files().returns);
  cfg.set("factors", files().factors);
  cfg.set("out", out);
  std::ostringstream err;
  REQUIRE(run_command("backtest", cfg, err) == kOk);
  const std::string rounded = slurp(out + "/comparison_rounded.csv");
  CHECK(rounded.find("\new,") != std::string::npos);
  CHECK(rounded.find("\nledoit_wolf,") != std::string::npos);
  CHECK(fs::exists(out + "/weights_ew.csv"));
  CHECK(fs::exists(out + "/returns.csv"));
  const auto meta = nlohmann::json::parse(slurp(out + "/metadata.json"));
  CHECK(meta["scenario"]["n"] == 12);
  CHECK(meta["strategies"].size() == 3);
}

TEST_CASE("simulate then diagnose the stored traces") {
  const std::string root = testing::scratch_dir("cli_simulate");
  RunConfig cfg = RunConfig::parse("p = 6\nn = 3\nburn_in = 50\nkeep = 150\nseed = 9\n");
  cfg.set("out", root + "/sim");
  std::ostringstream err;
  REQUIRE(run_command("simulate", cfg, err) == kOk);
  for (const char* name : {"structure.csv", "convergence.csv", "estimate.csv", "truth.csv", "data.csv",
                           "traces_chain1.csv", "traces_chain2.csv"})
    CHECK(fs::exists(fs::path(root) / "sim" / name));

  RunConfig diag;
  diag.set("traces", root + "/sim/traces_chain1.csv," + root + "/sim/traces_chain2.csv");
  diag.set("out", root + "/diag");
  REQUIRE(run_command("diagnose", diag, err) == kOk);
  CHECK(slurp(root + "/diag/convergence.csv") == slurp(root + "/sim/convergence.csv"));
}
