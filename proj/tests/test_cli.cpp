#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "pushrl/config/config.hpp"

namespace fs = std::filesystem;

namespace {

struct CliResult {
  int exit_code = -1;
  std::string output;  // stdout + stderr interleaved
};

// Runs the installed binary with the given arguments (and optional
// environment prefix), capturing combined output.
CliResult run_cli(const std::string& args, const std::string& env_prefix = "") {
  const std::string cmd =
      env_prefix + " " + std::string(PUSHRL_CLI_PATH) + " " + args + " 2>&1";
  CliResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  while (std::size_t got = std::fread(buf, 1, sizeof(buf), pipe)) {
    r.output.append(buf, got);
  }
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path temp_file(const std::string& name) {
  return fs::temp_directory_path() / ("pushrl_cli_" + name);
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  REQUIRE(out.good());
  out << text;
}

std::string config_path(const std::string& name) {
  return std::string(PUSHRL_CONFIG_DIR) + "/" + name;
}

}  // namespace

TEST_CASE("help exits zero, missing subcommand exits one") {
  CHECK(run_cli("--help").exit_code == 0);
  CHECK(run_cli("").exit_code == 1);
  CHECK(run_cli("frobnicate").exit_code == 1);
  CHECK(run_cli("train").exit_code == 1);  // missing config argument
}

TEST_CASE("invalid configs exit one before any worker starts") {
  auto missing = run_cli("train /nonexistent/nope.ini");
  CHECK(missing.exit_code == 1);

  const fs::path bad = temp_file("bad.ini");
  write_file(bad, "[training]\nbatch_size = 64\nbuffer_capacity = 32\n");
  auto invalid = run_cli("train " + bad.string());
  CHECK(invalid.exit_code == 1);
  CHECK(invalid.output.find("batch_size") != std::string::npos);

  const fs::path junk = temp_file("junk.ini");
  write_file(junk, "[distribution]\nn_actors = broken\n");
  auto parse = run_cli("train " + junk.string());
  CHECK(parse.exit_code == 1);
  CHECK(parse.output.find("n_actors") != std::string::npos);
}

TEST_CASE("gridworld smoke run reaches its target and writes the report") {
  const fs::path report = temp_file("report.json");
  fs::remove(report);
  auto r = run_cli("train " + config_path("gridworld_smoke.ini") +
                   " --report " + report.string());
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("target_reached") != std::string::npos);

  std::ifstream in(report);
  REQUIRE(in.good());
  nlohmann::json j;
  in >> j;
  CHECK(j["stop_reason"] == "target_reached");
  CHECK(j["total_steps"].get<std::int64_t>() > 0);
  CHECK(j["final_time_s"].is_number());
  CHECK(j["window_mean"].get<double>() >= 0.9);
}

TEST_CASE("metrics land at the env-var path, overriding the flag") {
  const fs::path flag_path = temp_file("metrics_flag.jsonl");
  const fs::path env_path = temp_file("metrics_env.jsonl");
  fs::remove(flag_path);
  fs::remove(env_path);
  auto r = run_cli("train " + config_path("gridworld_smoke.ini") +
                       " --metrics " + flag_path.string(),
                   "PUSHRL_METRICS_PATH=" + env_path.string());
  CHECK(r.exit_code == 0);
  CHECK(fs::exists(env_path));
  CHECK_FALSE(fs::exists(flag_path));

  // The metrics file is JSON lines with monotone timestamps.
  std::ifstream in(env_path);
  std::string line;
  double last_t = -1.0;
  int rows = 0;
  while (std::getline(in, line)) {
    const nlohmann::json row = nlohmann::json::parse(line);
    const double t = row["t"].get<double>();
    CHECK(t > last_t);
    last_t = t;
    ++rows;
  }
  CHECK(rows > 0);
}

TEST_CASE("budget exhaustion exits three") {
  const fs::path cfg = temp_file("budget.ini");
  write_file(cfg,
             "[distribution]\nmode = serial\n"
             "[training]\nstep_budget = 2000\ntarget_return = 1000\n"
             "buffer_capacity = 512\nwarmup_size = 32\n"
             "[model]\nhidden = 0\n"
             "[environment]\nname = gridworld\n");
  auto r = run_cli("train " + cfg.string());
  CHECK(r.exit_code == 3);
  CHECK(r.output.find("budget_exhausted") != std::string::npos);
}

TEST_CASE("divergence exits two") {
  const fs::path cfg = temp_file("diverge.ini");
  // An absurd learning rate sends the first optimizer step to ~1e18, so the
  // next forward pass through the hidden layer overflows f32 and the loss
  // goes non-finite.
  write_file(cfg,
             "[distribution]\nmode = serial\n"
             "[training]\nlearning_rate = 1e18\nstep_budget = 5000\n"
             "target_return = 1000\nbuffer_capacity = 512\nwarmup_size = 32\n"
             "[model]\nhidden = 256\n"
             "[environment]\nname = gridworld\n");
  auto r = run_cli("train " + cfg.string());
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("diverged") != std::string::npos);
}

TEST_CASE("serial train with a fixed seed is bit-identical across runs") {
  const fs::path cfg = temp_file("seeded.ini");
  write_file(cfg,
             "[distribution]\nmode = serial\n"
             "[training]\nstep_budget = 3000\ntarget_return = 1000\n"
             "buffer_capacity = 512\nwarmup_size = 32\n"
             "[model]\nhidden = 0\n"
             "[environment]\nname = gridworld\n");
  const fs::path m1 = temp_file("seeded_a.jsonl");
  const fs::path m2 = temp_file("seeded_b.jsonl");
  auto a = run_cli("train " + cfg.string() + " --seed 11",
                   "PUSHRL_METRICS_PATH=" + m1.string());
  auto b = run_cli("train " + cfg.string() + " --seed 11",
                   "PUSHRL_METRICS_PATH=" + m2.string());
  CHECK(a.exit_code == 3);
  CHECK(b.exit_code == 3);

  // Compare the episode rows (returns, steps, versions); timing fields vary.
  auto episode_rows = [](const fs::path& p) {
    std::ifstream in(p);
    std::string line;
    std::ostringstream key;
    while (std::getline(in, line)) {
      const nlohmann::json row = nlohmann::json::parse(line);
      if (row["type"] == "episode") {
        key << row["episode"] << ":" << row["return"] << ":" << row["steps"]
            << ":" << row["policy_version"] << "\n";
      }
    }
    return key.str();
  };
  const std::string rows_a = episode_rows(m1);
  CHECK_FALSE(rows_a.empty());
  CHECK(rows_a == episode_rows(m2));
}

TEST_CASE("commbench command reports measurement beside prediction") {
  const fs::path cfg = temp_file("bench.ini");
  write_file(cfg,
             "[distribution]\nn_actors = 2\n"
             "[commbench]\nmessage_bytes = 2048\nsample_time_s = 0.001\n"
             "n_samples = 200\n");
  auto r = run_cli("commbench " + cfg.string());
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("collect time") != std::string::npos);
  CHECK(r.output.find("predicted") != std::string::npos);
  CHECK(r.output.find("n_actors=2") != std::string::npos);
}

TEST_CASE("profile and plan round-trip through files") {
  const fs::path prof = temp_file("prof.ini");
  const fs::path plan = temp_file("plan.ini");
  fs::remove(prof);
  fs::remove(plan);

  auto p = run_cli("profile " + config_path("gridworld_smoke.ini") +
                   " --duration 2 --out " + prof.string());
  CHECK(p.exit_code == 0);
  REQUIRE(fs::exists(prof));

  auto pl = run_cli("plan --profile " + prof.string() + " --cores 4 --config " +
                    config_path("gridworld_smoke.ini") + " --out " +
                    plan.string());
  CHECK(pl.exit_code == 0);
  CHECK(pl.output.find("bottleneck") != std::string::npos);
  REQUIRE(fs::exists(plan));

  // The plan is a loadable run config with the planned topology.
  const pushrl::config::RunConfig parsed =
      pushrl::config::parse_config(plan.string());
  CHECK(parsed.distribution.cores == 4);
  CHECK(parsed.distribution.n_actors >= 1);
  CHECK(parsed.distribution.n_learners >= 1);

  // Planning with an infeasible core count is a config error.
  auto bad = run_cli("plan --profile " + prof.string() + " --cores 1 --out " +
                     temp_file("plan_bad.ini").string());
  CHECK(bad.exit_code == 1);

  // Too short a measurement window is a runtime failure.
  auto short_run = run_cli("profile " + config_path("gridworld_smoke.ini") +
                           " --duration 0 --out " + temp_file("p0.ini").string());
  CHECK(short_run.exit_code == 2);
}
