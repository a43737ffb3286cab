// Command-line front end: config-driven training runs, the communication
// benchmark, throughput profiling, and the core-allocation planner.
//
// Exit codes: 0 success (train: target reached), 1 usage or config error,
// 2 runtime failure (including divergence), 3 budget exhausted without
// reaching the target.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "pushrl/bench/commbench.hpp"
#include "pushrl/config/config.hpp"
#include "pushrl/runtime/runtime.hpp"
#include "pushrl/strategy/strategy.hpp"
#include "pushrl/telemetry/telemetry.hpp"
#include "pushrl/util/log.hpp"

namespace {

using pushrl::runtime::RunReport;
using pushrl::runtime::StopReason;

// PUSHRL_METRICS_PATH wins over the --metrics flag so a run can be redirected
// without editing scripts.
std::string resolve_metrics_path(const std::string& flag_value) {
  if (const char* env = std::getenv("PUSHRL_METRICS_PATH")) return env;
  return flag_value;
}

nlohmann::json report_to_json(const RunReport& rep) {
  nlohmann::json j;
  j["stop_reason"] = pushrl::runtime::stop_reason_name(rep.stop_reason);
  if (rep.final_time.has_value()) {
    j["final_time_s"] = *rep.final_time;
  } else {
    j["final_time_s"] = nullptr;
  }
  j["total_steps"] = rep.total_steps;
  j["total_updates"] = rep.total_updates;
  j["versions_published"] = rep.versions_published;
  j["episodes"] = rep.episodes.size();
  if (!rep.series.empty()) {
    j["wall_s"] = rep.series.back().t_s;
    j["window_mean"] = rep.series.back().window_mean;
    j["sample_rate"] = rep.series.back().sample_rate;
    j["train_rate"] = rep.series.back().train_rate;
  }
  j["staleness"] = {{"configured_P", rep.staleness.configured_P},
                    {"realized_mean_age", rep.staleness.realized_mean_age}};
  if (!rep.error.empty()) j["error"] = rep.error;
  return j;
}

int cmd_train(const std::string& config_path, const std::string& metrics_flag,
              const std::string& report_path, std::optional<std::int64_t> seed) {
  pushrl::config::RunConfig cfg = pushrl::config::parse_config(config_path);
  if (seed.has_value()) {
    cfg.model.seed = *seed;
    cfg.environment.seed = *seed;
  }
  const std::string metrics_path = resolve_metrics_path(metrics_flag);
  std::optional<pushrl::telemetry::MetricsLogger> logger;
  if (!metrics_path.empty()) logger.emplace(metrics_path);

  const RunReport rep =
      pushrl::runtime::run_training(cfg, logger ? &*logger : nullptr);

  const nlohmann::json j = report_to_json(rep);
  if (report_path.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::ofstream out(report_path);
    if (!out) {
      std::cerr << "cannot write report to " << report_path << "\n";
      return 2;
    }
    out << j.dump(2) << "\n";
    std::cout << "stop_reason=" << pushrl::runtime::stop_reason_name(rep.stop_reason)
              << " steps=" << rep.total_steps << " report=" << report_path
              << "\n";
  }

  switch (rep.stop_reason) {
    case StopReason::target_reached:
      return 0;
    case StopReason::budget_exhausted:
    case StopReason::time_limit:
      return 3;
    default:
      if (!rep.error.empty()) std::cerr << "run failed: " << rep.error << "\n";
      return 2;
  }
}

int cmd_commbench(const std::string& config_path) {
  pushrl::config::RunConfig cfg = pushrl::config::parse_config(config_path);
  const pushrl::bench::CommbenchResult r = pushrl::bench::run_commbench(cfg);
  std::cout << pushrl::bench::format_result(r);
  return 0;
}

int cmd_profile(const std::string& config_path, double duration_s,
                const std::string& out_path) {
  pushrl::config::RunConfig cfg = pushrl::config::parse_config(config_path);
  const pushrl::strategy::ThroughputProfile p =
      pushrl::strategy::measure_profile(cfg, duration_s);
  const std::string text = pushrl::strategy::serialize_profile(p);
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(out_path);
    if (!out) {
      std::cerr << "cannot write profile to " << out_path << "\n";
      return 2;
    }
    out << text;
    std::cout << "profile written to " << out_path << "\n";
  }
  return 0;
}

int cmd_plan(bool measure, const std::string& profile_path,
             std::int64_t cores, const std::string& base_config_path,
             double duration_s, const std::string& out_path) {
  pushrl::config::RunConfig base;
  if (!base_config_path.empty()) {
    base = pushrl::config::parse_config(base_config_path);
  }
  pushrl::strategy::ThroughputProfile profile;
  if (measure) {
    profile = pushrl::strategy::measure_profile(base, duration_s);
  } else {
    profile = pushrl::strategy::parse_profile(profile_path);
  }

  const pushrl::strategy::AllocationPlan plan =
      pushrl::strategy::plan(profile, cores, base.training);
  const std::string text = pushrl::strategy::plan_to_config_text(plan, base);
  std::ofstream out(out_path);
  if (!out) {
    std::cerr << "cannot write plan to " << out_path << "\n";
    return 2;
  }
  out << text;

  const bool actors_bind = plan.predicted_tr_a <= plan.predicted_tr_l;
  std::cout << "plan: n_learners=" << plan.n_learners
            << " n_actors=" << plan.n_actors << " (cores: " << plan.m_l
            << " learner / " << plan.m_a << " actor)\n"
            << "predicted production " << plan.predicted_tr_a
            << " samples/s, consumption " << plan.predicted_tr_l
            << " samples/s\n"
            << "predicted bottleneck: "
            << (actors_bind ? "actors (production)" : "learners (consumption)")
            << "\n"
            << "plan written to " << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pushrl: decentralized DQN training, communication benchmark, "
               "throughput profiler, and core-allocation planner"};
  app.require_subcommand(1);

  // train
  auto* train = app.add_subcommand("train", "Run training from a config file");
  std::string train_config;
  std::string metrics_path;
  std::string report_path;
  std::optional<std::int64_t> seed;
  train->add_option("config", train_config, "Run config file")->required();
  train->add_option("--metrics", metrics_path,
                    "JSON-lines metrics path (PUSHRL_METRICS_PATH overrides)");
  train->add_option("--report", report_path, "Write the run report here");
  train->add_option("--seed", seed, "Override model and environment seeds");

  // commbench
  auto* bench = app.add_subcommand(
      "commbench", "Measure collection time against the analytic model");
  std::string bench_config;
  bench->add_option("config", bench_config, "Benchmark config file")->required();

  // profile
  auto* profile = app.add_subcommand(
      "profile", "Measure per-stage throughputs for the planner");
  std::string profile_config;
  std::string profile_out;
  double profile_duration = 6.0;
  profile->add_option("config", profile_config, "Run config file")->required();
  profile->add_option("--out", profile_out, "Write the profile here (default stdout)");
  profile->add_option("--duration", profile_duration,
                      "Total measurement time, seconds");

  // plan
  auto* plan = app.add_subcommand(
      "plan", "Split cores between actors and learners");
  bool plan_measure = false;
  std::string plan_profile;
  std::int64_t plan_cores = 0;
  std::string plan_base;
  std::string plan_out = "plan.ini";
  double plan_duration = 6.0;
  auto* src = plan->add_option_group("profile source");
  src->add_flag("--measure", plan_measure, "Measure a fresh profile first");
  src->add_option("--profile", plan_profile, "Use a saved profile file");
  src->require_option(1);
  plan->add_option("--cores", plan_cores, "Total cores to split")->required();
  plan->add_option("--config", plan_base, "Base config the plan is grafted onto");
  plan->add_option("--out", plan_out, "Where to write the plan config");
  plan->add_option("--duration", plan_duration,
                   "Measurement time for --measure, seconds");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (train->parsed()) {
      return cmd_train(train_config, metrics_path, report_path, seed);
    }
    if (bench->parsed()) {
      return cmd_commbench(bench_config);
    }
    if (profile->parsed()) {
      return cmd_profile(profile_config, profile_duration, profile_out);
    }
    return cmd_plan(plan_measure, plan_profile, plan_cores, plan_base,
                    plan_duration, plan_out);
  } catch (const pushrl::config::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
}
