#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <string>
#include <vector>

#include "pushrl/config/config.hpp"
#include "pushrl/util/rng.hpp"

using namespace pushrl;
using config::ConfigError;
using config::RunConfig;

TEST_CASE("empty text yields the documented defaults") {
  RunConfig cfg = config::parse_config_text("");
  CHECK(cfg == RunConfig{});
  CHECK(cfg.distribution.mode == config::Mode::distributed);
  CHECK(cfg.distribution.n_actors == 1);
  CHECK(cfg.distribution.queue_depth == 1024);
  CHECK(cfg.distribution.publish_interval == 1);
  CHECK(cfg.training.gamma == 0.99);
  CHECK(cfg.training.learning_rate == 5e-4);
  CHECK(cfg.training.batch_size == 32);
  CHECK(cfg.training.buffer_capacity == 2048);
  CHECK(cfg.training.warmup_size == 32);
  CHECK(cfg.training.rollout_length == 16);
  CHECK(cfg.training.target_update_interval == 100);
  CHECK(cfg.model.hidden == 256);
  CHECK(cfg.environment.name == "cartpole");
}

TEST_CASE("minimal file naming only the environment is valid") {
  RunConfig cfg = config::parse_config_text("[environment]\nname = gridworld\n");
  CHECK(cfg.environment.name == "gridworld");
  RunConfig defaults;
  CHECK(cfg.distribution == defaults.distribution);
  CHECK(cfg.training == defaults.training);
  CHECK(cfg.model == defaults.model);
}

TEST_CASE("reference cartpole file carries the expected hyperparameters") {
  namespace fs = std::filesystem;
  fs::path path = fs::path(PUSHRL_CONFIG_DIR) / "cartpole_dqn.ini";
  RunConfig cfg = config::parse_config(path.string());
  CHECK(cfg.training.gamma == 0.99);
  CHECK(cfg.training.learning_rate == 5e-4);
  CHECK(cfg.training.epsilon_decay == 0.98);
  CHECK(cfg.training.epsilon_min == 0.01);
  CHECK(cfg.training.target_update_interval == 100);
  CHECK(cfg.training.batch_size == 32);
  CHECK(cfg.training.buffer_capacity == 2048);
  CHECK(cfg.training.warmup_size == 32);
  CHECK(cfg.training.rollout_length == 16);
  CHECK(cfg.training.target_return == 195.0);
  CHECK(cfg.model.hidden == 256);
  CHECK(cfg.environment.name == "cartpole");
  CHECK(cfg.distribution.n_actors == 2);
  CHECK(cfg.distribution.n_learners == 1);
}

TEST_CASE("every shipped config parses and validates") {
  namespace fs = std::filesystem;
  int seen = 0;
  for (const auto& entry : fs::directory_iterator(PUSHRL_CONFIG_DIR)) {
    if (entry.path().extension() != ".ini") {
      continue;
    }
    CAPTURE(entry.path().string());
    CHECK_NOTHROW(config::parse_config(entry.path().string()));
    ++seen;
  }
  CHECK(seen >= 5);
}

TEST_CASE("batch size larger than capacity is a validation error") {
  std::string text = "[training]\nbatch_size = 64\nbuffer_capacity = 32\n";
  CHECK_THROWS_WITH_AS(config::parse_config_text(text),
                       doctest::Contains("batch_size"), ConfigError);
}

TEST_CASE("unknown keys and sections are hard errors with line numbers") {
  SUBCASE("unknown key") {
    std::string text = "[distribution]\nn_actors = 2\nn_actor = 3\n";
    try {
      config::parse_config_text(text, "bad.ini");
      FAIL("expected ConfigError");
    } catch (const ConfigError& err) {
      std::string msg = err.what();
      CHECK(msg.find("bad.ini:3:") != std::string::npos);
      CHECK(msg.find("n_actor") != std::string::npos);
    }
  }
  SUBCASE("unknown section") {
    std::string text = "\n\n[distributions]\nn_actors = 2\n";
    try {
      config::parse_config_text(text, "bad.ini");
      FAIL("expected ConfigError");
    } catch (const ConfigError& err) {
      CHECK(std::string(err.what()).find("bad.ini:4:") != std::string::npos);
    }
  }
}

TEST_CASE("malformed lines report their line number") {
  SUBCASE("missing equals") {
    try {
      config::parse_config_text("[training]\ngamma 0.9\n", "x.ini");
      FAIL("expected ConfigError");
    } catch (const ConfigError& err) {
      CHECK(std::string(err.what()).find("x.ini:2:") != std::string::npos);
    }
  }
  SUBCASE("assignment before any section") {
    CHECK_THROWS_WITH_AS(config::parse_config_text("gamma = 0.9\n"),
                         doctest::Contains("before any [section]"), ConfigError);
  }
  SUBCASE("unclosed section header") {
    CHECK_THROWS_WITH_AS(config::parse_config_text("[training\ngamma = 0.9\n"),
                         doctest::Contains("section"), ConfigError);
  }
  SUBCASE("bad integer") {
    CHECK_THROWS_WITH_AS(config::parse_config_text("[training]\nbatch_size = many\n"),
                         doctest::Contains("invalid integer"), ConfigError);
  }
  SUBCASE("trailing junk after integer") {
    CHECK_THROWS_AS(config::parse_config_text("[training]\nbatch_size = 32x\n"),
                    ConfigError);
  }
  SUBCASE("bad number") {
    CHECK_THROWS_WITH_AS(config::parse_config_text("[training]\ngamma = fast\n"),
                         doctest::Contains("invalid number"), ConfigError);
  }
  SUBCASE("non-finite number") {
    CHECK_THROWS_AS(config::parse_config_text("[training]\ngamma = inf\n"), ConfigError);
  }
  SUBCASE("bad boolean") {
    CHECK_THROWS_WITH_AS(
        config::parse_config_text("[distribution]\nstaleness_control = maybe\n"),
        doctest::Contains("invalid boolean"), ConfigError);
  }
  SUBCASE("bad enum") {
    CHECK_THROWS_WITH_AS(config::parse_config_text("[distribution]\nmode = parallel\n"),
                         doctest::Contains("mode"), ConfigError);
    CHECK_THROWS_WITH_AS(config::parse_config_text("[distribution]\ntransport = udp\n"),
                         doctest::Contains("transport"), ConfigError);
  }
}

TEST_CASE("comments, blank lines, and whitespace are tolerated") {
  std::string text =
      "# leading comment\n"
      "\n"
      "  [training]   ; section comment\n"
      "   gamma =   0.9   # inline comment\n"
      "\tbatch_size\t=\t16\n"
      "batch_size = 8  ; last write wins\n";
  RunConfig cfg = config::parse_config_text(text);
  CHECK(cfg.training.gamma == 0.9);
  CHECK(cfg.training.batch_size == 8);
}

TEST_CASE("validation catches out-of-range fields by name") {
  auto expect_error = [](const std::string& text, const char* needle) {
    CHECK_THROWS_WITH_AS(config::parse_config_text(text), doctest::Contains(needle),
                         ConfigError);
  };
  expect_error("[distribution]\nn_actors = 0\n", "n_actors");
  expect_error("[distribution]\nn_learners = -1\n", "n_learners");
  expect_error("[distribution]\nqueue_depth = 0\n", "queue_depth");
  expect_error("[distribution]\npublish_interval = 0\n", "publish_interval");
  expect_error("[distribution]\ntcp_port_base = 70000\n", "tcp_port_base");
  expect_error("[distribution]\nmode = serial\nn_actors = 2\n", "serial");
  expect_error("[distribution]\ncontrol_window_s = 0\n", "control_window_s");
  expect_error("[training]\ngamma = 0\n", "gamma");
  expect_error("[training]\ngamma = 1.5\n", "gamma");
  expect_error("[training]\nlearning_rate = 0\n", "learning_rate");
  expect_error("[training]\nepsilon = 2\n", "epsilon");
  expect_error("[training]\nepsilon_min = 0.5\nepsilon = 0.3\n", "epsilon_min");
  expect_error("[training]\nepsilon_decay = 0\n", "epsilon_decay");
  expect_error("[training]\ntarget_update_interval = 0\n", "target_update_interval");
  expect_error("[training]\nwarmup_size = 4096\n", "warmup_size");
  expect_error("[training]\nrollout_length = 0\n", "rollout_length");
  expect_error("[training]\nfresh_per_batch = -1\n", "fresh_per_batch");
  expect_error("[training]\nfresh_per_batch = 33\n", "fresh_per_batch");
  expect_error("[training]\nstep_budget = -5\n", "step_budget");
  expect_error("[model]\nhidden = -1\n", "hidden");
  expect_error("[environment]\nname = pong\n", "environment.name");
  expect_error("[environment]\nmax_steps = -1\n", "max_steps");
  expect_error("[commbench]\nn_samples = 0\n", "n_samples");
  expect_error("[commbench]\nsample_time_s = -0.5\n", "sample_time_s");
  expect_error("[commbench]\nreceive_time_s = -0.001\n", "receive_time_s");
}

TEST_CASE("serialize round-trips the default config") {
  RunConfig cfg;
  std::string text = config::serialize(cfg);
  RunConfig back = config::parse_config_text(text);
  CHECK(back == cfg);
}

TEST_CASE("serialize round-trips randomized valid configs") {
  Rng rng(2024);
  for (int trial = 0; trial < 50; ++trial) {
    CAPTURE(trial);
    RunConfig cfg;
    cfg.distribution.mode = rng.bounded(2) == 0 ? config::Mode::serial
                                                : config::Mode::distributed;
    if (cfg.distribution.mode == config::Mode::distributed) {
      cfg.distribution.n_actors = 1 + static_cast<std::int64_t>(rng.bounded(16));
      cfg.distribution.n_learners = 1 + static_cast<std::int64_t>(rng.bounded(4));
      cfg.distribution.n_groups = 1 + static_cast<std::int64_t>(rng.bounded(3));
    }
    cfg.distribution.transport =
        rng.bounded(2) == 0 ? config::Transport::inproc : config::Transport::tcp;
    cfg.distribution.queue_depth = 1 + static_cast<std::int64_t>(rng.bounded(4096));
    cfg.distribution.publish_interval = 1 + static_cast<std::int64_t>(rng.bounded(64));
    cfg.distribution.actor_pace_steps_per_s = rng.uniform_f64() * 1e4;
    cfg.distribution.learner_max_updates_per_s = rng.uniform_f64() * 1e4;
    cfg.distribution.staleness_control = rng.bounded(2) == 0;
    cfg.distribution.control_window_s = 0.25 + rng.uniform_f64() * 4.0;
    cfg.training.gamma = 0.5 + rng.uniform_f64() * 0.5;
    cfg.training.learning_rate = std::pow(10.0, -1.0 - 4.0 * rng.uniform_f64());
    cfg.training.epsilon = rng.uniform_f64();
    cfg.training.epsilon_min = cfg.training.epsilon * rng.uniform_f64();
    cfg.training.epsilon_decay = 0.5 + rng.uniform_f64() * 0.5;
    cfg.training.buffer_capacity = 64 + static_cast<std::int64_t>(rng.bounded(8192));
    cfg.training.batch_size =
        1 + static_cast<std::int64_t>(rng.bounded(
                static_cast<std::uint64_t>(cfg.training.buffer_capacity)));
    cfg.training.warmup_size =
        1 + static_cast<std::int64_t>(rng.bounded(
                static_cast<std::uint64_t>(cfg.training.buffer_capacity)));
    cfg.training.target_return = (rng.uniform_f64() - 0.5) * 1e3;
    cfg.training.fresh_per_batch = static_cast<std::int64_t>(
        rng.bounded(static_cast<std::uint64_t>(cfg.training.batch_size) + 1));
    cfg.model.hidden = static_cast<std::int64_t>(rng.bounded(512));
    cfg.model.seed = static_cast<std::int64_t>(rng.bounded(1 << 30));
    cfg.environment.name = rng.bounded(2) == 0 ? "cartpole" : "gridworld";
    cfg.environment.seed = static_cast<std::int64_t>(rng.bounded(1 << 30));
    cfg.environment.max_steps = static_cast<std::int64_t>(rng.bounded(1000));
    cfg.commbench.message_bytes = static_cast<std::int64_t>(rng.bounded(1 << 20));
    cfg.commbench.sample_time_s = rng.uniform_f64() * 0.01;
    cfg.commbench.n_samples = 1 + static_cast<std::int64_t>(rng.bounded(100000));
    cfg.commbench.receive_time_s = rng.uniform_f64() * 0.002;

    REQUIRE_NOTHROW(config::validate(cfg));
    RunConfig back = config::parse_config_text(config::serialize(cfg));
    CHECK(back == cfg);
  }
}

TEST_CASE("missing config file reports the path") {
  CHECK_THROWS_WITH_AS(config::parse_config("/nonexistent/nowhere.ini"),
                       doctest::Contains("nowhere.ini"), ConfigError);
}

TEST_CASE("ini scanner records sections, keys, and line numbers") {
  auto entries = config::scan_ini("[a]\nx = 1\n\n[b]\ny = 2 # c\n", "s");
  REQUIRE(entries.size() == 2);
  CHECK(entries[0].section == "a");
  CHECK(entries[0].key == "x");
  CHECK(entries[0].value == "1");
  CHECK(entries[0].line == 2);
  CHECK(entries[1].section == "b");
  CHECK(entries[1].key == "y");
  CHECK(entries[1].value == "2");
  CHECK(entries[1].line == 5);
}
