#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "pushrl/core/types.hpp"
#include "pushrl/envs/env.hpp"
#include "pushrl/util/rng.hpp"

using namespace pushrl;

namespace {

// Independent double-precision reimplementation of the cart-pole dynamics,
// used as the oracle the production environment is checked against.
struct CartPoleOracle {
    double x, x_dot, theta, theta_dot;

    void step(int action) {
        const double force = action == 1 ? 10.0 : -10.0;
        const double ct = std::cos(theta), st = std::sin(theta);
        const double temp = (force + 0.05 * theta_dot * theta_dot * st) / 1.1;
        const double theta_acc = (9.8 * st - ct * temp) /
                                 (0.5 * (4.0 / 3.0 - 0.1 * ct * ct / 1.1));
        const double x_acc = temp - 0.05 * theta_acc * ct / 1.1;
        x += 0.02 * x_dot;
        x_dot += 0.02 * x_acc;
        theta += 0.02 * theta_dot;
        theta_dot += 0.02 * theta_acc;
    }

    bool failed() const {
        return x < -2.4 || x > 2.4 || theta < -12.0 * 2.0 * M_PI / 360.0 ||
               theta > 12.0 * 2.0 * M_PI / 360.0;
    }
};

}  // namespace

TEST_CASE("cartpole spec and factory defaults") {
    auto env = make_env("cartpole", 1);
    CHECK(env->spec().name == "cartpole");
    CHECK(env->spec().obs_dim == 4);
    CHECK(env->spec().n_actions == 2);
    CHECK(env->spec().max_steps == 200);

    auto env2 = make_env("cartpole", 1, 500);
    CHECK(env2->spec().max_steps == 500);

    CHECK_THROWS_AS(make_env("mountaincar", 1), std::invalid_argument);
}

TEST_CASE("cartpole dynamics match an independent Euler oracle") {
    for (uint64_t seed : {3u, 17u, 255u}) {
        auto env = make_env("cartpole", seed, 500);
        auto obs = env->reset(seed);
        REQUIRE(obs.size() == 4);
        for (float v : obs) {
            CHECK(std::fabs(v) <= 0.05f);
        }
        CartPoleOracle oracle{obs[0], obs[1], obs[2], obs[3]};
        Rng action_rng(seed * 1000 + 7);
        for (int t = 0; t < 500; ++t) {
            const int action = static_cast<int>(action_rng.bounded(2));
            auto r = env->step(action);
            oracle.step(action);
            CHECK(r.obs[0] == doctest::Approx(oracle.x).epsilon(1e-6));
            CHECK(r.obs[1] == doctest::Approx(oracle.x_dot).epsilon(1e-6));
            CHECK(r.obs[2] == doctest::Approx(oracle.theta).epsilon(1e-6));
            CHECK(r.obs[3] == doctest::Approx(oracle.theta_dot).epsilon(1e-6));
            CHECK(r.reward == 1.0f);
            CHECK(r.done == (oracle.failed() || t + 1 == 500));
            if (r.done) {
                CHECK(r.truncated == (!oracle.failed() && t + 1 == 500));
                break;
            }
        }
    }
}

TEST_CASE("cartpole is reproducible from a seed and advances without one") {
    auto a = make_env("cartpole", 0);
    auto b = make_env("cartpole", 0);
    auto obs_a = a->reset(42);
    auto obs_b = b->reset(42);
    CHECK(obs_a == obs_b);
    for (int t = 0; t < 20; ++t) {
        auto ra = a->step(t % 2);
        auto rb = b->step(t % 2);
        CHECK(ra.obs == rb.obs);
        if (ra.done) break;
    }

    // reset() without a seed starts a different episode.
    auto c = make_env("cartpole", 5);
    auto first = c->reset(5);
    // run the episode out so reset() is legal bookkeeping-wise
    auto second = c->reset();
    CHECK(first != second);
}

TEST_CASE("cartpole rejects bad actions and stepping after the end") {
    auto env = make_env("cartpole", 9);
    env->reset(9);
    CHECK_THROWS_AS(env->step(2), std::invalid_argument);
    CHECK_THROWS_AS(env->step(-1), std::invalid_argument);

    // Drive to the end, then step once more.
    StepResult r;
    env->reset(9);
    for (int t = 0; t < 200; ++t) {
        r = env->step(1);  // constant push tips the pole quickly
        if (r.done) break;
    }
    REQUIRE(r.done);
    CHECK_THROWS_AS(env->step(0), std::logic_error);
}

TEST_CASE("gridworld shortest path collects the frozen return") {
    auto env = make_env("gridworld", 0);
    CHECK(env->spec().obs_dim == 16);
    CHECK(env->spec().n_actions == 4);
    CHECK(env->spec().max_steps == 100);

    auto obs = env->reset(0);
    REQUIRE(obs.size() == 16);
    CHECK(obs[0] == 1.0f);  // starts top-left

    // right, right, right, down, down, down
    const int plan[] = {3, 3, 3, 1, 1, 1};
    float ret = 0.0f;
    StepResult r;
    for (int a : plan) {
        r = env->step(a);
        ret += r.reward;
    }
    CHECK(r.done);
    CHECK_FALSE(r.truncated);
    CHECK(r.obs[15] == 1.0f);
    CHECK(ret == doctest::Approx(0.95f));  // 5 * -0.01 + 1.0
}

TEST_CASE("gridworld walls hold the agent in place") {
    auto env = make_env("gridworld", 0);
    env->reset(0);
    auto r = env->step(0);  // up from the top row
    CHECK(r.obs[0] == 1.0f);
    CHECK(r.reward == doctest::Approx(-0.01f));
    r = env->step(2);  // left from the left column
    CHECK(r.obs[0] == 1.0f);
}

TEST_CASE("gridworld truncates at the step cap without marking terminal") {
    auto env = make_env("gridworld", 0, 25);
    env->reset(0);
    StepResult r;
    for (int t = 0; t < 25; ++t) r = env->step(0);  // bounce forever
    CHECK(r.done);
    CHECK(r.truncated);
    CHECK_THROWS_AS(env->step(0), std::logic_error);
}

TEST_CASE("generated transitions validate against the env spec") {
    for (const char* name : {"cartpole", "gridworld"}) {
        auto env = make_env(name, 11);
        auto obs = env->reset(11);
        Rng rng(3);
        for (int t = 0; t < 50; ++t) {
            const int action =
                static_cast<int>(rng.bounded(env->spec().n_actions));
            auto r = env->step(action);
            Transition tr;
            tr.obs = obs;
            tr.action = action;
            tr.reward = r.reward;
            tr.next_obs = r.obs;
            tr.done = r.done && !r.truncated;
            tr.truncated = r.truncated;
            CHECK(validate_transition(tr, env->spec()).empty());
            obs = r.done ? env->reset() : r.obs;
        }
    }
}
