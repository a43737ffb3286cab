#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>
#include <vector>

#include "pushrl/replay/buffer.hpp"

using namespace pushrl;

namespace {

// A marker transition whose reward encodes its identity.
Transition marked(float id, uint64_t policy_version = 0) {
    Transition t;
    t.obs = {id};
    t.next_obs = {id};
    t.reward = id;
    t.policy_version = policy_version;
    return t;
}

std::vector<Transition> marked_range(int from, int count) {
    std::vector<Transition> v;
    for (int i = 0; i < count; ++i) {
        v.push_back(marked(static_cast<float>(from + i)));
    }
    return v;
}

}  // namespace

TEST_CASE("staleness ratio examples") {
    CHECK(staleness(32, 2048) == 0.015625);
    CHECK(staleness(64, 64) == 1.0);    // every batch fully fresh
    CHECK(staleness(64, 128) == 0.5);   // half fresh, half lagged
    CHECK_THROWS_AS(staleness(0, 10), std::invalid_argument);
    CHECK_THROWS_AS(staleness(11, 10), std::invalid_argument);
}

TEST_CASE("ring keeps the last capacity entries") {
    ReplayBuffer buf(4, 1, 1);
    buf.push(marked_range(0, 6));
    REQUIRE(buf.size() == 4);
    CHECK(buf.inserted_total() == 6);
    for (size_t i = 0; i < 4; ++i) {
        CHECK(buf.at(i).reward == doctest::Approx(2.0f + i));
        CHECK(buf.insertion_index_at(i) == 2 + i);
    }
}

TEST_CASE("push up to capacity exactly") {
    ReplayBuffer buf(2048, 32, 32);
    buf.push(marked_range(0, 2048));
    CHECK(buf.size() == 2048);
    CHECK(buf.inserted_total() == 2048);
}

TEST_CASE("FIFO eviction retains the maximal suffix of insertion indices") {
    ReplayBuffer buf(8, 1, 1);
    Rng rng(3);
    uint64_t pushed = 0;
    for (int round = 0; round < 50; ++round) {
        const int n = 1 + static_cast<int>(rng.bounded(5));
        buf.push(marked_range(static_cast<int>(pushed), n));
        pushed += n;
        const size_t len = buf.size();
        for (size_t i = 0; i < len; ++i) {
            CHECK(buf.insertion_index_at(i) == pushed - len + i);
        }
    }
}

TEST_CASE("sampling respects the warmup gate") {
    ReplayBuffer buf(128, 32, 16);
    Rng rng(1);
    buf.push(marked_range(0, 31));
    CHECK_FALSE(buf.sample(16, rng).has_value());
    CHECK(buf.consumed_total() == 0);
    buf.push(marked_range(31, 1));
    auto batch = buf.sample(16, rng);
    REQUIRE(batch.has_value());
    CHECK(batch->size() == 16);
    CHECK(buf.consumed_total() == 16);
}

TEST_CASE("with-replacement sampling from a single entry") {
    ReplayBuffer buf(16, 1, 4);
    buf.push({marked(7.0f)});
    Rng rng(2);
    auto batch = buf.sample(4, rng);
    REQUIRE(batch.has_value());
    REQUIRE(batch->size() == 4);
    for (const auto& tr : *batch) CHECK(tr.reward == doctest::Approx(7.0f));
}

TEST_CASE("sampling is deterministic under a fixed rng seed") {
    ReplayBuffer buf(64, 1, 8);
    buf.push(marked_range(0, 40));
    Rng a(99), b(99);
    auto ba = buf.sample(8, a);
    auto bb = buf.sample(8, b);
    REQUIRE(ba.has_value());
    REQUIRE(bb.has_value());
    for (size_t i = 0; i < 8; ++i) {
        CHECK((*ba)[i].reward == (*bb)[i].reward);
    }
}

TEST_CASE("sampling is uniform over the contents") {
    ReplayBuffer buf(10, 1, 1);
    buf.push(marked_range(0, 10));
    Rng rng(5);
    std::vector<int> counts(10, 0);
    const int draws = 100000;
    auto batch = buf.sample(draws, rng);
    REQUIRE(batch.has_value());
    for (const auto& tr : *batch) {
        ++counts[static_cast<int>(tr.reward)];
    }
    for (int c : counts) {
        const double freq = static_cast<double>(c) / draws;
        CHECK(freq >= 0.09);
        CHECK(freq <= 0.11);
    }
}

TEST_CASE("sample never returns an evicted entry") {
    ReplayBuffer buf(8, 1, 4);
    buf.push(marked_range(0, 50));  // entries 42..49 retained
    Rng rng(11);
    for (int round = 0; round < 200; ++round) {
        auto batch = buf.sample(4, rng);
        REQUIRE(batch.has_value());
        for (const auto& tr : *batch) {
            CHECK(tr.reward >= 42.0f);
            CHECK(tr.reward <= 49.0f);
        }
    }
}

TEST_CASE("staleness report: fresh buffer, empty buffer, mixed lags") {
    ReplayBuffer buf(16, 1, 8);

    auto empty_report = buf.staleness_report(5);
    CHECK(empty_report.version_lag_histogram.empty());
    CHECK(empty_report.realized_mean_age == 0.0);
    CHECK(empty_report.configured_P == 0.5);

    std::vector<Transition> fresh;
    for (int i = 0; i < 6; ++i) fresh.push_back(marked(float(i), 9));
    buf.push(fresh);
    auto report = buf.staleness_report(9);
    REQUIRE(report.version_lag_histogram.size() == 1);
    CHECK(report.version_lag_histogram.at(0) == 6);
    CHECK(report.realized_mean_age == 0.0);

    std::vector<Transition> older;
    for (int i = 0; i < 6; ++i) older.push_back(marked(float(i), 8));
    buf.push(older);
    report = buf.staleness_report(9);
    CHECK(report.version_lag_histogram.at(0) == 6);
    CHECK(report.version_lag_histogram.at(1) == 6);
    CHECK(report.realized_mean_age == doctest::Approx(0.5));
}

TEST_CASE("constructor rejects impossible geometry") {
    CHECK_THROWS_AS(ReplayBuffer(0, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(ReplayBuffer(16, 1, 0), std::invalid_argument);
    CHECK_THROWS_AS(ReplayBuffer(16, 1, 17), std::invalid_argument);
}
