#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "visa/errors.hpp"
#include "visa/replay.hpp"

using namespace visa;

namespace {

// A trajectory whose state at step t encodes (episode_tag, t) so tests can
// recover provenance from sampled rows.
Trajectory tagged_trajectory(int T, double tag, int state_dim = 2) {
    Trajectory tr;
    tr.states = Mat(T + 1, state_dim);
    tr.actions = Mat(T, 1);
    for (int t = 0; t <= T; ++t) {
        tr.states(t, 0) = tag;
        tr.states(t, 1) = t;
    }
    for (int t = 0; t < T; ++t) tr.actions(t, 0) = 0.0;
    tr.goal = std::vector<double>(state_dim, 0.0);
    return tr;
}

}  // namespace

TEST_CASE("ring buffer evicts oldest episodes first") {
    ReplayBuffer buf(3);
    for (int e = 0; e < 5; ++e) buf.append(tagged_trajectory(4, e));
    REQUIRE(buf.size() == 3);
    CHECK(buf.at(0).states(0, 0) == 2.0);
    CHECK(buf.at(1).states(0, 0) == 3.0);
    CHECK(buf.at(2).states(0, 0) == 4.0);
    CHECK(buf.episodes_appended() == 5);
    CHECK(buf.at(0).episode_id == 2);
}

TEST_CASE("append validates shapes") {
    ReplayBuffer buf(2);
    Trajectory bad = tagged_trajectory(4, 0);
    bad.states = Mat(4, 2);  // must be T+1 rows
    CHECK_THROWS_AS(buf.append(std::move(bad)), InputError);
}

TEST_CASE("visited sampler matches the truncated geometric pmf") {
    // gamma=0.9, T-t=50: P(d) proportional to 0.1 * 0.9^(d-1)
    const double gamma = 0.9;
    const int span = 50;
    Rng rng(123);
    std::vector<long> counts(span + 1, 0);
    const long n = 1000000;
    for (long i = 0; i < n; ++i) {
        int j = sample_visited_index(span, 0, gamma, rng);
        REQUIRE(j >= 1);
        REQUIRE(j <= span);
        ++counts[j];
    }
    double mass = 0.0;
    for (int d = 1; d <= span; ++d) mass += 0.1 * std::pow(0.9, d - 1);
    double l1 = 0.0;
    for (int d = 1; d <= span; ++d) {
        double want = 0.1 * std::pow(0.9, d - 1) / mass;
        l1 += std::abs(counts[d] / double(n) - want);
    }
    CHECK(l1 < 0.02);
}

TEST_CASE("visited sampler validates inputs") {
    Rng rng(1);
    CHECK_THROWS_AS(sample_visited_index(50, 50, 0.9, rng), InputError);  // t must be < T
    CHECK_THROWS_AS(sample_visited_index(50, -1, 0.9, rng), InputError);
    CHECK_THROWS_AS(sample_visited_index(50, 0, 1.0, rng), InputError);
}

TEST_CASE("strong_unbias weights increase with offset and match the formula") {
    double prev = -1.0;
    for (int d = 1; d <= 60; ++d) {
        double w = strong_unbias_weight(0.9, d);
        CHECK(w == doctest::Approx(1.0 - 0.1 * std::pow(0.9, d - 1)).epsilon(1e-12));
        CHECK(w >= prev);
        prev = w;
    }
}

TEST_CASE("strong_unbias offset pmf: gamma=0.5, two offsets -> P(d=2) = 0.6") {
    // weights for d in {1,2}: 0.5 and 0.75; normalized P(2) = 0.6
    ReplayBuffer buf(2);
    buf.append(tagged_trajectory(10, 0));
    buf.append(tagged_trajectory(10, 1));
    AugmentationSpec spec;
    spec.tag = AugTag::strong_unbias;
    spec.gamma_aug = 0.5;
    Rng rng(7);
    const int T = 10, j = 8;  // offsets 1..2 remain
    long hits2 = 0;
    const long n = 200000;
    for (long i = 0; i < n; ++i) {
        auto [traj, k] = sample_augmented_index(T, j, spec, rng, buf, 0);
        CHECK(traj == 0);
        REQUIRE(k >= 9);
        REQUIRE(k <= 10);
        if (k == j + 2) ++hits2;
    }
    CHECK(std::abs(hits2 / double(n) - 0.6) < 0.01);
}

TEST_CASE("strong_unbias empirical pmf over a long tail stays within L1 0.02") {
    ReplayBuffer buf(2);
    buf.append(tagged_trajectory(50, 0));
    buf.append(tagged_trajectory(50, 1));
    AugmentationSpec spec;
    spec.tag = AugTag::strong_unbias;
    spec.gamma_aug = 0.9;
    Rng rng(11);
    const int T = 50, j = 10;
    std::vector<long> counts(T + 1, 0);
    const long n = 1000000;
    for (long i = 0; i < n; ++i) {
        auto [traj, k] = sample_augmented_index(T, j, spec, rng, buf, 0);
        ++counts[k];
    }
    std::vector<double> w(T + 1, 0.0);
    double mass = 0.0;
    for (int k = j + 1; k <= T; ++k) {
        w[k] = 1.0 - 0.1 * std::pow(0.9, k - j - 1);
        mass += w[k];
    }
    double l1 = 0.0;
    for (int k = j + 1; k <= T; ++k) l1 += std::abs(counts[k] / double(n) - w[k] / mass);
    CHECK(l1 < 0.02);
}

TEST_CASE("future-only tags fall back to k = j at the episode end") {
    ReplayBuffer buf(2);
    buf.append(tagged_trajectory(10, 0));
    buf.append(tagged_trajectory(10, 1));
    Rng rng(3);
    for (AugTag tag : {AugTag::strong_unbias, AugTag::weak_unbias, AugTag::middle_unbias,
                       AugTag::only_augment}) {
        AugmentationSpec spec;
        spec.tag = tag;
        auto [traj, k] = sample_augmented_index(10, 10, spec, rng, buf, 0);
        CHECK(traj == 0);
        CHECK(k == 10);
    }
}

TEST_CASE("random_time is uniform over all other indices") {
    ReplayBuffer buf(2);
    buf.append(tagged_trajectory(50, 0));
    buf.append(tagged_trajectory(50, 1));
    AugmentationSpec spec;
    spec.tag = AugTag::random_time;
    Rng rng(13);
    const int T = 50, j = 20;
    std::vector<long> counts(T + 1, 0);
    const long n = 500000;
    for (long i = 0; i < n; ++i) {
        auto [traj, k] = sample_augmented_index(T, j, spec, rng, buf, 0);
        CHECK(traj == 0);
        REQUIRE(k != j);
        ++counts[k];
    }
    // each of the 50 indices should appear with frequency 1/50; 3 sigma band
    double want = 1.0 / 50.0;
    double sigma = std::sqrt(want * (1 - want) / n);
    for (int k = 0; k <= T; ++k) {
        if (k == j) continue;
        CHECK(std::abs(counts[k] / double(n) - want) < 3.5 * sigma);
    }
}

TEST_CASE("random_goal draws another trajectory uniformly") {
    ReplayBuffer buf(4);
    for (int e = 0; e < 4; ++e) buf.append(tagged_trajectory(10, e));
    AugmentationSpec spec;
    spec.tag = AugTag::random_goal;
    Rng rng(17);
    std::map<size_t, long> traj_counts;
    const long n = 90000;
    for (long i = 0; i < n; ++i) {
        auto [traj, k] = sample_augmented_index(10, 5, spec, rng, buf, 2);
        CHECK(traj != 2);  // never the source trajectory
        ++traj_counts[traj];
    }
    for (auto [traj, c] : traj_counts) {
        CHECK(std::abs(c / double(n) - 1.0 / 3.0) < 0.01);
    }
}

TEST_CASE("reachability score is |k - t| / T") {
    CHECK(reachability_score(10, 30, 50) == doctest::Approx(0.4));
    CHECK(reachability_score(30, 10, 50) == doctest::Approx(0.4));
    CHECK(reachability_score(5, 5, 50) == doctest::Approx(0.0));
}

TEST_CASE("sample_batch rows pair anchors with future states of the same episode") {
    ReplayBuffer buf(8);
    Rng rng(19);
    for (int e = 0; e < 8; ++e) buf.append(tagged_trajectory(12, e));
    AugmentationSpec spec;
    spec.tag = AugTag::strong_unbias;
    ContrastiveBatch batch = sample_batch(buf, 6, 0.9, spec, rng);
    REQUIRE(batch.size() == 6);
    REQUIRE(batch.has_aug);
    for (int i = 0; i < 6; ++i) {
        // visited comes from the same episode, strictly after the anchor
        CHECK(batch.visited(i, 0) == batch.anchor_state(i, 0));
        CHECK(batch.visited(i, 1) > batch.anchor_state(i, 1));
        CHECK(batch.j[i] == int(batch.visited(i, 1)));
        CHECK(batch.t[i] == int(batch.anchor_state(i, 1)));
        CHECK(batch.T[i] == 12);
        // augmented at or after the visited index for strong_unbias
        CHECK(batch.k[i] >= batch.j[i]);
        // goal column carries the behavior goal of the anchor episode
        CHECK(batch.goal.cols == 2);
    }
    // distinct trajectories when the buffer is big enough
    std::set<double> tags;
    for (int i = 0; i < 6; ++i) tags.insert(batch.anchor_state(i, 0));
    CHECK(tags.size() == 6);
}

TEST_CASE("sample_batch without augmentation leaves the augmented block empty") {
    ReplayBuffer buf(4);
    Rng rng(23);
    for (int e = 0; e < 4; ++e) buf.append(tagged_trajectory(8, e));
    AugmentationSpec spec;  // tag = none
    ContrastiveBatch batch = sample_batch(buf, 4, 0.9, spec, rng);
    CHECK_FALSE(batch.has_aug);
    CHECK(batch.augmented.rows == 0);
    CHECK(batch.mean_reach_augmented() == 0.0);
    CHECK(batch.mean_reach_visited() > 0.0);
}

TEST_CASE("sample_batch demands two episodes and batch size two") {
    ReplayBuffer buf(4);
    Rng rng(29);
    buf.append(tagged_trajectory(8, 0));
    AugmentationSpec spec;
    CHECK_THROWS_AS(sample_batch(buf, 4, 0.9, spec, rng), InputError);
    buf.append(tagged_trajectory(8, 1));
    CHECK_THROWS_AS(sample_batch(buf, 1, 0.9, spec, rng), InputError);
    CHECK_NOTHROW(sample_batch(buf, 4, 0.9, spec, rng));
}

TEST_CASE("cross-trajectory augmented rows score reachability 1") {
    ReplayBuffer buf(4);
    Rng rng(31);
    for (int e = 0; e < 4; ++e) buf.append(tagged_trajectory(8, e));
    AugmentationSpec spec;
    spec.tag = AugTag::random_goal;
    ContrastiveBatch batch = sample_batch(buf, 4, 0.9, spec, rng);
    CHECK(batch.mean_reach_augmented() == doctest::Approx(1.0));
}
