#include "doctest.h"

#include <cmath>
#include <random>

#include "lsvi/mdp.hpp"
#include "lsvi/oracle.hpp"

using namespace lsvi;

namespace {

EpisodicMdp one_state_unit_reward(int horizon) {
    std::vector<std::vector<double>> r(horizon, std::vector<double>{1.0});
    std::vector<std::vector<double>> p(horizon, std::vector<double>{1.0});
    return EpisodicMdp(1, 1, horizon, 0, std::move(r), std::move(p));
}

// two states, H = 1, two actions with rewards 0.3 / 0.7 from the start state
EpisodicMdp two_action_bandit() {
    std::vector<std::vector<double>> r{{0.3, 0.7, 0.0, 0.0}};
    std::vector<std::vector<double>> p{{0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0, 0.0}};
    return EpisodicMdp(2, 2, 1, 0, std::move(r), std::move(p));
}

EpisodicMdp random_mdp(int S, int A, int H, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::gamma_distribution<double> gamma(0.6, 1.0);
    std::vector<std::vector<double>> r(H, std::vector<double>(S * A));
    std::vector<std::vector<double>> p(H, std::vector<double>(S * A * S));
    for (int h = 0; h < H; ++h)
        for (int c = 0; c < S * A; ++c) {
            r[h][c] = unif(rng);
            double tot = 0.0;
            for (int t = 0; t < S; ++t) {
                p[h][c * S + t] = gamma(rng) + 1e-9;
                tot += p[h][c * S + t];
            }
            for (int t = 0; t < S; ++t) p[h][c * S + t] /= tot;
        }
    return EpisodicMdp(S, A, H, 0, std::move(r), std::move(p));
}

}  // namespace

TEST_CASE("construction rejects invalid inputs") {
    CHECK_THROWS_AS(one_state_unit_reward(0), std::invalid_argument);
    // bad row sum
    std::vector<std::vector<double>> r{{0.5}};
    std::vector<std::vector<double>> p{{0.9}};
    CHECK_THROWS_WITH_AS(EpisodicMdp(1, 1, 1, 0, r, p),
                         doctest::Contains("does not sum to 1"), std::invalid_argument);
    // reward out of range
    std::vector<std::vector<double>> r2{{1.5}};
    std::vector<std::vector<double>> p2{{1.0}};
    CHECK_THROWS_WITH_AS(EpisodicMdp(1, 1, 1, 0, r2, p2),
                         doctest::Contains("reward out of [0,1]"), std::invalid_argument);
}

TEST_CASE("exact_q_star on a single chain of unit rewards") {
    const auto mdp = one_state_unit_reward(3);
    const auto star = exact_q_star(mdp);
    CHECK(star.q[0][0] == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(star.v[0][0] == doctest::Approx(3.0).epsilon(1e-15));
}

TEST_CASE("exact_q_star single-step max") {
    const auto mdp = two_action_bandit();
    const auto star = exact_q_star(mdp);
    CHECK(star.v[0][0] == doctest::Approx(0.7));
    const auto g = gaps(mdp);
    CHECK(g[0][0] == doctest::Approx(0.4));
    CHECK(g[0][1] == doctest::Approx(0.0));
    CHECK(gap_min(mdp) == doctest::Approx(0.4));
}

TEST_CASE("exact_q_star matches brute-force policy enumeration") {
    std::mt19937_64 rng(42);
    for (int rep = 0; rep < 5; ++rep) {
        const auto mdp = random_mdp(4, 3, 2, rng);
        const auto values = brute_force_policy_values(mdp);
        const double best = *std::max_element(values.begin(), values.end());
        const auto star = exact_q_star(mdp);
        CHECK(std::abs(best - star.v[0][mdp.initial_state]) <= 1e-10);
    }
}

TEST_CASE("greedy policy achieves the optimal value") {
    std::mt19937_64 rng(7);
    const auto mdp = random_mdp(3, 3, 3, rng);
    const auto star = exact_q_star(mdp);
    const auto pi = greedy_policy(mdp, star);
    const auto val = exact_policy_value(mdp, pi);
    CHECK(std::abs(val.v[0][mdp.initial_state] - star.v[0][mdp.initial_state]) <= 1e-12);
}

TEST_CASE("uniform value equals the average over all deterministic policies") {
    std::mt19937_64 rng(3);
    const auto mdp = random_mdp(2, 2, 2, rng);
    const auto values = brute_force_policy_values(mdp);
    CHECK(values.size() == 16);
    double avg = 0.0;
    for (double v : values) avg += v;
    avg /= static_cast<double>(values.size());
    const auto uni = exact_uniform_value(mdp);
    CHECK(uni.v[0][mdp.initial_state] == doctest::Approx(avg).epsilon(1e-12));
}

TEST_CASE("one-action MDP: any policy matches the optimum") {
    std::mt19937_64 rng(5);
    const auto mdp = random_mdp(3, 1, 3, rng);
    const auto star = exact_q_star(mdp);
    const auto val = exact_policy_value(mdp, Policy::constant(mdp, 0));
    for (int h = 0; h < mdp.horizon; ++h)
        for (int s = 0; s < mdp.n_states; ++s)
            CHECK(std::abs(star.v[h][s] - val.v[h][s]) <= 1e-12);
}

TEST_CASE("gaps of a random MDP agree with the brute-force optimum") {
    std::mt19937_64 rng(11);
    const auto mdp = random_mdp(3, 2, 2, rng);
    const auto values = brute_force_policy_values(mdp);
    const double best = *std::max_element(values.begin(), values.end());
    const auto g = gaps(mdp);
    const auto star = exact_q_star(mdp);
    CHECK(std::abs(best - star.v[0][0]) <= 1e-10);
    double min_pos = std::numeric_limits<double>::infinity();
    for (const auto& row : g)
        for (double x : row) {
            CHECK(x >= -1e-12);
            if (x > 1e-12) min_pos = std::min(min_pos, x);
        }
    CHECK(gap_min(mdp) == doctest::Approx(min_pos));
}

TEST_CASE("gap-free MDP returns the infinity sentinel") {
    // identical rewards and kernels for both actions
    std::vector<std::vector<double>> r{{0.5, 0.5}};
    std::vector<std::vector<double>> p{{1.0, 1.0}};
    const EpisodicMdp mdp(1, 2, 1, 0, std::move(r), std::move(p));
    CHECK(std::isinf(gap_min(mdp)));
}

TEST_CASE("Bellman consistency and value bounds on random MDPs") {
    std::mt19937_64 rng(13);
    for (int rep = 0; rep < 10; ++rep) {
        const auto mdp = random_mdp(4, 2, 4, rng);
        const auto star = exact_q_star(mdp);
        for (int h = 0; h < mdp.horizon; ++h)
            for (int s = 0; s < mdp.n_states; ++s)
                for (int a = 0; a < mdp.n_actions; ++a) {
                    const double* p = mdp.row(h, s, a);
                    double backup = mdp.reward(h, s, a);
                    for (int t = 0; t < mdp.n_states; ++t) backup += p[t] * star.v[h + 1][t];
                    CHECK(std::abs(star.q[h][mdp.cell(s, a)] - backup) <= 1e-10);
                }
        // value bounds against every deterministic policy on a small instance
        const auto small = random_mdp(2, 2, 2, rng);
        const auto sstar = exact_q_star(small);
        const std::size_t n = deterministic_policy_count(small);
        for (std::size_t i = 0; i < n; ++i) {
            const auto val = exact_policy_value(small, policy_from_index(small, i));
            for (int h = 0; h < small.horizon; ++h)
                for (int s = 0; s < small.n_states; ++s) {
                    CHECK(val.v[h][s] >= -1e-12);
                    CHECK(val.v[h][s] <= sstar.v[h][s] + 1e-12);
                    CHECK(sstar.v[h][s] <= small.horizon - h + 1e-12);
                }
        }
    }
}

TEST_CASE("sample_episode determinism and kernel agreement") {
    std::mt19937_64 rng(21);
    const auto mdp = random_mdp(3, 2, 3, rng);
    const Policy pi = Policy::constant(mdp, 0);

    std::mt19937_64 r1(99), r2(99);
    const auto t1 = sample_episode(mdp, pi, r1);
    const auto t2 = sample_episode(mdp, pi, r2);
    REQUIRE(t1.size() == t2.size());
    for (std::size_t i = 0; i < t1.size(); ++i) {
        CHECK(t1[i].state == t2[i].state);
        CHECK(t1[i].next_state == t2[i].next_state);
        CHECK(t1[i].reward == doctest::Approx(mdp.reward(t1[i].h, t1[i].state, t1[i].action)));
    }

    // deterministic kernel: unique trajectory regardless of seed
    const auto chain = one_state_unit_reward(4);
    std::mt19937_64 ra(1), rb(123456);
    const auto ta = sample_episode(chain, Policy::constant(chain, 0), ra);
    const auto tb = sample_episode(chain, Policy::constant(chain, 0), rb);
    for (std::size_t i = 0; i < ta.size(); ++i) CHECK(ta[i].next_state == tb[i].next_state);

    // empirical next-state frequencies within 3-sigma binomial bounds
    const int n = 100000;
    std::vector<long long> counts(mdp.n_states, 0);
    std::mt19937_64 rmc(4242);
    for (int i = 0; i < n; ++i) {
        const auto t = sample_episode(mdp, pi, rmc);
        counts[t[0].next_state] += 1;
    }
    const double* p = mdp.row(0, mdp.initial_state, 0);
    for (int t = 0; t < mdp.n_states; ++t) {
        const double se = std::sqrt(p[t] * (1 - p[t]) / n);
        CHECK(std::abs(counts[t] / static_cast<double>(n) - p[t]) <= 3.0 * se + 1e-9);
    }
}

TEST_CASE("trajectory chaining invariant") {
    std::mt19937_64 rng(31);
    const auto mdp = random_mdp(4, 2, 5, rng);
    const auto traj = sample_episode(mdp, Policy::constant(mdp, 1), rng);
    REQUIRE(static_cast<int>(traj.size()) == mdp.horizon);
    CHECK(traj[0].state == mdp.initial_state);
    for (std::size_t i = 1; i < traj.size(); ++i) CHECK(traj[i].state == traj[i - 1].next_state);
}

TEST_CASE("gap decomposition identity over seeded episodes") {
    std::mt19937_64 rng(17);
    const auto mdp = random_mdp(3, 2, 3, rng);
    const auto star = exact_q_star(mdp);
    const auto g = gaps(mdp);

    // a fixed cycling policy sequence
    std::vector<Policy> policies;
    for (std::size_t i = 0; i < 4; ++i) policies.push_back(policy_from_index(mdp, 7 * i + 1));
    std::vector<double> expected;  // V* - V^pi per policy
    for (const auto& pi : policies) {
        const auto val = exact_policy_value(mdp, pi);
        expected.push_back(star.v[0][mdp.initial_state] - val.v[0][mdp.initial_state]);
    }

    const int episodes = 20000;
    std::mt19937_64 sim(1234);
    double sum_resid = 0.0, sum_resid_sq = 0.0;
    for (int k = 0; k < episodes; ++k) {
        const auto& pi = policies[k % policies.size()];
        const auto traj = sample_episode(mdp, pi, sim);
        double gap_sum = 0.0;
        for (const auto& step : traj) gap_sum += g[step.h][mdp.cell(step.state, step.action)];
        const double resid = gap_sum - expected[k % policies.size()];
        sum_resid += resid;
        sum_resid_sq += resid * resid;
    }
    const double mean = sum_resid / episodes;
    const double var = sum_resid_sq / episodes - mean * mean;
    const double se = std::sqrt(var / episodes);
    CHECK(std::abs(mean) <= 4.0 * se + 1e-12);
}

TEST_CASE("linear mixture invariants and feature identity") {
    // two deterministic base kernels over 3 states, mixed half and half
    const int S = 3, A = 2, H = 2, d = 2;
    const double scale = std::sqrt(static_cast<double>(d) * H);
    std::vector<std::vector<std::vector<double>>> base(
        H, std::vector<std::vector<double>>(d, std::vector<double>(S * A * S, 0.0)));
    for (int h = 0; h < H; ++h)
        for (int c = 0; c < S * A; ++c) {
            base[h][0][c * S + (c % S)] = 1.0 / scale;
            base[h][1][c * S + ((c + 1) % S)] = 1.0 / scale;
        }
    std::vector<double> theta{0.5 * scale, 0.5 * scale};
    std::vector<std::vector<double>> r(H, std::vector<double>(S * A, 0.25));
    const LinearMixtureMdp mix(d, scale, theta, base, 0, r);

    // mixed kernel is row-stochastic (constructor validated); feature identity:
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unif(0.0, static_cast<double>(H));
    for (int rep = 0; rep < 100; ++rep) {
        std::vector<double> v(S);
        for (double& x : v) x = unif(rng);
        for (int h = 0; h < H; ++h)
            for (int s = 0; s < S; ++s)
                for (int a = 0; a < A; ++a) {
                    const auto phi = mix.phi_v(h, s, a, v);
                    double lhs = 0.0;
                    for (int j = 0; j < d; ++j) lhs += phi[j] * mix.theta[j];
                    const double* p = mix.mdp.row(h, s, a);
                    double rhs = 0.0;
                    for (int t = 0; t < S; ++t) rhs += p[t] * v[t];
                    CHECK(std::abs(lhs - rhs) <= 1e-10);
                    double norm = 0.0;
                    for (double x : phi) norm += x * x;
                    CHECK(std::sqrt(norm) <= std::sqrt(static_cast<double>(H)) * (1 + 1e-9));
                }
    }
}

TEST_CASE("mdp json round trip and loader validation") {
    std::mt19937_64 rng(23);
    const auto mdp = random_mdp(3, 2, 2, rng);
    const auto text = mdp_to_json_text(mdp);
    const auto back = mdp_from_json_text(text);
    CHECK(back.n_states == mdp.n_states);
    CHECK(back.transitions == mdp.transitions);
    CHECK(back.rewards == mdp.rewards);

    CHECK_THROWS_WITH_AS(mdp_from_json_text("{\"n_states\": 1}"),
                         doctest::Contains("missing field"), std::invalid_argument);
    // violated stochasticity reported with indices
    std::string bad = R"({"n_states":1,"n_actions":1,"horizon":1,"initial_state":0,
        "rewards":[[[0.5]]],"transitions":[[[[0.9]]]]})";
    CHECK_THROWS_WITH_AS(mdp_from_json_text(bad), doctest::Contains("h=0 s=0 a=0"),
                         std::invalid_argument);
}
