#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace lsvi {

// Finite-horizon MDP with deterministic known rewards in [0,1] and
// per-step transition kernels. Immutable after construction; construction
// validates row-stochasticity (1e-12), reward range and shape.
struct EpisodicMdp {
    int n_states = 0;
    int n_actions = 0;
    int horizon = 0;
    int initial_state = 0;
    // rewards[h][s * n_actions + a], transitions[h][(s * n_actions + a) * n_states + s']
    std::vector<std::vector<double>> rewards;
    std::vector<std::vector<double>> transitions;

    EpisodicMdp() = default;
    EpisodicMdp(int states, int actions, int H, int s1,
                std::vector<std::vector<double>> r,
                std::vector<std::vector<double>> p);

    int cell(int s, int a) const { return s * n_actions + a; }
    double reward(int h, int s, int a) const { return rewards[h][cell(s, a)]; }
    const double* row(int h, int s, int a) const {
        return transitions[h].data() + static_cast<std::size_t>(cell(s, a)) * n_states;
    }

    void validate() const;  // throws std::invalid_argument naming the first offending index
};

struct Policy {
    // action[h][s]
    std::vector<std::vector<int>> action;

    static Policy constant(const EpisodicMdp& mdp, int a);
    void validate(const EpisodicMdp& mdp) const;
    bool operator==(const Policy&) const = default;
};

struct TrajectoryStep {
    int h = 0;  // zero-based step
    int state = 0;
    int action = 0;
    double reward = 0.0;
    int next_state = 0;
};

using Trajectory = std::vector<TrajectoryStep>;

// Q[h][s*A+a] and V[h][s] for h = 0..H; row H is the zero boundary.
struct ValueTables {
    std::vector<std::vector<double>> q;
    std::vector<std::vector<double>> v;
};

ValueTables exact_q_star(const EpisodicMdp& mdp);
ValueTables exact_policy_value(const EpisodicMdp& mdp, const Policy& pi);

// Value of the uniformly-random behaviour: backward induction averaging
// actions. Equals the average of exact_policy_value over all deterministic
// policies (checked in tests by enumeration).
ValueTables exact_uniform_value(const EpisodicMdp& mdp);

Policy greedy_policy(const EpisodicMdp& mdp, const ValueTables& tables);

// gap[h][s*A+a] = V*_h(s) - Q*_h(s,a), always >= 0 up to float accumulation.
std::vector<std::vector<double>> gaps(const EpisodicMdp& mdp);

// Smallest strictly positive gap; +infinity when every gap is zero.
// Entries below 1e-12 count as zero (float ties).
double gap_min(const EpisodicMdp& mdp);
double gap_min(const std::vector<std::vector<double>>& gap_table);

Trajectory sample_episode(const EpisodicMdp& mdp, const Policy& pi, std::mt19937_64& rng);

// Linear mixture model: P(s'|s,a) = <phi(.|s,a), theta*> over known base
// kernels (signed measures allowed), with ||theta*||_2 <= c_theta and
// ||phi_V(s,a)||_2 <= sqrt(H) for every V bounded by H.
struct LinearMixtureMdp {
    int dim = 0;
    double c_theta = 0.0;
    std::vector<double> theta;  // size dim
    // base[h][j][(s*A+a)*S + s']
    std::vector<std::vector<std::vector<double>>> base;
    EpisodicMdp mdp;  // the mixed kernel, validated as a probability kernel

    LinearMixtureMdp() = default;
    LinearMixtureMdp(int d, double bound, std::vector<double> theta_star,
                     std::vector<std::vector<std::vector<double>>> base_kernels,
                     int s1, std::vector<std::vector<double>> r);

    // phi_V(s,a)_j = sum_{s'} base[h][j](s'|s,a) V(s')
    std::vector<double> phi_v(int h, int s, int a, const std::vector<double>& v) const;

    void validate() const;
};

// Structured-document loaders/writers. load throws std::invalid_argument
// describing the first violated invariant with indices.
EpisodicMdp mdp_from_json_text(const std::string& text);
std::string mdp_to_json_text(const EpisodicMdp& mdp);
LinearMixtureMdp mixture_from_json_text(const std::string& text);
std::string mixture_to_json_text(const LinearMixtureMdp& mix);

}  // namespace lsvi
