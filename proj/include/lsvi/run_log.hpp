#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace lsvi {

struct EpisodeRecord {
    long long episode = 0;  // 1-based
    double inst_regret = 0.0;
    double cum_regret = 0.0;
    bool switched_dataset = false;  // this episode triggered a replan
    bool switched_policy = false;   // the deployed action map actually changed
    long long zhat_mass = 0;        // sum over h of sub-sampled multiplicity mass
    double replan_ms = 0.0;         // deterministic replan-cost estimate, 0 when no replan
};

struct SamplerEvent {
    long long episode = 0;
    int h = 0;  // zero-based step
    double p = 1.0;
    bool accepted = false;
};

// Dyadic peeling histogram: bucket n counts visited (k,h) whose step-h
// suboptimality lies in [2^{n-1} gap_min, 2^n gap_min). Gap-free
// environments collapse to a single bucket.
struct GapHistogram {
    double gap_min = std::numeric_limits<double>::infinity();
    std::vector<long long> counts;
};

struct RunLog {
    std::string variant = "agent";  // agent | always-switch | uniform-random
    std::uint64_t seed = 0;
    std::uint64_t config_hash = 0;
    long long episodes_requested = 0;
    double beta_used = 0.0;
    double gap_min_used = std::numeric_limits<double>::infinity();

    std::vector<EpisodeRecord> episodes;
    std::vector<SamplerEvent> decisions;
    std::vector<double> bonus_on_path;  // per episode, sum over h at visited pairs
    GapHistogram histogram;

    long long n_switch_dataset = 0;
    long long n_switch_policy = 0;
    long long visited_pairs = 0;
    long long optimism_violations = 0;  // visited (k,h) with Q^k below Q* - 1e-9
    double final_regret = 0.0;

    double wall_ms = 0.0;  // measured; excluded from determinism contracts

    bool semantically_equal(const RunLog& other) const;
};

}  // namespace lsvi
