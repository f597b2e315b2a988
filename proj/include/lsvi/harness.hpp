#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lsvi/agent.hpp"
#include "lsvi/run_log.hpp"

namespace lsvi {

struct ConfigError : std::invalid_argument {
    std::string field;
    ConfigError(std::string field_path, const std::string& msg)
        : std::invalid_argument(field_path + ": " + msg), field(std::move(field_path)) {}
};

// --- environment registry ---------------------------------------------------

// Deterministic chain: action 0 advances and earns `gap`, the terminal
// forward action earns 1, action 1 stays and earns nothing. Every nonzero
// gap is at least `gap` and the step-H cells meet it exactly.
Environment make_chain(int n, int horizon, double gap);

// Classic stochastic-drift chain: left retreats deterministically with a
// small reward at the leftmost state, right drifts with the current.
Environment make_riverswim(int n, int horizon);

// Rejection-samples seeded random MDPs until gap_min >= target.
Environment make_random_gapped(int n_states, int n_actions, int horizon,
                               double gap_min_target, std::uint64_t seed);

// Linear mixture over near-deterministic base kernels with a random valid
// mixing vector; C_theta = sqrt(dH) so the feature-norm bound holds.
Environment make_mixture(int dim, int n_states, int n_actions, int horizon,
                         std::uint64_t seed);

struct EnvEntry {
    std::string name;
    std::string signature;
    std::string description;
};
std::vector<EnvEntry> env_registry();
Environment make_env(const std::string& name, const std::map<std::string, double>& params);

// --- experiment configuration ------------------------------------------------

struct ExperimentConfig {
    Environment env;
    AgentConfig agent;              // per-run episode count comes from k_grid
    std::vector<long long> k_grid;  // strictly increasing
    std::vector<std::uint64_t> seeds;
    std::vector<std::string> baselines;  // subset of {always-switch, uniform-random}
    std::string out_dir;
    std::string env_json;  // canonical environment description for hashing
};

ExperimentConfig parse_experiment_config(const std::string& json_text);
std::uint64_t config_hash(const ExperimentConfig& cfg);
std::uint64_t mix_seed(std::uint64_t base_seed, std::uint64_t k, std::uint64_t variant);

// Executes every (K, seed) cell of the grid for the agent and the requested
// baselines. The uniform-random baseline's regret is exact (policy-value
// route), the always-switch baseline shares all estimator code with the
// agent and only forces the replan trigger.
std::vector<RunLog> run_experiment(const ExperimentConfig& cfg);

// --- serialization -----------------------------------------------------------

// CSV schema (fixed order):
// episode,inst_regret,cum_regret,switch_ds,switch_pi,zhat_mass,replan_ms
std::string run_log_to_csv(const RunLog& log);
// Sidecar with everything the CSV does not carry (summary, histogram,
// sampler decisions, per-episode bonus sums, timing).
std::string run_log_to_json(const RunLog& log);
RunLog run_log_from_files(const std::string& csv_text, const std::string& json_text);
std::string run_file_stem(const RunLog& log);

// --- summaries ---------------------------------------------------------------

// Fits median switch counts against (log K)^2 and median cumulative regret
// against both a polylog and a sqrt(K) shape; aggregates gap histograms.
// Needs at least two distinct K values among the agent runs.
std::string summarize(const std::vector<RunLog>& logs);

}  // namespace lsvi
