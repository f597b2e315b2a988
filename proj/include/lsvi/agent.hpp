#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lsvi/function_class.hpp"
#include "lsvi/mdp.hpp"
#include "lsvi/run_log.hpp"
#include "lsvi/subsampler.hpp"

namespace lsvi {

struct Environment {
    std::string name = "custom";
    EpisodicMdp mdp;
    std::optional<LinearMixtureMdp> mixture;  // required by the model-based agent
};

struct BetaSchedule {
    enum class Kind { theory, fixed };
    Kind kind = Kind::theory;
    double fixed_value = 1.0;
    double constant = 1.0;  // the unspecified absolute constant of the theory schedules
};

struct AgentConfig {
    enum class Mode { model_free, model_based };
    Mode mode = Mode::model_free;
    BetaSchedule beta;
    double delta = 0.1;
    long long episodes = 1;  // K
    double sampler_c = 1.0;
    std::uint64_t seed = 1;
    bool always_switch = false;        // baseline: replan condition forced true
    bool regress_on_subsample = false; // optional variant, off by default
    bool log_sampler_events = true;

    void validate() const;
};

// Analytic upper bound on dim_E(F, eps): |S||A| for tabular classes,
// d log(1 + 2 B Phi / eps) for linear ones.
double eluder_dimension_bound(const FunctionClass& cls, double eps);

// The theory schedules from the regret analysis, or the user's fixed value.
double compute_beta(const BetaSchedule& schedule, AgentConfig::Mode mode,
                    const FunctionClass& cls, int n_states, int n_actions, int horizon,
                    long long episodes, double delta);

struct Transition {
    int s = 0, a = 0, next = 0;
    double r = 0.0;
};

struct ValueTargetedSample {
    int s = 0, a = 0, next = 0;
    std::shared_ptr<const std::vector<double>> v;  // value table deployed when collected
};

// Model-free Q estimator: regress r + V_next(s') on the full step-h history,
// add the sub-sample width as the bonus, clip to [0, H].
// Returns (q, bonus), both indexed by s * n_actions + a.
std::pair<std::vector<double>, std::vector<double>> q_estimate_model_free(
    const FunctionClass& cls, const EpisodicMdp& mdp, int h,
    const std::vector<Transition>& history_h, const SubsampledDataset& zhat,
    const std::vector<double>& v_next, const ConfidenceParams& params);

// Model-based Q estimator: value-targeted regression of V_tau(s') on
// <P(.|s,a), V_tau> over the full history, bonus from the sub-sample at the
// current (s, a, V_next) covariate, known rewards added, clip to [0, H].
std::pair<std::vector<double>, std::vector<double>> q_estimate_model_based(
    const FunctionClass& cls_h, const LinearMixtureMdp& mix, int h,
    const std::vector<ValueTargetedSample>& history_h, const SubsampledDataset& zhat,
    const std::vector<double>& v_next, const ConfidenceParams& params,
    std::vector<double>* theta_out = nullptr);

struct Plan {
    std::vector<std::vector<double>> q;      // [h][cells]
    std::vector<std::vector<double>> bonus;  // [h][cells]
    // [h][states] for h = 0..H, row H zero; shared so covariates can
    // reference the exact tables deployed when their episode ran
    std::vector<std::shared_ptr<const std::vector<double>>> v;
    Policy policy;
    ValueTables policy_value;  // exact value of the deployed policy
    long long born_episode = 1;
    std::vector<std::vector<double>> theta;  // model-based: fitted mixing vector per h
};

struct AgentState {
    long long last_replan_episode = 1;  // k-tilde
    std::vector<SubsampledDataset> zhat;                       // per h
    std::vector<std::vector<Transition>> mf_history;           // per h
    std::vector<std::vector<ValueTargetedSample>> mb_history;  // per h
    Plan plan;
    long long n_switch_dataset = 0;
    long long n_switch_policy = 0;
};

class Agent {
public:
    Agent(AgentConfig config, Environment env);

    double beta() const { return beta_; }
    const AgentState& state() const { return state_; }
    const AgentConfig& config() const { return config_; }
    const FunctionClass& function_class(int h) const { return classes_[h]; }

    // Backward pass through the configured estimator; deterministic given
    // the current histories and datasets.
    Plan make_plan(long long episode) const;
    void replan(long long episode);

    RunLog run();

private:
    AgentConfig config_;
    Environment env_;
    std::vector<FunctionClass> classes_;  // per h
    ConfidenceParams params_;
    SamplerConfig sampler_;
    double beta_ = 0.0;
    AgentState state_;
};

RunLog run_agent(const AgentConfig& config, const Environment& env);

}  // namespace lsvi
