#include "lsvi/agent.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace lsvi {

void AgentConfig::validate() const {
    if (episodes < 1) throw std::invalid_argument("episodes must be >= 1");
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must be in (0,1)");
    if (beta.kind == BetaSchedule::Kind::fixed && !(beta.fixed_value > 0.0))
        throw std::invalid_argument("fixed beta must be positive");
    if (!(sampler_c > 0.0)) throw std::invalid_argument("sampler_c must be positive");
}

double eluder_dimension_bound(const FunctionClass& cls, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
    if (cls.tabular()) return cls.tab().cells();
    const auto& l = cls.lin();
    return std::max(1.0, l.dim * std::log(1.0 + 2.0 * l.param_bound * l.feature_bound / eps));
}

double compute_beta(const BetaSchedule& schedule, AgentConfig::Mode mode,
                    const FunctionClass& cls, int n_states, int n_actions, int horizon,
                    long long episodes, double delta) {
    if (schedule.kind == BetaSchedule::Kind::fixed) return schedule.fixed_value;
    const double h = static_cast<double>(horizon);
    const double t = static_cast<double>(episodes) * h;
    if (mode == AgentConfig::Mode::model_free) {
        const double log_nf = std::log(t) + log_cover_size(cls, delta / (t * t)) +
                              std::log(1.0 / delta);
        const double dim = eluder_dimension_bound(cls, 1.0 / t);
        const double log_sa =
            std::log(static_cast<double>(n_states) * n_actions * t / delta);
        const double log_t = std::log(t);
        return schedule.constant * h * h * log_nf * dim * log_t * log_t * log_sa;
    }
    const double log_n = log_cover_size(cls, 1.0 / t);
    return 4.0 * h * h * (std::log(2.0) + log_n + std::log(1.0 / delta)) +
           (4.0 / h) * (schedule.constant + std::sqrt(h * h / 4.0 * std::log(t / delta)));
}

std::pair<std::vector<double>, std::vector<double>> q_estimate_model_free(
    const FunctionClass& cls, const EpisodicMdp& mdp, int h,
    const std::vector<Transition>& history_h, const SubsampledDataset& zhat,
    const std::vector<double>& v_next, const ConfidenceParams& params) {
    const double hcap = static_cast<double>(mdp.horizon);
    for (double v : v_next)
        if (!(v >= -1e-9 && v <= hcap + 1e-9))
            throw std::invalid_argument("v_next entries must lie in [0, H]");
    RegressionDataset data;
    data.reserve(history_h.size());
    for (const auto& tr : history_h)
        data.push_back({Covariate{tr.s, tr.a, {}}, tr.r + v_next[tr.next]});
    const auto fit = least_squares_fit(cls, data);
    ConfidenceEvaluator eval(cls, zhat, params);
    const int cells = mdp.n_states * mdp.n_actions;
    std::vector<double> q(cells, 0.0), bonus(cells, 0.0);
    for (int s = 0; s < mdp.n_states; ++s) {
        for (int a = 0; a < mdp.n_actions; ++a) {
            const Covariate z{s, a, {}};
            const int c = mdp.cell(s, a);
            bonus[c] = eval.width_at(z);
            q[c] = std::clamp(cls.eval(fit, z) + bonus[c], 0.0, hcap);
        }
    }
    (void)h;
    return {std::move(q), std::move(bonus)};
}

std::pair<std::vector<double>, std::vector<double>> q_estimate_model_based(
    const FunctionClass& cls_h, const LinearMixtureMdp& mix, int h,
    const std::vector<ValueTargetedSample>& history_h, const SubsampledDataset& zhat,
    const std::vector<double>& v_next, const ConfidenceParams& params,
    std::vector<double>* theta_out) {
    const EpisodicMdp& mdp = mix.mdp;
    const double hcap = static_cast<double>(mdp.horizon);
    RegressionDataset data;
    data.reserve(history_h.size());
    for (const auto& rec : history_h)
        data.push_back({Covariate{rec.s, rec.a, *rec.v}, (*rec.v)[rec.next]});
    const auto theta = least_squares_fit(cls_h, data);
    if (theta_out) *theta_out = theta;
    ConfidenceEvaluator eval(cls_h, zhat, params);
    const int cells = mdp.n_states * mdp.n_actions;
    std::vector<double> q(cells, 0.0), bonus(cells, 0.0);
    for (int s = 0; s < mdp.n_states; ++s) {
        for (int a = 0; a < mdp.n_actions; ++a) {
            const Covariate z{s, a, v_next};
            const int c = mdp.cell(s, a);
            bonus[c] = eval.width_at(z);
            q[c] = std::clamp(mdp.reward(h, s, a) + cls_h.eval(theta, z) + bonus[c], 0.0, hcap);
        }
    }
    return {std::move(q), std::move(bonus)};
}

Agent::Agent(AgentConfig config, Environment env)
    : config_(std::move(config)), env_(std::move(env)) {
    config_.validate();
    if (config_.mode == AgentConfig::Mode::model_based && !env_.mixture)
        throw std::invalid_argument("model-based agent needs a linear mixture environment");
    const EpisodicMdp& mdp = env_.mdp;
    for (int h = 0; h < mdp.horizon; ++h) {
        if (config_.mode == AgentConfig::Mode::model_free)
            classes_.push_back(make_tabular_class(mdp.n_states, mdp.n_actions,
                                                  static_cast<double>(mdp.horizon) + 1.0));
        else
            classes_.push_back(mixture_induced_class(*env_.mixture, h));
    }
    const long long total_steps = config_.episodes * mdp.horizon;
    beta_ = compute_beta(config_.beta, config_.mode, classes_[0], mdp.n_states, mdp.n_actions,
                         mdp.horizon, config_.episodes, config_.delta);
    params_.beta = beta_;
    params_.cap = static_cast<double>(total_steps) * (mdp.horizon + 1.0) * (mdp.horizon + 1.0);
    params_.delta = config_.delta;
    sampler_ = SamplerConfig::make(classes_[0], config_.sampler_c, config_.delta, total_steps,
                                   config_.mode == AgentConfig::Mode::model_free
                                       ? SamplingMode::model_free
                                       : SamplingMode::model_based);
    state_.zhat.resize(mdp.horizon);
    state_.mf_history.resize(mdp.horizon);
    state_.mb_history.resize(mdp.horizon);
}

Plan Agent::make_plan(long long episode) const {
    const EpisodicMdp& mdp = env_.mdp;
    const int cells = mdp.n_states * mdp.n_actions;
    Plan plan;
    plan.born_episode = episode;
    plan.q.assign(mdp.horizon, std::vector<double>(cells, 0.0));
    plan.bonus.assign(mdp.horizon, std::vector<double>(cells, 0.0));
    plan.v.assign(mdp.horizon + 1, nullptr);
    plan.v[mdp.horizon] = std::make_shared<const std::vector<double>>(mdp.n_states, 0.0);
    if (config_.mode == AgentConfig::Mode::model_based) plan.theta.resize(mdp.horizon);
    plan.policy.action.assign(mdp.horizon, std::vector<int>(mdp.n_states, 0));
    for (int h = mdp.horizon - 1; h >= 0; --h) {
        const std::vector<double>& v_next = *plan.v[h + 1];
        std::pair<std::vector<double>, std::vector<double>> est;
        if (config_.mode == AgentConfig::Mode::model_free) {
            est = q_estimate_model_free(classes_[h], mdp, h, state_.mf_history[h],
                                        state_.zhat[h], v_next, params_);
        } else {
            est = q_estimate_model_based(classes_[h], *env_.mixture, h, state_.mb_history[h],
                                         state_.zhat[h], v_next, params_, &plan.theta[h]);
        }
        plan.q[h] = std::move(est.first);
        plan.bonus[h] = std::move(est.second);
        auto vh = std::make_shared<std::vector<double>>(mdp.n_states, 0.0);
        for (int s = 0; s < mdp.n_states; ++s) {
            int best = 0;
            for (int a = 1; a < mdp.n_actions; ++a)
                if (plan.q[h][mdp.cell(s, a)] > plan.q[h][mdp.cell(s, best)]) best = a;
            plan.policy.action[h][s] = best;
            (*vh)[s] = plan.q[h][mdp.cell(s, best)];
        }
        plan.v[h] = std::move(vh);
    }
    plan.policy_value = exact_policy_value(mdp, plan.policy);
    return plan;
}

void Agent::replan(long long episode) {
    Plan next = make_plan(episode);
    const bool policy_changed =
        !state_.plan.policy.action.empty() && !(next.policy == state_.plan.policy);
    state_.n_switch_dataset += 1;
    if (policy_changed) state_.n_switch_policy += 1;
    state_.plan = std::move(next);
    state_.last_replan_episode = episode;
}

RunLog Agent::run() {
    const auto t_start = std::chrono::steady_clock::now();
    const EpisodicMdp& mdp = env_.mdp;
    const ValueTables star = exact_q_star(mdp);
    const auto gap_table = gaps(mdp);
    const double gmin = gap_min(gap_table);

    RunLog log;
    log.variant = config_.always_switch ? "always-switch" : "agent";
    log.seed = config_.seed;
    log.episodes_requested = config_.episodes;
    log.beta_used = beta_;
    log.gap_min_used = gmin;
    log.histogram.gap_min = gmin;
    const bool gapped = std::isfinite(gmin) && gmin > 0.0;
    const int buckets =
        gapped ? std::max(1, static_cast<int>(std::ceil(std::log2(mdp.horizon / gmin)))) : 1;
    log.histogram.counts.assign(buckets, 0);

    std::mt19937_64 rng(config_.seed);
    double cum_regret = 0.0;
    bool dataset_changed_since_replan = false;
    Trajectory prev_traj;

    for (long long k = 1; k <= config_.episodes; ++k) {
        // feed the previous episode's covariates to the sampler, h = H..1
        if (k >= 2) {
            for (int h = mdp.horizon - 1; h >= 0; --h) {
                const auto& step = prev_traj[h];
                Covariate z;
                if (config_.mode == AgentConfig::Mode::model_free) {
                    z = Covariate{step.state, step.action, {}};
                } else {
                    z = Covariate{step.state, step.action, *state_.plan.v[h + 1]};
                }
                const SampleDecision d =
                    maybe_add(state_.zhat[h], z, classes_[h], params_, sampler_, rng);
                if (d.accepted) dataset_changed_since_replan = true;
                if (config_.log_sampler_events)
                    log.decisions.push_back({k, h, d.p, d.accepted});
            }
        }

        bool replanned = false;
        double replan_cost = 0.0;
        const long long policy_switches_before = state_.n_switch_policy;
        if (k == 1 || config_.always_switch || dataset_changed_since_replan) {
            replan(k);
            replanned = true;
            dataset_changed_since_replan = false;
            double units = 0.0;
            for (int h = 0; h < mdp.horizon; ++h) {
                units += mdp.n_states * mdp.n_actions;
                units += static_cast<double>(config_.mode == AgentConfig::Mode::model_free
                                                 ? state_.mf_history[h].size()
                                                 : state_.mb_history[h].size());
                units += static_cast<double>(state_.zhat[h].entries.size());
            }
            replan_cost = units * 1e-3;  // fixed nominal rate keeps bytes reproducible
        }
        const bool policy_switch_flag = state_.n_switch_policy > policy_switches_before;

        const Plan& plan = state_.plan;
        Trajectory traj = sample_episode(mdp, plan.policy, rng);

        const double inst = star.v[0][mdp.initial_state] -
                            plan.policy_value.v[0][mdp.initial_state];
        cum_regret += inst;

        double bonus_sum = 0.0;
        for (int h = 0; h < mdp.horizon; ++h) {
            const auto& step = traj[h];
            const int c = mdp.cell(step.state, step.action);
            bonus_sum += plan.bonus[h][c];
            log.visited_pairs += 1;
            if (plan.q[h][c] < star.q[h][c] - 1e-9) log.optimism_violations += 1;
            const double subopt = star.v[h][step.state] - plan.policy_value.q[h][c];
            if (gapped) {
                if (subopt >= gmin * (1.0 - 1e-9)) {
                    int n = static_cast<int>(std::floor(std::log2(subopt / gmin) + 1e-12));
                    n = std::clamp(n, 0, buckets - 1);
                    log.histogram.counts[n] += 1;
                }
            } else if (subopt > 1e-12) {
                log.histogram.counts[0] += 1;
            }
        }
        log.bonus_on_path.push_back(bonus_sum);

        long long mass = 0;
        for (const auto& z : state_.zhat) mass += z.total_mass;

        log.episodes.push_back(
            {k, inst, cum_regret, replanned, policy_switch_flag, mass, replan_cost});
        log.n_switch_dataset = state_.n_switch_dataset;
        log.n_switch_policy = state_.n_switch_policy;

        // append the episode to the full history
        for (int h = 0; h < mdp.horizon; ++h) {
            const auto& step = traj[h];
            if (config_.mode == AgentConfig::Mode::model_free)
                state_.mf_history[h].push_back({step.state, step.action, step.next_state,
                                                step.reward});
            else
                state_.mb_history[h].push_back(
                    {step.state, step.action, step.next_state, plan.v[h + 1]});
        }
        prev_traj = std::move(traj);
    }
    log.final_regret = cum_regret;
    log.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - t_start).count();
    return log;
}

RunLog run_agent(const AgentConfig& config, const Environment& env) {
    Agent agent(config, env);
    return agent.run();
}

}  // namespace lsvi
