#include "lsvi/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <tuple>

#include "json.hpp"

#include "lsvi/util.hpp"

namespace lsvi {

using nlohmann::json;

// --- environments ------------------------------------------------------------

Environment make_chain(int n, int horizon, double gap) {
    if (n < 2) throw std::invalid_argument("chain needs at least 2 states");
    if (horizon < 1) throw std::invalid_argument("chain needs horizon >= 1");
    if (!(gap > 0.0 && gap <= 1.0)) throw std::invalid_argument("chain gap must be in (0,1]");
    const int A = 2;  // 0 = forward, 1 = stay
    std::vector<std::vector<double>> r(horizon, std::vector<double>(n * A, 0.0));
    std::vector<std::vector<double>> p(horizon, std::vector<double>(n * A * n, 0.0));
    for (int h = 0; h < horizon; ++h) {
        for (int s = 0; s < n; ++s) {
            const int fwd = std::min(s + 1, n - 1);
            r[h][s * A + 0] = s == n - 1 ? 1.0 : gap;
            p[h][(s * A + 0) * n + fwd] = 1.0;
            p[h][(s * A + 1) * n + s] = 1.0;
        }
    }
    Environment env;
    env.name = "chain";
    env.mdp = EpisodicMdp(n, A, horizon, 0, std::move(r), std::move(p));
    return env;
}

Environment make_riverswim(int n, int horizon) {
    if (n < 2) throw std::invalid_argument("riverswim needs at least 2 states");
    if (horizon < 1) throw std::invalid_argument("riverswim needs horizon >= 1");
    const int A = 2;  // 0 = left, 1 = right
    std::vector<std::vector<double>> r(horizon, std::vector<double>(n * A, 0.0));
    std::vector<std::vector<double>> p(horizon, std::vector<double>(n * A * n, 0.0));
    for (int h = 0; h < horizon; ++h) {
        for (int s = 0; s < n; ++s) {
            const int left = std::max(s - 1, 0);
            const int right = std::min(s + 1, n - 1);
            r[h][s * A + 0] = s == 0 ? 5.0 / 1000.0 : 0.0;
            r[h][s * A + 1] = s == n - 1 ? 1.0 : 0.0;
            p[h][(s * A + 0) * n + left] = 1.0;
            if (s == 0) {
                p[h][(s * A + 1) * n + s] += 0.4;
                p[h][(s * A + 1) * n + right] += 0.6;
            } else if (s == n - 1) {
                p[h][(s * A + 1) * n + left] += 0.4;
                p[h][(s * A + 1) * n + s] += 0.6;
            } else {
                p[h][(s * A + 1) * n + left] += 0.05;
                p[h][(s * A + 1) * n + s] += 0.6;
                p[h][(s * A + 1) * n + right] += 0.35;
            }
        }
    }
    Environment env;
    env.name = "riverswim";
    env.mdp = EpisodicMdp(n, A, horizon, 0, std::move(r), std::move(p));
    return env;
}

Environment make_random_gapped(int n_states, int n_actions, int horizon,
                               double gap_min_target, std::uint64_t seed) {
    if (n_states < 1 || n_actions < 2 || horizon < 1)
        throw std::invalid_argument("random_gapped needs n_states>=1, n_actions>=2, horizon>=1");
    if (!(gap_min_target > 0.0 && gap_min_target < 1.0))
        throw std::invalid_argument("gap_min_target must be in (0,1)");
    std::mt19937_64 rng(splitmix64(seed));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::gamma_distribution<double> gamma(0.5, 1.0);
    for (int attempt = 0; attempt < 100000; ++attempt) {
        std::vector<std::vector<double>> r(horizon, std::vector<double>(n_states * n_actions));
        std::vector<std::vector<double>> p(
            horizon, std::vector<double>(static_cast<std::size_t>(n_states) * n_actions * n_states));
        for (int h = 0; h < horizon; ++h) {
            for (int c = 0; c < n_states * n_actions; ++c) {
                r[h][c] = unif(rng);
                double total = 0.0;
                std::vector<double> row(n_states);
                for (int t = 0; t < n_states; ++t) {
                    row[t] = gamma(rng) + 1e-12;
                    total += row[t];
                }
                for (int t = 0; t < n_states; ++t)
                    p[h][static_cast<std::size_t>(c) * n_states + t] = row[t] / total;
            }
        }
        EpisodicMdp mdp(n_states, n_actions, horizon, 0, std::move(r), std::move(p));
        const double g = gap_min(mdp);
        if (std::isfinite(g) && g >= gap_min_target) {
            Environment env;
            env.name = "random_gapped";
            env.mdp = std::move(mdp);
            return env;
        }
    }
    throw std::runtime_error("random_gapped: rejection sampling did not reach the target gap");
}

Environment make_mixture(int dim, int n_states, int n_actions, int horizon,
                         std::uint64_t seed) {
    if (dim < 1 || n_states < 2 || n_actions < 1 || horizon < 1)
        throw std::invalid_argument("mixture needs dim>=1, n_states>=2, n_actions>=1, horizon>=1");
    std::mt19937_64 rng(splitmix64(seed ^ 0xabcdef12ULL));
    std::uniform_int_distribution<int> pick_state(0, n_states - 1);
    std::gamma_distribution<double> spiky(0.15, 1.0);
    const double scale = std::sqrt(static_cast<double>(dim) * horizon);
    // near-deterministic base kernels with distinct targets keep the
    // value-targeted design well conditioned and the regression noise low
    std::vector<std::vector<std::vector<double>>> base(
        horizon, std::vector<std::vector<double>>(
                     dim, std::vector<double>(
                              static_cast<std::size_t>(n_states) * n_actions * n_states, 0.0)));
    for (int h = 0; h < horizon; ++h) {
        for (int c = 0; c < n_states * n_actions; ++c) {
            for (int j = 0; j < dim; ++j) {
                const int target = (pick_state(rng) + j) % n_states;
                double* row = base[h][j].data() + static_cast<std::size_t>(c) * n_states;
                row[target] = 0.9;
                row[pick_state(rng)] += 0.1;
                for (int t = 0; t < n_states; ++t) row[t] /= scale;
            }
        }
    }
    // random valid mixing weights on the simplex, moderately spiky
    std::vector<double> w(dim);
    double total = 0.0;
    for (int j = 0; j < dim; ++j) { w[j] = spiky(rng) + 1e-6; total += w[j]; }
    std::vector<double> theta(dim);
    for (int j = 0; j < dim; ++j) theta[j] = scale * (w[j] / total);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<std::vector<double>> r(horizon, std::vector<double>(n_states * n_actions));
    for (int h = 0; h < horizon; ++h)
        for (int c = 0; c < n_states * n_actions; ++c) r[h][c] = unif(rng);
    Environment env;
    env.name = "mixture";
    env.mixture = LinearMixtureMdp(dim, scale, std::move(theta), std::move(base), 0, std::move(r));
    env.mdp = env.mixture->mdp;
    return env;
}

std::vector<EnvEntry> env_registry() {
    return {
        {"chain", "chain(n, horizon, gap)",
         "deterministic chain, one rewarding terminal action, gap_min = gap"},
        {"riverswim", "riverswim(n, horizon)", "stochastic-drift tabular chain"},
        {"random_gapped", "random_gapped(n_states, n_actions, horizon, gap_min_target, seed)",
         "random MDP rejection-sampled until gap_min >= target"},
        {"mixture", "mixture(d, n_states, n_actions, horizon, seed)",
         "linear mixture MDP with a random valid mixing vector"},
    };
}

namespace {

double need(const std::map<std::string, double>& params, const std::string& key,
            const std::string& env_name) {
    auto it = params.find(key);
    if (it == params.end())
        throw ConfigError("environment.params." + key, "required by " + env_name);
    return it->second;
}

}  // namespace

Environment make_env(const std::string& name, const std::map<std::string, double>& params) {
    if (name == "chain")
        return make_chain(static_cast<int>(need(params, "n", name)),
                          static_cast<int>(need(params, "horizon", name)),
                          need(params, "gap", name));
    if (name == "riverswim")
        return make_riverswim(static_cast<int>(need(params, "n", name)),
                              static_cast<int>(need(params, "horizon", name)));
    if (name == "random_gapped")
        return make_random_gapped(static_cast<int>(need(params, "n_states", name)),
                                  static_cast<int>(need(params, "n_actions", name)),
                                  static_cast<int>(need(params, "horizon", name)),
                                  need(params, "gap_min_target", name),
                                  static_cast<std::uint64_t>(need(params, "seed", name)));
    if (name == "mixture")
        return make_mixture(static_cast<int>(need(params, "d", name)),
                            static_cast<int>(need(params, "n_states", name)),
                            static_cast<int>(need(params, "n_actions", name)),
                            static_cast<int>(need(params, "horizon", name)),
                            static_cast<std::uint64_t>(need(params, "seed", name)));
    throw ConfigError("environment.name", "unknown environment '" + name + "'");
}

// --- config ------------------------------------------------------------------

namespace {

template <typename T>
T get_field(const json& j, const std::string& path, const std::string& key) {
    if (!j.contains(key)) throw ConfigError(path + key, "missing field");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(path + key, e.what());
    }
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text, nullptr, true, true);
    } catch (const json::exception& e) {
        throw ConfigError("$", std::string("invalid JSON: ") + e.what());
    }
    ExperimentConfig cfg;

    const json je = get_field<json>(j, "", "environment");
    if (je.contains("file")) {
        const std::string path = je["file"].get<std::string>();
        std::ifstream in(path);
        if (!in) throw ConfigError("environment.file", "cannot open '" + path + "'");
        std::stringstream buf;
        buf << in.rdbuf();
        const std::string text = buf.str();
        json doc;
        try {
            doc = json::parse(text, nullptr, true, true);
        } catch (const json::exception& e) {
            throw ConfigError("environment.file", std::string("invalid JSON: ") + e.what());
        }
        if (doc.contains("base_kernels")) {
            LinearMixtureMdp mix = mixture_from_json_text(text);
            cfg.env.name = "file-mixture";
            cfg.env.mdp = mix.mdp;
            cfg.env.mixture = std::move(mix);
        } else {
            cfg.env.name = "file";
            cfg.env.mdp = mdp_from_json_text(text);
        }
        cfg.env_json = doc.dump();
    } else if (je.contains("name")) {
        std::map<std::string, double> params;
        if (je.contains("params"))
            for (auto it = je["params"].begin(); it != je["params"].end(); ++it)
                params[it.key()] = it.value().get<double>();
        cfg.env = make_env(je["name"].get<std::string>(), params);
        cfg.env_json = je.dump();
    } else if (je.contains("inline")) {
        const json inner = je["inline"];
        if (inner.contains("base_kernels")) {
            LinearMixtureMdp mix = mixture_from_json_text(inner.dump());
            cfg.env.name = "inline-mixture";
            cfg.env.mdp = mix.mdp;
            cfg.env.mixture = std::move(mix);
        } else {
            cfg.env.name = "inline";
            cfg.env.mdp = mdp_from_json_text(inner.dump());
        }
        cfg.env_json = inner.dump();
    } else {
        throw ConfigError("environment", "needs 'name' (+params) or 'inline'");
    }

    const json ja = get_field<json>(j, "", "agent");
    const std::string mode = get_field<std::string>(ja, "agent.", "mode");
    if (mode == "model_free") cfg.agent.mode = AgentConfig::Mode::model_free;
    else if (mode == "model_based") cfg.agent.mode = AgentConfig::Mode::model_based;
    else throw ConfigError("agent.mode", "must be model_free or model_based");
    if (cfg.agent.mode == AgentConfig::Mode::model_based && !cfg.env.mixture)
        throw ConfigError("agent.mode", "model_based needs a mixture environment");

    const json jb = get_field<json>(ja, "agent.", "beta");
    const std::string bmode = get_field<std::string>(jb, "agent.beta.", "mode");
    if (bmode == "theory") {
        cfg.agent.beta.kind = BetaSchedule::Kind::theory;
        if (jb.contains("constant")) cfg.agent.beta.constant = jb["constant"].get<double>();
    } else if (bmode == "fixed") {
        cfg.agent.beta.kind = BetaSchedule::Kind::fixed;
        cfg.agent.beta.fixed_value = get_field<double>(jb, "agent.beta.", "value");
        if (!(cfg.agent.beta.fixed_value > 0.0))
            throw ConfigError("agent.beta.value", "must be positive");
    } else {
        throw ConfigError("agent.beta.mode", "must be theory or fixed");
    }
    if (ja.contains("delta")) cfg.agent.delta = ja["delta"].get<double>();
    if (!(cfg.agent.delta > 0.0 && cfg.agent.delta < 1.0))
        throw ConfigError("agent.delta", "must be in (0,1)");
    if (ja.contains("sampler") && ja["sampler"].contains("c")) {
        cfg.agent.sampler_c = ja["sampler"]["c"].get<double>();
        if (!(cfg.agent.sampler_c > 0.0)) throw ConfigError("agent.sampler.c", "must be positive");
    }

    cfg.k_grid = get_field<std::vector<long long>>(j, "", "k_grid");
    if (cfg.k_grid.empty()) throw ConfigError("k_grid", "must be nonempty");
    for (std::size_t i = 0; i < cfg.k_grid.size(); ++i) {
        if (cfg.k_grid[i] < 1) throw ConfigError("k_grid[" + std::to_string(i) + "]", "must be >= 1");
        if (i > 0 && cfg.k_grid[i] <= cfg.k_grid[i - 1])
            throw ConfigError("k_grid[" + std::to_string(i) + "]", "must be strictly increasing");
    }
    cfg.seeds = get_field<std::vector<std::uint64_t>>(j, "", "seeds");
    if (cfg.seeds.empty()) throw ConfigError("seeds", "must be nonempty");

    if (j.contains("baselines")) {
        cfg.baselines = j["baselines"].get<std::vector<std::string>>();
        for (std::size_t i = 0; i < cfg.baselines.size(); ++i)
            if (cfg.baselines[i] != "always-switch" && cfg.baselines[i] != "uniform-random")
                throw ConfigError("baselines[" + std::to_string(i) + "]",
                                  "must be always-switch or uniform-random");
    }
    if (j.contains("output")) cfg.out_dir = j["output"].get<std::string>();
    return cfg;
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
    // FNV-1a over the canonical semantic description; the output path is
    // deliberately excluded.
    json j;
    j["env"] = cfg.env_json.empty() ? cfg.env.name : cfg.env_json;
    j["mode"] = cfg.agent.mode == AgentConfig::Mode::model_free ? "model_free" : "model_based";
    j["beta_kind"] = cfg.agent.beta.kind == BetaSchedule::Kind::theory ? "theory" : "fixed";
    j["beta_value"] = format_double(cfg.agent.beta.fixed_value);
    j["beta_constant"] = format_double(cfg.agent.beta.constant);
    j["delta"] = format_double(cfg.agent.delta);
    j["sampler_c"] = format_double(cfg.agent.sampler_c);
    j["k_grid"] = cfg.k_grid;
    j["seeds"] = cfg.seeds;
    j["baselines"] = cfg.baselines;
    const std::string text = j.dump();
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

std::uint64_t mix_seed(std::uint64_t base_seed, std::uint64_t k, std::uint64_t variant) {
    return splitmix64(splitmix64(base_seed) ^ (k * 0x9e3779b97f4a7c15ULL) ^ (variant << 56));
}

namespace {

RunLog uniform_random_log(const Environment& env, long long episodes, std::uint64_t seed) {
    const ValueTables star = exact_q_star(env.mdp);
    const ValueTables uni = exact_uniform_value(env.mdp);
    const double inst = star.v[0][env.mdp.initial_state] - uni.v[0][env.mdp.initial_state];
    RunLog log;
    log.variant = "uniform-random";
    log.seed = seed;
    log.episodes_requested = episodes;
    log.gap_min_used = gap_min(env.mdp);
    log.histogram.gap_min = log.gap_min_used;
    log.histogram.counts.assign(1, 0);
    log.episodes.reserve(episodes);
    double cum = 0.0;
    for (long long k = 1; k <= episodes; ++k) {
        cum += inst;
        log.episodes.push_back({k, inst, cum, false, false, 0, 0.0});
    }
    log.final_regret = cum;
    return log;
}

}  // namespace

std::vector<RunLog> run_experiment(const ExperimentConfig& cfg) {
    const std::uint64_t hash = config_hash(cfg);
    std::vector<RunLog> logs;
    const bool single_cell = cfg.k_grid.size() == 1 && cfg.seeds.size() == 1;
    for (long long k : cfg.k_grid) {
        for (std::uint64_t seed : cfg.seeds) {
            AgentConfig ac = cfg.agent;
            ac.episodes = k;
            ac.seed = mix_seed(seed, static_cast<std::uint64_t>(k), 0);
            ac.log_sampler_events = single_cell;
            RunLog log = run_agent(ac, cfg.env);
            log.config_hash = hash;
            log.seed = seed;
            logs.push_back(std::move(log));
            for (const std::string& baseline : cfg.baselines) {
                if (baseline == "always-switch") {
                    AgentConfig bc = ac;
                    bc.always_switch = true;
                    bc.seed = mix_seed(seed, static_cast<std::uint64_t>(k), 1);
                    RunLog blog = run_agent(bc, cfg.env);
                    blog.config_hash = hash;
                    blog.seed = seed;
                    logs.push_back(std::move(blog));
                } else {
                    RunLog blog = uniform_random_log(cfg.env, k, seed);
                    blog.config_hash = hash;
                    logs.push_back(std::move(blog));
                }
            }
        }
    }
    return logs;
}

// --- serialization -----------------------------------------------------------

std::string run_log_to_csv(const RunLog& log) {
    std::string out = "episode,inst_regret,cum_regret,switch_ds,switch_pi,zhat_mass,replan_ms\n";
    for (const auto& e : log.episodes) {
        out += std::to_string(e.episode);
        out += ',';
        out += format_double(e.inst_regret);
        out += ',';
        out += format_double(e.cum_regret);
        out += ',';
        out += e.switched_dataset ? '1' : '0';
        out += ',';
        out += e.switched_policy ? '1' : '0';
        out += ',';
        out += std::to_string(e.zhat_mass);
        out += ',';
        out += format_double(e.replan_ms);
        out += '\n';
    }
    return out;
}

std::string run_log_to_json(const RunLog& log) {
    json j;
    j["variant"] = log.variant;
    j["seed"] = log.seed;
    j["config_hash"] = log.config_hash;
    j["episodes_requested"] = log.episodes_requested;
    j["beta_used"] = log.beta_used;
    j["gap_min_used"] = std::isfinite(log.gap_min_used) ? json(log.gap_min_used) : json("inf");
    j["n_switch_dataset"] = log.n_switch_dataset;
    j["n_switch_policy"] = log.n_switch_policy;
    j["final_regret"] = log.final_regret;
    j["visited_pairs"] = log.visited_pairs;
    j["optimism_violations"] = log.optimism_violations;
    j["histogram"] = {{"gap_min", std::isfinite(log.histogram.gap_min)
                                      ? json(log.histogram.gap_min)
                                      : json("inf")},
                      {"counts", log.histogram.counts}};
    j["bonus_on_path"] = log.bonus_on_path;
    json decisions = json::array();
    for (const auto& d : log.decisions)
        decisions.push_back({{"episode", d.episode}, {"h", d.h}, {"p", d.p},
                             {"accepted", d.accepted}});
    j["sampler_decisions"] = std::move(decisions);
    j["timing"] = {{"wall_ms", log.wall_ms}, {"deterministic", false}};
    return j.dump(2);
}

RunLog run_log_from_files(const std::string& csv_text, const std::string& json_text) {
    RunLog log;
    std::istringstream csv(csv_text);
    std::string line;
    if (!std::getline(csv, line)) throw std::invalid_argument("empty CSV");
    while (std::getline(csv, line)) {
        if (line.empty()) continue;
        EpisodeRecord e;
        std::istringstream row(line);
        std::string tok;
        std::getline(row, tok, ','); e.episode = std::stoll(tok);
        std::getline(row, tok, ','); e.inst_regret = std::stod(tok);
        std::getline(row, tok, ','); e.cum_regret = std::stod(tok);
        std::getline(row, tok, ','); e.switched_dataset = tok == "1";
        std::getline(row, tok, ','); e.switched_policy = tok == "1";
        std::getline(row, tok, ','); e.zhat_mass = std::stoll(tok);
        std::getline(row, tok, ','); e.replan_ms = std::stod(tok);
        log.episodes.push_back(e);
    }
    const json j = json::parse(json_text);
    log.variant = j["variant"].get<std::string>();
    log.seed = j["seed"].get<std::uint64_t>();
    log.config_hash = j["config_hash"].get<std::uint64_t>();
    log.episodes_requested = j["episodes_requested"].get<long long>();
    log.beta_used = j["beta_used"].get<double>();
    log.gap_min_used = j["gap_min_used"].is_string()
                           ? std::numeric_limits<double>::infinity()
                           : j["gap_min_used"].get<double>();
    log.n_switch_dataset = j["n_switch_dataset"].get<long long>();
    log.n_switch_policy = j["n_switch_policy"].get<long long>();
    log.final_regret = j["final_regret"].get<double>();
    log.visited_pairs = j["visited_pairs"].get<long long>();
    log.optimism_violations = j["optimism_violations"].get<long long>();
    log.histogram.gap_min = j["histogram"]["gap_min"].is_string()
                                ? std::numeric_limits<double>::infinity()
                                : j["histogram"]["gap_min"].get<double>();
    log.histogram.counts = j["histogram"]["counts"].get<std::vector<long long>>();
    log.bonus_on_path = j["bonus_on_path"].get<std::vector<double>>();
    for (const auto& d : j["sampler_decisions"])
        log.decisions.push_back({d["episode"].get<long long>(), d["h"].get<int>(),
                                 d["p"].get<double>(), d["accepted"].get<bool>()});
    log.wall_ms = j["timing"]["wall_ms"].get<double>();
    return log;
}

std::string run_file_stem(const RunLog& log) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(log.config_hash));
    return "run_" + std::string(buf) + "_" + log.variant + "_K" +
           std::to_string(log.episodes_requested) + "_s" + std::to_string(log.seed);
}

bool RunLog::semantically_equal(const RunLog& other) const {
    auto key = [](const RunLog& l) {
        return std::tuple(l.variant, l.seed, l.config_hash, l.episodes_requested, l.beta_used,
                          l.n_switch_dataset, l.n_switch_policy, l.final_regret,
                          l.visited_pairs, l.optimism_violations, l.histogram.counts,
                          l.bonus_on_path);
    };
    if (key(*this) != key(other)) return false;
    if (episodes.size() != other.episodes.size() || decisions.size() != other.decisions.size())
        return false;
    for (std::size_t i = 0; i < episodes.size(); ++i) {
        const auto& a = episodes[i];
        const auto& b = other.episodes[i];
        if (std::tuple(a.episode, a.inst_regret, a.cum_regret, a.switched_dataset,
                       a.switched_policy, a.zhat_mass, a.replan_ms) !=
            std::tuple(b.episode, b.inst_regret, b.cum_regret, b.switched_dataset,
                       b.switched_policy, b.zhat_mass, b.replan_ms))
            return false;
    }
    for (std::size_t i = 0; i < decisions.size(); ++i) {
        const auto& a = decisions[i];
        const auto& b = other.decisions[i];
        if (std::tuple(a.episode, a.h, a.p, a.accepted) !=
            std::tuple(b.episode, b.h, b.p, b.accepted))
            return false;
    }
    const bool gm_match = (std::isfinite(gap_min_used) == std::isfinite(other.gap_min_used)) &&
                          (!std::isfinite(gap_min_used) || gap_min_used == other.gap_min_used);
    return gm_match;
}

// --- summaries ---------------------------------------------------------------

std::string summarize(const std::vector<RunLog>& logs) {
    std::map<long long, std::vector<double>> switches, regrets;
    std::map<long long, std::vector<std::vector<long long>>> histograms;
    for (const auto& log : logs) {
        if (log.variant != "agent") continue;
        switches[log.episodes_requested].push_back(static_cast<double>(log.n_switch_dataset));
        regrets[log.episodes_requested].push_back(log.final_regret);
        histograms[log.episodes_requested].push_back(log.histogram.counts);
    }
    if (switches.size() < 2)
        throw std::invalid_argument("summarize needs agent runs at >= 2 distinct K values");

    std::vector<double> ks, med_switch, med_regret;
    json per_k = json::array();
    bool zero_regret = true;
    for (auto& [k, vals] : switches) {
        ks.push_back(static_cast<double>(k));
        med_switch.push_back(median(vals));
        med_regret.push_back(median(regrets[k]));
        if (med_regret.back() != 0.0) zero_regret = false;

        std::vector<long long> hist_median;
        const auto& hists = histograms[k];
        if (!hists.empty()) {
            std::size_t buckets = 0;
            for (const auto& h : hists) buckets = std::max(buckets, h.size());
            for (std::size_t b = 0; b < buckets; ++b) {
                std::vector<double> col;
                for (const auto& h : hists)
                    col.push_back(b < h.size() ? static_cast<double>(h[b]) : 0.0);
                hist_median.push_back(static_cast<long long>(std::llround(median(col))));
            }
        }
        per_k.push_back({{"K", k},
                         {"median_n_switch", med_switch.back()},
                         {"median_regret", med_regret.back()},
                         {"median_histogram", hist_median},
                         {"runs", vals.size()}});
    }

    std::vector<double> log2k(ks.size()), sqrtk(ks.size());
    for (std::size_t i = 0; i < ks.size(); ++i) {
        const double lk = std::log(ks[i]);
        log2k[i] = lk * lk;
        sqrtk[i] = std::sqrt(ks[i]);
    }
    const LinearFit switch_fit = fit_line(log2k, med_switch);
    const LinearFit regret_polylog = fit_line(log2k, med_regret);
    const LinearFit regret_sqrt = fit_line(sqrtk, med_regret);

    json j;
    j["per_k"] = std::move(per_k);
    j["switch_fit_logk_squared"] = {{"c1", switch_fit.intercept},
                                    {"c2", switch_fit.slope},
                                    {"r_squared", switch_fit.r_squared}};
    j["regret_fit_logk_squared"] = {{"c1", regret_polylog.intercept},
                                    {"c2", regret_polylog.slope},
                                    {"r_squared", regret_polylog.r_squared}};
    j["regret_fit_sqrt_k"] = {{"c1", regret_sqrt.intercept},
                              {"c2", regret_sqrt.slope},
                              {"r_squared", regret_sqrt.r_squared}};
    if (zero_regret) j["flag"] = "zero-regret";
    return j.dump(2);
}

}  // namespace lsvi
