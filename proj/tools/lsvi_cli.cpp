// Command-line front end: single runs, sweeps, the oracle/property check
// suite, and the environment registry listing.
//
// Exit codes: 0 success, 2 configuration/validation failure, 3 check-suite
// failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "lsvi/agent.hpp"
#include "lsvi/harness.hpp"
#include "lsvi/oracle.hpp"
#include "lsvi/util.hpp"

namespace {

using nlohmann::json;

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw lsvi::ConfigError("config", "cannot open '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

void write_logs(const std::vector<lsvi::RunLog>& logs, const std::string& out_dir) {
    if (out_dir.empty()) return;
    std::filesystem::create_directories(out_dir);
    for (const auto& log : logs) {
        const std::string stem = lsvi::run_file_stem(log);
        write_file(std::filesystem::path(out_dir) / (stem + ".csv"), lsvi::run_log_to_csv(log));
        write_file(std::filesystem::path(out_dir) / (stem + ".json"), lsvi::run_log_to_json(log));
    }
}

int cmd_run(const std::string& config_path, const std::string& out_override) {
    lsvi::ExperimentConfig cfg = lsvi::parse_experiment_config(slurp(config_path));
    if (cfg.k_grid.size() != 1 || cfg.seeds.size() != 1)
        throw lsvi::ConfigError("k_grid/seeds", "run expects exactly one K and one seed; use sweep");
    if (!out_override.empty()) cfg.out_dir = out_override;
    const auto logs = lsvi::run_experiment(cfg);
    write_logs(logs, cfg.out_dir);
    for (const auto& log : logs)
        std::cout << log.variant << ": K=" << log.episodes_requested
                  << " regret=" << lsvi::format_double(log.final_regret)
                  << " switches(ds)=" << log.n_switch_dataset
                  << " switches(pi)=" << log.n_switch_policy << "\n";
    if (cfg.out_dir.empty())
        std::cout << lsvi::run_log_to_csv(logs.front());
    return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& out_override) {
    lsvi::ExperimentConfig cfg = lsvi::parse_experiment_config(slurp(config_path));
    if (!out_override.empty()) cfg.out_dir = out_override;
    const auto logs = lsvi::run_experiment(cfg);
    write_logs(logs, cfg.out_dir);
    const std::string summary = lsvi::summarize(logs);
    if (!cfg.out_dir.empty())
        write_file(std::filesystem::path(cfg.out_dir) / "summary.json", summary);
    std::cout << summary << "\n";
    return 0;
}

int cmd_envs() {
    for (const auto& e : lsvi::env_registry())
        std::cout << e.signature << "\n    " << e.description << "\n";
    return 0;
}

// A condensed oracle/property battery; the full acceptance suite lives in
// the test tree.
int cmd_check(int budget) {
    json report = json::array();
    bool all_ok = true;
    auto record = [&](const std::string& name, bool ok, const std::string& detail) {
        report.push_back({{"check", name}, {"pass", ok}, {"detail", detail}});
        all_ok &= ok;
        std::cerr << (ok ? "[PASS] " : "[FAIL] ") << name << ": " << detail << "\n";
    };

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::gamma_distribution<double> gamma(0.7, 1.0);

    // planner vs exhaustive policy enumeration
    {
        double worst = 0.0;
        const int cases = std::max(3, budget / 8);
        for (int i = 0; i < cases; ++i) {
            const int S = 2 + static_cast<int>(rng() % 3);
            const int A = 2 + static_cast<int>(rng() % 2);
            const int H = 1 + static_cast<int>(rng() % 2);
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
            lsvi::EpisodicMdp mdp(S, A, H, 0, std::move(r), std::move(p));
            const auto values = lsvi::brute_force_policy_values(mdp);
            const double best = *std::max_element(values.begin(), values.end());
            const auto star = lsvi::exact_q_star(mdp);
            worst = std::max(worst, std::abs(best - star.v[0][mdp.initial_state]));
        }
        record("planner-vs-enumeration", worst <= 1e-10,
               "max |V* - max policy value| = " + lsvi::format_double(worst));
    }

    // closed-form width/sensitivity vs the grid oracles
    {
        double worst = 0.0;
        const int cases = std::max(5, budget / 2);
        for (int i = 0; i < cases; ++i) {
            const int S = 1 + static_cast<int>(rng() % 3);
            const int A = 1 + static_cast<int>(rng() % 3);
            const double range = 1.0 + 2.0 * unif(rng);
            auto cls = lsvi::make_tabular_class(S, A, range);
            lsvi::SubsampledDataset z;
            const int fills = static_cast<int>(rng() % 6);
            for (int f = 0; f < fills; ++f)
                z.add(lsvi::Covariate{static_cast<int>(rng() % S), static_cast<int>(rng() % A), {}},
                      1 + static_cast<long long>(rng() % 40));
            lsvi::ConfidenceParams params{0.2 + 4.0 * unif(rng), 1e6, 0.1};
            const lsvi::Covariate q{static_cast<int>(rng() % S), static_cast<int>(rng() % A), {}};
            worst = std::max(worst, std::abs(lsvi::width(cls, z, params, q) -
                                             lsvi::brute_force_width(cls, z, params, q)));
            worst = std::max(worst, std::abs(lsvi::sensitivity(cls, z, params, q) -
                                             lsvi::brute_force_sensitivity(cls, z, params, q)));
        }
        record("width-sensitivity-oracles", worst <= 5e-3,
               "max closed-form vs grid deviation = " + lsvi::format_double(worst));
    }

    // eluder dimension of a small tabular class meets |S||A|
    {
        auto cls = lsvi::make_tabular_class(3, 2, 2.0);
        std::vector<lsvi::Covariate> pool;
        for (int s = 0; s < 3; ++s)
            for (int a = 0; a < 2; ++a) pool.push_back({s, a, {}});
        const auto est = lsvi::eluder_dimension_estimate(cls, 0.1, pool);
        const bool ok = est.length() == 6 && lsvi::verify_eluder_certificates(cls, est);
        record("eluder-tabular", ok, "length " + std::to_string(est.length()) + " of 6");
    }

    // degenerate sampler keeps the sandwich violation-free
    {
        auto cls = lsvi::make_tabular_class(2, 2, 2.0);
        lsvi::SubsampledDataset z;
        for (int i = 0; i < 32; ++i)
            z.add(lsvi::Covariate{static_cast<int>(rng() % 2), static_cast<int>(rng() % 2), {}}, 1);
        lsvi::ConfidenceParams params{1.0, 1e6, 0.1};
        std::vector<lsvi::Covariate> queries;
        for (int s = 0; s < 2; ++s)
            for (int a = 0; a < 2; ++a) queries.push_back({s, a, {}});
        const auto rep = lsvi::sandwich_check(cls, z, z, params, 0.5, queries);
        record("sandwich-identical-datasets", rep.ok(),
               std::to_string(rep.violations.size()) + " violations over " +
                   std::to_string(rep.pairs_checked) + " pairs");
    }

    // determinism of a full run
    {
        lsvi::Environment env = lsvi::make_chain(3, 2, 0.3);
        lsvi::AgentConfig ac;
        ac.mode = lsvi::AgentConfig::Mode::model_free;
        ac.beta = {lsvi::BetaSchedule::Kind::fixed, 1.0, 1.0};
        ac.episodes = 64;
        ac.seed = 11;
        const auto a = lsvi::run_agent(ac, env);
        const auto b = lsvi::run_agent(ac, env);
        record("run-determinism",
               lsvi::run_log_to_csv(a) == lsvi::run_log_to_csv(b) && a.semantically_equal(b),
               "identical bytes across repeated runs");
    }

    std::cout << json{{"pass", all_ok}, {"checks", report}}.dump(2) << "\n";
    return all_ok ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"low-switching-cost optimistic value iteration simulator"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    auto* run = app.add_subcommand("run", "execute a single configured run");
    run->add_option("--config", config_path, "experiment config (JSON)")->required();
    run->add_option("--out", out_dir, "output directory");

    auto* sweep = app.add_subcommand("sweep", "execute a (K x seed x variant) grid");
    sweep->add_option("--config", config_path, "experiment config (JSON)")->required();
    sweep->add_option("--out", out_dir, "output directory");

    int budget = 50;
    auto* check = app.add_subcommand("check", "oracle and property check suite");
    check->add_option("--budget", budget, "instance budget");

    auto* envs = app.add_subcommand("envs", "list the environment registry");

    try {
        app.parse(argc, argv);
        if (run->parsed()) return cmd_run(config_path, out_dir);
        if (sweep->parsed()) return cmd_sweep(config_path, out_dir);
        if (check->parsed()) return cmd_check(budget);
        if (envs->parsed()) return cmd_envs();
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const lsvi::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
