#include "doctest.h"

#include <cmath>

#include "lsvi/harness.hpp"
#include "lsvi/oracle.hpp"
#include "lsvi/util.hpp"

using namespace lsvi;

namespace {

std::string chain_config(const std::string& extras = "") {
    return R"({
        "environment": {"name": "chain", "params": {"n": 2, "horizon": 1, "gap": 0.4}},
        "agent": {"mode": "model_free", "beta": {"mode": "fixed", "value": 1.0},
                  "delta": 0.1, "sampler": {"c": 1.0}},
        "k_grid": [16],
        "seeds": [3])" +
           extras + "\n}";
}

}  // namespace

TEST_CASE("environment registry") {
    const auto env = make_chain(2, 1, 0.4);
    CHECK(gap_min(env.mdp) == doctest::Approx(0.4));

    const auto deep = make_chain(5, 4, 0.2);
    CHECK(gap_min(deep.mdp) == doctest::Approx(0.2));

    const auto rg = make_random_gapped(3, 2, 2, 0.2, 7);
    CHECK(gap_min(rg.mdp) >= 0.2);

    const auto mix = make_mixture(3, 4, 2, 3, 5);
    REQUIRE(mix.mixture.has_value());
    mix.mdp.validate();  // row-stochastic mixed kernel
    mix.mixture->validate();

    const auto rs = make_riverswim(4, 6);
    CHECK(rs.mdp.n_states == 4);
    CHECK(rs.mdp.reward(0, 3, 1) == doctest::Approx(1.0));

    CHECK_THROWS_AS(make_chain(1, 1, 0.4), std::invalid_argument);
    CHECK_THROWS_AS(make_chain(2, 1, 1.5), std::invalid_argument);
    CHECK_THROWS_AS(make_env("nope", {}), ConfigError);
    CHECK_THROWS_AS(make_env("chain", {{"n", 2}}), ConfigError);
    CHECK(env_registry().size() == 4);
}

TEST_CASE("config parsing and validation errors carry field paths") {
    const auto cfg = parse_experiment_config(chain_config());
    CHECK(cfg.env.name == "chain");
    CHECK(cfg.k_grid == std::vector<long long>{16});

    auto expect_field = [](const std::string& text, const std::string& field) {
        try {
            parse_experiment_config(text);
            FAIL_CHECK("expected ConfigError for " << field);
        } catch (const ConfigError& e) {
            CHECK(e.field == field);
        }
    };
    expect_field("{}", "environment");
    expect_field(R"({"environment": {"name": "chain", "params": {"n":2,"horizon":1,"gap":0.4}},
                     "agent": {"mode": "model_free", "beta": {"mode":"fixed","value":1}},
                     "k_grid": [4, 2], "seeds": [1]})",
                 "k_grid[1]");
    expect_field(R"({"environment": {"name": "chain", "params": {"n":2,"horizon":1,"gap":0.4}},
                     "agent": {"mode": "model_free", "beta": {"mode":"fixed","value":-2}},
                     "k_grid": [4], "seeds": [1]})",
                 "agent.beta.value");
    expect_field(R"({"environment": {"name": "chain", "params": {"n":2,"horizon":1,"gap":0.4}},
                     "agent": {"mode": "model_based", "beta": {"mode":"fixed","value":1}},
                     "k_grid": [4], "seeds": [1]})",
                 "agent.mode");
}

TEST_CASE("config hash tracks semantic fields only") {
    const auto base = parse_experiment_config(chain_config());
    auto out = parse_experiment_config(chain_config(R"(, "output": "somewhere")"));
    CHECK(config_hash(base) == config_hash(out));  // output path excluded

    auto seeds = parse_experiment_config(chain_config(R"(, "baselines": ["uniform-random"])"));
    CHECK(config_hash(base) != config_hash(seeds));

    std::string other = chain_config();
    other.replace(other.find("0.4"), 3, "0.3");
    CHECK(config_hash(base) != config_hash(parse_experiment_config(other)));
}

TEST_CASE("run_experiment: single cell, determinism, baselines") {
    const auto cfg = parse_experiment_config(chain_config());
    const auto logs = run_experiment(cfg);
    REQUIRE(logs.size() == 1);
    CHECK(logs[0].variant == "agent");

    const auto logs2 = run_experiment(cfg);
    CHECK(run_log_to_csv(logs[0]) == run_log_to_csv(logs2[0]));
    CHECK(logs[0].semantically_equal(logs2[0]));

    const auto with_baselines = parse_experiment_config(
        chain_config(R"(, "baselines": ["always-switch", "uniform-random"])"));
    const auto blogs = run_experiment(with_baselines);
    REQUIRE(blogs.size() == 3);
    CHECK(blogs[1].variant == "always-switch");
    CHECK(blogs[1].n_switch_dataset == 16);  // forced switch every episode
    CHECK(blogs[2].variant == "uniform-random");
    const auto star = exact_q_star(cfg.env.mdp);
    const auto uni = exact_uniform_value(cfg.env.mdp);
    CHECK(blogs[2].final_regret ==
          doctest::Approx(16.0 * (star.v[0][0] - uni.v[0][0])));
}

TEST_CASE("csv and sidecar round trip losslessly") {
    auto cfg = parse_experiment_config(chain_config());
    auto logs = run_experiment(cfg);
    RunLog& log = logs[0];
    const std::string csv = run_log_to_csv(log);
    const std::string sidecar = run_log_to_json(log);

    CHECK(csv.rfind("episode,inst_regret,cum_regret,switch_ds,switch_pi,zhat_mass,replan_ms\n",
                    0) == 0);
    const RunLog back = run_log_from_files(csv, sidecar);
    CHECK(back.semantically_equal(log));
    CHECK(run_log_to_csv(back) == csv);

    CHECK(run_file_stem(log).rfind("run_", 0) == 0);
}

TEST_CASE("summarize: fits, conventions, flags") {
    // synthetic agent logs with N_switch = 3 (log K)^2 exactly
    std::vector<RunLog> logs;
    for (long long k : {256, 1024, 4096}) {
        RunLog log;
        log.variant = "agent";
        log.episodes_requested = k;
        const double lk = std::log(static_cast<double>(k));
        log.n_switch_dataset = 0;
        log.final_regret = 0.0;
        log.histogram.counts = {0};
        RunLog exact = log;
        exact.n_switch_dataset = -1;  // placeholder, replaced below
        (void)exact;
        log.n_switch_dataset = static_cast<long long>(std::llround(3.0 * lk * lk));
        logs.push_back(log);
    }
    // use real-valued switches to recover the coefficient exactly: bypass the
    // integer rounding by checking on the utility fit directly
    std::vector<double> x, y;
    for (long long k : {256, 1024, 4096}) {
        const double lk = std::log(static_cast<double>(k));
        x.push_back(lk * lk);
        y.push_back(3.0 * lk * lk);
    }
    const LinearFit fit = fit_line(x, y);
    CHECK(fit.slope == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(std::abs(fit.intercept) <= 1e-9);
    CHECK(fit.r_squared == doctest::Approx(1.0));

    const std::string summary = summarize(logs);
    CHECK(summary.find("switch_fit_logk_squared") != std::string::npos);
    CHECK(summary.find("zero-regret") != std::string::npos);

    // constant switch count: slope 0, R^2 = 1 by convention
    std::vector<RunLog> constant;
    for (long long k : {16, 64}) {
        RunLog log;
        log.variant = "agent";
        log.episodes_requested = k;
        log.n_switch_dataset = 5;
        log.final_regret = 1.0;
        log.histogram.counts = {0};
        constant.push_back(log);
    }
    const std::string const_summary = summarize(constant);
    CHECK(const_summary.find("\"r_squared\": 1.0") != std::string::npos);

    CHECK_THROWS_AS(summarize(std::vector<RunLog>{constant[0]}), std::invalid_argument);
}

TEST_CASE("seed mixing separates grid cells") {
    const std::uint64_t a = mix_seed(1, 256, 0);
    CHECK(a == mix_seed(1, 256, 0));  // pure function
    CHECK(a != mix_seed(1, 512, 0));
    CHECK(a != mix_seed(1, 256, 1));
    CHECK(a != mix_seed(2, 256, 0));
}

TEST_CASE("inline environments parse and validate") {
    const auto env = make_chain(2, 1, 0.4);
    const std::string doc = mdp_to_json_text(env.mdp);
    const std::string cfg_text = R"({
        "environment": {"inline": )" + doc + R"(},
        "agent": {"mode": "model_free", "beta": {"mode": "theory"}},
        "k_grid": [4],
        "seeds": [1]
    })";
    const auto cfg = parse_experiment_config(cfg_text);
    CHECK(cfg.env.mdp.n_states == 2);
    const auto logs = run_experiment(cfg);
    CHECK(logs.size() == 1);
}
