#include "lsvi/mdp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "json.hpp"

namespace lsvi {

namespace {

constexpr double kRowSumTol = 1e-12;
constexpr double kZeroGapTol = 1e-12;

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument(msg); }

}  // namespace

EpisodicMdp::EpisodicMdp(int states, int actions, int H, int s1,
                         std::vector<std::vector<double>> r,
                         std::vector<std::vector<double>> p)
    : n_states(states), n_actions(actions), horizon(H), initial_state(s1),
      rewards(std::move(r)), transitions(std::move(p)) {
    validate();
}

void EpisodicMdp::validate() const {
    if (horizon < 1) fail("horizon must be >= 1, got " + std::to_string(horizon));
    if (n_states < 1) fail("n_states must be >= 1, got " + std::to_string(n_states));
    if (n_actions < 1) fail("n_actions must be >= 1, got " + std::to_string(n_actions));
    if (initial_state < 0 || initial_state >= n_states)
        fail("initial_state " + std::to_string(initial_state) + " out of range");
    if (static_cast<int>(rewards.size()) != horizon)
        fail("rewards must have horizon entries");
    if (static_cast<int>(transitions.size()) != horizon)
        fail("transitions must have horizon entries");
    const std::size_t sa = static_cast<std::size_t>(n_states) * n_actions;
    for (int h = 0; h < horizon; ++h) {
        if (rewards[h].size() != sa)
            fail("rewards[" + std::to_string(h) + "] has wrong size");
        if (transitions[h].size() != sa * n_states)
            fail("transitions[" + std::to_string(h) + "] has wrong size");
        for (int s = 0; s < n_states; ++s) {
            for (int a = 0; a < n_actions; ++a) {
                const double r = rewards[h][cell(s, a)];
                if (!(r >= 0.0 && r <= 1.0))
                    fail("reward out of [0,1] at h=" + std::to_string(h) +
                         " s=" + std::to_string(s) + " a=" + std::to_string(a));
                const double* p = row(h, s, a);
                double sum = 0.0;
                for (int t = 0; t < n_states; ++t) {
                    if (p[t] < -kRowSumTol || p[t] > 1.0 + kRowSumTol)
                        fail("transition probability out of [0,1] at h=" + std::to_string(h) +
                             " s=" + std::to_string(s) + " a=" + std::to_string(a) +
                             " s'=" + std::to_string(t));
                    sum += p[t];
                }
                if (std::abs(sum - 1.0) > kRowSumTol)
                    fail("transition row does not sum to 1 at h=" + std::to_string(h) +
                         " s=" + std::to_string(s) + " a=" + std::to_string(a) +
                         " (sum=" + std::to_string(sum) + ")");
            }
        }
    }
}

Policy Policy::constant(const EpisodicMdp& mdp, int a) {
    Policy pi;
    pi.action.assign(mdp.horizon, std::vector<int>(mdp.n_states, a));
    return pi;
}

void Policy::validate(const EpisodicMdp& mdp) const {
    if (static_cast<int>(action.size()) != mdp.horizon)
        fail("policy must have horizon step maps");
    for (int h = 0; h < mdp.horizon; ++h) {
        if (static_cast<int>(action[h].size()) != mdp.n_states)
            fail("policy step " + std::to_string(h) + " has wrong size");
        for (int s = 0; s < mdp.n_states; ++s)
            if (action[h][s] < 0 || action[h][s] >= mdp.n_actions)
                fail("policy action out of range at h=" + std::to_string(h) +
                     " s=" + std::to_string(s));
    }
}

namespace {

ValueTables make_tables(const EpisodicMdp& mdp) {
    ValueTables t;
    t.q.assign(mdp.horizon + 1,
               std::vector<double>(static_cast<std::size_t>(mdp.n_states) * mdp.n_actions, 0.0));
    t.v.assign(mdp.horizon + 1, std::vector<double>(mdp.n_states, 0.0));
    return t;
}

double backup(const EpisodicMdp& mdp, int h, int s, int a, const std::vector<double>& v_next) {
    const double* p = mdp.row(h, s, a);
    double x = mdp.reward(h, s, a);
    for (int t = 0; t < mdp.n_states; ++t) x += p[t] * v_next[t];
    return x;
}

}  // namespace

ValueTables exact_q_star(const EpisodicMdp& mdp) {
    ValueTables t = make_tables(mdp);
    for (int h = mdp.horizon - 1; h >= 0; --h) {
        for (int s = 0; s < mdp.n_states; ++s) {
            double best = -std::numeric_limits<double>::infinity();
            for (int a = 0; a < mdp.n_actions; ++a) {
                const double q = backup(mdp, h, s, a, t.v[h + 1]);
                t.q[h][mdp.cell(s, a)] = q;
                best = std::max(best, q);
            }
            t.v[h][s] = best;
        }
    }
    return t;
}

ValueTables exact_policy_value(const EpisodicMdp& mdp, const Policy& pi) {
    pi.validate(mdp);
    ValueTables t = make_tables(mdp);
    for (int h = mdp.horizon - 1; h >= 0; --h) {
        for (int s = 0; s < mdp.n_states; ++s) {
            for (int a = 0; a < mdp.n_actions; ++a)
                t.q[h][mdp.cell(s, a)] = backup(mdp, h, s, a, t.v[h + 1]);
            t.v[h][s] = t.q[h][mdp.cell(s, pi.action[h][s])];
        }
    }
    return t;
}

ValueTables exact_uniform_value(const EpisodicMdp& mdp) {
    ValueTables t = make_tables(mdp);
    for (int h = mdp.horizon - 1; h >= 0; --h) {
        for (int s = 0; s < mdp.n_states; ++s) {
            double avg = 0.0;
            for (int a = 0; a < mdp.n_actions; ++a) {
                const double q = backup(mdp, h, s, a, t.v[h + 1]);
                t.q[h][mdp.cell(s, a)] = q;
                avg += q;
            }
            t.v[h][s] = avg / mdp.n_actions;
        }
    }
    return t;
}

Policy greedy_policy(const EpisodicMdp& mdp, const ValueTables& tables) {
    Policy pi;
    pi.action.assign(mdp.horizon, std::vector<int>(mdp.n_states, 0));
    for (int h = 0; h < mdp.horizon; ++h) {
        for (int s = 0; s < mdp.n_states; ++s) {
            int best = 0;
            // lowest index wins ties
            for (int a = 1; a < mdp.n_actions; ++a)
                if (tables.q[h][mdp.cell(s, a)] > tables.q[h][mdp.cell(s, best)]) best = a;
            pi.action[h][s] = best;
        }
    }
    return pi;
}

std::vector<std::vector<double>> gaps(const EpisodicMdp& mdp) {
    const ValueTables star = exact_q_star(mdp);
    std::vector<std::vector<double>> g(mdp.horizon);
    for (int h = 0; h < mdp.horizon; ++h) {
        g[h].resize(star.q[h].size());
        for (int s = 0; s < mdp.n_states; ++s)
            for (int a = 0; a < mdp.n_actions; ++a)
                g[h][mdp.cell(s, a)] = star.v[h][s] - star.q[h][mdp.cell(s, a)];
    }
    return g;
}

double gap_min(const std::vector<std::vector<double>>& gap_table) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& row : gap_table)
        for (double g : row)
            if (g > kZeroGapTol) best = std::min(best, g);
    return best;
}

double gap_min(const EpisodicMdp& mdp) { return gap_min(gaps(mdp)); }

Trajectory sample_episode(const EpisodicMdp& mdp, const Policy& pi, std::mt19937_64& rng) {
    pi.validate(mdp);
    Trajectory traj;
    traj.reserve(mdp.horizon);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    int s = mdp.initial_state;
    for (int h = 0; h < mdp.horizon; ++h) {
        const int a = pi.action[h][s];
        const double* p = mdp.row(h, s, a);
        const double u = unif(rng);
        double acc = 0.0;
        int next = mdp.n_states - 1;
        for (int t = 0; t < mdp.n_states; ++t) {
            acc += p[t];
            if (u < acc) { next = t; break; }
        }
        traj.push_back({h, s, a, mdp.reward(h, s, a), next});
        s = next;
    }
    return traj;
}

LinearMixtureMdp::LinearMixtureMdp(int d, double bound, std::vector<double> theta_star,
                                   std::vector<std::vector<std::vector<double>>> base_kernels,
                                   int s1, std::vector<std::vector<double>> r)
    : dim(d), c_theta(bound), theta(std::move(theta_star)), base(std::move(base_kernels)) {
    if (dim < 1) fail("mixture dimension must be >= 1");
    if (static_cast<int>(theta.size()) != dim) fail("theta has wrong size");
    if (base.empty()) fail("mixture needs at least one step of base kernels");
    const int H = static_cast<int>(base.size());
    for (int h = 0; h < H; ++h)
        if (static_cast<int>(base[h].size()) != dim)
            fail("base[" + std::to_string(h) + "] must have dim kernels");
    if (r.empty() || r[0].empty()) fail("mixture rewards missing");
    // infer state/action counts from the reward table and first kernel
    const std::size_t sa = r[0].size();
    const std::size_t n_s = base[0][0].size() / sa;
    const int states = static_cast<int>(n_s);
    const int actions = static_cast<int>(sa / n_s);
    // mix the kernel
    std::vector<std::vector<double>> p(H, std::vector<double>(sa * states, 0.0));
    for (int h = 0; h < H; ++h) {
        for (int j = 0; j < dim; ++j) {
            if (base[h][j].size() != sa * n_s)
                fail("base kernel has wrong size at h=" + std::to_string(h) +
                     " j=" + std::to_string(j));
            for (std::size_t i = 0; i < base[h][j].size(); ++i)
                p[h][i] += theta[j] * base[h][j][i];
        }
    }
    mdp = EpisodicMdp(states, actions, H, s1, std::move(r), std::move(p));
    validate();
}

std::vector<double> LinearMixtureMdp::phi_v(int h, int s, int a,
                                            const std::vector<double>& v) const {
    std::vector<double> out(dim, 0.0);
    const std::size_t off = static_cast<std::size_t>(mdp.cell(s, a)) * mdp.n_states;
    for (int j = 0; j < dim; ++j) {
        const double* k = base[h][j].data() + off;
        double x = 0.0;
        for (int t = 0; t < mdp.n_states; ++t) x += k[t] * v[t];
        out[j] = x;
    }
    return out;
}

void LinearMixtureMdp::validate() const {
    double norm = 0.0;
    for (double t : theta) norm += t * t;
    if (std::sqrt(norm) > c_theta * (1.0 + 1e-9))
        fail("||theta*|| exceeds the declared bound");
    // feature norm bound: phi_V coordinates are maximized coordinatewise by
    // V = H on the positive part and 0 on the negative part of each kernel row
    const double H = mdp.horizon;
    for (int h = 0; h < mdp.horizon; ++h) {
        for (int s = 0; s < mdp.n_states; ++s) {
            for (int a = 0; a < mdp.n_actions; ++a) {
                const std::size_t off = static_cast<std::size_t>(mdp.cell(s, a)) * mdp.n_states;
                double sq = 0.0;
                for (int j = 0; j < dim; ++j) {
                    double pos = 0.0, neg = 0.0;
                    for (int t = 0; t < mdp.n_states; ++t) {
                        const double x = base[h][j][off + t];
                        if (x > 0) pos += x; else neg -= x;
                    }
                    const double extreme = H * std::max(pos, neg);
                    sq += extreme * extreme;
                }
                if (std::sqrt(sq) > std::sqrt(H) * (1.0 + 1e-9))
                    fail("||phi_V|| can exceed sqrt(H) at h=" + std::to_string(h) +
                         " s=" + std::to_string(s) + " a=" + std::to_string(a));
            }
        }
    }
}

namespace {

using nlohmann::json;

json parse(const std::string& text) {
    json j = json::parse(text, nullptr, true, true);
    return j;
}

}  // namespace

EpisodicMdp mdp_from_json_text(const std::string& text) {
    const json j = parse(text);
    for (const char* key : {"n_states", "n_actions", "horizon", "rewards", "transitions",
                            "initial_state"})
        if (!j.contains(key)) fail(std::string("mdp document missing field '") + key + "'");
    const int S = j["n_states"].get<int>();
    const int A = j["n_actions"].get<int>();
    const int H = j["horizon"].get<int>();
    std::vector<std::vector<double>> r(H), p(H);
    const auto& jr = j["rewards"];
    const auto& jp = j["transitions"];
    if (static_cast<int>(jr.size()) != H) fail("rewards must have horizon entries");
    if (static_cast<int>(jp.size()) != H) fail("transitions must have horizon entries");
    for (int h = 0; h < H; ++h) {
        if (static_cast<int>(jr[h].size()) != S) fail("rewards[" + std::to_string(h) + "] needs n_states rows");
        if (static_cast<int>(jp[h].size()) != S) fail("transitions[" + std::to_string(h) + "] needs n_states rows");
        r[h].resize(static_cast<std::size_t>(S) * A);
        p[h].resize(static_cast<std::size_t>(S) * A * S);
        for (int s = 0; s < S; ++s) {
            if (static_cast<int>(jr[h][s].size()) != A)
                fail("rewards[" + std::to_string(h) + "][" + std::to_string(s) + "] needs n_actions entries");
            if (static_cast<int>(jp[h][s].size()) != A)
                fail("transitions[" + std::to_string(h) + "][" + std::to_string(s) + "] needs n_actions entries");
            for (int a = 0; a < A; ++a) {
                r[h][s * A + a] = jr[h][s][a].get<double>();
                if (static_cast<int>(jp[h][s][a].size()) != S)
                    fail("transitions[" + std::to_string(h) + "][" + std::to_string(s) + "][" +
                         std::to_string(a) + "] needs n_states entries");
                for (int t = 0; t < S; ++t)
                    p[h][(static_cast<std::size_t>(s) * A + a) * S + t] = jp[h][s][a][t].get<double>();
            }
        }
    }
    return EpisodicMdp(S, A, H, j["initial_state"].get<int>(), std::move(r), std::move(p));
}

std::string mdp_to_json_text(const EpisodicMdp& mdp) {
    json j;
    j["n_states"] = mdp.n_states;
    j["n_actions"] = mdp.n_actions;
    j["horizon"] = mdp.horizon;
    j["initial_state"] = mdp.initial_state;
    json jr = json::array(), jp = json::array();
    for (int h = 0; h < mdp.horizon; ++h) {
        json rh = json::array(), ph = json::array();
        for (int s = 0; s < mdp.n_states; ++s) {
            json rs = json::array(), ps = json::array();
            for (int a = 0; a < mdp.n_actions; ++a) {
                rs.push_back(mdp.reward(h, s, a));
                json row = json::array();
                const double* p = mdp.row(h, s, a);
                for (int t = 0; t < mdp.n_states; ++t) row.push_back(p[t]);
                ps.push_back(std::move(row));
            }
            rh.push_back(std::move(rs));
            ph.push_back(std::move(ps));
        }
        jr.push_back(std::move(rh));
        jp.push_back(std::move(ph));
    }
    j["rewards"] = std::move(jr);
    j["transitions"] = std::move(jp);
    return j.dump(2);
}

LinearMixtureMdp mixture_from_json_text(const std::string& text) {
    const json j = parse(text);
    for (const char* key : {"d", "theta", "base_kernels", "c_theta", "n_states", "n_actions",
                            "horizon", "rewards", "initial_state"})
        if (!j.contains(key)) fail(std::string("mixture document missing field '") + key + "'");
    const int d = j["d"].get<int>();
    const int S = j["n_states"].get<int>();
    const int A = j["n_actions"].get<int>();
    const int H = j["horizon"].get<int>();
    std::vector<double> theta = j["theta"].get<std::vector<double>>();
    std::vector<std::vector<std::vector<double>>> base(
        H, std::vector<std::vector<double>>(d, std::vector<double>(static_cast<std::size_t>(S) * A * S)));
    const auto& jb = j["base_kernels"];
    if (static_cast<int>(jb.size()) != H) fail("base_kernels must have horizon entries");
    for (int h = 0; h < H; ++h) {
        if (static_cast<int>(jb[h].size()) != d) fail("base_kernels[" + std::to_string(h) + "] needs d kernels");
        for (int jj = 0; jj < d; ++jj)
            for (int s = 0; s < S; ++s)
                for (int a = 0; a < A; ++a)
                    for (int t = 0; t < S; ++t)
                        base[h][jj][(static_cast<std::size_t>(s) * A + a) * S + t] =
                            jb[h][jj][s][a][t].get<double>();
    }
    std::vector<std::vector<double>> r(H, std::vector<double>(static_cast<std::size_t>(S) * A));
    for (int h = 0; h < H; ++h)
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < A; ++a) r[h][s * A + a] = j["rewards"][h][s][a].get<double>();
    return LinearMixtureMdp(d, j["c_theta"].get<double>(), std::move(theta), std::move(base),
                            j["initial_state"].get<int>(), std::move(r));
}

std::string mixture_to_json_text(const LinearMixtureMdp& mix) {
    json j = json::parse(mdp_to_json_text(mix.mdp));
    j["d"] = mix.dim;
    j["c_theta"] = mix.c_theta;
    j["theta"] = mix.theta;
    json jb = json::array();
    const int S = mix.mdp.n_states, A = mix.mdp.n_actions;
    for (int h = 0; h < mix.mdp.horizon; ++h) {
        json bh = json::array();
        for (int jj = 0; jj < mix.dim; ++jj) {
            json bs = json::array();
            for (int s = 0; s < S; ++s) {
                json ba = json::array();
                for (int a = 0; a < A; ++a) {
                    json row = json::array();
                    for (int t = 0; t < S; ++t)
                        row.push_back(mix.base[h][jj][(static_cast<std::size_t>(s) * A + a) * S + t]);
                    ba.push_back(std::move(row));
                }
                bs.push_back(std::move(ba));
            }
            bh.push_back(std::move(bs));
        }
        jb.push_back(std::move(bh));
    }
    j.erase("transitions");
    j["base_kernels"] = std::move(jb);
    return j.dump(2);
}

}  // namespace lsvi
