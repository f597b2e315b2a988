#include "lsvi/oracle.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>

namespace lsvi {

namespace {

// Largest |f1(x) - f2(x)| over pairs with ||f1 - f2||_prefix <= eps, plus the
// achieving pair. The search mirrors the brute-force width oracles: the
// tabular case reduces to the query cell, the linear case to a direction
// scan with boundary scaling.
EluderCertificate independence_certificate(const FunctionClass& cls,
                                           const SubsampledDataset& prefix, double eps,
                                           const Covariate& x) {
    EluderCertificate cert;
    if (cls.tabular()) {
        const auto& t = cls.tab();
        const double m = static_cast<double>(prefix.multiplicity(x));
        double d;
        if (m == 0.0) d = t.range;
        else d = std::min(t.range, eps / std::sqrt(m));
        cert.f1.assign(t.cells(), 0.0);
        cert.f2.assign(t.cells(), 0.0);
        cert.f1[t.cell(x)] = d;
        cert.separation = d;
        cert.prefix_norm = std::sqrt(m) * d;
        return cert;
    }
    const auto& l = cls.lin();
    Eigen::MatrixXd lambda = Eigen::MatrixXd::Zero(l.dim, l.dim);
    for (const auto& [cov, m] : prefix.entries) {
        const auto phi = l.features(cov);
        Eigen::Map<const Eigen::VectorXd> f(phi.data(), l.dim);
        lambda.noalias() += static_cast<double>(m) * (f * f.transpose());
    }
    const auto phi_vec = l.features(x);
    Eigen::Map<const Eigen::VectorXd> phi(phi_vec.data(), l.dim);
    const double b2 = 2.0 * l.param_bound;
    // exact maximizer over u with u'Lambda u <= eps^2, ||u|| <= b2:
    // along direction v, the best scale is min(b2, eps / ||v||_Lambda)
    Eigen::MatrixXd reg = lambda;
    reg.diagonal().array() += std::max(1e-12, 1e-10 * lambda.trace() / l.dim) +
                              eps * eps / (b2 * b2);
    Eigen::VectorXd dir = reg.ldlt().solve(phi);
    if (dir.norm() == 0.0) dir = phi;
    if (dir.norm() == 0.0) {
        cert.f1.assign(l.dim, 0.0);
        cert.f2.assign(l.dim, 0.0);
        return cert;
    }
    auto eval_dir = [&](const Eigen::VectorXd& v) {
        const double quad = v.dot(lambda * v);
        const double scale = quad <= 0.0 ? b2 : std::min(b2, eps / std::sqrt(quad));
        return std::make_pair(scale * std::abs(v.dot(phi)), scale);
    };
    Eigen::VectorXd best_dir = dir.normalized();
    auto [best, scale] = eval_dir(best_dir);
    // compare against the raw feature direction too
    Eigen::VectorXd alt = phi.normalized();
    if (auto [v, s] = eval_dir(alt); v > best) { best = v; scale = s; best_dir = alt; }
    Eigen::VectorXd u = best_dir * scale;
    if (u.dot(phi) < 0) u = -u;
    cert.f1.resize(l.dim);
    cert.f2.resize(l.dim);
    for (int j = 0; j < l.dim; ++j) {
        cert.f1[j] = 0.5 * u[j];
        cert.f2[j] = -0.5 * u[j];
    }
    cert.separation = std::abs(u.dot(phi));
    cert.prefix_norm = std::sqrt(std::max(0.0, u.dot(lambda * u)));
    return cert;
}

constexpr double kCertTol = 1e-6;

}  // namespace

EluderEstimate eluder_dimension_estimate(const FunctionClass& cls, double eps,
                                         const std::vector<Covariate>& pool,
                                         std::size_t budget) {
    if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
    if (cls.tabular()) {
        if (cls.tab().cells() > 12)
            throw BudgetExceeded("eluder oracle limited to tabular classes with <= 12 cells");
    } else if (cls.lin().dim > 3) {
        throw BudgetExceeded("eluder oracle limited to linear classes with dim <= 3");
    }
    EluderEstimate est;
    est.eps = eps;
    SubsampledDataset prefix;
    bool grew = true;
    while (grew) {
        grew = false;
        for (const auto& x : pool) {
            EluderCertificate cert = independence_certificate(cls, prefix, eps, x);
            if (cert.separation > eps + kCertTol) {
                if (est.sequence.size() >= budget)
                    throw BudgetExceeded("eluder sequence exceeded budget");
                est.sequence.push_back(x);
                est.certificates.push_back(std::move(cert));
                prefix.add(x, 1);
                grew = true;
            }
        }
    }
    return est;
}

bool verify_eluder_certificates(const FunctionClass& cls, const EluderEstimate& est,
                                double tol) {
    SubsampledDataset prefix;
    for (std::size_t i = 0; i < est.sequence.size(); ++i) {
        const auto& cert = est.certificates[i];
        const double norm2 = sq_diff_norm(cls, cert.f1, cert.f2, prefix);
        const double sep =
            std::abs(cls.eval(cert.f1, est.sequence[i]) - cls.eval(cert.f2, est.sequence[i]));
        if (std::sqrt(norm2) > est.eps + tol) return false;
        if (sep <= est.eps - tol) return false;
        prefix.add(est.sequence[i], 1);
    }
    return true;
}

SandwichReport sandwich_check(const FunctionClass& cls, const SubsampledDataset& full,
                              const SubsampledDataset& sub, const ConfidenceParams& params,
                              double net_eps, const std::vector<Covariate>& queries,
                              std::size_t budget) {
    const auto net = cover(cls, net_eps, budget);
    SandwichReport report;
    report.net_size = net.size();
    report.lower_width.assign(queries.size(), 0.0);
    report.middle_width.assign(queries.size(), 0.0);
    report.upper_width.assign(queries.size(), 0.0);
    const double beta = params.beta;
    const double cap = params.effective_cap();
    for (std::size_t i = 0; i < net.size(); ++i) {
        for (std::size_t j = i + 1; j < net.size(); ++j) {
            const double full_norm = sq_diff_norm(cls, net[i], net[j], full);
            const double sub_norm = std::min(sq_diff_norm(cls, net[i], net[j], sub), cap);
            ++report.pairs_checked;
            const bool in_under = full_norm <= beta / 100.0;
            const bool in_hat = sub_norm <= beta;
            const bool in_over = full_norm <= 100.0 * beta;
            if (in_under && !in_hat)
                report.violations.push_back({i, j, "underline-not-in-hat"});
            if (in_hat && !in_over)
                report.violations.push_back({i, j, "hat-not-in-overline"});
            if (in_under || in_hat || in_over) {
                for (std::size_t q = 0; q < queries.size(); ++q) {
                    const double gap =
                        std::abs(cls.eval(net[i], queries[q]) - cls.eval(net[j], queries[q]));
                    if (in_under) report.lower_width[q] = std::max(report.lower_width[q], gap);
                    if (in_hat) report.middle_width[q] = std::max(report.middle_width[q], gap);
                    if (in_over) report.upper_width[q] = std::max(report.upper_width[q], gap);
                }
            }
        }
    }
    return report;
}

std::size_t deterministic_policy_count(const EpisodicMdp& mdp) {
    const double count = std::pow(static_cast<double>(mdp.n_actions),
                                  static_cast<double>(mdp.n_states) * mdp.horizon);
    if (count > 1e18) return std::numeric_limits<std::size_t>::max();
    return static_cast<std::size_t>(count);
}

Policy policy_from_index(const EpisodicMdp& mdp, std::size_t index) {
    Policy pi;
    pi.action.assign(mdp.horizon, std::vector<int>(mdp.n_states, 0));
    for (int h = 0; h < mdp.horizon; ++h)
        for (int s = 0; s < mdp.n_states; ++s) {
            pi.action[h][s] = static_cast<int>(index % mdp.n_actions);
            index /= mdp.n_actions;
        }
    return pi;
}

std::vector<double> brute_force_policy_values(const EpisodicMdp& mdp, std::size_t budget) {
    const std::size_t count = deterministic_policy_count(mdp);
    if (count > budget)
        throw BudgetExceeded("policy enumeration of size " + std::to_string(count) +
                             " exceeds budget " + std::to_string(budget));
    std::vector<double> values(count, 0.0);
    std::vector<double> dist(mdp.n_states), next(mdp.n_states);
    for (std::size_t idx = 0; idx < count; ++idx) {
        const Policy pi = policy_from_index(mdp, idx);
        std::fill(dist.begin(), dist.end(), 0.0);
        dist[mdp.initial_state] = 1.0;
        double total = 0.0;
        for (int h = 0; h < mdp.horizon; ++h) {
            std::fill(next.begin(), next.end(), 0.0);
            for (int s = 0; s < mdp.n_states; ++s) {
                if (dist[s] == 0.0) continue;
                const int a = pi.action[h][s];
                total += dist[s] * mdp.reward(h, s, a);
                const double* p = mdp.row(h, s, a);
                for (int t = 0; t < mdp.n_states; ++t) next[t] += dist[s] * p[t];
            }
            std::swap(dist, next);
        }
        values[idx] = total;
    }
    return values;
}

}  // namespace lsvi
