#include "lsvi/function_class.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>

namespace lsvi {

bool operator==(const Covariate& a, const Covariate& b) {
    return a.state == b.state && a.action == b.action && a.value_fn == b.value_fn;
}

bool operator<(const Covariate& a, const Covariate& b) {
    if (a.state != b.state) return a.state < b.state;
    if (a.action != b.action) return a.action < b.action;
    return std::lexicographical_compare(a.value_fn.begin(), a.value_fn.end(),
                                        b.value_fn.begin(), b.value_fn.end());
}

double ConfidenceParams::effective_cap() const {
    return cap > 0.0 ? cap : std::numeric_limits<double>::infinity();
}

int FunctionClass::param_dim() const {
    return tabular() ? tab().cells() : lin().dim;
}

double FunctionClass::eval(const std::vector<double>& param, const Covariate& z) const {
    if (tabular()) return param[tab().cell(z)];
    const auto phi = lin().features(z);
    double x = 0.0;
    for (int j = 0; j < lin().dim; ++j) x += param[j] * phi[j];
    return x;
}

double FunctionClass::diameter_at(const Covariate& z) const {
    if (tabular()) return tab().range;
    const auto phi = lin().features(z);
    double n2 = 0.0;
    for (double p : phi) n2 += p * p;
    return 2.0 * lin().param_bound * std::sqrt(n2);
}

FunctionClass make_tabular_class(int n_states, int n_actions, double range) {
    if (n_states < 1 || n_actions < 1 || range <= 0.0)
        throw std::invalid_argument("tabular class needs positive shape and range");
    return FunctionClass{TabularClass{n_states, n_actions, range}};
}

FunctionClass make_linear_class(int dim, double param_bound, double feature_bound,
                                std::function<std::vector<double>(const Covariate&)> features) {
    if (dim < 1 || param_bound <= 0.0 || feature_bound <= 0.0)
        throw std::invalid_argument("linear class needs positive dim and bounds");
    return FunctionClass{LinearClass{dim, param_bound, feature_bound, std::move(features)}};
}

FunctionClass mixture_induced_class(const LinearMixtureMdp& mix, int h) {
    if (h < 0 || h >= mix.mdp.horizon) throw std::invalid_argument("mixture step out of range");
    auto kernels = std::make_shared<std::vector<std::vector<double>>>(mix.base[h]);
    const int dim = mix.dim;
    const int S = mix.mdp.n_states;
    const int A = mix.mdp.n_actions;
    auto features = [kernels, dim, S, A](const Covariate& z) {
        if (!z.model_based() || static_cast<int>(z.value_fn.size()) != S)
            throw std::invalid_argument("mixture-induced class needs (s,a,V) covariates");
        std::vector<double> phi(dim, 0.0);
        const std::size_t off = static_cast<std::size_t>(z.state * A + z.action) * S;
        for (int j = 0; j < dim; ++j) {
            const double* k = (*kernels)[j].data() + off;
            double x = 0.0;
            for (int t = 0; t < S; ++t) x += k[t] * z.value_fn[t];
            phi[j] = x;
        }
        return phi;
    };
    return make_linear_class(dim, mix.c_theta, std::sqrt(static_cast<double>(mix.mdp.horizon)),
                             std::move(features));
}

double sq_diff_norm(const FunctionClass& cls, const std::vector<double>& p1,
                    const std::vector<double>& p2, const SubsampledDataset& z) {
    double acc = 0.0;
    for (const auto& [cov, m] : z.entries) {
        const double d = cls.eval(p1, cov) - cls.eval(p2, cov);
        acc += static_cast<double>(m) * d * d;
    }
    return acc;
}

std::vector<double> least_squares_fit(const FunctionClass& cls, const RegressionDataset& data) {
    if (cls.tabular()) {
        const auto& t = cls.tab();
        std::vector<double> sum(t.cells(), 0.0);
        std::vector<long long> cnt(t.cells(), 0);
        for (const auto& pt : data) {
            if (!(pt.y >= -1e-9 && pt.y <= t.range + 1e-9))
                throw std::invalid_argument("regression target outside [0, range]");
            const int c = t.cell(pt.x);
            sum[c] += pt.y;
            cnt[c] += 1;
        }
        std::vector<double> param(t.cells(), t.range / 2.0);
        for (int c = 0; c < t.cells(); ++c)
            if (cnt[c] > 0)
                param[c] = std::clamp(sum[c] / static_cast<double>(cnt[c]), 0.0, t.range);
        return param;
    }
    const auto& l = cls.lin();
    if (data.empty()) return std::vector<double>(l.dim, 0.0);
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(l.dim, l.dim);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(l.dim);
    for (const auto& pt : data) {
        if (!std::isfinite(pt.y)) throw std::invalid_argument("regression target not finite");
        const auto phi = l.features(pt.x);
        Eigen::Map<const Eigen::VectorXd> f(phi.data(), l.dim);
        gram.noalias() += f * f.transpose();
        rhs.noalias() += f * pt.y;
    }
    const double ridge = std::max(1e-8 * gram.trace() / l.dim, 1e-12);
    gram.diagonal().array() += ridge;
    Eigen::VectorXd theta = gram.ldlt().solve(rhs);
    const double norm = theta.norm();
    if (norm > l.param_bound) theta *= l.param_bound / norm;
    return std::vector<double>(theta.data(), theta.data() + l.dim);
}

// ---------------------------------------------------------------------------
// Closed-form widths and sensitivities.
//
// Tabular: admissible pairs satisfy min{ sum_z m_z (f1(z)-f2(z))^2, cap } <=
// beta. Only the query cell matters, so the width is sqrt(beta/m), capped by
// the range, and the full range when the query is unseen.
//
// Linear: the confidence set is the ball ||f - center||^2_Z <= beta, so pair
// differences u = theta1 - theta2 carry a squared budget of 4*beta:
//   width = min{ 2B||phi||, 2 sqrt(beta) ||phi||_{(Lambda + ridge I)^{-1}} }.
// The sensitivity sup over ||u|| <= 2B is attained on the boundary, where
//   (u'phi)^2 / (u'Lambda u + beta) = phi' (Lambda + beta/(4B^2) I)^{-1} phi.
// ---------------------------------------------------------------------------

struct ConfidenceEvaluator::Impl {
    FunctionClass cls;
    ConfidenceParams params;
    const SubsampledDataset* data = nullptr;

    // linear-only state
    Eigen::MatrixXd lambda;
    Eigen::LDLT<Eigen::MatrixXd> width_solver;   // Lambda + ridge I
    Eigen::LDLT<Eigen::MatrixXd> sens_solver;    // Lambda + (beta/(4B^2) + ridge) I
    double ridge = 0.0;
};

namespace {

Eigen::MatrixXd build_gram(const LinearClass& l, const SubsampledDataset& z) {
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(l.dim, l.dim);
    for (const auto& [cov, m] : z.entries) {
        const auto phi = l.features(cov);
        Eigen::Map<const Eigen::VectorXd> f(phi.data(), l.dim);
        gram.noalias() += static_cast<double>(m) * (f * f.transpose());
    }
    return gram;
}

}  // namespace

ConfidenceEvaluator::ConfidenceEvaluator(const FunctionClass& cls, const SubsampledDataset& z,
                                         const ConfidenceParams& params)
    : impl_(std::make_unique<Impl>()) {
    if (!(params.beta > 0.0)) throw std::invalid_argument("beta must be positive");
    impl_->cls = cls;
    impl_->params = params;
    impl_->data = &z;
    if (!cls.tabular()) {
        const auto& l = cls.lin();
        impl_->lambda = build_gram(l, z);
        impl_->ridge = std::max(1e-8 * impl_->lambda.trace() / l.dim, 1e-12);
        Eigen::MatrixXd w = impl_->lambda;
        w.diagonal().array() += impl_->ridge;
        impl_->width_solver.compute(w);
        Eigen::MatrixXd m = impl_->lambda;
        m.diagonal().array() +=
            impl_->ridge + params.beta / (4.0 * l.param_bound * l.param_bound);
        impl_->sens_solver.compute(m);
    }
}

ConfidenceEvaluator::~ConfidenceEvaluator() = default;
ConfidenceEvaluator::ConfidenceEvaluator(ConfidenceEvaluator&&) noexcept = default;
ConfidenceEvaluator& ConfidenceEvaluator::operator=(ConfidenceEvaluator&&) noexcept = default;

double ConfidenceEvaluator::width_at(const Covariate& query) const {
    const auto& cls = impl_->cls;
    const auto& p = impl_->params;
    const double cap = p.effective_cap();
    if (cls.tabular()) {
        const auto& t = cls.tab();
        if (p.beta >= cap) return t.range;
        const long long m = impl_->data->multiplicity(query);
        if (m == 0) return t.range;
        return std::min(t.range, std::sqrt(p.beta / static_cast<double>(m)));
    }
    const auto& l = cls.lin();
    const double diam = cls.diameter_at(query);
    if (p.beta >= cap) return diam;
    const auto phi = l.features(query);
    Eigen::Map<const Eigen::VectorXd> f(phi.data(), l.dim);
    const double lev = std::max(0.0, f.dot(impl_->width_solver.solve(f)));
    return std::min(diam, 2.0 * std::sqrt(p.beta * lev));
}

double ConfidenceEvaluator::sensitivity_at(const Covariate& query) const {
    const auto& cls = impl_->cls;
    const auto& p = impl_->params;
    const double cap = p.effective_cap();
    if (cls.tabular()) {
        const double r2 = cls.tab().range * cls.tab().range;
        const double m = static_cast<double>(impl_->data->multiplicity(query));
        const double denom = std::min(m * r2, cap) + p.beta;
        return std::min(1.0, r2 / denom);
    }
    const auto& l = cls.lin();
    const auto phi = l.features(query);
    Eigen::Map<const Eigen::VectorXd> f(phi.data(), l.dim);
    if (f.norm() == 0.0) return 0.0;
    const double b2 = 2.0 * l.param_bound;
    auto ratio = [&](const Eigen::VectorXd& dir) {
        Eigen::VectorXd u = dir.normalized() * b2;
        const double num = u.dot(f);
        const double quad = u.dot(impl_->lambda * u);
        return num * num / (std::min(quad, cap) + p.beta);
    };
    Eigen::VectorXd lev_dir = impl_->sens_solver.solve(f);
    double best = ratio(f);
    if (lev_dir.norm() > 0.0) best = std::max(best, ratio(lev_dir));
    return std::min(1.0, best);
}

double width(const FunctionClass& cls, const SubsampledDataset& z,
             const ConfidenceParams& params, const Covariate& query) {
    return ConfidenceEvaluator(cls, z, params).width_at(query);
}

double sensitivity(const FunctionClass& cls, const SubsampledDataset& z,
                   const ConfidenceParams& params, const Covariate& query) {
    return ConfidenceEvaluator(cls, z, params).sensitivity_at(query);
}

// --------------------------------------------------------------------------
// Covers.
// --------------------------------------------------------------------------

double log_cover_size(const FunctionClass& cls, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
    if (cls.tabular()) {
        const auto& t = cls.tab();
        return t.cells() * std::log(1.0 + t.range / (2.0 * eps));
    }
    const auto& l = cls.lin();
    return l.dim * std::log(1.0 + 2.0 * l.param_bound * l.feature_bound / eps);
}

std::vector<std::vector<double>> cover(const FunctionClass& cls, double eps, std::size_t budget) {
    if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
    if (cls.tabular()) {
        const auto& t = cls.tab();
        const int per = static_cast<int>(std::ceil(t.range / (2.0 * eps) - 1e-12)) + 1;
        const double total = std::pow(static_cast<double>(per), t.cells());
        if (total > static_cast<double>(budget))
            throw BudgetExceeded("tabular cover of size " + std::to_string(total) +
                                 " exceeds budget");
        std::vector<double> grid(per);
        for (int i = 0; i < per; ++i) grid[i] = std::min(i * 2.0 * eps, t.range);
        std::vector<std::vector<double>> net;
        net.reserve(static_cast<std::size_t>(total));
        std::vector<int> idx(t.cells(), 0);
        while (true) {
            std::vector<double> param(t.cells());
            for (int c = 0; c < t.cells(); ++c) param[c] = grid[idx[c]];
            net.push_back(std::move(param));
            int c = 0;
            while (c < t.cells() && ++idx[c] == per) idx[c++] = 0;
            if (c == t.cells()) break;
        }
        return net;
    }
    const auto& l = cls.lin();
    // grid fine enough that projecting out-of-ball corners back onto the ball
    // still leaves every member within eps in sup norm
    const double step = eps / (std::sqrt(static_cast<double>(l.dim)) * l.feature_bound);
    const int per = static_cast<int>(std::ceil(2.0 * l.param_bound / step)) + 1;
    const double total = std::pow(static_cast<double>(per), l.dim);
    if (total > static_cast<double>(budget))
        throw BudgetExceeded("linear cover of size " + std::to_string(total) + " exceeds budget");
    std::vector<std::vector<double>> net;
    net.reserve(static_cast<std::size_t>(total));
    std::vector<int> idx(l.dim, 0);
    while (true) {
        std::vector<double> theta(l.dim);
        double norm2 = 0.0;
        for (int j = 0; j < l.dim; ++j) {
            theta[j] = -l.param_bound + idx[j] * step;
            norm2 += theta[j] * theta[j];
        }
        const double norm = std::sqrt(norm2);
        if (norm > l.param_bound)
            for (double& x : theta) x *= l.param_bound / norm;
        net.push_back(std::move(theta));
        int j = 0;
        while (j < l.dim && ++idx[j] == per) idx[j++] = 0;
        if (j == l.dim) break;
    }
    return net;
}

Covariate snap_to_net(const Covariate& z, double /*eps*/) {
    if (z.model_based())
        throw std::invalid_argument("snap_to_net applies to model-free covariates");
    return z;
}

// --------------------------------------------------------------------------
// Brute-force oracles. Tabular: a difference supported off the query cell
// only consumes budget, so the search is a 1-D grid over the query-cell
// difference. Linear: the objective is scale-monotone along rays, so the
// search is over boundary scalings of a direction grid plus local polish.
// --------------------------------------------------------------------------

namespace {

constexpr double kOracleGridSteps = 20000.0;

void check_oracle_budget(const FunctionClass& cls) {
    if (cls.tabular()) {
        if (cls.tab().cells() > 12)
            throw BudgetExceeded("brute-force oracle limited to tabular classes with <= 12 cells");
    } else if (cls.lin().dim > 3) {
        throw BudgetExceeded("brute-force oracle limited to linear classes with dim <= 3");
    }
}

std::vector<Eigen::VectorXd> direction_grid(int dim) {
    std::vector<Eigen::VectorXd> dirs;
    if (dim == 1) {
        dirs.emplace_back(Eigen::VectorXd::Ones(1));
    } else if (dim == 2) {
        const int n = 8192;
        dirs.reserve(n);
        for (int i = 0; i < n; ++i) {
            const double a = 2.0 * M_PI * i / n;
            Eigen::VectorXd v(2);
            v << std::cos(a), std::sin(a);
            dirs.push_back(std::move(v));
        }
    } else {
        const int n = 40000;  // Fibonacci sphere
        dirs.reserve(n);
        const double golden = M_PI * (3.0 - std::sqrt(5.0));
        for (int i = 0; i < n; ++i) {
            const double y = 1.0 - 2.0 * (i + 0.5) / n;
            const double r = std::sqrt(std::max(0.0, 1.0 - y * y));
            const double a = golden * i;
            Eigen::VectorXd v(3);
            v << r * std::cos(a), y, r * std::sin(a);
            dirs.push_back(std::move(v));
        }
    }
    return dirs;
}

// Hill-climb on the sphere around the best grid direction; handles the kinks
// where the binding constraint switches.
template <typename F>
double polish(const F& value, Eigen::VectorXd v, double best, int dim) {
    if (dim == 1) return best;
    std::mt19937_64 rng(0x5eedULL);
    std::normal_distribution<double> gauss(0.0, 1.0);
    double rho = 0.05;
    while (rho > 1e-7) {
        bool improved = false;
        for (int trial = 0; trial < 12; ++trial) {
            Eigen::VectorXd cand = v;
            for (int j = 0; j < dim; ++j) cand[j] += rho * gauss(rng);
            cand.normalize();
            const double val = value(cand);
            if (val > best) {
                best = val;
                v = cand;
                improved = true;
            }
        }
        if (!improved) rho *= 0.6;
    }
    return best;
}

}  // namespace

double brute_force_width(const FunctionClass& cls, const SubsampledDataset& z,
                         const ConfidenceParams& params, const Covariate& query) {
    if (!(params.beta > 0.0)) throw std::invalid_argument("beta must be positive");
    check_oracle_budget(cls);
    if (cls.tabular()) {
        const auto& t = cls.tab();
        const double m = static_cast<double>(z.multiplicity(query));
        const double cap = params.effective_cap();
        double best = 0.0;
        for (int i = 0; i <= static_cast<int>(kOracleGridSteps); ++i) {
            const double d = t.range * i / kOracleGridSteps;
            if (std::min(m * d * d, cap) <= params.beta) best = std::max(best, d);
        }
        return best;
    }
    const auto& l = cls.lin();
    const Eigen::MatrixXd lambda = build_gram(l, z);
    const auto phi_vec = l.features(query);
    Eigen::Map<const Eigen::VectorXd> phi(phi_vec.data(), l.dim);
    const double budget = 4.0 * params.beta;  // pair budget, see note above
    const double cap = params.effective_cap();
    const double diam = cls.diameter_at(query);
    if (cap <= budget) return diam;
    // pairs are constrained by the data norm; the parameter ball enters
    // through the final diameter clip, matching the width definition
    auto value = [&](const Eigen::VectorXd& v) {
        const double quad = v.dot(lambda * v);
        const double proj = std::abs(v.dot(phi));
        if (quad <= 1e-300) return proj > 0.0 ? diam : 0.0;
        return std::min(diam, std::sqrt(budget / quad) * proj);
    };
    double best = 0.0;
    Eigen::VectorXd best_dir = Eigen::VectorXd::Unit(l.dim, 0);
    for (const auto& v : direction_grid(l.dim)) {
        const double val = value(v);
        if (val > best) { best = val; best_dir = v; }
    }
    return polish(value, best_dir, best, l.dim);
}

double brute_force_sensitivity(const FunctionClass& cls, const SubsampledDataset& z,
                               const ConfidenceParams& params, const Covariate& query) {
    if (!(params.beta > 0.0)) throw std::invalid_argument("beta must be positive");
    check_oracle_budget(cls);
    if (cls.tabular()) {
        const auto& t = cls.tab();
        const double m = static_cast<double>(z.multiplicity(query));
        const double cap = params.effective_cap();
        double best = 0.0;
        for (int i = 0; i <= static_cast<int>(kOracleGridSteps); ++i) {
            const double d = t.range * i / kOracleGridSteps;
            const double ratio = d * d / (std::min(m * d * d, cap) + params.beta);
            best = std::max(best, ratio);
        }
        return std::min(1.0, best);
    }
    const auto& l = cls.lin();
    const Eigen::MatrixXd lambda = build_gram(l, z);
    const auto phi_vec = l.features(query);
    Eigen::Map<const Eigen::VectorXd> phi(phi_vec.data(), l.dim);
    const double b2 = 2.0 * l.param_bound;
    const double cap = params.effective_cap();
    auto value = [&](const Eigen::VectorXd& v) {
        const Eigen::VectorXd u = v * b2;  // ratio grows along rays, boundary is optimal
        const double num = u.dot(phi);
        const double quad = u.dot(lambda * u);
        return num * num / (std::min(quad, cap) + params.beta);
    };
    double best = 0.0;
    Eigen::VectorXd best_dir = Eigen::VectorXd::Unit(l.dim, 0);
    for (const auto& v : direction_grid(l.dim)) {
        const double val = value(v);
        if (val > best) { best = val; best_dir = v; }
    }
    return std::min(1.0, polish(value, best_dir, best, l.dim));
}

}  // namespace lsvi
