#pragma once

#include <functional>
#include <map>
#include <memory>
#include <random>
#include <stdexcept>
#include <variant>
#include <vector>

#include "lsvi/mdp.hpp"

namespace lsvi {

struct BudgetExceeded : std::runtime_error {
    explicit BudgetExceeded(const std::string& what) : std::runtime_error(what) {}
};

// A regression/bonus covariate. Model-free: a state-action pair.
// Model-based: (s, a, V) where V is a value table over states bounded by H.
struct Covariate {
    int state = 0;
    int action = 0;
    std::vector<double> value_fn;  // empty for model-free

    bool model_based() const { return !value_fn.empty(); }
};

bool operator==(const Covariate& a, const Covariate& b);
bool operator<(const Covariate& a, const Covariate& b);

struct RegressionPoint {
    Covariate x;
    double y = 0.0;
};
using RegressionDataset = std::vector<RegressionPoint>;

// Multiplicity-weighted covariate multiset built by the online sampler.
// Append-only; multiplicities are the reciprocal 1/p of an inclusion
// probability, so they are positive integers.
struct SubsampledDataset {
    std::map<Covariate, long long> entries;
    long long insert_events = 0;
    long long total_mass = 0;

    void add(const Covariate& z, long long copies) {
        if (copies < 1) throw std::invalid_argument("copies must be >= 1");
        entries[z] += copies;
        insert_events += 1;
        total_mass += copies;
    }
    long long multiplicity(const Covariate& z) const {
        auto it = entries.find(z);
        return it == entries.end() ? 0 : it->second;
    }
};

// All tables S x A -> [0, range].
struct TabularClass {
    int n_states = 0;
    int n_actions = 0;
    double range = 0.0;

    int cells() const { return n_states * n_actions; }
    int cell(const Covariate& z) const { return z.state * n_actions + z.action; }
};

// f_theta(z) = <theta, phi(z)>, ||theta||_2 <= param_bound,
// ||phi(z)||_2 <= feature_bound.
struct LinearClass {
    int dim = 0;
    double param_bound = 0.0;
    double feature_bound = 0.0;
    std::function<std::vector<double>(const Covariate&)> features;
};

struct FunctionClass {
    std::variant<TabularClass, LinearClass> desc;

    bool tabular() const { return std::holds_alternative<TabularClass>(desc); }
    const TabularClass& tab() const { return std::get<TabularClass>(desc); }
    const LinearClass& lin() const { return std::get<LinearClass>(desc); }

    int param_dim() const;
    // f(z) for the member encoded by param (cell table / theta).
    double eval(const std::vector<double>& param, const Covariate& z) const;
    // sup_{f1,f2 in class} |f1(z) - f2(z)|
    double diameter_at(const Covariate& z) const;
};

FunctionClass make_tabular_class(int n_states, int n_actions, double range);
FunctionClass make_linear_class(int dim, double param_bound, double feature_bound,
                                std::function<std::vector<double>(const Covariate&)> features);
// Linear class over phi_V(s,a) features of a mixture model at step h;
// realizes f(s,a,V) = <P_theta(.|s,a), V>.
FunctionClass mixture_induced_class(const LinearMixtureMdp& mix, int h);

struct ConfidenceParams {
    double beta = 1.0;
    double cap = 0.0;    // T(H+1)^2 truncation of the squared dataset norm; 0 = no cap
    double delta = 0.1;

    double effective_cap() const;
};

double sq_diff_norm(const FunctionClass& cls, const std::vector<double>& p1,
                    const std::vector<double>& p2, const SubsampledDataset& z);

// argmin over the class of sum (f(x)-y)^2. Tabular: per-cell means clipped
// to the range, unvisited cells at the range midpoint. Linear: ridge-
// stabilized normal equations with the parameter projected to the ball.
std::vector<double> least_squares_fit(const FunctionClass& cls, const RegressionDataset& data);

// sup |f1(q) - f2(q)| over pairs admissible at level beta against the
// sub-sampled dataset; see the closed forms in the implementation.
double width(const FunctionClass& cls, const SubsampledDataset& z,
             const ConfidenceParams& params, const Covariate& query);

// min{ sup (f1(z)-f2(z))^2 / (min{||f1-f2||^2_Z, cap} + beta), 1 }
double sensitivity(const FunctionClass& cls, const SubsampledDataset& z,
                   const ConfidenceParams& params, const Covariate& query);

// Precomputes the dataset Gram so many width/sensitivity queries against a
// fixed dataset cost O(dim^2) each. width()/sensitivity() delegate here.
class ConfidenceEvaluator {
public:
    ConfidenceEvaluator(const FunctionClass& cls, const SubsampledDataset& z,
                        const ConfidenceParams& params);
    ~ConfidenceEvaluator();
    ConfidenceEvaluator(ConfidenceEvaluator&&) noexcept;
    ConfidenceEvaluator& operator=(ConfidenceEvaluator&&) noexcept;

    double width_at(const Covariate& query) const;
    double sensitivity_at(const Covariate& query) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Explicit eps-cover (sup norm) as a list of member params, or just the
// analytic log covering-number bound when enumeration would blow the budget.
std::vector<std::vector<double>> cover(const FunctionClass& cls, double eps,
                                       std::size_t budget = 1000000);
double log_cover_size(const FunctionClass& cls, double eps);

// Finite state-action spaces are their own 0-cover, so snapping is the
// identity; kept as an explicit step of the sampling routine.
Covariate snap_to_net(const Covariate& z, double eps);

// Exhaustive-search oracles for small classes (tabular <= 12 cells,
// linear dim <= 3); independent of the closed forms above.
double brute_force_width(const FunctionClass& cls, const SubsampledDataset& z,
                         const ConfidenceParams& params, const Covariate& query);
double brute_force_sensitivity(const FunctionClass& cls, const SubsampledDataset& z,
                               const ConfidenceParams& params, const Covariate& query);

}  // namespace lsvi
