#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lsvi/function_class.hpp"
#include "lsvi/mdp.hpp"

namespace lsvi {

// One greedy eluder sequence element together with the witnessing pair of
// class members: the pair is close on the prefix but separated at the point.
struct EluderCertificate {
    std::vector<double> f1;
    std::vector<double> f2;
    double prefix_norm = 0.0;   // ||f1 - f2|| over the predecessors
    double separation = 0.0;    // |f1(x) - f2(x)|
};

struct EluderEstimate {
    double eps = 0.0;
    std::vector<Covariate> sequence;
    std::vector<EluderCertificate> certificates;

    std::size_t length() const { return sequence.size(); }
};

// Greedy lower bound on dim_E(F, eps): repeatedly append any pool element
// certified eps-independent of the current sequence. For tabular classes
// with eps < range this meets the |S||A| upper bound, so it is exact there.
EluderEstimate eluder_dimension_estimate(const FunctionClass& cls, double eps,
                                         const std::vector<Covariate>& pool,
                                         std::size_t budget = 10000);

// Re-checks every certificate of a returned estimate.
bool verify_eluder_certificates(const FunctionClass& cls, const EluderEstimate& est,
                                double tol = 1e-6);

struct SandwichViolation {
    std::size_t pair_i = 0;
    std::size_t pair_j = 0;
    std::string kind;  // "underline-not-in-hat" or "hat-not-in-overline"
};

struct SandwichReport {
    std::size_t net_size = 0;
    std::size_t pairs_checked = 0;
    std::vector<SandwichViolation> violations;
    // width bounds induced by the three sets at each query point
    std::vector<double> lower_width, middle_width, upper_width;

    bool ok() const { return violations.empty(); }
};

// Confidence-set sandwich over an enumerated eps-net: every pair with small
// full-dataset norm must be admissible against the sub-sample (at level
// beta), and every admissible pair must have full-dataset norm <= 100 beta.
// Also reports the induced lower/middle/upper widths at the query points.
SandwichReport sandwich_check(const FunctionClass& cls, const SubsampledDataset& full,
                              const SubsampledDataset& sub, const ConfidenceParams& params,
                              double net_eps, const std::vector<Covariate>& queries,
                              std::size_t budget = 1000000);

// Exact value of every deterministic policy, by forward induction on the
// state distribution (a different route than the backward recursions it is
// used to check). Policies are indexed in mixed radix over (h, s) cells.
std::vector<double> brute_force_policy_values(const EpisodicMdp& mdp,
                                              std::size_t budget = 100000);
Policy policy_from_index(const EpisodicMdp& mdp, std::size_t index);
std::size_t deterministic_policy_count(const EpisodicMdp& mdp);

}  // namespace lsvi
