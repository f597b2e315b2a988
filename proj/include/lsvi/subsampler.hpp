#pragma once

#include <cstdint>
#include <random>

#include "lsvi/function_class.hpp"

namespace lsvi {

enum class SamplingMode { model_free, model_based };

struct SamplerConfig {
    double c = 1.0;        // sensitivity multiplier
    double delta = 0.1;    // failure probability
    long long total_steps = 1;  // T = K * H
    double log_net = 0.0;  // log(T * N(F, sqrt(delta/(64 T^3))) / delta)
    SamplingMode mode = SamplingMode::model_free;

    static SamplerConfig make(const FunctionClass& cls, double c, double delta,
                              long long total_steps, SamplingMode mode);
};

struct SampleDecision {
    double p = 1.0;            // reciprocal-integer inclusion probability
    bool accepted = false;
    long long copies = 0;      // 1/p when accepted, 0 otherwise
};

// Smallest p with 1/p integer and p >= x, for x in (0, 1].
double round_to_reciprocal(double x);

// One arrival of the online sampling routine: score the covariate against
// the current sub-sampled dataset, round the inclusion probability to a
// reciprocal integer, flip the coin, and insert 1/p copies on acceptance.
// Model-free covariates are snapped to the state-action net first (the
// identity on finite spaces). Deterministic given the generator state.
SampleDecision maybe_add(SubsampledDataset& zhat, const Covariate& z, const FunctionClass& cls,
                         const ConfidenceParams& params, const SamplerConfig& cfg,
                         std::mt19937_64& rng);

}  // namespace lsvi
