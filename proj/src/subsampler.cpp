#include "lsvi/subsampler.hpp"

#include <cmath>
#include <stdexcept>

namespace lsvi {

SamplerConfig SamplerConfig::make(const FunctionClass& cls, double c, double delta,
                                  long long total_steps, SamplingMode mode) {
    if (!(c > 0.0)) throw std::invalid_argument("sampler constant must be positive");
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must be in (0,1)");
    if (total_steps < 1) throw std::invalid_argument("total_steps must be >= 1");
    SamplerConfig cfg;
    cfg.c = c;
    cfg.delta = delta;
    cfg.total_steps = total_steps;
    cfg.mode = mode;
    const double t = static_cast<double>(total_steps);
    const double net_eps = std::sqrt(delta / (64.0 * t * t * t));
    cfg.log_net = std::log(t) + log_cover_size(cls, net_eps) + std::log(1.0 / delta);
    return cfg;
}

double round_to_reciprocal(double x) {
    if (!(x > 0.0) || x > 1.0)
        throw std::invalid_argument("round_to_reciprocal needs x in (0,1]");
    long long m = static_cast<long long>(std::floor(1.0 / x));
    // float guard: keep m the largest integer with 1/m >= x
    while (m >= 1 && 1.0 / static_cast<double>(m) < x) --m;
    while (1.0 / static_cast<double>(m + 1) >= x) ++m;
    return 1.0 / static_cast<double>(m);
}

SampleDecision maybe_add(SubsampledDataset& zhat, const Covariate& z, const FunctionClass& cls,
                         const ConfidenceParams& params, const SamplerConfig& cfg,
                         std::mt19937_64& rng) {
    if (!(params.beta > 0.0)) throw std::invalid_argument("beta must be positive");
    const Covariate target =
        cfg.mode == SamplingMode::model_free ? snap_to_net(z, 0.0) : z;
    const double score = sensitivity(cls, zhat, params, target);
    double raw = std::min(1.0, cfg.c * score * cfg.log_net);
    // floor tiny probabilities at 1/T^2 so accepted multiplicities stay <= T^2
    const double t = static_cast<double>(cfg.total_steps);
    const double floor_p = 1.0 / (t * t);
    if (raw < floor_p) raw = floor_p;

    SampleDecision d;
    if (raw >= 1.0) {
        d.p = 1.0;
        d.accepted = true;
        d.copies = 1;
    } else {
        d.p = round_to_reciprocal(raw);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        d.accepted = unif(rng) < d.p;
        d.copies = d.accepted ? std::llround(1.0 / d.p) : 0;
    }
    if (d.accepted) zhat.add(target, d.copies);
    return d;
}

}  // namespace lsvi
