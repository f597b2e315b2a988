#pragma once

#include <cmath>
#include <cstdint>
#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

namespace lsvi {

// SplitMix64. Used to derive per-run RNG seeds from (base seed, grid cell);
// pinned here so alternate implementations can reproduce the streams.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline double median(std::vector<double> v) {
    if (v.empty()) throw std::invalid_argument("median of empty vector");
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct LinearFit {
    double intercept = 0.0;
    double slope = 0.0;
    double r_squared = 1.0;
};

// Ordinary least squares y ~ intercept + slope * x.
// A zero-variance response is a degenerate perfect fit: slope 0, R^2 = 1.
inline LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("fit_line needs >= 2 paired points");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i]; sy += y[i]; sxx += x[i] * x[i]; sxy += x[i] * y[i];
    }
    const double denom = n * sxx - sx * sx;
    LinearFit f;
    double ss_tot = 0;
    const double ybar = sy / n;
    for (double yi : y) ss_tot += (yi - ybar) * (yi - ybar);
    if (ss_tot == 0.0) {
        f.intercept = ybar;
        f.slope = 0.0;
        f.r_squared = 1.0;
        return f;
    }
    if (denom == 0.0) throw std::invalid_argument("fit_line: degenerate x values");
    f.slope = (n * sxy - sx * sy) / denom;
    f.intercept = (sy - f.slope * sx) / n;
    double ss_res = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (f.intercept + f.slope * x[i]);
        ss_res += r * r;
    }
    f.r_squared = 1.0 - ss_res / ss_tot;
    return f;
}

// Least squares through the origin, y ~ c * x, with the conventional
// mean-anchored R^2 (can be negative when the model is worse than the mean).
inline LinearFit fit_through_origin(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.empty())
        throw std::invalid_argument("fit_through_origin needs paired points");
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) { sxx += x[i] * x[i]; sxy += x[i] * y[i]; }
    if (sxx == 0.0) throw std::invalid_argument("fit_through_origin: all x zero");
    LinearFit f;
    f.slope = sxy / sxx;
    double ss_res = 0, ss_tot = 0, ybar = 0;
    for (double yi : y) ybar += yi;
    ybar /= static_cast<double>(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        ss_res += (y[i] - f.slope * x[i]) * (y[i] - f.slope * x[i]);
        ss_tot += (y[i] - ybar) * (y[i] - ybar);
    }
    f.r_squared = ss_tot == 0.0 ? 1.0 : 1.0 - ss_res / ss_tot;
    return f;
}

// 17 significant digits round-trips a double exactly; used everywhere a
// float is serialized so identical runs produce identical bytes.
inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
}

}  // namespace lsvi
