#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "bsw/error.hpp"

namespace bsw {

inline double mean(const std::vector<double>& x) {
    if (x.empty()) return 0.0;
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

// Population standard deviation (divide by N).
inline double stddev(const std::vector<double>& x) {
    if (x.empty()) return 0.0;
    const double m = mean(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return std::sqrt(s / static_cast<double>(x.size()));
}

// Sample standard deviation (divide by N-1).
inline double stddev_sample(const std::vector<double>& x) {
    if (x.size() < 2) return 0.0;
    const double m = mean(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return std::sqrt(s / static_cast<double>(x.size() - 1));
}

inline double rms(const std::vector<double>& x) {
    if (x.empty()) return 0.0;
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s / static_cast<double>(x.size()));
}

inline double inf_norm(const std::vector<double>& x) {
    double m = 0.0;
    for (double v : x) m = std::max(m, std::abs(v));
    return m;
}

// Weighted mean/std; weights need not be normalized. Dividing by the actual
// weight total keeps a constant series at exactly zero spread.
inline double weighted_mean(const std::vector<double>& x, const std::vector<double>& w) {
    double s = 0.0, total = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        s += w[i] * x[i];
        total += w[i];
    }
    return total > 0.0 ? s / total : 0.0;
}

inline double weighted_stddev(const std::vector<double>& x, const std::vector<double>& w) {
    const double m = weighted_mean(x, w);
    double s = 0.0, total = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        s += w[i] * (x[i] - m) * (x[i] - m);
        total += w[i];
    }
    return total > 0.0 ? std::sqrt(std::max(s / total, 0.0)) : 0.0;
}

// Evaluate x at fractional position pos by linear interpolation; positions
// outside [0, n-1] clamp to the edge samples.
inline double interp_clamped(const std::vector<double>& x, double pos) {
    const std::size_t n = x.size();
    if (pos <= 0.0) return x.front();
    const double last = static_cast<double>(n - 1);
    if (pos >= last) return x.back();
    const std::size_t k = static_cast<std::size_t>(pos);
    const double theta = pos - static_cast<double>(k);
    return (1.0 - theta) * x[k] + theta * x[k + 1];
}

// Slope of the piecewise-linear interpolant at pos (zero in the clamped
// regions, right-continuous at the knots).
inline double interp_slope(const std::vector<double>& x, double pos) {
    const std::size_t n = x.size();
    const double last = static_cast<double>(n - 1);
    if (pos < 0.0 || pos >= last) return 0.0;
    const std::size_t k = static_cast<std::size_t>(pos);
    return x[k + 1] - x[k];
}

// Resample x onto m uniform samples spanning [0, n-1] inclusive.
inline std::vector<double> resample_linear(const std::vector<double>& x, std::size_t m) {
    if (x.empty() || m == 0) fail(ErrorCode::EmptyInput, "resample of empty signal");
    std::vector<double> out(m);
    if (x.size() == 1) {
        for (auto& v : out) v = x[0];
        return out;
    }
    const double scale = static_cast<double>(x.size() - 1) / static_cast<double>(m - 1);
    for (std::size_t j = 0; j < m; ++j)
        out[j] = interp_clamped(x, static_cast<double>(j) * scale);
    return out;
}

// Centered moving average with window clamped at the edges.
inline std::vector<double> moving_average(const std::vector<double>& x, std::size_t window) {
    if (window < 1) window = 1;
    const std::size_t n = x.size();
    std::vector<double> out(n, 0.0);
    const std::size_t half = window / 2;
    // prefix sums keep this O(n)
    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + x[i];
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i >= half ? i - half : 0;
        const std::size_t hi = std::min(n - 1, i + (window - 1 - half));
        out[i] = (prefix[hi + 1] - prefix[lo]) / static_cast<double>(hi - lo + 1);
    }
    return out;
}

inline bool all_finite(const std::vector<double>& x) {
    for (double v : x)
        if (!std::isfinite(v)) return false;
    return true;
}

}  // namespace bsw
