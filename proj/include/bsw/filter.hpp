#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "bsw/error.hpp"
#include "bsw/numeric.hpp"

namespace bsw {

// One second-order section, a0 normalized to 1.
struct Biquad {
    double b0 = 1.0, b1 = 0.0, b2 = 0.0;
    double a1 = 0.0, a2 = 0.0;
};

using SosFilter = std::vector<Biquad>;

namespace detail {

using cplx = std::complex<double>;

// Left-half-plane poles of the analog Butterworth prototype (unit cutoff).
inline std::vector<cplx> butterworth_prototype(int order) {
    std::vector<cplx> poles;
    poles.reserve(static_cast<std::size_t>(order));
    for (int k = 0; k < order; ++k) {
        const double theta =
            std::numbers::pi * (2.0 * k + order + 1.0) / (2.0 * order);
        poles.emplace_back(std::cos(theta), std::sin(theta));
    }
    return poles;
}

struct AnalogZpk {
    std::vector<cplx> zeros;
    std::vector<cplx> poles;
    double gain = 1.0;
};

inline AnalogZpk lowpass_to_highpass(const std::vector<cplx>& proto, double warped) {
    AnalogZpk out;
    cplx prod(1.0, 0.0);
    for (const cplx& p : proto) {
        out.poles.push_back(warped / p);
        out.zeros.emplace_back(0.0, 0.0);
        prod *= -p;
    }
    // H_lp(1/s) picks up 1/prod(-p); Butterworth prototypes have prod(-p)=1.
    out.gain = 1.0 / prod.real();
    return out;
}

inline AnalogZpk lowpass_to_bandpass(const std::vector<cplx>& proto,
                                     double w1, double w2) {
    AnalogZpk out;
    const double w0 = std::sqrt(w1 * w2);
    const double bw = w2 - w1;
    for (const cplx& p : proto) {
        const cplx q = p * (bw / 2.0);
        const cplx root = std::sqrt(q * q - w0 * w0);
        out.poles.push_back(q + root);
        out.poles.push_back(q - root);
        out.zeros.emplace_back(0.0, 0.0);
    }
    out.gain = std::pow(bw, static_cast<double>(proto.size()));
    return out;
}

struct DigitalZpk {
    std::vector<cplx> zeros;
    std::vector<cplx> poles;
    double gain = 1.0;
};

inline DigitalZpk bilinear(const AnalogZpk& analog, double sample_rate_hz) {
    const double fs2 = 2.0 * sample_rate_hz;
    DigitalZpk out;
    cplx num(1.0, 0.0), den(1.0, 0.0);
    for (const cplx& z : analog.zeros) {
        out.zeros.push_back((fs2 + z) / (fs2 - z));
        num *= fs2 - z;
    }
    for (const cplx& p : analog.poles) {
        out.poles.push_back((fs2 + p) / (fs2 - p));
        den *= fs2 - p;
    }
    // zeros at analog infinity land on z = -1
    while (out.zeros.size() < out.poles.size()) out.zeros.emplace_back(-1.0, 0.0);
    out.gain = analog.gain * (num / den).real();
    return out;
}

// Group roots into pairs: conjugate pairs first, leftover reals paired
// smallest-with-largest so mixed real zeros (+1/-1) split evenly.
inline std::vector<std::pair<cplx, cplx>> pair_roots(std::vector<cplx> roots) {
    constexpr double tol = 1e-9;
    std::vector<std::pair<cplx, cplx>> pairs;
    std::vector<cplx> reals;
    std::vector<cplx> upper;
    for (const cplx& r : roots) {
        if (std::abs(r.imag()) <= tol)
            reals.push_back(r);
        else if (r.imag() > 0)
            upper.push_back(r);
    }
    for (const cplx& r : upper) pairs.emplace_back(r, std::conj(r));
    std::sort(reals.begin(), reals.end(),
              [](const cplx& a, const cplx& b) { return a.real() < b.real(); });
    std::size_t lo = 0, hi = reals.size();
    while (hi - lo >= 2) {
        pairs.emplace_back(reals[lo], reals[hi - 1]);
        ++lo;
        --hi;
    }
    if (hi != lo)
        fail(ErrorCode::UnsupportedFormat, "filter design requires even order");
    return pairs;
}

inline SosFilter zpk_to_sos(const DigitalZpk& zpk) {
    auto pole_pairs = pair_roots(zpk.poles);
    auto zero_pairs = pair_roots(zpk.zeros);
    if (pole_pairs.size() != zero_pairs.size())
        fail(ErrorCode::UnsupportedFormat, "mismatched pole/zero count");
    SosFilter sos(pole_pairs.size());
    for (std::size_t i = 0; i < pole_pairs.size(); ++i) {
        const auto& [p1, p2] = pole_pairs[i];
        const auto& [z1, z2] = zero_pairs[i];
        Biquad& s = sos[i];
        s.a1 = -(p1 + p2).real();
        s.a2 = (p1 * p2).real();
        s.b0 = 1.0;
        s.b1 = -(z1 + z2).real();
        s.b2 = (z1 * z2).real();
    }
    if (!sos.empty()) {
        // overall gain folded into the first section
        sos[0].b0 *= zpk.gain;
        sos[0].b1 *= zpk.gain;
        sos[0].b2 *= zpk.gain;
    }
    return sos;
}

}  // namespace detail

// Digital Butterworth high-pass (bilinear transform), order must be even.
inline SosFilter butter_highpass(int order, double cutoff_hz, double sample_rate_hz) {
    if (cutoff_hz <= 0.0 || cutoff_hz >= sample_rate_hz / 2.0)
        fail(ErrorCode::CutoffOutOfRange,
             "cutoff " + std::to_string(cutoff_hz) + " Hz outside (0, fs/2)");
    const double warped =
        2.0 * sample_rate_hz * std::tan(std::numbers::pi * cutoff_hz / sample_rate_hz);
    auto analog = detail::lowpass_to_highpass(detail::butterworth_prototype(order), warped);
    return detail::zpk_to_sos(detail::bilinear(analog, sample_rate_hz));
}

// Digital Butterworth band-pass from an order-n low-pass prototype
// (resulting filter has 2n poles).
inline SosFilter butter_bandpass(int order, double low_hz, double high_hz,
                                 double sample_rate_hz) {
    if (low_hz <= 0.0 || high_hz <= low_hz || high_hz >= sample_rate_hz / 2.0)
        fail(ErrorCode::CutoffOutOfRange, "band edges outside (0, fs/2) or inverted");
    const double w1 =
        2.0 * sample_rate_hz * std::tan(std::numbers::pi * low_hz / sample_rate_hz);
    const double w2 =
        2.0 * sample_rate_hz * std::tan(std::numbers::pi * high_hz / sample_rate_hz);
    auto analog = detail::lowpass_to_bandpass(detail::butterworth_prototype(order), w1, w2);
    return detail::zpk_to_sos(detail::bilinear(analog, sample_rate_hz));
}

// |H(e^{j 2 pi f / fs})|^2 for one pass of the cascade.
inline double sos_magnitude_squared(const SosFilter& sos, double freq_hz,
                                    double sample_rate_hz) {
    const double w = 2.0 * std::numbers::pi * freq_hz / sample_rate_hz;
    const std::complex<double> e1 = std::polar(1.0, -w);
    const std::complex<double> e2 = std::polar(1.0, -2.0 * w);
    std::complex<double> h(1.0, 0.0);
    for (const Biquad& s : sos)
        h *= (s.b0 + s.b1 * e1 + s.b2 * e2) / (1.0 + s.a1 * e1 + s.a2 * e2);
    return std::norm(h);
}

// Single forward pass (direct form II transposed), state passed in/out.
inline std::vector<double> sosfilt(const SosFilter& sos, std::vector<double> x,
                                   std::vector<std::pair<double, double>>* state = nullptr) {
    std::vector<std::pair<double, double>> local(sos.size(), {0.0, 0.0});
    auto& st = state ? *state : local;
    for (std::size_t si = 0; si < sos.size(); ++si) {
        const Biquad& s = sos[si];
        double z1 = st[si].first, z2 = st[si].second;
        for (double& v : x) {
            const double in = v;
            const double out = s.b0 * in + z1;
            z1 = s.b1 * in - s.a1 * out + z2;
            z2 = s.b2 * in - s.a2 * out;
            v = out;
        }
        st[si] = {z1, z2};
    }
    return x;
}

// Steady-state per-section state for a unit step input; scaling the stack by
// the first input sample suppresses start-up transients.
inline std::vector<std::pair<double, double>> sosfilt_zi(const SosFilter& sos) {
    std::vector<std::pair<double, double>> zi(sos.size());
    double scale = 1.0;
    for (std::size_t i = 0; i < sos.size(); ++i) {
        const Biquad& s = sos[i];
        const double dc = (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
        const double z2 = s.b2 - s.a2 * dc;
        const double z1 = s.b1 - s.a1 * dc + z2;
        zi[i] = {z1 * scale, z2 * scale};
        scale *= dc;
    }
    return zi;
}

// Zero-phase filtering: odd-extension padding, forward pass, backward pass.
// The effective magnitude response is |H|^2 with zero phase shift.
inline std::vector<double> sosfiltfilt(const SosFilter& sos, const std::vector<double>& x) {
    const std::size_t padlen = 6 * sos.size();  // 3 x filter order
    if (x.size() <= padlen)
        fail(ErrorCode::SignalTooShort,
             "need more than " + std::to_string(padlen) + " samples, got " +
                 std::to_string(x.size()));

    std::vector<double> ext;
    ext.reserve(x.size() + 2 * padlen);
    for (std::size_t i = padlen; i >= 1; --i) ext.push_back(2.0 * x.front() - x[i]);
    ext.insert(ext.end(), x.begin(), x.end());
    for (std::size_t i = 2; i <= padlen + 1; ++i)
        ext.push_back(2.0 * x.back() - x[x.size() - i]);

    const auto zi = sosfilt_zi(sos);

    auto run = [&](std::vector<double> sig) {
        auto st = zi;
        for (auto& z : st) {
            z.first *= sig.front();
            z.second *= sig.front();
        }
        return sosfilt(sos, std::move(sig), &st);
    };

    auto fwd = run(std::move(ext));
    std::reverse(fwd.begin(), fwd.end());
    auto bwd = run(std::move(fwd));
    std::reverse(bwd.begin(), bwd.end());

    return std::vector<double>(bwd.begin() + static_cast<std::ptrdiff_t>(padlen),
                               bwd.end() - static_cast<std::ptrdiff_t>(padlen));
}

// Baseline-wander removal: 4th-order Butterworth high-pass applied forward
// and backward (zero phase). Output length equals input length.
inline std::vector<double> highpass_baseline(const std::vector<double>& signal,
                                             double sample_rate_hz, double cutoff_hz,
                                             int order = 4) {
    const auto sos = butter_highpass(order, cutoff_hz, sample_rate_hz);
    return sosfiltfilt(sos, signal);
}

}  // namespace bsw
