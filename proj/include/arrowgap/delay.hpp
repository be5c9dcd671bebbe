#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include "arrowgap/gap.hpp"
#include "arrowgap/poly.hpp"
#include "arrowgap/statespace.hpp"

namespace arrowgap {

/// Default truncation radius for root counting and winding along the axis.
inline double default_contour_radius(double tau) { return tau == 0.0 ? 100.0 : 100.0 + 10.0 / std::abs(tau); }

namespace detail {

/// f = exp(w) * g. Keeps exponentially large factors out of the complex
/// arithmetic on contours where e^{-s tau} explodes.
struct Factored {
    Complex w;
    Complex g;
};

inline double wrap_angle(double a)
{
    constexpr double pi = std::numbers::pi;
    while (a > pi) a -= 2.0 * pi;
    while (a <= -pi) a += 2.0 * pi;
    return a;
}

inline double phase_step(const Factored& a, const Factored& b)
{
    if (b.g == Complex(0.0) || a.g == Complex(0.0)) throw Error("contour passes through a zero");
    return wrap_angle((b.w - a.w).imag() + std::arg(b.g / a.g));
}

/// Unwrapped phase change of f along path(t), t in [t0, t1], with adaptive
/// steps keeping each increment below max_step radians.
inline double track_phase(const std::function<Factored(double)>& f, double t0, double t1, double max_dt,
                          double max_step = std::numbers::pi / 4.0)
{
    double t = t0;
    Factored prev = f(t);
    double total = 0.0;
    double dt = std::min(max_dt, (t1 - t0) / 64.0);
    const double min_dt = (t1 - t0) * 1e-13;
    while (t < t1) {
        const double step = std::min(dt, t1 - t);
        const Factored next = f(t + step);
        const double d = phase_step(prev, next);
        if (std::abs(d) > max_step) {
            dt = step / 2.0;
            if (dt < min_dt) throw Error("contour resolution exceeded");
            continue;
        }
        total += d;
        t += step;
        prev = next;
        dt = std::min(max_dt, step * 1.5);
    }
    return total;
}

}  // namespace detail

struct DelayStability {
    bool f_stable = false;
    int rhp_root_count = 0;
    double contour_radius = 0.0;
};

/// Zeros of s + e^{-s tau} with Re s > 0 and |s| < R, counted by the argument
/// principle on the boundary of that half disc.
inline DelayStability delay_loop_stability(double tau, double R)
{
    if (!(R > 10.0)) throw Error("contour radius must exceed 10");
    auto f = [tau](Complex s) {
        const Complex e = -s * tau;
        if (e.real() > 0.0) return detail::Factored{e, s * std::exp(-e) + 1.0};
        return detail::Factored{Complex(0.0), s + std::exp(e)};
    };
    const double max_ds = tau == 0.0 ? R / 16.0 : std::min(R / 16.0, 0.5 / std::abs(tau));
    // Imaginary axis from +jR down to -jR.
    auto axis = [R](double t) { return Complex(0.0, R - t); };
    const double along_axis = detail::track_phase([&](double t) { return f(axis(t)); }, 0.0, 2.0 * R, max_ds);
    // Half circle from -jR through R back to +jR.
    auto arc = [R](double t) { return std::polar(R, -std::numbers::pi / 2.0 + t); };
    const double along_arc =
        detail::track_phase([&](double t) { return f(arc(t)); }, 0.0, std::numbers::pi, max_ds / R);
    DelayStability out;
    out.contour_radius = R;
    out.rhp_root_count = static_cast<int>(std::lround((along_axis + along_arc) / (2.0 * std::numbers::pi)));
    out.f_stable = out.rhp_root_count == 0;
    return out;
}

inline DelayStability delay_loop_stability(double tau)
{
    return delay_loop_stability(tau, default_contour_radius(tau));
}

struct DelayGapReport {
    double tau = 0.0;
    double delta_l2 = 0.0;
    int winding = 0;
    double vgap_f = 1.0;
    double attained_omega = 0.0;
    double contour_radius = 0.0;
};

/// sup_w (w / (1 + w^2)) |1 - e^{-j w tau}|, the L2-gap between the
/// integrator and the integrator in series with a delay (tau > 0) or
/// predictor (tau < 0).
inline double delay_delta_l2(double tau, double* argmax = nullptr, int points = 4096)
{
    auto f = [tau](double w) { return w / (1.0 + w * w) * 2.0 * std::abs(std::sin(0.5 * w * tau)); };
    std::vector<double> w(static_cast<std::size_t>(points));
    std::vector<double> v(w.size());
    for (int i = 0; i < points; ++i) {
        w[static_cast<std::size_t>(i)] = std::pow(10.0, -4.0 + 8.0 * i / (points - 1));
        v[static_cast<std::size_t>(i)] = f(w[static_cast<std::size_t>(i)]);
    }
    double best = 0.0, best_w = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const bool peak = (i == 0 || v[i] >= v[i - 1]) && (i + 1 == w.size() || v[i] >= v[i + 1]);
        if (!peak) continue;
        const double lo = i == 0 ? 0.0 : w[i - 1];
        const double hi = i + 1 == w.size() ? w[i] : w[i + 1];
        // golden section on the bracket, tracking the location
        const double g = 0.5 * (std::sqrt(5.0) - 1.0);
        double a = lo, b = hi;
        double c = b - g * (b - a), d = a + g * (b - a);
        double fc = f(c), fd = f(d);
        for (int it = 0; it < 200 && (b - a) > 1e-14 * (1.0 + b); ++it) {
            if (fc >= fd) {
                b = d, d = c, fd = fc, c = b - g * (b - a), fc = f(c);
            } else {
                a = c, c = d, fc = fd, d = a + g * (b - a), fd = f(d);
            }
        }
        const double x = fc >= fd ? c : d;
        const double val = std::max({fc, fd, v[i]});
        if (val > best) {
            best = val;
            best_w = val == v[i] ? w[i] : x;
        }
    }
    if (argmax) *argmax = best_w;
    return best;
}

/// Winding number of G2(-jw)' G1(jw) for the integrator versus the
/// delayed/predicted integrator, taken along w in [-R, R]:
///   tau >= 0: (w^2 + e^{j w tau}) / (1 + w^2)
///   tau <  0: (1 + w^2 e^{-j w tau}) / (1 + w^2)
/// Both tend to the real axis at the ends for tau >= 0; the predictor case
/// keeps rotating, so its count grows with R.
inline int delay_winding(double tau, double R)
{
    auto g = [tau](double w) {
        const double w2 = w * w;
        const Complex e = std::exp(Complex(0.0, tau >= 0.0 ? w * tau : -w * tau));
        const Complex v = tau >= 0.0 ? (w2 + e) / (1.0 + w2) : (1.0 + w2 * e) / (1.0 + w2);
        return detail::Factored{Complex(0.0), v};
    };
    const double max_dw = tau == 0.0 ? R / 16.0 : std::min(R / 16.0, 0.5 / std::abs(tau));
    const double total = detail::track_phase(g, -R, R, max_dw);
    return static_cast<int>(std::lround(total / (2.0 * std::numbers::pi)));
}

inline DelayGapReport delay_gap(double tau, double R)
{
    if (!(std::abs(tau) < std::numbers::pi)) throw Error("outside analysis window: |tau| must be below pi");
    DelayGapReport r;
    r.tau = tau;
    r.contour_radius = R;
    r.delta_l2 = std::min(1.0, delay_delta_l2(tau, &r.attained_omega));
    r.winding = delay_winding(tau, R);
    r.vgap_f = r.winding == 0 ? r.delta_l2 : 1.0;
    return r;
}

inline DelayGapReport delay_gap(double tau) { return delay_gap(tau, default_contour_radius(tau)); }

namespace detail {

inline TransferFunction series_tf(const StateSpace& p, const StateSpace& c)
{
    const TransferFunction a = ss_to_tf(p);
    const TransferFunction b = ss_to_tf(c);
    return {a.num * b.num, a.den * b.den};
}

}  // namespace detail

/// sup_{w >= Omega} |P(jw) C(jw)| via a log grid on [Omega, W] with golden
/// polishing, where W is chosen so that a coefficient bound keeps the loop
/// gain below 1 for all w >= W. Returns +inf when the tail cannot be bounded
/// below 1 (e.g. biproper loops with |P(inf) C(inf)| >= 1) or an axis pole
/// lies in the band.
inline double loop_gain_sup(const StateSpace& p, const StateSpace& c, double omega_min)
{
    if (!(omega_min > 0.0)) throw Error("Omega must be positive");
    const TransferFunction L = detail::series_tf(p, c);
    if (!L.proper()) throw Error("loop transfer function must be proper");
    const int n = L.den.degree();
    auto tail_bound = [&](double w) {
        double num = 0.0, low = 0.0, wk = 1.0;
        for (int k = 0; k <= n; ++k, wk *= w) {
            num += std::abs(L.num[k]) * wk;
            if (k < n) low += std::abs(L.den[k]) * wk;
        }
        const double den = std::abs(L.den.leading()) * wk / w - low;
        return den > 0.0 ? num / den : INFINITY;
    };
    const double lim = L.num.degree() == n ? std::abs(L.num.leading() / L.den.leading()) : 0.0;
    if (lim >= 1.0) return INFINITY;
    double W = omega_min;
    int guard = 0;
    while (!(tail_bound(W) < 1.0)) {
        W *= 2.0;
        if (++guard > 400) return INFINITY;
    }
    auto gain = [&](double w) {
        try {
            return std::abs(eval_axis(L, w));
        } catch (const Error&) {
            return static_cast<double>(INFINITY);
        }
    };
    double best = tail_bound(W);
    if (W > omega_min) {
        constexpr int kPts = 2048;
        const double ratio = std::log(W / omega_min);
        std::vector<double> w(kPts), v(kPts);
        for (int i = 0; i < kPts; ++i) {
            w[i] = omega_min * std::exp(ratio * i / (kPts - 1));
            v[i] = gain(w[i]);
        }
        for (int i = 0; i < kPts; ++i) {
            best = std::max(best, v[i]);
            const bool peak = (i == 0 || v[i] >= v[i - 1]) && (i + 1 == kPts || v[i] >= v[i + 1]);
            if (peak && i > 0 && i + 1 < kPts && std::isfinite(v[i]))
                best = std::max(best, detail::golden_max(gain, w[i - 1], w[i + 1]));
        }
    } else {
        best = std::max(best, gain(omega_min));
    }
    return best;
}

/// True when the loop gain stays below one at every frequency >= Omega.
inline bool loop_gain_check(const StateSpace& p, const StateSpace& c, double omega_min)
{
    return loop_gain_sup(p, c, omega_min) < 1.0;
}

}  // namespace arrowgap
