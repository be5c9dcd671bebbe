#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "arrowgap/poly.hpp"
#include "arrowgap/robust.hpp"
#include "arrowgap/statespace.hpp"

namespace arrowgap {

/// Coprime fraction P = n/m (m monic) with Hurwitz spectral cofactor d,
/// d(-s)d(s) = n(-s)n(s) + m(-s)m(s). The graph symbol is [m/d; n/d].
struct RationalFraction {
    Polynomial n;
    Polynomial m{1.0};
    Polynomial d{1.0};
    int mcmillan_degree = 0;

    Complex operator()(Complex s) const { return n(s) / m(s); }
};

inline RationalFraction normalized_fraction(const TransferFunction& tf)
{
    if (!tf.proper()) throw Error("improper transfer function");
    const TransferFunction r = coprime_reduce(tf);
    RationalFraction f;
    f.n = r.num;
    f.m = r.den;
    f.d = spectral_factor(f.n, f.m);
    f.mcmillan_degree = f.m.degree();
    return f;
}

inline RationalFraction normalized_fraction(const StateSpace& p) { return normalized_fraction(ss_to_tf(p)); }

/// Fraction of P(-s); the cofactor d is unchanged because the spectrum
/// n(-s)n(s) + m(-s)m(s) is even.
inline RationalFraction time_conjugate(const RationalFraction& f)
{
    RationalFraction g;
    const double sign = f.m.degree() % 2 == 0 ? 1.0 : -1.0;
    g.n = f.n.reflected() * sign;
    g.m = f.m.reflected() * sign;
    g.d = f.d;
    g.mcmillan_degree = f.mcmillan_degree;
    return g;
}

namespace detail {

inline double chordal_at(const RationalFraction& a, const RationalFraction& b, double omega)
{
    const Complex s(0.0, omega);
    const Complex n1 = a.n(s), m1 = a.m(s), n2 = b.n(s), m2 = b.m(s);
    const double den = std::sqrt(std::norm(n1) + std::norm(m1)) * std::sqrt(std::norm(n2) + std::norm(m2));
    return std::abs(n1 * m2 - n2 * m1) / den;
}

inline double value_at_infinity(const RationalFraction& f)
{
    return f.n.degree() == f.m.degree() && !f.n.is_zero() ? f.n.leading() / f.m.leading() : 0.0;
}

template <class Fn>
double golden_max(Fn f, double lo, double hi, int iters = 200)
{
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = f(c), fd = f(d);
    for (int i = 0; i < iters && (b - a) > 1e-15 * (1.0 + std::abs(b)); ++i) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    return std::max(fc, fd);
}

}  // namespace detail

/// Pointwise chordal distance |P1 - P2| / (sqrt(1+|P1|^2) sqrt(1+|P2|^2))
/// maximized over a log grid (plus DC, infinity and the pole/zero
/// magnitudes) with golden-section polishing of each local maximum.
inline double delta_l2_grid(const RationalFraction& a, const RationalFraction& b, int points = 4096)
{
    std::vector<double> w;
    for (int i = 0; i < points; ++i) w.push_back(std::pow(10.0, -4.0 + 8.0 * i / (points - 1)));
    for (const Polynomial* p : {&a.n, &a.m, &b.n, &b.m}) {
        if (p->degree() < 1) continue;
        for (const Complex& z : roots(*p).roots) {
            if (std::abs(z) > 0.0) w.push_back(std::abs(z));
            if (std::abs(z.imag()) > 0.0) w.push_back(std::abs(z.imag()));
        }
    }
    std::sort(w.begin(), w.end());
    auto f = [&](double om) { return detail::chordal_at(a, b, om); };
    std::vector<double> vals(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) vals[i] = f(w[i]);
    double best = std::max(f(0.0), [&] {
        const double p1 = detail::value_at_infinity(a), p2 = detail::value_at_infinity(b);
        return std::abs(p1 - p2) / (std::sqrt(1.0 + p1 * p1) * std::sqrt(1.0 + p2 * p2));
    }());
    for (std::size_t i = 0; i < w.size(); ++i) {
        best = std::max(best, vals[i]);
        const bool left_ok = i == 0 || vals[i] >= vals[i - 1];
        const bool right_ok = i + 1 == w.size() || vals[i] >= vals[i + 1];
        if (!(left_ok && right_ok)) continue;
        const double lo = i == 0 ? 0.0 : w[i - 1];
        const double hi = i + 1 == w.size() ? 2.0 * w[i] : w[i + 1];
        best = std::max(best, detail::golden_max(f, lo, hi));
    }
    return std::min(1.0, best);
}

namespace detail {

inline double delta_l2_direct(const RationalFraction& a, const RationalFraction& b)
{
    const Polynomial num = b.m * a.n - b.n * a.m;
    const Polynomial den = b.d * a.d;
    const double scale = std::max((b.m * a.n).max_abs_coeff(), (b.n * a.m).max_abs_coeff());
    std::vector<double> c = num.coeffs();
    for (double& v : c)
        if (std::abs(v) <= 1e-14 * scale) v = 0.0;
    const Polynomial cleaned(std::move(c));
    if (cleaned.is_zero()) return 0.0;
    return std::clamp(linf_norm(realize({cleaned, den})), 0.0, 1.0);
}

}  // namespace detail

/// ||G~2 G1||_inf with G~2 G1 = (m2 n1 - n2 m1) / (d2 d1), a stable
/// rational function, evaluated with the Hamiltonian L-infinity norm.
/// The value is taken on both the pair and its time conjugate so that the
/// result is bitwise invariant under conjugation.
inline double delta_l2(const RationalFraction& a, const RationalFraction& b)
{
    return std::max(detail::delta_l2_direct(a, b), detail::delta_l2_direct(time_conjugate(a), time_conjugate(b)));
}

struct GapReport {
    double delta_l2 = 0.0;
    double delta_l2_grid = 0.0;
    Polynomial h;
    int deg_h_plus = 0;   ///< LHP roots of h
    int deg_h_minus = 0;  ///< RHP roots of h
    int mu1 = 0;
    int mu2 = 0;
    double vgap_f = 1.0;
    double vgap_b = 1.0;
    bool winding_defined = false;
    /// mu1 == mu2 == deg h+ == deg h-: forward and backward gaps coincide below 1.
    bool both_directions_close = false;

    double vgap(Direction d) const { return d == Direction::Forward ? vgap_f : vgap_b; }
};

inline constexpr double kGapUnitTolerance = 1e-8;

/// h(s) = m2(-s) m1(s) + n2(-s) n1(s) with its LHP/RHP root counts.
/// Throws "winding undefined" when h has imaginary-axis roots.
inline GapReport winding_classify(const RationalFraction& a, const RationalFraction& b,
                                  double axis_tol = kDefaultAxisTolerance)
{
    GapReport r;
    r.mu1 = a.mcmillan_degree;
    r.mu2 = b.mcmillan_degree;
    r.h = b.m.reflected() * a.m + b.n.reflected() * a.n;
    if (r.h.is_zero()) throw Error("winding undefined: h vanishes identically");
    const RootSet rs = roots(r.h, axis_tol);
    if (rs.axis_count > 0) throw Error("winding undefined: h has imaginary-axis roots");
    r.deg_h_plus = rs.lhp_count;
    r.deg_h_minus = rs.rhp_count;
    r.winding_defined = true;
    return r;
}

/// Forward and backward nu-gaps. delta_L2 when the root counts of h match
/// the McMillan degree of P1 (deg h+ for forward, deg h- for backward),
/// otherwise 1.
inline GapReport vgap(const RationalFraction& a, const RationalFraction& b)
{
    const double dl2 = delta_l2(a, b);
    GapReport r;
    if (dl2 < 1.0 - kGapUnitTolerance) {
        try {
            r = winding_classify(a, b);
        } catch (const Error&) {
            r = GapReport{};
            r.h = b.m.reflected() * a.m + b.n.reflected() * a.n;
        }
    } else {
        r.h = b.m.reflected() * a.m + b.n.reflected() * a.n;
    }
    r.mu1 = a.mcmillan_degree;
    r.mu2 = b.mcmillan_degree;
    r.delta_l2 = dl2;
    r.delta_l2_grid = delta_l2_grid(a, b);
    if (r.winding_defined) {
        r.vgap_f = r.deg_h_plus == r.mu1 ? dl2 : 1.0;
        r.vgap_b = r.deg_h_minus == r.mu1 ? dl2 : 1.0;
        r.both_directions_close =
            r.mu1 == r.mu2 && r.mu2 == r.deg_h_plus && r.deg_h_plus == r.deg_h_minus;
    } else {
        r.vgap_f = r.vgap_b = 1.0;
    }
    return r;
}

inline double vgap(const RationalFraction& a, const RationalFraction& b, Direction d) { return vgap(a, b).vgap(d); }

}  // namespace arrowgap
