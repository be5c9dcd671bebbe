#pragma once

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "arrowgap/linalg.hpp"
#include "arrowgap/types.hpp"

namespace arrowgap {

/// Real polynomial in s, coefficients stored lowest degree first.
/// Exact trailing zeros are stripped on construction; the zero polynomial is
/// stored as the single coefficient 0.
class Polynomial {
public:
    Polynomial() : c_{0.0} {}
    Polynomial(std::initializer_list<double> coeffs) : c_(coeffs) { strip(); }
    explicit Polynomial(std::vector<double> coeffs) : c_(std::move(coeffs)) { strip(); }

    static Polynomial constant(double v) { return Polynomial({v}); }
    static Polynomial monomial(int degree, double v = 1.0)
    {
        std::vector<double> c(static_cast<std::size_t>(degree) + 1, 0.0);
        c.back() = v;
        return Polynomial(std::move(c));
    }

    /// lead * prod (s - r_k). Imaginary parts of the expansion are dropped, so
    /// the root list must be closed under conjugation.
    static Polynomial from_roots(std::span<const Complex> roots, double lead = 1.0)
    {
        std::vector<Complex> c{Complex(1.0)};
        for (const Complex& r : roots) {
            std::vector<Complex> next(c.size() + 1, Complex(0.0));
            for (std::size_t k = 0; k < c.size(); ++k) {
                next[k + 1] += c[k];
                next[k] -= r * c[k];
            }
            c = std::move(next);
        }
        std::vector<double> out(c.size());
        for (std::size_t k = 0; k < c.size(); ++k) out[k] = lead * c[k].real();
        return Polynomial(std::move(out));
    }

    int degree() const { return static_cast<int>(c_.size()) - 1; }
    bool is_zero() const { return c_.size() == 1 && c_[0] == 0.0; }
    const std::vector<double>& coeffs() const { return c_; }
    double operator[](int k) const { return k >= 0 && k <= degree() ? c_[static_cast<std::size_t>(k)] : 0.0; }
    double leading() const { return c_.back(); }
    double max_abs_coeff() const
    {
        double m = 0.0;
        for (double v : c_) m = std::max(m, std::abs(v));
        return m;
    }

    Complex operator()(Complex s) const
    {
        Complex acc(0.0);
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * s + *it;
        return acc;
    }
    double operator()(double s) const
    {
        double acc = 0.0;
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * s + *it;
        return acc;
    }

    /// p(-s)
    Polynomial reflected() const
    {
        std::vector<double> c = c_;
        for (std::size_t k = 1; k < c.size(); k += 2) c[k] = -c[k];
        return Polynomial(std::move(c));
    }

    Polynomial monic() const
    {
        if (is_zero()) throw Error("cannot normalize the zero polynomial");
        return *this * (1.0 / leading());
    }

    /// Drops leading coefficients whose magnitude is below rel_tol times the
    /// largest coefficient (cancellation debris from subtraction).
    Polynomial trimmed(double rel_tol) const
    {
        const double cut = rel_tol * max_abs_coeff();
        std::vector<double> c = c_;
        while (c.size() > 1 && std::abs(c.back()) <= cut) c.pop_back();
        return Polynomial(std::move(c));
    }

    friend Polynomial operator+(const Polynomial& a, const Polynomial& b)
    {
        std::vector<double> c(std::max(a.c_.size(), b.c_.size()), 0.0);
        for (std::size_t k = 0; k < a.c_.size(); ++k) c[k] += a.c_[k];
        for (std::size_t k = 0; k < b.c_.size(); ++k) c[k] += b.c_[k];
        return Polynomial(std::move(c));
    }
    friend Polynomial operator-(const Polynomial& a) { return a * -1.0; }
    friend Polynomial operator-(const Polynomial& a, const Polynomial& b) { return a + (-b); }
    friend Polynomial operator*(const Polynomial& a, const Polynomial& b)
    {
        std::vector<double> c(a.c_.size() + b.c_.size() - 1, 0.0);
        for (std::size_t i = 0; i < a.c_.size(); ++i)
            for (std::size_t j = 0; j < b.c_.size(); ++j) c[i + j] += a.c_[i] * b.c_[j];
        return Polynomial(std::move(c));
    }
    friend Polynomial operator*(const Polynomial& a, double k)
    {
        std::vector<double> c = a.c_;
        for (double& v : c) v *= k;
        return Polynomial(std::move(c));
    }
    friend Polynomial operator*(double k, const Polynomial& a) { return a * k; }
    friend bool operator==(const Polynomial&, const Polynomial&) = default;

    /// Long division: *this = q * den + r with deg r < deg den.
    std::pair<Polynomial, Polynomial> divmod(const Polynomial& den) const
    {
        if (den.is_zero()) throw Error("division by the zero polynomial");
        std::vector<double> r = c_;
        const int dn = den.degree();
        if (degree() < dn) return {Polynomial(), *this};
        std::vector<double> q(static_cast<std::size_t>(degree() - dn) + 1, 0.0);
        for (int k = degree(); k >= dn; --k) {
            const double f = r[static_cast<std::size_t>(k)] / den.leading();
            q[static_cast<std::size_t>(k - dn)] = f;
            for (int j = 0; j <= dn; ++j) r[static_cast<std::size_t>(k - dn + j)] -= f * den[j];
            r[static_cast<std::size_t>(k)] = 0.0;
        }
        r.resize(static_cast<std::size_t>(std::max(dn, 1)));
        return {Polynomial(std::move(q)), Polynomial(std::move(r))};
    }

private:
    void strip()
    {
        if (c_.empty()) c_.push_back(0.0);
        while (c_.size() > 1 && c_.back() == 0.0) c_.pop_back();
    }

    std::vector<double> c_;
};

inline constexpr double kDefaultAxisTolerance = 1e-9;

/// Roots of a polynomial classified by half-plane.
struct RootSet {
    std::vector<Complex> roots;
    int lhp_count = 0;
    int rhp_count = 0;
    int axis_count = 0;
    double axis_tolerance = kDefaultAxisTolerance;
};

namespace detail {

// Parlett-Reinsch diagonal balancing with power-of-two scalings.
inline void balance(Matrix& a)
{
    const double radix = 2.0;
    bool done = false;
    while (!done) {
        done = true;
        for (Eigen::Index i = 0; i < a.rows(); ++i) {
            double c = 0.0, r = 0.0;
            for (Eigen::Index j = 0; j < a.rows(); ++j) {
                if (j == i) continue;
                c += std::abs(a(j, i));
                r += std::abs(a(i, j));
            }
            if (c == 0.0 || r == 0.0) continue;
            double g = r / radix, f = 1.0;
            const double s = c + r;
            while (c < g) {
                f *= radix;
                c *= radix * radix;
            }
            g = r * radix;
            while (c > g) {
                f /= radix;
                c /= radix * radix;
            }
            if ((c + r) / f < 0.95 * s) {
                done = false;
                a.row(i) /= f;
                a.col(i) *= f;
            }
        }
    }
}

inline Complex newton_polish(const Polynomial& p, const Polynomial& dp, Complex z)
{
    for (int it = 0; it < 3; ++it) {
        const Complex v = p(z);
        const Complex d = dp(z);
        if (d == Complex(0.0)) break;
        const Complex next = z - v / d;
        if (!(std::abs(p(next)) < std::abs(v))) break;
        z = next;
    }
    return z;
}

inline Polynomial derivative(const Polynomial& p)
{
    if (p.degree() == 0) return Polynomial();
    std::vector<double> c(static_cast<std::size_t>(p.degree()));
    for (int k = 1; k <= p.degree(); ++k) c[static_cast<std::size_t>(k - 1)] = k * p[k];
    return Polynomial(std::move(c));
}

// Companion-matrix eigenvalues plus a guarded Newton polish on p itself.
inline std::vector<Complex> raw_roots(const Polynomial& p)
{
    const int n = p.degree();
    if (n <= 0) return {};
    Matrix comp = Matrix::Zero(n, n);
    for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
    for (int i = 0; i < n; ++i) comp(i, n - 1) = -p[i] / p.leading();
    balance(comp);
    std::vector<Complex> r = linalg::eigenvalues(comp);
    const Polynomial dp = derivative(p);
    for (Complex& z : r) {
        z = newton_polish(p, dp, z);
        if (std::abs(z.imag()) <= 1e-14 * std::abs(z)) z.imag(0.0);
    }
    // Keep the set closed under conjugation after independent polishing.
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (r[i].imag() <= 0.0) continue;
        std::size_t best = i;
        double bd = INFINITY;
        for (std::size_t j = 0; j < r.size(); ++j) {
            if (j == i || r[j].imag() >= 0.0) continue;
            const double d = std::abs(r[j] - std::conj(r[i]));
            if (d < bd) {
                bd = d;
                best = j;
            }
        }
        if (best != i) r[best] = std::conj(r[i]);
    }
    return r;
}

}  // namespace detail

inline RootSet classify_roots(std::vector<Complex> roots, double axis_tol = kDefaultAxisTolerance)
{
    RootSet out;
    out.axis_tolerance = axis_tol;
    for (const Complex& r : roots) {
        if (linalg::near_axis(r, axis_tol))
            ++out.axis_count;
        else if (r.real() < 0.0)
            ++out.lhp_count;
        else
            ++out.rhp_count;
    }
    out.roots = std::move(roots);
    return out;
}

inline RootSet roots(const Polynomial& p, double axis_tol = kDefaultAxisTolerance)
{
    if (p.is_zero()) throw Error("undefined roots: zero polynomial");
    return classify_roots(detail::raw_roots(p), axis_tol);
}

/// Hurwitz d with d(-s)d(s) = n(-s)n(s) + m(-s)m(s), positive leading
/// coefficient and degree max(deg n, deg m).
inline Polynomial spectral_factor(const Polynomial& n, const Polynomial& m,
                                  double axis_tol = kDefaultAxisTolerance)
{
    const Polynomial p = n.reflected() * n + m.reflected() * m;
    if (p.is_zero()) throw Error("spectral factorization degenerate: n and m both vanish");
    // p is even; factor in w = s^2 to halve the degree.
    const int k = p.degree() / 2;
    std::vector<double> qc(static_cast<std::size_t>(k) + 1);
    for (int i = 0; i <= k; ++i) qc[static_cast<std::size_t>(i)] = p[2 * i];
    const Polynomial q(std::move(qc));
    const double signed_lead = (k % 2 == 0 ? 1.0 : -1.0) * q.leading();
    if (signed_lead <= 0.0) throw Error("spectral factorization degenerate: indefinite spectrum");
    std::vector<Complex> ds;
    for (const Complex& w : detail::raw_roots(q)) {
        const Complex s = -std::sqrt(w);
        if (linalg::near_axis(s, axis_tol))
            throw Error("spectral factorization degenerate: imaginary-axis root");
        ds.push_back(s);
    }
    return Polynomial::from_roots(ds, std::sqrt(signed_lead));
}

/// Rational function num/den.
struct TransferFunction {
    Polynomial num;
    Polynomial den{1.0};

    Complex operator()(Complex s) const { return num(s) / den(s); }
    bool proper() const { return num.is_zero() || num.degree() <= den.degree(); }
    friend bool operator==(const TransferFunction&, const TransferFunction&) = default;
};

/// num(jw)/den(jw); throws "axis pole" when the denominator vanishes there.
inline Complex eval_axis(const TransferFunction& r, double omega)
{
    const Complex s(0.0, omega);
    const Complex den = r.den(s);
    double scale = 0.0;
    double wk = 1.0;
    for (int k = 0; k <= r.den.degree(); ++k, wk *= std::abs(omega)) scale += std::abs(r.den[k]) * wk;
    if (std::abs(den) <= 1e-12 * scale) throw Error("axis pole at omega = " + std::to_string(omega));
    return r.num(s) / den;
}

/// Cancels numerator/denominator roots that agree within
/// rel_tol * (1 + |root|) and normalizes the denominator to be monic.
inline TransferFunction coprime_reduce(const TransferFunction& tf, double rel_tol = 1e-6)
{
    if (tf.den.is_zero()) throw Error("zero denominator");
    if (tf.num.is_zero()) return {Polynomial(), Polynomial{1.0}};
    std::vector<Complex> zn = detail::raw_roots(tf.num);
    std::vector<Complex> zd = detail::raw_roots(tf.den);
    std::vector<bool> used(zn.size(), false);
    std::vector<Complex> keep_den;
    bool cancelled = false;
    for (const Complex& p : zd) {
        std::size_t best = zn.size();
        double bd = INFINITY;
        for (std::size_t j = 0; j < zn.size(); ++j) {
            if (used[j]) continue;
            const double d = std::abs(zn[j] - p);
            if (d < bd) {
                bd = d;
                best = j;
            }
        }
        if (best < zn.size() && bd <= rel_tol * (1.0 + std::abs(p))) {
            used[best] = true;
            cancelled = true;
        } else {
            keep_den.push_back(p);
        }
    }
    const double lead_ratio = tf.num.leading() / tf.den.leading();
    if (!cancelled) return {tf.num * (1.0 / tf.den.leading()), tf.den.monic()};
    std::vector<Complex> keep_num;
    for (std::size_t j = 0; j < zn.size(); ++j)
        if (!used[j]) keep_num.push_back(zn[j]);
    return {Polynomial::from_roots(keep_num, lead_ratio), Polynomial::from_roots(keep_den)};
}

}  // namespace arrowgap
