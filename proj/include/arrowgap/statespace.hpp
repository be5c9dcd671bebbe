#pragma once

#include <optional>
#include <string>
#include <vector>

#include "arrowgap/linalg.hpp"
#include "arrowgap/poly.hpp"
#include "arrowgap/types.hpp"

namespace arrowgap {

/// x' = A x + B u, y = C x + D u, x(0) = x0.
struct StateSpace {
    Matrix A;
    Matrix B;
    Matrix C;
    Matrix D;
    Vector x0;

    StateSpace() : StateSpace(Matrix(0, 0), Matrix(0, 1), Matrix(1, 0), Matrix::Zero(1, 1)) {}

    StateSpace(Matrix a, Matrix b, Matrix c, Matrix d, std::optional<Vector> init = std::nullopt)
        : A(std::move(a)), B(std::move(b)), C(std::move(c)), D(std::move(d))
    {
        x0 = init ? *init : Vector::Zero(A.rows());
        validate();
    }

    /// Memoryless gain y = k u.
    static StateSpace gain(double k)
    {
        return StateSpace(Matrix(0, 0), Matrix(0, 1), Matrix(1, 0), Matrix::Constant(1, 1, k));
    }

    static StateSpace siso(double a, double b, double c, double d)
    {
        return StateSpace(Matrix::Constant(1, 1, a), Matrix::Constant(1, 1, b), Matrix::Constant(1, 1, c),
                          Matrix::Constant(1, 1, d));
    }

    Eigen::Index states() const { return A.rows(); }
    Eigen::Index inputs() const { return B.cols(); }
    Eigen::Index outputs() const { return C.rows(); }
    bool is_siso() const { return inputs() == 1 && outputs() == 1; }

    /// C (sI - A)^{-1} B + D
    ComplexMatrix response(Complex s) const
    {
        ComplexMatrix out = D.cast<Complex>();
        if (states() == 0) return out;
        ComplexMatrix m = s * ComplexMatrix::Identity(states(), states()) - A.cast<Complex>();
        out += C.cast<Complex>() * m.partialPivLu().solve(B.cast<Complex>());
        return out;
    }

    void validate() const
    {
        const auto n = A.rows();
        if (A.cols() != n) throw Error("state matrix A must be square");
        if (B.rows() != n) throw Error("B must have as many rows as A");
        if (C.cols() != n) throw Error("C must have as many columns as A");
        if (D.rows() != C.rows() || D.cols() != B.cols()) throw Error("D must be outputs x inputs");
        if (x0.size() != n) throw Error("initial state dimension mismatch");
    }

    friend bool operator==(const StateSpace& a, const StateSpace& b)
    {
        auto same = [](const auto& x, const auto& y) {
            return x.rows() == y.rows() && x.cols() == y.cols() && x == y;
        };
        return same(a.A, b.A) && same(a.B, b.B) && same(a.C, b.C) && same(a.D, b.D) && same(a.x0, b.x0);
    }
};

struct StabilityReport {
    bool f_stable = false;
    bool b_stable = false;
    bool l2_double_axis_bounded = false;
    std::vector<Complex> eigenvalues;
};

inline StabilityReport stability_classify(const Matrix& a, double axis_tol = kDefaultAxisTolerance)
{
    StabilityReport r;
    r.eigenvalues = linalg::eigenvalues(a);
    r.f_stable = r.b_stable = r.l2_double_axis_bounded = true;
    for (const Complex& z : r.eigenvalues) {
        const bool axis = linalg::near_axis(z, axis_tol);
        if (axis || z.real() >= 0.0) r.f_stable = false;
        if (axis || z.real() <= 0.0) r.b_stable = false;
        if (axis) r.l2_double_axis_bounded = false;
    }
    return r;
}

inline StabilityReport stability_classify(const StateSpace& p, double axis_tol = kDefaultAxisTolerance)
{
    return stability_classify(p.A, axis_tol);
}

/// Solves the state equation backwards and flips the time axis:
/// (A, B, C, D) -> (-A, -B, C, D), transfer function P(-s).
inline StateSpace time_conjugate(const StateSpace& p)
{
    return StateSpace(-p.A, -p.B, p.C, p.D, p.x0);
}

/// Controllable canonical form of num/den exactly as given (no cancellation
/// of common roots, so a pole-zero pair stays as a hidden mode).
inline StateSpace controllable_canonical(const TransferFunction& tf)
{
    if (!tf.proper()) throw Error("improper transfer function");
    const Polynomial den = tf.den.monic();
    const Polynomial num = tf.num * (1.0 / tf.den.leading());
    const int n = den.degree();
    auto [q, rem] = num.divmod(den);
    const double d = q[0];
    Matrix a = Matrix::Zero(n, n);
    Matrix b = Matrix::Zero(n, 1);
    Matrix c = Matrix::Zero(1, n);
    for (int i = 0; i + 1 < n; ++i) a(i, i + 1) = 1.0;
    for (int i = 0; i < n; ++i) {
        a(n - 1, i) = -den[i];
        c(0, i) = rem[i];
    }
    if (n > 0) b(n - 1, 0) = 1.0;
    return StateSpace(a, b, c, Matrix::Constant(1, 1, d));
}

/// Minimal realization: common roots cancelled, then controllable canonical
/// form.
inline StateSpace realize(const TransferFunction& tf)
{
    if (!tf.proper()) throw Error("improper transfer function");
    return controllable_canonical(coprime_reduce(tf));
}

inline Polynomial characteristic_polynomial(const Matrix& a)
{
    const std::vector<Complex> ev = linalg::eigenvalues(a);
    return Polynomial::from_roots(ev);
}

/// Coprime num/den with monic den. Uses det(sI - A + BC) =
/// det(sI - A)(1 + C (sI - A)^{-1} B) for the numerator.
inline TransferFunction ss_to_tf(const StateSpace& p)
{
    if (!p.is_siso()) throw Error("SISO only");
    const Polynomial den = characteristic_polynomial(p.A);
    const Polynomial closed = characteristic_polynomial(p.A - p.B * p.C);
    const double scale = std::max(den.max_abs_coeff(), closed.max_abs_coeff());
    Polynomial strict = closed - den;
    {
        std::vector<double> c = strict.coeffs();
        while (c.size() > 1 && std::abs(c.back()) <= 1e-12 * scale) c.pop_back();
        strict = Polynomial(std::move(c));
    }
    const Polynomial num = strict + den * p.D(0, 0);
    return coprime_reduce({num, den});
}

/// Realization of H_{P,C} = [I; P](I - PC)^{-1}[I, -C] mapping (u0, y0) to
/// (u1, y1).
struct ClosedLoopMap {
    std::optional<StateSpace> realization;
    bool well_posed = false;
    bool internally_f_stable = false;
};

inline ClosedLoopMap closed_loop_map(const StateSpace& p, const StateSpace& c)
{
    const auto m = p.inputs();
    const auto q = p.outputs();
    if (c.inputs() != q || c.outputs() != m) throw Error("plant and controller dimensions are incompatible");
    ClosedLoopMap out;
    const Matrix loop = Matrix::Identity(m, m) - c.D * p.D;
    Eigen::JacobiSVD<Matrix> svd(loop);
    const auto& sv = svd.singularValues();
    if (sv.size() > 0 && sv(sv.size() - 1) <= 1e-12 * std::max(1.0, sv(0))) return out;
    out.well_posed = true;

    const Matrix M = loop.inverse();
    const auto np = p.states();
    const auto nc = c.states();
    const auto n = np + nc;

    Matrix u1x(m, n);
    u1x << M * c.D * p.C, M * c.C;
    Matrix u1w(m, m + q);
    u1w << M, -M * c.D;

    Matrix drive(n, m);
    drive << p.B, c.B * p.D;

    Matrix a_open = Matrix::Zero(n, n);
    a_open.topLeftCorner(np, np) = p.A;
    a_open.bottomLeftCorner(nc, np) = c.B * p.C;
    a_open.bottomRightCorner(nc, nc) = c.A;
    Matrix b_open = Matrix::Zero(n, m + q);
    b_open.bottomRightCorner(nc, q) = -c.B;

    Matrix cy(q, n);
    cy << p.C, Matrix::Zero(q, nc);

    Matrix acl = a_open + drive * u1x;
    Matrix bcl = b_open + drive * u1w;
    Matrix ccl(m + q, n);
    ccl << u1x, cy + p.D * u1x;
    Matrix dcl(m + q, m + q);
    dcl << u1w, p.D * u1w;

    out.realization = StateSpace(acl, bcl, ccl, dcl);
    out.internally_f_stable = stability_classify(acl).f_stable;
    return out;
}

namespace detail {

// PBH rank test restricted to eigenvalues accepted by `check`.
template <class Pred>
bool pbh_full_rank(const Matrix& a, const Matrix& b, bool columns, double rel_tol, Pred check)
{
    const auto n = a.rows();
    for (const Complex& lam : linalg::eigenvalues(a)) {
        if (!check(lam)) continue;
        const ComplexMatrix shifted = a.cast<Complex>() - lam * ComplexMatrix::Identity(n, n);
        ComplexMatrix test;
        if (columns) {
            test.resize(n, n + b.cols());
            test << shifted, b.cast<Complex>();
        } else {
            test.resize(n + b.rows(), n);
            test << shifted, b.cast<Complex>();
        }
        if (linalg::rank(test, rel_tol) < n) return false;
    }
    return true;
}

}  // namespace detail

inline bool is_controllable(const StateSpace& p, double rel_tol = 1e-8)
{
    return detail::pbh_full_rank(p.A, p.B, true, rel_tol, [](Complex) { return true; });
}

inline bool is_observable(const StateSpace& p, double rel_tol = 1e-8)
{
    return detail::pbh_full_rank(p.A, p.C, false, rel_tol, [](Complex) { return true; });
}

/// Controllable and observable (PBH rank tests at every eigenvalue of A).
inline bool minimality_check(const StateSpace& p, double rel_tol = 1e-8)
{
    return is_controllable(p, rel_tol) && is_observable(p, rel_tol);
}

/// Every mode that is not f-stable is reachable (stabilizable) and visible
/// (detectable).
inline bool is_stabilizable_detectable(const StateSpace& p, double rel_tol = 1e-8)
{
    auto unstable = [](Complex z) { return z.real() >= -kDefaultAxisTolerance * (1.0 + std::abs(z)); };
    return detail::pbh_full_rank(p.A, p.B, true, rel_tol, unstable) &&
           detail::pbh_full_rank(p.A, p.C, false, rel_tol, unstable);
}

}  // namespace arrowgap
