#pragma once

#include <cmath>
#include <vector>

#include "arrowgap/linalg.hpp"
#include "arrowgap/types.hpp"

namespace arrowgap {

namespace detail {

// Solves T^H Z + Z T = W for upper-triangular T.
inline ComplexMatrix triangular_lyapunov(const ComplexMatrix& T, const ComplexMatrix& W, double sing_tol)
{
    const Eigen::Index n = T.rows();
    ComplexMatrix Z = ComplexMatrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            Complex acc = W(i, j);
            for (Eigen::Index k = 0; k < i; ++k) acc -= std::conj(T(k, i)) * Z(k, j);
            for (Eigen::Index k = 0; k < j; ++k) acc -= Z(i, k) * T(k, j);
            const Complex pivot = std::conj(T(i, i)) + T(j, j);
            if (std::abs(pivot) <= sing_tol) throw Error("singular Sylvester operator");
            Z(i, j) = acc / pivot;
        }
    }
    return Z;
}

}  // namespace detail

/// X with F'X + XF + Q = 0 (complex Schur / Bartels-Stewart, one refinement
/// sweep).
inline Matrix solve_lyapunov(const Matrix& F, const Matrix& Q)
{
    const Eigen::Index n = F.rows();
    if (F.cols() != n || Q.rows() != n || Q.cols() != n) throw Error("solve_lyapunov: dimension mismatch");
    if (n == 0) return Matrix(0, 0);
    Eigen::ComplexSchur<ComplexMatrix> cs(F.cast<Complex>(), true);
    if (cs.info() != Eigen::Success) throw Error("Schur iteration did not converge");
    const ComplexMatrix& U = cs.matrixU();
    const ComplexMatrix& T = cs.matrixT();
    const double sing_tol = 1e-10 * (1.0 + F.norm());
    auto apply = [&](const Matrix& rhs) {
        const ComplexMatrix W = -(U.adjoint() * rhs.cast<Complex>() * U);
        const ComplexMatrix Z = detail::triangular_lyapunov(T, W, sing_tol);
        return Matrix((U * Z * U.adjoint()).real());
    };
    const bool sym = (Q - Q.transpose()).norm() <= 1e-14 * (1.0 + Q.norm());
    Matrix X = apply(Q);
    if (sym) X = symmetrize(X);
    const Matrix res = F.transpose() * X + X * F + Q;
    X += apply(res);
    if (sym) X = symmetrize(X);
    return X;
}

/// Stabilizing and antistabilizing solutions of A'S + SA - SBR^{-1}B'S + C'QC = 0.
struct RiccatiPair {
    Matrix S_plus;
    Matrix S_minus;
    double residual_plus = 0.0;
    double residual_minus = 0.0;
    std::vector<Complex> closed_loop_eigs_plus;
    std::vector<Complex> closed_loop_eigs_minus;
};

struct RiccatiSolution {
    Matrix S;
    double residual = 0.0;
    std::vector<Complex> closed_loop_eigs;
};

inline constexpr double kHamiltonianAxisTolerance = 1e-8;

inline Matrix care_residual(const Matrix& A, const Matrix& G, const Matrix& Qc, const Matrix& S)
{
    return A.transpose() * S + S * A - S * G * S + Qc;
}

/// Extremal solution of A'S + SA - S G S + Qc = 0 with G = G' >= 0:
/// Forward picks A - GS Hurwitz, Backward picks -(A - GS) Hurwitz.
/// Throws "no extremal solution" when the Hamiltonian has imaginary-axis
/// eigenvalues or the selected invariant subspace is not a graph.
inline RiccatiSolution care_extremal_g(const Matrix& A, const Matrix& G, const Matrix& Qc, Direction dir)
{
    const Eigen::Index n = A.rows();
    RiccatiSolution out;
    if (n == 0) {
        out.S = Matrix(0, 0);
        return out;
    }
    Matrix H(2 * n, 2 * n);
    H << A, -G, -Qc, -A.transpose();
    const double hscale = std::max(1.0, H.norm());
    for (const Complex& z : linalg::eigenvalues(H))
        if (std::abs(z.real()) <= kHamiltonianAxisTolerance * hscale)
            throw Error("no extremal solution: Hamiltonian has imaginary-axis eigenvalues");
    const bool forward = dir == Direction::Forward;
    const linalg::OrderedSchur os =
        linalg::ordered_schur(H, [forward](Complex z) { return forward ? z.real() < 0.0 : z.real() > 0.0; });
    if (os.selected != n) throw Error("no extremal solution: invariant subspace has wrong dimension");
    const ComplexMatrix U1 = os.U.topLeftCorner(n, n);
    const ComplexMatrix U2 = os.U.bottomLeftCorner(n, n);
    Eigen::JacobiSVD<ComplexMatrix> svd(U1);
    const auto& sv = svd.singularValues();
    if (sv(n - 1) <= 1e-10 * sv(0))
        throw Error("no extremal solution: invariant subspace is not a graph (lost stabilizability/detectability)");
    Matrix S = symmetrize((U2 * U1.inverse()).real());

    // Newton refinement: (A - GS)' D + D (A - GS) + Res(S) = 0.
    double res = care_residual(A, G, Qc, S).norm();
    for (int it = 0; it < 3 && res > 0.0; ++it) {
        Matrix next;
        try {
            next = S + solve_lyapunov(A - G * S, care_residual(A, G, Qc, S));
        } catch (const Error&) {
            break;
        }
        next = symmetrize(next);
        const double r2 = care_residual(A, G, Qc, next).norm();
        if (!(r2 < res)) break;
        S = next;
        res = r2;
    }
    out.S = S;
    out.residual = res;
    out.closed_loop_eigs = linalg::eigenvalues(A - G * S);
    return out;
}

inline Matrix control_weight(const Matrix& B, const Matrix& R)
{
    return B * R.llt().solve(B.transpose());
}

inline RiccatiSolution care_solve(const Matrix& A, const Matrix& B, const Matrix& C, const Matrix& Q, const Matrix& R,
                                  Direction dir)
{
    return care_extremal_g(A, control_weight(B, R), C.transpose() * Q * C, dir);
}

inline RiccatiPair care_extremal(const Matrix& A, const Matrix& B, const Matrix& C, const Matrix& Q, const Matrix& R)
{
    const Matrix G = control_weight(B, R);
    const Matrix Qc = C.transpose() * Q * C;
    RiccatiSolution plus = care_extremal_g(A, G, Qc, Direction::Forward);
    RiccatiSolution minus = care_extremal_g(A, G, Qc, Direction::Backward);
    return {std::move(plus.S),
            std::move(minus.S),
            plus.residual,
            minus.residual,
            std::move(plus.closed_loop_eigs),
            std::move(minus.closed_loop_eigs)};
}

/// Sampled solution of -S' = SA + A'S - SGS + C'QC.
struct RiccatiTrajectory {
    std::vector<double> grid;
    std::vector<Matrix> S_of_t;
    double terminal_time = 0.0;
    Matrix terminal_value;
};

namespace detail {

struct RiccatiField {
    Matrix A, G, Qc;
    Matrix operator()(const Matrix& S) const { return -(S * A + A.transpose() * S - S * G * S + Qc); }
};

inline constexpr double kRiccatiOverflow = 1e12;

// RK4 with `steps` steps from t0 to t1; records every `stride` steps when
// `traj` is given.
inline Matrix rk4_riccati(const RiccatiField& f, double t0, const Matrix& S0, double t1, long steps,
                          RiccatiTrajectory* traj = nullptr, long stride = 1)
{
    const double h = (t1 - t0) / static_cast<double>(steps);
    Matrix S = S0;
    if (traj) {
        traj->grid.push_back(t0);
        traj->S_of_t.push_back(S);
    }
    for (long k = 0; k < steps; ++k) {
        const Matrix k1 = f(S);
        const Matrix k2 = f(S + 0.5 * h * k1);
        const Matrix k3 = f(S + 0.5 * h * k2);
        const Matrix k4 = f(S + h * k3);
        S = symmetrize(S + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
        if (!S.allFinite() || S.norm() > kRiccatiOverflow) throw Error("Riccati blow-up");
        if (traj && ((k + 1) % stride == 0 || k + 1 == steps)) {
            traj->grid.push_back(t0 + static_cast<double>(k + 1) * h);
            traj->S_of_t.push_back(S);
        }
    }
    return S;
}

struct OdeResult {
    Matrix S;
    long steps = 0;
};

inline OdeResult riccati_ode_converged(const RiccatiField& f, double t_terminal, const Matrix& H, double t_eval)
{
    long steps = 4096;
    Matrix prev = rk4_riccati(f, t_terminal, H, t_eval, steps);
    constexpr long kMaxSteps = 1L << 20;
    while (steps < kMaxSteps) {
        steps *= 2;
        const Matrix next = rk4_riccati(f, t_terminal, H, t_eval, steps);
        const double diff = (next - prev).cwiseAbs().maxCoeff();
        prev = next;
        if (diff < 1e-8 * (1.0 + next.cwiseAbs().maxCoeff())) return {prev, steps};
    }
    throw Error("Riccati integration did not converge");
}

}  // namespace detail

/// S(t_eval) for -S' = SA + A'S - S B R^{-1} B' S + C'QC with S(t_terminal) = H.
/// Integration runs from t_terminal towards t_eval in either direction.
inline Matrix riccati_ode_solve(const Matrix& A, const Matrix& B, const Matrix& C, const Matrix& Q, const Matrix& R,
                                double t_terminal, const Matrix& H, double t_eval)
{
    if (!std::isfinite(t_terminal) || !std::isfinite(t_eval)) throw Error("Riccati ODE times must be finite");
    if (t_terminal == t_eval) return symmetrize(H);
    detail::RiccatiField f{A, control_weight(B, R), C.transpose() * Q * C};
    return detail::riccati_ode_converged(f, t_terminal, symmetrize(H), t_eval).S;
}

inline RiccatiTrajectory riccati_ode_trajectory(const Matrix& A, const Matrix& B, const Matrix& C, const Matrix& Q,
                                                const Matrix& R, double t_terminal, const Matrix& H, double t_eval,
                                                long samples = 64)
{
    detail::RiccatiField f{A, control_weight(B, R), C.transpose() * Q * C};
    RiccatiTrajectory traj;
    traj.terminal_time = t_terminal;
    traj.terminal_value = symmetrize(H);
    if (t_terminal == t_eval) {
        traj.grid = {t_eval};
        traj.S_of_t = {traj.terminal_value};
        return traj;
    }
    const long steps = detail::riccati_ode_converged(f, t_terminal, traj.terminal_value, t_eval).steps;
    const long stride = std::max(1L, steps / std::max(1L, samples));
    detail::rk4_riccati(f, t_terminal, traj.terminal_value, t_eval, steps, &traj, stride);
    return traj;
}

}  // namespace arrowgap
