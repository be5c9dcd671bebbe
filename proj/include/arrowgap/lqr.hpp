#pragma once

#include <optional>

#include "arrowgap/care.hpp"
#include "arrowgap/statespace.hpp"

namespace arrowgap {

/// Quadratic regulator data. `horizon` empty means the infinite horizon.
/// Backward problems run the plant from x0 towards t = -T (or -infinity).
struct LqrProblem {
    StateSpace plant;
    Matrix Q;
    Matrix R;
    std::optional<double> horizon;
    Matrix H;
    Vector x0;
    Direction direction = Direction::Forward;

    void validate() const
    {
        const auto n = plant.states();
        if (plant.D.size() > 0 && plant.D.cwiseAbs().maxCoeff() != 0.0) throw Error("LQR requires D = 0");
        if (Q.rows() != plant.outputs() || Q.cols() != plant.outputs()) throw Error("Q must be outputs x outputs");
        if (R.rows() != plant.inputs() || R.cols() != plant.inputs()) throw Error("R must be inputs x inputs");
        if (x0.size() != n) throw Error("x0 dimension mismatch");
        if ((Q - Q.transpose()).norm() > 1e-12 * (1.0 + Q.norm())) throw Error("Q must be symmetric");
        if ((R - R.transpose()).norm() > 1e-12 * (1.0 + R.norm())) throw Error("R must be symmetric");
        if (linalg::min_eigenvalue_sym(Q) < -1e-12 * (1.0 + Q.norm())) throw Error("Q must be positive semidefinite");
        if (R.rows() > 0 && linalg::min_eigenvalue_sym(R) <= 0.0) throw Error("R must be positive definite");
        if (horizon) {
            if (!(*horizon > 0.0) || !std::isfinite(*horizon)) throw Error("finite horizon must be positive");
            if (H.rows() != n || H.cols() != n) throw Error("H must be states x states");
            if ((H - H.transpose()).norm() > 1e-12 * (1.0 + H.norm())) throw Error("H must be symmetric");
        }
    }
};

/// Time-varying optimal gain K(t) with u(t) = -K(t) x(t), K = R^{-1} B' S(t).
/// Each evaluation integrates the Riccati equation from the terminal time.
class GainSchedule {
public:
    GainSchedule(LqrProblem prob, double t_terminal, Matrix terminal_value)
        : prob_(std::move(prob)), t_terminal_(t_terminal), terminal_(std::move(terminal_value))
    {
    }

    Matrix riccati(double t) const
    {
        return riccati_ode_solve(prob_.plant.A, prob_.plant.B, prob_.plant.C, prob_.Q, prob_.R, t_terminal_, terminal_,
                                 t);
    }

    Matrix operator()(double t) const { return prob_.R.llt().solve(prob_.plant.B.transpose() * riccati(t)); }

    double terminal_time() const { return t_terminal_; }

private:
    LqrProblem prob_;
    double t_terminal_;
    Matrix terminal_;
};

struct LqrFiniteResult {
    double cost = 0.0;
    Matrix S0;
    GainSchedule gains;
};

/// Forward: S(T) = H, cost x0'S(0)x0. Backward: S(-T) = -H, cost -x0'S(0)x0.
inline LqrFiniteResult lqr_cost_finite(const LqrProblem& prob)
{
    prob.validate();
    if (!prob.horizon) throw Error("lqr_cost_finite needs a finite horizon");
    const double T = *prob.horizon;
    const bool fwd = prob.direction == Direction::Forward;
    const double t_term = fwd ? T : -T;
    const Matrix term = fwd ? Matrix(prob.H) : Matrix(-prob.H);
    const auto& p = prob.plant;
    Matrix S0 = riccati_ode_solve(p.A, p.B, p.C, prob.Q, prob.R, t_term, term, 0.0);
    const double quad = prob.x0.dot(S0 * prob.x0);
    return {fwd ? quad : -quad, S0, GainSchedule(prob, t_term, term)};
}

struct LqrInfiniteResult {
    double cost = 0.0;
    Matrix S;  ///< S_plus (forward) or S_minus (backward)
    double residual = 0.0;
};

/// Forward: x0'S+x0. Backward is the forward problem for the time-conjugated
/// plant, which gives -x0'S-x0 with S- = -S+(conj(P)).
inline LqrInfiniteResult lqr_cost_infinite(const LqrProblem& prob)
{
    prob.validate();
    if (prob.horizon) throw Error("lqr_cost_infinite needs an infinite horizon");
    if (prob.direction == Direction::Backward) {
        LqrProblem conj = prob;
        conj.plant = time_conjugate(prob.plant);
        conj.direction = Direction::Forward;
        LqrInfiniteResult r = lqr_cost_infinite(conj);
        r.S = -r.S;
        return r;
    }
    const auto& p = prob.plant;
    RiccatiSolution sol = care_solve(p.A, p.B, p.C, prob.Q, prob.R, Direction::Forward);
    return {prob.x0.dot(sol.S * prob.x0), sol.S, sol.residual};
}

}  // namespace arrowgap
