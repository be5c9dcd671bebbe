#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "arrowgap/lqr.hpp"
#include "test_support.hpp"

using namespace arrowgap;

namespace {

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

LqrProblem scalar_problem(double b, std::optional<double> T, double H, Direction dir)
{
    LqrProblem p;
    p.plant = StateSpace::siso(1.0, b, 1.0, 0.0);
    p.Q = scalar(1.0);
    p.R = scalar(1.0);
    p.horizon = T;
    p.H = scalar(H);
    p.x0 = Vector::Constant(1, 1.0);
    p.direction = dir;
    return p;
}

// Integrates x' = (A - B K) x with RK4 and accumulates y'Qy + u'Ru.
double simulated_cost(const LqrProblem& prob, const Matrix& S)
{
    const auto& g = prob.plant;
    const Matrix K = prob.R.llt().solve(g.B.transpose() * S);
    const Matrix Acl = g.A - g.B * K;
    double slowest = INFINITY;
    for (const Complex& z : linalg::eigenvalues(Acl)) slowest = std::min(slowest, std::abs(z.real()));
    const double horizon = 40.0 / slowest;
    const long steps = 200000;
    const double h = horizon / static_cast<double>(steps);
    const Matrix W = g.C.transpose() * prob.Q * g.C + K.transpose() * prob.R * K;
    // Augmented state (x, J): J' = x'Wx.
    auto f = [&](const Vector& x) { return Vector(Acl * x); };
    auto q = [&](const Vector& x) { return x.dot(W * x); };
    Vector x = prob.x0;
    double J = 0.0;
    for (long i = 0; i < steps; ++i) {
        const Vector k1 = f(x), k2 = f(x + 0.5 * h * k1), k3 = f(x + 0.5 * h * k2), k4 = f(x + h * k3);
        const double j1 = q(x), j2 = q(x + 0.5 * h * k1), j3 = q(x + 0.5 * h * k2), j4 = q(x + h * k3);
        x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        J += h / 6.0 * (j1 + 2.0 * j2 + 2.0 * j3 + j4);
    }
    return J;
}

}  // namespace

TEST(LqrFinite, ScalarForwardAndBackwardCosts)
{
    EXPECT_NEAR(lqr_cost_finite(scalar_problem(1.0, 1.0, 10.0, Direction::Forward)).cost, 2.5415, 5e-5);
    EXPECT_NEAR(lqr_cost_finite(scalar_problem(1.0, 1.0, 10.0, Direction::Backward)).cost, 0.5495, 5e-5);
}

TEST(LqrFinite, VanishingHorizon)
{
    EXPECT_NEAR(lqr_cost_finite(scalar_problem(1.0, 1e-6, 0.0, Direction::Forward)).cost, 0.0, 1e-5);
}

TEST(LqrFinite, GainScheduleMatchesRiccati)
{
    const LqrFiniteResult r = lqr_cost_finite(scalar_problem(1.0, 1.0, 10.0, Direction::Forward));
    EXPECT_NEAR(r.gains(0.0)(0, 0), r.S0(0, 0), 1e-12);  // B = R = 1
    EXPECT_NEAR(r.gains(1.0)(0, 0), 10.0, 1e-12);
    EXPECT_DOUBLE_EQ(r.gains.terminal_time(), 1.0);
}

TEST(LqrFinite, ApproachesInfiniteHorizon)
{
    const double inf = lqr_cost_infinite(scalar_problem(1.0, std::nullopt, 0.0, Direction::Forward)).cost;
    const double fin = lqr_cost_finite(scalar_problem(1.0, 30.0, 0.0, Direction::Forward)).cost;
    EXPECT_NEAR(fin, inf, 1e-3);
}

TEST(LqrFinite, ValidationErrors)
{
    LqrProblem p = scalar_problem(1.0, 1.0, 10.0, Direction::Forward);
    p.R = scalar(0.0);
    EXPECT_THROW(lqr_cost_finite(p), Error);
    p = scalar_problem(1.0, 1.0, 10.0, Direction::Forward);
    p.plant.D = scalar(1.0);
    EXPECT_THROW(lqr_cost_finite(p), Error);
    p = scalar_problem(1.0, -1.0, 10.0, Direction::Forward);
    EXPECT_THROW(lqr_cost_finite(p), Error);
    p = scalar_problem(1.0, std::nullopt, 10.0, Direction::Forward);
    EXPECT_THROW(lqr_cost_finite(p), Error);
}

TEST(LqrInfinite, EpsilonExample)
{
    const double eps = 0.1;
    const double root = std::sqrt(1.0 + eps * eps);
    const auto f = lqr_cost_infinite(scalar_problem(eps, std::nullopt, 0.0, Direction::Forward));
    const auto b = lqr_cost_infinite(scalar_problem(eps, std::nullopt, 0.0, Direction::Backward));
    EXPECT_NEAR(f.cost, (1.0 + root) / (eps * eps), 1e-9 * f.cost);
    EXPECT_NEAR(f.cost, 200.4988, 1e-4);
    EXPECT_NEAR(b.cost, (root - 1.0) / (eps * eps), 1e-9);
    EXPECT_NEAR(b.cost, 0.49875, 1e-5);
    EXPECT_NEAR(b.S(0, 0), (1.0 - root) / (eps * eps), 1e-9);
    EXPECT_GT(f.cost - b.cost, 100.0);
}

TEST(LqrInfinite, ZeroInitialState)
{
    for (Direction d : {Direction::Forward, Direction::Backward}) {
        LqrProblem p = scalar_problem(0.1, std::nullopt, 0.0, d);
        p.x0.setZero();
        EXPECT_EQ(lqr_cost_infinite(p).cost, 0.0);
    }
}

TEST(LqrInfinite, BackwardIsForwardOfConjugate)
{
    std::mt19937 rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        LqrProblem p;
        p.plant = arrowgap::testing::random_minimal_plant(rng, 1 + trial % 4);
        p.Q = scalar(1.0);
        p.R = scalar(1.0);
        p.x0 = arrowgap::testing::random_matrix(rng, p.plant.states(), 1);
        p.direction = Direction::Backward;
        LqrProblem q = p;
        q.plant = time_conjugate(p.plant);
        q.direction = Direction::Forward;
        EXPECT_EQ(lqr_cost_infinite(p).cost, lqr_cost_infinite(q).cost);
    }
}

TEST(LqrInfinite, SimulationOracleScalar)
{
    const LqrProblem p = scalar_problem(0.1, std::nullopt, 0.0, Direction::Forward);
    const LqrInfiniteResult r = lqr_cost_infinite(p);
    EXPECT_NEAR(simulated_cost(p, r.S), r.cost, 1e-3 * r.cost);
}

TEST(LqrInfinite, SimulationOracleTwoState)
{
    LqrProblem p;
    Matrix A(2, 2), B(2, 1), C(1, 2);
    A << 0.0, 1.0, 2.0, -1.0;
    B << 0.0, 1.0;
    C << 1.0, 0.5;
    p.plant = StateSpace(A, B, C, Matrix::Zero(1, 1));
    p.Q = scalar(2.0);
    p.R = scalar(0.5);
    p.x0 = Vector(2);
    p.x0 << 1.0, -0.5;
    const LqrInfiniteResult r = lqr_cost_infinite(p);
    EXPECT_LE(r.residual, 1e-10);
    EXPECT_NEAR(simulated_cost(p, r.S), r.cost, 1e-3 * r.cost);
}
