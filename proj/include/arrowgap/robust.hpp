#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "arrowgap/care.hpp"
#include "arrowgap/linalg.hpp"
#include "arrowgap/statespace.hpp"

namespace arrowgap {

namespace detail {

inline double sigma_at(const StateSpace& g, double omega)
{
    return linalg::max_singular_value(g.response(Complex(0.0, omega)));
}

// Hamiltonian whose imaginary-axis eigenvalues jw are exactly the
// frequencies with sigma_max(G(jw)) = gamma (gamma > sigma_max(D)).
inline Matrix norm_hamiltonian(const StateSpace& g, double gamma)
{
    const auto m = g.inputs();
    const auto p = g.outputs();
    const Matrix R = gamma * gamma * Matrix::Identity(m, m) - g.D.transpose() * g.D;
    const Matrix S = gamma * gamma * Matrix::Identity(p, p) - g.D * g.D.transpose();
    const Matrix Rinv = R.inverse();
    const Matrix Ah = g.A + g.B * Rinv * g.D.transpose() * g.C;
    const auto n = g.states();
    Matrix H(2 * n, 2 * n);
    H << Ah, gamma * g.B * Rinv * g.B.transpose(), -gamma * g.C.transpose() * S.inverse() * g.C, -Ah.transpose();
    return H;
}

}  // namespace detail

/// sup_w sigma_max(G(jw)). Grid scan for the initial lower bound, then
/// Hamiltonian level-set iterations (each pass evaluates the response at the
/// midpoints between imaginary-axis Hamiltonian eigenvalues) until the level
/// (1 + 2 rel_tol) * lower bound has no crossings.
inline double linf_norm(const StateSpace& g, double rel_tol = 1e-9)
{
    const double sigma_d = linalg::max_singular_value(g.D.cast<Complex>());
    if (g.states() == 0) return sigma_d;
    std::vector<Complex> poles = linalg::eigenvalues(g.A);
    for (const Complex& z : poles)
        if (linalg::near_axis(z, kDefaultAxisTolerance)) throw Error("norm undefined (axis pole)");

    std::vector<double> freqs{0.0};
    constexpr int kGrid = 512;
    for (int i = 0; i < kGrid; ++i) freqs.push_back(std::pow(10.0, -4.0 + 8.0 * i / (kGrid - 1)));
    for (const Complex& z : poles) {
        freqs.push_back(std::abs(z.imag()));
        freqs.push_back(std::abs(z));
    }
    double lb = sigma_d;
    for (double w : freqs) lb = std::max(lb, detail::sigma_at(g, w));
    if (lb == 0.0) return 0.0;

    for (int iter = 0; iter < 100; ++iter) {
        const double gamma = lb * (1.0 + 2.0 * rel_tol);
        const Matrix H = detail::norm_hamiltonian(g, gamma);
        const double scale = std::max(1.0, H.norm());
        std::vector<double> crossings;
        for (const Complex& z : linalg::eigenvalues(H))
            if (std::abs(z.real()) <= 1e-6 * scale) crossings.push_back(z.imag());
        if (crossings.empty()) break;
        std::sort(crossings.begin(), crossings.end());
        double next = lb;
        for (std::size_t i = 0; i + 1 < crossings.size(); ++i)
            next = std::max(next, detail::sigma_at(g, 0.5 * (crossings[i] + crossings[i + 1])));
        if (!(next > lb * (1.0 + 1e-15))) break;
        lb = next;
    }
    return lb;
}

struct MarginReport {
    double b = 0.0;
    double hinf_norm_H = std::numeric_limits<double>::infinity();
    bool internally_f_stable = false;
};

/// b_{P,C} = 1 / ||H_{P,C}||_inf for an internally f-stable loop, 0 otherwise.
inline MarginReport b_margin(const StateSpace& p, const StateSpace& c)
{
    const ClosedLoopMap cl = closed_loop_map(p, c);
    if (!cl.well_posed) throw Error("ill-posed feedback loop");
    MarginReport r;
    r.internally_f_stable = cl.internally_f_stable;
    if (!cl.internally_f_stable) return r;
    r.hinf_norm_H = linf_norm(*cl.realization);
    r.b = 1.0 / r.hinf_norm_H;
    return r;
}

/// Optimal margin witness: Y solves the normalized-coprime filter Riccati
/// equation A0 Y + Y A0' - Y C'R^{-1}C Y + B (I - D'R^{-1}D) B' = 0,
/// X solves F'X + XF + C'R^{-1}C = 0 with F = A0 - Y C'R^{-1}C, and
/// b_opt = sqrt(1 - lambda_max(Y X)).
struct BoptWitness {
    Matrix Y;
    Matrix X;
    double lambda_max_YX = 1.0;
    double b_opt = 0.0;
    Direction direction = Direction::Forward;
    bool stabilizable = false;
    double riccati_residual = 0.0;
    double lyapunov_residual = 0.0;
    std::string diagnostic;
};

namespace detail {

struct NcfData {
    Matrix A0, G, W, Crc;
};

inline NcfData ncf_data(const StateSpace& p)
{
    const auto m = p.inputs();
    const auto q = p.outputs();
    const Matrix R = Matrix::Identity(q, q) + p.D * p.D.transpose();
    const Matrix Rinv = R.inverse();
    NcfData d;
    d.A0 = p.A - p.B * p.D.transpose() * Rinv * p.C;
    d.Crc = p.C.transpose() * Rinv * p.C;
    d.G = d.Crc;
    d.W = p.B * (Matrix::Identity(m, m) - p.D.transpose() * Rinv * p.D) * p.B.transpose();
    return d;
}

// Y from the requested extremal branch of the filter Riccati equation,
// X from the matching Lyapunov equation. `branch` Forward gives (Y+, X+),
// Backward gives (Y-, X-).
inline BoptWitness bopt_extremal(const StateSpace& p, Direction branch)
{
    BoptWitness w;
    const NcfData d = ncf_data(p);
    RiccatiSolution ys = care_extremal_g(d.A0.transpose(), d.G, d.W, branch);
    const Matrix& Y = ys.S;
    const Matrix F = d.A0 - Y * d.Crc;
    const Matrix X = solve_lyapunov(F, d.Crc);
    w.Y = Y;
    w.X = X;
    w.riccati_residual = (d.A0 * Y + Y * d.A0.transpose() - Y * d.Crc * Y + d.W).norm();
    w.lyapunov_residual = (F.transpose() * X + X * F + d.Crc).norm();
    // Both factors share a sign; the product's spectrum equals that of the
    // symmetric congruence sqrt(+-Y) (+-X) sqrt(+-Y).
    const double sign = branch == Direction::Forward ? 1.0 : -1.0;
    const Matrix ry = linalg::psd_sqrt(sign * Y);
    w.lambda_max_YX = Y.rows() == 0 ? 0.0 : linalg::max_eigenvalue_sym(ry * (sign * X) * ry);
    w.lambda_max_YX = std::max(0.0, w.lambda_max_YX);
    w.stabilizable = true;
    w.b_opt = w.lambda_max_YX < 1.0 ? std::sqrt(1.0 - w.lambda_max_YX) : 0.0;
    return w;
}

inline BoptWitness unstabilizable(const StateSpace& p, Direction dir, std::string why)
{
    BoptWitness w;
    w.Y = Matrix::Zero(p.states(), p.states());
    w.X = Matrix::Zero(p.states(), p.states());
    w.direction = dir;
    w.diagnostic = std::move(why);
    return w;
}

}  // namespace detail

/// Maximal robustness margin over all f-stabilizing (Forward) or
/// b-stabilizing (Backward) controllers. The backward value is the forward
/// value of the time-conjugated plant; the witness is reported in the
/// original coordinates (Y-, X-).
inline BoptWitness b_opt(const StateSpace& p, Direction dir)
{
    if (dir == Direction::Backward) {
        BoptWitness w = b_opt(time_conjugate(p), Direction::Forward);
        w.Y = -w.Y;
        w.X = -w.X;
        w.direction = Direction::Backward;
        return w;
    }
    if (!is_stabilizable_detectable(p))
        return detail::unstabilizable(p, dir, "not stabilizable/detectable: hidden unstable mode");
    try {
        BoptWitness w = detail::bopt_extremal(p, Direction::Forward);
        w.direction = dir;
        return w;
    } catch (const Error& e) {
        return detail::unstabilizable(p, dir, e.what());
    }
}

/// Backward optimal margin from the negative-definite Riccati branch
/// directly (Y-, X-), without conjugating the plant. Forward delegates to
/// b_opt.
inline BoptWitness b_opt_extremal_route(const StateSpace& p, Direction dir)
{
    if (dir == Direction::Forward) return b_opt(p, dir);
    if (!is_stabilizable_detectable(time_conjugate(p)))
        return detail::unstabilizable(p, dir, "not stabilizable/detectable: hidden unstable mode");
    try {
        BoptWitness w = detail::bopt_extremal(p, Direction::Backward);
        w.direction = dir;
        return w;
    } catch (const Error& e) {
        return detail::unstabilizable(p, dir, e.what());
    }
}

}  // namespace arrowgap
