#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Eigenvalues>

#include "arrowgap/types.hpp"

namespace arrowgap::linalg {

inline std::vector<Complex> eigenvalues(const Matrix& a)
{
    if (a.rows() == 0) return {};
    Eigen::EigenSolver<Matrix> es(a, false);
    if (es.info() != Eigen::Success) throw Error("eigenvalue iteration did not converge");
    std::vector<Complex> out(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    return out;
}

/// True when |Re z| <= tol * (1 + |z|).
inline bool near_axis(Complex z, double tol) { return std::abs(z.real()) <= tol * (1.0 + std::abs(z)); }

/// Complex Schur form M = U T U^H with the eigenvalues accepted by `select`
/// moved to the leading block of T.
struct OrderedSchur {
    ComplexMatrix U;
    ComplexMatrix T;
    Eigen::Index selected = 0;
};

inline void swap_adjacent(ComplexMatrix& T, ComplexMatrix& U, Eigen::Index p)
{
    const Complex a = T(p, p);
    const Complex b = T(p, p + 1);
    const Complex c = T(p + 1, p + 1);
    Complex x0 = b;
    Complex x1 = c - a;
    const double nrm = std::hypot(std::abs(x0), std::abs(x1));
    if (nrm == 0.0) return;
    x0 /= nrm;
    x1 /= nrm;
    Eigen::Matrix2cd g;
    g << x0, -std::conj(x1), x1, std::conj(x0);
    const Eigen::Index n = T.rows();
    T.middleRows(p, 2) = (g.adjoint() * T.middleRows(p, 2)).eval();
    T.middleCols(p, 2) = (T.middleCols(p, 2) * g).eval();
    U.middleCols(p, 2) = (U.middleCols(p, 2) * g).eval();
    T(p + 1, p) = 0.0;
    T(p, p) = c;
    T(p + 1, p + 1) = a;
    (void)n;
}

inline OrderedSchur ordered_schur(const Matrix& m, const std::function<bool(Complex)>& select)
{
    OrderedSchur out;
    Eigen::ComplexSchur<ComplexMatrix> cs(m.cast<Complex>(), true);
    if (cs.info() != Eigen::Success) throw Error("Schur iteration did not converge");
    out.U = cs.matrixU();
    out.T = cs.matrixT();
    const Eigen::Index n = out.T.rows();
    Eigen::Index k = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
        if (!select(out.T(j, j))) continue;
        for (Eigen::Index p = j; p > k; --p) swap_adjacent(out.T, out.U, p - 1);
        ++k;
    }
    out.selected = k;
    return out;
}

/// Principal square root of a symmetric positive semidefinite matrix;
/// eigenvalues below zero (rounding) are clamped.
inline Matrix psd_sqrt(const Matrix& s)
{
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(s));
    Vector d = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

inline double min_eigenvalue_sym(const Matrix& s)
{
    if (s.rows() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(s), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

inline double max_eigenvalue_sym(const Matrix& s)
{
    if (s.rows() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(s), Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

inline double max_singular_value(const ComplexMatrix& g)
{
    if (g.size() == 0) return 0.0;
    Eigen::JacobiSVD<ComplexMatrix> svd(g);
    return svd.singularValues()(0);
}

/// Numerical rank with singular values compared against rel_tol * sigma_max.
inline Eigen::Index rank(const ComplexMatrix& m, double rel_tol)
{
    if (m.size() == 0) return 0;
    Eigen::JacobiSVD<ComplexMatrix> svd(m);
    const auto& sv = svd.singularValues();
    const double cut = rel_tol * std::max(sv(0), 1e-300);
    Eigen::Index r = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > cut) ++r;
    return r;
}

}  // namespace arrowgap::linalg
