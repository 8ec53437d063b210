#include "pencilnorm/numkern.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

namespace pn::numkern {

void check_finite(const CMat& A, const char* who) {
    if (!A.allFinite()) throw std::invalid_argument(std::string(who) + ": non-finite entries");
}

double herm_residual(const CMat& A) { return (A - A.adjoint()).norm(); }

HermEig herm_eig(const CMat& A) {
    if (A.rows() != A.cols()) throw std::invalid_argument("herm_eig: non-square input");
    check_finite(A, "herm_eig");
    CMat H = 0.5 * (A + A.adjoint());
    Eigen::SelfAdjointEigenSolver<CMat> es(H);
    if (es.info() != Eigen::Success) throw std::runtime_error("herm_eig: eigensolver failed");
    const Eigen::Index n = A.rows();
    HermEig out;
    out.Q.resize(n, n);
    out.lambda.resize(n);
    // Eigen returns ascending order; flip to descending.
    for (Eigen::Index i = 0; i < n; ++i) {
        out.lambda(i) = es.eigenvalues()(n - 1 - i);
        out.Q.col(i) = es.eigenvectors().col(n - 1 - i);
    }
    return out;
}

Svd svd(const CMat& A) {
    check_finite(A, "svd");
    Eigen::JacobiSVD<CMat> sv(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return {sv.matrixU(), sv.singularValues(), sv.matrixV()};
}

CMat complete_unitary(const CMat& B, Eigen::Index n) {
    const Eigen::Index q = B.cols();
    if (q > n) throw std::invalid_argument("complete_unitary: too many columns");
    if (q == n) return B;
    std::mt19937_64 rng(0x9e3779b97f4a7c15ull);
    std::normal_distribution<double> gauss(0.0, 1.0);
    CMat R(n, n - q);
    for (Eigen::Index j = 0; j < R.cols(); ++j)
        for (Eigen::Index i = 0; i < n; ++i) R(i, j) = Complex(gauss(rng), gauss(rng));
    // Project out span(B), then orthonormalize with modified Gram-Schmidt.
    if (q > 0) R -= B * (B.adjoint() * R);
    CMat out(n, n);
    out.leftCols(q) = B;
    Eigen::Index filled = q;
    for (Eigen::Index j = 0; j < R.cols() && filled < n; ++j) {
        CVec v = R.col(j);
        for (int pass = 0; pass < 2; ++pass)
            v -= out.leftCols(filled) * (out.leftCols(filled).adjoint() * v);
        double nv = v.norm();
        if (nv < 1e-12) continue;
        out.col(filled++) = v / nv;
    }
    while (filled < n) {
        // Extremely unlikely; fall back to canonical basis vectors.
        for (Eigen::Index k = 0; k < n && filled < n; ++k) {
            CVec v = CVec::Zero(n);
            v(k) = 1.0;
            for (int pass = 0; pass < 2; ++pass)
                v -= out.leftCols(filled) * (out.leftCols(filled).adjoint() * v);
            if (v.norm() > 1e-6) out.col(filled++) = v / v.norm();
        }
    }
    return out;
}

namespace {

SchurNormal sort_lex(CMat Q, CVec lambda) {
    const Eigen::Index n = lambda.size();
    std::vector<Eigen::Index> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
        if (lambda(a).real() != lambda(b).real()) return lambda(a).real() < lambda(b).real();
        return lambda(a).imag() < lambda(b).imag();
    });
    SchurNormal out;
    out.Q.resize(n, n);
    out.lambda.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        out.Q.col(i) = Q.col(idx[i]);
        out.lambda(i) = lambda(idx[i]);
    }
    return out;
}

} // namespace

SchurNormal schur_normal(const CMat& A, double normality_tol) {
    if (A.rows() != A.cols()) throw std::invalid_argument("schur_normal: non-square input");
    check_finite(A, "schur_normal");
    const Eigen::Index n = A.rows();
    if (n == 0) return {CMat(0, 0), CVec(0)};
    const double scale = A.squaredNorm();
    if ((A * A.adjoint() - A.adjoint() * A).norm() > normality_tol * (scale + 1.0))
        throw std::invalid_argument("schur_normal: input not normal within tolerance");

    const double anorm = A.norm();
    if ((A + A.adjoint()).norm() <= 1e-8 * (1.0 + anorm)) {
        // Skew-Hermitian: A = i H with H Hermitian.
        HermEig he = herm_eig(A / Complex(0.0, 1.0));
        CVec lam(n);
        for (Eigen::Index i = 0; i < n; ++i) lam(i) = Complex(0.0, he.lambda(i));
        return sort_lex(he.Q, lam);
    }

    // General normal: jointly diagonalize the commuting Hermitian pair
    // (A+A^H)/2 and (A-A^H)/(2i). Diagonalize the first, then refine inside
    // its near-degenerate eigenspaces by diagonalizing the restriction of the
    // second; widen the clustering tolerance if the residual is too large.
    CMat H1 = 0.5 * (A + A.adjoint());
    CMat H2 = (A - A.adjoint()) / Complex(0.0, 2.0);
    CMat best_Q;
    CVec best_d;
    double best_off = std::numeric_limits<double>::infinity();
    for (double ctol : {1e-9, 1e-7, 1e-5, 1e-3}) {
        HermEig he = herm_eig(H1);
        CMat Q = he.Q;
        const double gap = ctol * (1.0 + anorm);
        for (Eigen::Index i = 0; i < n;) {
            Eigen::Index j = i + 1;
            while (j < n && he.lambda(j - 1) - he.lambda(j) <= gap) ++j;
            if (j - i > 1) {
                CMat B = Q.middleCols(i, j - i).adjoint() * H2 * Q.middleCols(i, j - i);
                HermEig sub = herm_eig(CMat(0.5 * (B + B.adjoint())));
                Q.middleCols(i, j - i) = Q.middleCols(i, j - i) * sub.Q;
            }
            i = j;
        }
        CMat D = Q.adjoint() * A * Q;
        CMat off = D;
        off.diagonal().setZero();
        if (off.norm() <= 1e-9 * (1.0 + anorm)) return sort_lex(Q, D.diagonal());
        if (off.norm() < best_off) {
            best_off = off.norm();
            best_Q = Q;
            best_d = D.diagonal();
        }
    }
    // The input was certified normal up to normality_tol, so eigenpairs are
    // only meaningful to that accuracy anyway.
    if (best_off <= normality_tol * (1.0 + anorm)) return sort_lex(best_Q, best_d);
    throw std::runtime_error("schur_normal: joint diagonalization failed");
}

PsdFactor psd_factor(const CMat& X, double tol) {
    HermEig he = herm_eig(X);
    const double scale = 1.0 + X.norm();
    const Eigen::Index n = X.rows();
    if (n > 0 && he.lambda(n - 1) < -tol * scale)
        throw std::invalid_argument("psd_factor: not PSD (lambda_min = " +
                                    std::to_string(n > 0 ? he.lambda(n - 1) : 0.0) + ")");
    double lmax = (n > 0) ? he.lambda(0) : 0.0;
    Eigen::Index r = 0;
    if (lmax > 0)
        while (r < n && he.lambda(r) > tol * lmax) ++r;
    PsdFactor out;
    out.rank = r;
    out.Y.resize(n, r);
    for (Eigen::Index k = 0; k < r; ++k) out.Y.col(k) = he.Q.col(k) * std::sqrt(he.lambda(k));
    return out;
}

} // namespace pn::numkern
