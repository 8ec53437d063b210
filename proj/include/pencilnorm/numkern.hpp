#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>

namespace pn {

using Complex = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

namespace numkern {

/// Eigendecomposition of a Hermitian matrix, eigenvalues sorted descending.
struct HermEig {
    CMat Q;      // unitary, columns are eigenvectors
    RVec lambda; // descending
};

HermEig herm_eig(const CMat& A);

/// Full SVD: A = P diag(sigma) Q^H with P, Q unitary and sigma descending.
struct Svd {
    CMat P;
    RVec sigma; // length min(m, n)
    CMat Q;
};

Svd svd(const CMat& A);

/// Schur decomposition of a normal matrix: A = Q diag(lambda) Q^H.
/// Eigenvalues sorted lexicographically by (Re, Im) ascending.
struct SchurNormal {
    CMat Q;
    CVec lambda;
};

SchurNormal schur_normal(const CMat& A, double normality_tol = 1e-6);

/// Rank-revealing factorization X = Y Y^H of a PSD matrix.
struct PsdFactor {
    CMat Y; // n x r
    Eigen::Index rank;
};

PsdFactor psd_factor(const CMat& X, double tol = 1e-9);

// Helpers shared across modules.
void check_finite(const CMat& A, const char* who);
double herm_residual(const CMat& A); // ||A - A^H||_F
/// Extend an n x q matrix with orthonormal columns to an n x n unitary,
/// deterministically (fixed internal seed).
CMat complete_unitary(const CMat& B, Eigen::Index n);

} // namespace numkern
} // namespace pn
