#pragma once

#include "pencilnorm/pencil.hpp"

#include <vector>

namespace pn::decomp {

using pencil::AtomSet;
using region::CurveSpec;
using region::HomPoint;

/// Unitary Lambda with U = V Lambda, given U U^H = V V^H.
CMat connector_unitary(const CMat& U, const CMat& V, double tol = 1e-6);

enum class SkewMode { Equal, Contraction };

/// Skew-Hermitian Lambda with U = V Lambda, given U V^H + V U^H = 0 and
/// U U^H = V V^H (Equal: Lambda also unitary) or U U^H <= V V^H
/// (Contraction: ||Lambda||_2 <= 1).
CMat connector_skew(const CMat& U, const CMat& V, SkewMode mode, double tol = 1e-6);

/// Joint factorization U = W diag(mu) Q^H, V = W diag(nu) Q^H with every
/// (mu_i, nu_i) on the curve.
struct PairFactorization {
    CMat W; // p x r
    CMat Q; // r x r unitary
    CVec mu, nu;
    std::vector<HomPoint> points;
};

PairFactorization pair_factorize(const CMat& U, const CMat& V, const CurveSpec& curve,
                                 double tol = 1e-6, std::uint64_t seed = 0);

struct AtomicDecomposition {
    std::vector<CVec> atoms;
    std::vector<HomPoint> points;
    RVec weights; // ||a_k||^2
    double residual = 0.0;
    bool merged_clusters = false;

    CMat reconstruct(Eigen::Index n) const;
};

/// Constructive decomposition of an LMI-feasible PSD matrix into atom outer
/// products, X = sum_k a_k a_k^H with each a_k in the atom set.
AtomicDecomposition decompose_psd(const CMat& X, const AtomSet& aset, double tol = 1e-6);

/// Fast path for Toeplitz PSD matrices on the unit circle (shifted-row least
/// squares plus Schur of the resulting unitary).
AtomicDecomposition caratheodory_toeplitz(const CMat& X, double tol = 1e-6);

} // namespace pn::decomp
