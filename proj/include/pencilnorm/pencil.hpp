#pragma once

#include "pencilnorm/region.hpp"

#include <optional>
#include <vector>

namespace pn::pencil {

using region::CurveSpec;
using region::HomPoint;

enum class Family {
    Custom,
    Toeplitz,
    HankelPowers,
    Cosine,
    Sine,
    VectorPoly,
    Jacobi,
    Controllability,
    Descriptor,
    HankelBlock,
    ToeplitzFree, // Toeplitz first block, unconstrained second block (p2 = 0)
};

/// Two-block-diagonal structure of F, G, E.
struct PencilBlock {
    Eigen::Index p1 = 0, n1 = 0, p2 = 0, n2 = 0;
    CMat E1, E2;
};

struct PencilSpec {
    CMat F; // p x n
    CMat G; // p x n
    CMat E; // m_E x n, identity by default
    std::optional<PencilBlock> block;
    Family family = Family::Custom;

    Eigen::Index p() const { return F.rows(); }
    Eigen::Index n() const { return F.cols(); }

    void validate() const; // shape + block-diagonal consistency
};

// Standard families (exact matrices of the recursions they encode).
PencilSpec toeplitz(Eigen::Index n);
PencilSpec hankel_powers(Eigen::Index n);
PencilSpec cosine(Eigen::Index n);
PencilSpec sine(Eigen::Index n); // the 2I-diagonal variant of the trig recursion
PencilSpec vector_poly(Eigen::Index k, Eigen::Index l);
PencilSpec jacobi(const RVec& alphas, const RVec& betas);
PencilSpec jacobi_legendre(Eigen::Index n); // Legendre-coefficient instance
PencilSpec controllability(const CMat& A, const CMat& B);
PencilSpec descriptor(const CMat& Ed, const CMat& A, const CMat& B);
PencilSpec hankel_block(Eigen::Index n1, Eigen::Index n2);
PencilSpec toeplitz_with_free_block(Eigen::Index n1, Eigen::Index n2);

struct AtomSet {
    PencilSpec pencil;
    CurveSpec curve;

    AtomSet(PencilSpec pencil_, CurveSpec curve_);
};

/// Orthonormal basis of null(mu G - nu F) at an on-curve point.
std::vector<CVec> atom_basis(const AtomSet& aset, const HomPoint& p, double tol = 1e-9);

/// The equality/inequality LMI residual maps: Eq = sum of Phi-weighted
/// F/G sandwich products, Ineq likewise with Psi; both Hermitian.
struct LmiMaps {
    CMat eq;   // p x p
    CMat ineq; // p x p (zero when the inequality is inactive)
};
LmiMaps lmi_maps(const PencilSpec& pencil, const CurveSpec& curve, const CMat& X);

struct RankCheck {
    bool pass = false;
    std::optional<HomPoint> fail_at;
};
RankCheck rank_condition(const AtomSet& aset, Eigen::Index n_samples = 16,
                         std::uint64_t seed = 0);

/// Strictly feasible point: a sum of atom outer products at n distinct
/// interior nodes, verified (lambda_min > 0, LMI residuals) before being
/// returned.
CMat strictly_feasible_point(const AtomSet& aset, std::uint64_t seed = 0);

} // namespace pn::pencil
