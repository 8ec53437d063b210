#pragma once

#include "pencilnorm/numkern.hpp"

#include <Eigen/SparseCore>

#include <cstdint>
#include <optional>
#include <vector>

namespace pn::conic {

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

/// Scaled vectorization of a real symmetric matrix (lower triangle,
/// column-major, sqrt(2) on off-diagonal entries); svec(S1).svec(S2) = <S1,S2>.
RVec svec(const RMat& S);
RMat smat(const RVec& v);
Eigen::Index svec_len(Eigen::Index d);

/// Hermitian vectorization through the real embedding
/// [[Re X, -Im X], [Im X, Re X]]; hvec(X).hvec(Y) = Re<X,Y> and
/// hmat(hvec(X)) = X. The embedding doubles the trace; hvec absorbs the
/// factor so inner products need no post-correction.
RVec hvec(const CMat& X);
CMat hmat(const RVec& v);

/// Nearest PSD matrix in Frobenius norm (eigenvalue clipping).
RMat project_psd(const RMat& X);

enum class ConeType { Zero, NonNeg, SOC, Psd };

struct ConeBlock {
    ConeType type;
    Eigen::Index dim; // rows for Zero/NonNeg/SOC; matrix side for Psd
    /// Psd block whose rows are hvec images of Hermitian data (side = 2n).
    /// The slack then stays in the embedding subspace, so the cone can be
    /// replaced by its intersection with that subspace and projected through
    /// a complex eigendecomposition of half the side.
    bool herm = false;
    Eigen::Index rows() const { return type == ConeType::Psd ? svec_len(dim) : dim; }
};

/// min c.x  s.t.  A x + s = b,  s in K (product of the cone blocks).
struct ConicProblem {
    RVec c;
    SpMat A;
    RVec b;
    std::vector<ConeBlock> cones;
    double objective_offset = 0.0;

    Eigen::Index n_var() const { return c.size(); }
    Eigen::Index n_rows() const { return b.size(); }
    void validate() const;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, MaxIter };

struct Residuals {
    double primal = 0.0, dual = 0.0, gap = 0.0;
};

struct ConicSolution {
    RVec x, y, s;
    SolveStatus status = SolveStatus::MaxIter;
    double primal_obj = 0.0, dual_obj = 0.0;
    Residuals residuals;
    Eigen::Index iterations = 0;
};

struct SolveSettings {
    double eps = 1e-7;
    Eigen::Index max_iter = 200000;
    std::uint64_t seed = 0;
    std::optional<ConicSolution> init; // refine from a prior solution
};

ConicSolution solve(const ConicProblem& prob, const SolveSettings& settings = {});

} // namespace pn::conic
