#pragma once

#include "pencilnorm/conic.hpp"
#include "pencilnorm/pencil.hpp"

#include <limits>
#include <optional>
#include <utility>
#include <vector>

namespace pn::gauge {

using pencil::AtomSet;
using region::CurveSpec;
using region::HomPoint;

struct LossSpec {
    enum class Kind {
        None,
        SquaredL2,
        SquaredFrobenius,
        Huber,
        SpectralNormEpigraph,
        EqualityOnIndexSet,
    };
    Kind kind = Kind::None;
    CMat target; // matrix target (SquaredFrobenius / SpectralNormEpigraph)
    double gamma = 1.0;
    double delta = 1.0; // Huber threshold
    std::vector<std::pair<Eigen::Index, Eigen::Index>> indices; // entry positions
    CVec values;                                                // entry targets

    static LossSpec none();
    static LossSpec squared_l2(std::vector<std::pair<Eigen::Index, Eigen::Index>> idx, CVec vals,
                               double gamma);
    static LossSpec squared_frobenius(CMat target, double gamma);
    static LossSpec huber(std::vector<std::pair<Eigen::Index, Eigen::Index>> idx, CVec vals,
                          double gamma, double delta);
    static LossSpec spectral_norm_epigraph(CMat target, double gamma);
    static LossSpec equality_on_index_set(std::vector<std::pair<Eigen::Index, Eigen::Index>> idx,
                                          CVec vals);
    void validate() const;
};

struct DualCertificate {
    CMat Z;
    CMat P; // Hermitian p x p
    CMat Q; // Hermitian PSD p x p (zero when the curve inequality is inactive)
};

/// The adjoint [F;G]^H (Theta (x) P) [F;G] of the pencil sandwich map.
CMat pencil_adjoint(const pencil::PencilSpec& pen, const region::HForm2& theta, const CMat& P);

/// Assembles cone programs over Hermitian matrix blocks and scalars; rows are
/// grouped per cone and renumbered on build(). Bookkeeping is retained so
/// dual blocks can be mapped back to certificate matrices.
class ModelBuilder {
public:
    struct EntryTerm {
        Eigen::Index blk;
        Eigen::Index row, col;
        Complex coeff;
    };

    Eigen::Index add_scalar(double obj_coeff, bool nonneg);
    Eigen::Index add_herm(Eigen::Index n, const CMat& obj_weight); // obj += Re<W, X>
    void add_psd(Eigen::Index blk);                                // X >= 0
    void add_pencil(Eigen::Index blk, const pencil::PencilSpec& pen, const CurveSpec& curve);
    void add_pin(const std::vector<EntryTerm>& terms,
                 const std::vector<std::pair<Eigen::Index, double>>& scalar_terms, Complex rhs);
    /// constant + sum_k x_{var_k} coef_k >= 0 (Hermitian PSD via embedding);
    /// terms reference global variable indices.
    void add_psd_general(const CMat& constant,
                         const std::vector<std::pair<Eigen::Index, CMat>>& terms);
    /// Lowers a loss on entries of block blk (or on the whole matrix);
    /// shift_scalar adds t*I inside matrix-valued losses.
    void add_loss(Eigen::Index blk, const LossSpec& loss,
                  std::optional<Eigen::Index> shift_scalar = std::nullopt);

    conic::ConicProblem build();

    // Post-build accessors.
    CMat herm_value(Eigen::Index blk, const RVec& x) const;
    Eigen::Index herm_var_offset(Eigen::Index blk) const;
    Eigen::Index herm_side(Eigen::Index blk) const;
    CMat herm_basis(Eigen::Index blk, Eigen::Index local) const; // basis matrix B_v
    Eigen::Index n_vars() const { return Eigen::Index(obj_.size()); }
    Eigen::Index n_blocks() const { return Eigen::Index(blocks_.size()); }

    struct PencilRows {
        Eigen::Index blk = 0;
        Eigen::Index p = 0;
        pencil::PencilSpec pen;
        CurveSpec curve;
        Eigen::Index eq_start = -1;   // final row index of the p*p equality rows
        Eigen::Index ineq_start = -1; // final row index of the inequality PSD rows
    };
    const std::vector<PencilRows>& pencil_rows() const { return pencils_; }
    Eigen::Index psd_row_start(Eigen::Index blk) const; // -1 if no X >= 0 block

    /// Hermitian matrix T with Re<T, B_v> = g(v) over the block's variable
    /// basis; used to translate dual vectors into certificate matrices.
    CMat herm_from_grad(Eigen::Index blk, const RVec& g_full) const;

private:
    struct Block {
        Eigen::Index offset;
        Eigen::Index n;
        Eigen::Index psd_local = -1; // index into psd_blocks_
        Eigen::Index psd_start = -1;
    };
    struct RowSet {
        std::vector<conic::Triplet> trips;
        std::vector<double> b;
    };

    std::vector<std::pair<Eigen::Index, Complex>> entry_vars(Eigen::Index blk, Eigen::Index r,
                                                             Eigen::Index c) const;
    Eigen::Index add_zero_row(const std::vector<std::pair<Eigen::Index, double>>& coeffs,
                              double rhs);

    std::vector<double> obj_;
    std::vector<Block> blocks_;
    RowSet zero_, nonneg_, soc_, psd_;
    std::vector<Eigen::Index> soc_sizes_;
    std::vector<Eigen::Index> psd_sides_;
    std::vector<std::pair<Eigen::Index, Eigen::Index>> psd_owner_; // (blk or -1, local psd idx)
    std::vector<PencilRows> pencils_;
    bool built_ = false;
    Eigen::Index zero_off_ = 0, nonneg_off_ = 0, soc_off_ = 0, psd_off_ = 0;
};

struct GaugeProgram {
    enum class Kind { Symmetric, NonSymmetric };
    explicit GaugeProgram(AtomSet aset_);
    Kind kind = Kind::Symmetric;
    AtomSet aset;
    LossSpec loss;
    bool with_noise_term = false;
    conic::ConicProblem lowered;
    ModelBuilder builder; // post-build bookkeeping
    Eigen::Index noise_var = -1;

    CMat X(const conic::ConicSolution& sol) const;
    CMat V(const conic::ConicSolution& sol) const;    // nonsymmetric top-left
    CMat Yblk(const conic::ConicSolution& sol) const; // nonsymmetric top-right
    CMat W(const conic::ConicSolution& sol) const;    // nonsymmetric bottom-right
    double noise_t(const conic::ConicSolution& sol) const;
};

constexpr double kInfeasibleGauge = std::numeric_limits<double>::infinity();

/// tr(EXE^H) if X is PSD and satisfies the pencil LMIs within tol, else +inf.
double gauge_value(const CMat& X, const AtomSet& aset, double tol = 1e-6);

GaugeProgram build_symmetric(const AtomSet& aset, const LossSpec& loss, bool with_noise_term);
GaugeProgram build_nonsymmetric(const AtomSet& aset, const LossSpec& loss);

DualCertificate extract_certificate(const GaugeProgram& prog, const conic::ConicSolution& sol);

struct CertificateReport {
    double max_violation = 0.0;
    std::vector<HomPoint> active_points;
};
CertificateReport certificate_check(const DualCertificate& cert, const AtomSet& aset,
                                    Eigen::Index grid_size = 512);

/// Per grid omega: a(w)^H Z a(w)/||Ea(w)||^2 (symmetric) or
/// ||Z^H v(w)||/||E1 v(w)|| (non-symmetric first block).
RVec dual_polynomial(const DualCertificate& cert, const AtomSet& aset, const RVec& omega_grid);

struct KypReport {
    bool holds = false;
    HomPoint worst_point;
    double worst_norm = 0.0;
};
KypReport kyp_bound_check(const CMat& A, const CMat& B, const CMat& C, const CMat& D,
                          const CurveSpec& curve, Eigen::Index grid = 256);

/// On-curve evaluation grid (endpoints included for segments).
std::vector<HomPoint> curve_grid(const CurveSpec& curve, Eigen::Index count);

} // namespace pn::gauge
