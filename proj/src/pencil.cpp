#include "pencilnorm/pencil.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace pn::pencil {

using numkern::herm_eig;
using numkern::svd;

void PencilSpec::validate() const {
    if (F.rows() != G.rows() || F.cols() != G.cols())
        throw std::invalid_argument("PencilSpec: F and G must have the same shape");
    if (E.cols() != F.cols()) throw std::invalid_argument("PencilSpec: E must have n columns");
    if (block) {
        const auto& b = *block;
        if (b.p1 + b.p2 != F.rows() || b.n1 + b.n2 != F.cols())
            throw std::invalid_argument("PencilSpec: block sizes inconsistent");
        if (F.topRightCorner(b.p1, b.n2).norm() != 0.0 ||
            F.bottomLeftCorner(b.p2, b.n1).norm() != 0.0 ||
            G.topRightCorner(b.p1, b.n2).norm() != 0.0 ||
            G.bottomLeftCorner(b.p2, b.n1).norm() != 0.0)
            throw std::invalid_argument("PencilSpec: F/G not block diagonal");
        if (b.E1.cols() != b.n1 || b.E2.cols() != b.n2)
            throw std::invalid_argument("PencilSpec: E1/E2 column counts inconsistent");
    }
}

namespace {

PencilSpec shift_pencil(Eigen::Index n, Family fam) {
    if (n < 2) throw std::invalid_argument("pencil: need n >= 2");
    PencilSpec s;
    s.F = CMat::Zero(n - 1, n);
    s.G = CMat::Zero(n - 1, n);
    s.F.rightCols(n - 1) = CMat::Identity(n - 1, n - 1);
    s.G.leftCols(n - 1) = CMat::Identity(n - 1, n - 1);
    s.E = CMat::Identity(n, n);
    s.family = fam;
    return s;
}

} // namespace

PencilSpec toeplitz(Eigen::Index n) { return shift_pencil(n, Family::Toeplitz); }
PencilSpec hankel_powers(Eigen::Index n) { return shift_pencil(n, Family::HankelPowers); }

namespace {

PencilSpec trig_pencil(Eigen::Index n, bool first_weight_one) {
    if (n < 2) throw std::invalid_argument("pencil: need n >= 2");
    PencilSpec s;
    s.F = CMat::Zero(n - 1, n);
    s.G = CMat::Zero(n - 1, n);
    s.G(0, 0) = first_weight_one ? 1.0 : 2.0;
    s.F(0, 1) = 1.0;
    for (Eigen::Index i = 1; i < n - 1; ++i) {
        s.G(i, i) = 2.0;
        s.F(i, i - 1) = 1.0;
        s.F(i, i + 1) = 1.0;
    }
    s.E = CMat::Identity(n, n);
    s.family = first_weight_one ? Family::Cosine : Family::Sine;
    return s;
}

} // namespace

PencilSpec cosine(Eigen::Index n) { return trig_pencil(n, true); }
PencilSpec sine(Eigen::Index n) { return trig_pencil(n, false); }

PencilSpec vector_poly(Eigen::Index k, Eigen::Index l) {
    if (k < 2 || l < 1) throw std::invalid_argument("vector_poly: need k >= 2, l >= 1");
    PencilSpec s;
    const Eigen::Index p = (k - 1) * l, n = k * l;
    s.F = CMat::Zero(p, n);
    s.G = CMat::Zero(p, n);
    s.F.rightCols(p) = CMat::Identity(p, p);
    s.G.leftCols(p) = CMat::Identity(p, p);
    s.E = CMat::Identity(n, n);
    s.family = Family::VectorPoly;
    return s;
}

PencilSpec jacobi(const RVec& alphas, const RVec& betas) {
    const Eigen::Index m = alphas.size(); // m = n - 1 recursion rows
    if (m < 1 || betas.size() != m)
        throw std::invalid_argument("jacobi: need len(alphas) = len(betas) >= 1");
    for (Eigen::Index i = 0; i < m; ++i)
        if (!(betas(i) > 0.0)) throw std::invalid_argument("jacobi: beta_i > 0 required");
    const Eigen::Index n = m + 1;
    PencilSpec s;
    s.F = CMat::Zero(m, n);
    s.G = CMat::Zero(m, n);
    s.G.leftCols(m) = CMat::Identity(m, m);
    // Row i encodes lambda p_i = beta_i p_{i-1} + alpha_i p_i + beta_{i+1} p_{i+1}
    // with betas = (beta_1, ..., beta_{n-1}).
    for (Eigen::Index i = 0; i < m; ++i) {
        s.F(i, i) = alphas(i);
        if (i > 0) s.F(i, i - 1) = betas(i - 1);
        s.F(i, i + 1) = betas(i);
    }
    s.E = CMat::Identity(n, n);
    s.family = Family::Jacobi;
    return s;
}

PencilSpec jacobi_legendre(Eigen::Index n) {
    if (n < 2) throw std::invalid_argument("jacobi_legendre: need n >= 2");
    RVec alphas = RVec::Zero(n - 1), betas(n - 1);
    for (Eigen::Index i = 1; i < n; ++i)
        betas(i - 1) = double(i) / std::sqrt(4.0 * double(i) * double(i) - 1.0);
    PencilSpec s = jacobi(alphas, betas);
    s.family = Family::Jacobi;
    return s;
}

PencilSpec controllability(const CMat& A, const CMat& B) {
    if (A.rows() != A.cols() || B.rows() != A.rows())
        throw std::invalid_argument("controllability: A square, B row-compatible");
    const Eigen::Index ns = A.rows(), m = B.cols();
    PencilSpec s;
    s.G = CMat::Zero(ns, ns + m);
    s.G.leftCols(ns) = CMat::Identity(ns, ns);
    s.F = CMat::Zero(ns, ns + m);
    s.F.leftCols(ns) = A;
    s.F.rightCols(m) = B;
    s.E = CMat::Identity(ns + m, ns + m);
    s.family = Family::Controllability;
    return s;
}

PencilSpec descriptor(const CMat& Ed, const CMat& A, const CMat& B) {
    PencilSpec s = controllability(A, B);
    if (Ed.rows() != A.rows() || Ed.cols() != A.cols())
        throw std::invalid_argument("descriptor: Ed must match A");
    s.G.leftCols(A.cols()) = Ed;
    s.family = Family::Descriptor;
    return s;
}

PencilSpec hankel_block(Eigen::Index n1, Eigen::Index n2) {
    if (n1 < 1 || n2 < 1) throw std::invalid_argument("hankel_block: need n1, n2 >= 1");
    const Eigen::Index p1 = n1 > 1 ? n1 - 1 : 0, p2 = n2 > 1 ? n2 - 1 : 0;
    PencilSpec s;
    s.F = CMat::Zero(p1 + p2, n1 + n2);
    s.G = CMat::Zero(p1 + p2, n1 + n2);
    // First block: forward shift (v_{i+1} = lambda v_i).
    if (p1 > 0) {
        s.F.block(0, 1, p1, p1) = CMat::Identity(p1, p1);
        s.G.block(0, 0, p1, p1) = CMat::Identity(p1, p1);
    }
    // Second block: reversed shift (w_{i+1} = lambda^{-1} w_i).
    if (p2 > 0) {
        s.F.block(p1, n1, p2, p2) = CMat::Identity(p2, p2);
        s.G.block(p1, n1 + 1, p2, p2) = CMat::Identity(p2, p2);
    }
    s.E = CMat::Identity(n1 + n2, n1 + n2);
    PencilBlock b;
    b.p1 = p1;
    b.n1 = n1;
    b.p2 = p2;
    b.n2 = n2;
    b.E1 = CMat::Identity(n1, n1);
    b.E2 = CMat::Identity(n2, n2);
    s.block = b;
    s.family = Family::HankelBlock;
    return s;
}

PencilSpec toeplitz_with_free_block(Eigen::Index n1, Eigen::Index n2) {
    if (n1 < 2 || n2 < 1)
        throw std::invalid_argument("toeplitz_with_free_block: need n1 >= 2, n2 >= 1");
    const Eigen::Index p1 = n1 - 1;
    PencilSpec s;
    s.F = CMat::Zero(p1, n1 + n2);
    s.G = CMat::Zero(p1, n1 + n2);
    s.F.block(0, 1, p1, p1) = CMat::Identity(p1, p1);
    s.G.block(0, 0, p1, p1) = CMat::Identity(p1, p1);
    s.E = CMat::Identity(n1 + n2, n1 + n2);
    PencilBlock b;
    b.p1 = p1;
    b.n1 = n1;
    b.p2 = 0;
    b.n2 = n2;
    b.E1 = CMat::Identity(n1, n1);
    b.E2 = CMat::Identity(n2, n2);
    s.block = b;
    s.family = Family::ToeplitzFree;
    return s;
}

AtomSet::AtomSet(PencilSpec pencil_, CurveSpec curve_)
    : pencil(std::move(pencil_)), curve(std::move(curve_)) {
    pencil.validate();
    if (region::classify(curve) == region::CurveClass::Empty)
        throw std::invalid_argument("AtomSet: empty curve");
}

std::vector<CVec> atom_basis(const AtomSet& aset, const HomPoint& p, double tol) {
    if (!region::contains(aset.curve, p, std::max(tol, 1e-9) * 10.0))
        throw std::invalid_argument("atom_basis: point not on curve");
    const CMat M = p.mu * aset.pencil.G - p.nu * aset.pencil.F;
    const Eigen::Index n = M.cols();
    if (M.rows() == 0) {
        std::vector<CVec> basis;
        for (Eigen::Index j = 0; j < n; ++j) basis.push_back(CMat::Identity(n, n).col(j));
        return basis;
    }
    numkern::Svd sv = svd(M);
    const double s1 = sv.sigma.size() > 0 ? sv.sigma(0) : 0.0;
    Eigen::Index r = 0;
    for (Eigen::Index i = 0; i < sv.sigma.size(); ++i)
        if (sv.sigma(i) > 1e-9 * s1) ++r;
    std::vector<CVec> basis;
    const double scale = aset.pencil.F.norm() + aset.pencil.G.norm();
    for (Eigen::Index j = r; j < n; ++j) {
        CVec b = sv.Q.col(j);
        if ((M * b).norm() > std::max(tol, 1e-9) * (scale + 1.0))
            throw std::runtime_error("atom_basis: nullspace residual too large");
        basis.push_back(b);
    }
    return basis;
}

LmiMaps lmi_maps(const PencilSpec& pencil, const CurveSpec& curve, const CMat& X) {
    if (X.rows() != pencil.n() || X.cols() != pencil.n())
        throw std::invalid_argument("lmi_maps: X must be n x n");
    const CMat& F = pencil.F;
    const CMat& G = pencil.G;
    const CMat FX = F * X, GX = G * X;
    auto sandwich = [&](const region::HForm2& th) -> CMat {
        CMat M = th(0, 0) * (FX * F.adjoint()) + th(1, 0) * (FX * G.adjoint()) +
                 th(0, 1) * (GX * F.adjoint()) + th(1, 1) * (GX * G.adjoint());
        return 0.5 * (M + CMat(M.adjoint()));
    };
    LmiMaps out;
    out.eq = sandwich(curve.phi);
    out.ineq = curve.inequality_active ? sandwich(curve.psi)
                                       : CMat::Zero(pencil.p(), pencil.p());
    return out;
}

RankCheck rank_condition(const AtomSet& aset, Eigen::Index n_samples, std::uint64_t seed) {
    const Eigen::Index p = aset.pencil.p();
    std::vector<HomPoint> pts;
    auto cls = region::classify(aset.curve);
    if (cls == region::CurveClass::Segment || cls == region::CurveClass::FullCurve) {
        auto interior = region::sample_interior(aset.curve, std::max<Eigen::Index>(n_samples, 1), seed);
        pts.insert(pts.end(), interior.begin(), interior.end());
    }
    pts.push_back(HomPoint::infinity());
    pts.push_back(HomPoint(0.0, 1.0));
    std::mt19937_64 rng(seed ^ 0x51caf3a1ull);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int i = 0; i < 32; ++i)
        pts.push_back(HomPoint(Complex(gauss(rng), gauss(rng)), Complex(gauss(rng), gauss(rng))));
    for (const auto& q : pts) {
        const CMat M = q.mu * aset.pencil.G - q.nu * aset.pencil.F;
        numkern::Svd sv = svd(M);
        bool ok = sv.sigma.size() >= p && p <= M.cols();
        if (ok && p > 0) ok = sv.sigma(p - 1) > 1e-8 * sv.sigma(0);
        if (!ok) return {false, q};
    }
    return {true, std::nullopt};
}

CMat strictly_feasible_point(const AtomSet& aset, std::uint64_t seed) {
    const Eigen::Index n = aset.pencil.n();
    auto pts = region::sample_interior(aset.curve, n, seed);
    CMat X = CMat::Zero(n, n);
    for (const auto& q : pts)
        for (const auto& b : atom_basis(aset, q)) X += b * b.adjoint();
    X = 0.5 * (X + CMat(X.adjoint()));

    numkern::HermEig he = herm_eig(X);
    const double lmin = he.lambda(n - 1);
    const double scale = 1.0 + X.norm();
    if (!(lmin > 1e-10 * scale))
        throw std::runtime_error("strictly_feasible_point: atoms do not span (lambda_min = " +
                                 std::to_string(lmin) + ")");
    LmiMaps maps = lmi_maps(aset.pencil, aset.curve, X);
    if (maps.eq.norm() > 1e-8 * scale)
        throw std::runtime_error("strictly_feasible_point: equality residual too large");
    if (aset.curve.inequality_active && aset.pencil.p() > 0) {
        numkern::HermEig hi = herm_eig(maps.ineq);
        if (!(hi.lambda(0) < 0.0))
            throw std::runtime_error("strictly_feasible_point: inequality not strict");
    }
    return X;
}

} // namespace pn::pencil
