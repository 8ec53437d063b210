#include "pencilnorm/conic.hpp"

#include <Eigen/SparseCholesky>

#include <cmath>
#include <stdexcept>

namespace pn::conic {

Eigen::Index svec_len(Eigen::Index d) { return d * (d + 1) / 2; }

namespace {

const double kSqrt2 = std::sqrt(2.0);

Eigen::Index side_from_len(Eigen::Index len) {
    Eigen::Index d = Eigen::Index((std::sqrt(8.0 * double(len) + 1.0) - 1.0) / 2.0 + 0.5);
    if (svec_len(d) != len) throw std::invalid_argument("smat: invalid svec length");
    return d;
}

} // namespace

RVec svec(const RMat& S) {
    const Eigen::Index d = S.rows();
    if (S.cols() != d) throw std::invalid_argument("svec: non-square input");
    RVec v(svec_len(d));
    Eigen::Index k = 0;
    for (Eigen::Index j = 0; j < d; ++j)
        for (Eigen::Index i = j; i < d; ++i)
            v(k++) = (i == j) ? S(i, j) : kSqrt2 * 0.5 * (S(i, j) + S(j, i));
    return v;
}

RMat smat(const RVec& v) {
    const Eigen::Index d = side_from_len(v.size());
    RMat S(d, d);
    Eigen::Index k = 0;
    for (Eigen::Index j = 0; j < d; ++j)
        for (Eigen::Index i = j; i < d; ++i) {
            double val = (i == j) ? v(k) : v(k) / kSqrt2;
            S(i, j) = val;
            S(j, i) = val;
            ++k;
        }
    return S;
}

RVec hvec(const CMat& X) {
    const Eigen::Index n = X.rows();
    if (X.cols() != n) throw std::invalid_argument("hvec: non-square input");
    if (numkern::herm_residual(X) > 1e-8 * (1.0 + X.norm()))
        throw std::invalid_argument("hvec: input not Hermitian");
    RMat M(2 * n, 2 * n);
    M.topLeftCorner(n, n) = X.real();
    M.bottomRightCorner(n, n) = X.real();
    M.topRightCorner(n, n) = -X.imag();
    M.bottomLeftCorner(n, n) = X.imag();
    M = 0.5 * (M + RMat(M.transpose()));
    return svec(M) / kSqrt2;
}

CMat hmat(const RVec& v) {
    const Eigen::Index d = side_from_len(v.size());
    if (d % 2 != 0) throw std::invalid_argument("hmat: embedded side must be even");
    const Eigen::Index n = d / 2;
    RMat M = smat(RVec(kSqrt2 * v));
    RMat re = 0.5 * (M.topLeftCorner(n, n) + M.bottomRightCorner(n, n));
    RMat im = 0.5 * (M.bottomLeftCorner(n, n) - M.topRightCorner(n, n));
    CMat X = re.cast<Complex>() + Complex(0.0, 1.0) * im.cast<Complex>();
    return 0.5 * (X + CMat(X.adjoint()));
}

RMat project_psd(const RMat& X) {
    if (X.rows() != X.cols()) throw std::invalid_argument("project_psd: non-square input");
    RMat S = 0.5 * (X + RMat(X.transpose()));
    Eigen::SelfAdjointEigenSolver<RMat> es(S);
    RVec lam = es.eigenvalues().cwiseMax(0.0);
    return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

void ConicProblem::validate() const {
    Eigen::Index rows = 0;
    for (const auto& blk : cones) {
        if (blk.dim < 0) throw std::invalid_argument("ConicProblem: negative cone dimension");
        rows += blk.rows();
    }
    if (rows != b.size())
        throw std::invalid_argument("ConicProblem: cone rows do not match b");
    if (A.rows() != b.size() || A.cols() != c.size())
        throw std::invalid_argument("ConicProblem: A dimensions inconsistent with b, c");
}

namespace {

void project_soc(Eigen::Ref<RVec> w) {
    const Eigen::Index d = w.size();
    if (d == 0) return;
    double t = w(0);
    double zn = d > 1 ? w.tail(d - 1).norm() : 0.0;
    if (zn <= t) return;
    if (zn <= -t) {
        w.setZero();
        return;
    }
    double a = 0.5 * (t + zn);
    w(0) = a;
    if (zn > 0) w.tail(d - 1) *= a / zn;
}

void project_psd_svec(Eigen::Ref<RVec> w) {
    RMat S = smat(w);
    Eigen::SelfAdjointEigenSolver<RMat> es(S);
    RVec lam = es.eigenvalues().cwiseMax(0.0);
    w = svec(RMat(es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose()));
}

// Dual-cone projection for an embedded-Hermitian PSD block. The dual of
// (embedding subspace) ∩ PSD splits orthogonally as (subspace ∩ PSD) ⊕
// subspace⊥, so the perpendicular component passes through untouched and the
// parallel component is clipped via a complex eigendecomposition of side n
// instead of a real one of side 2n.
void project_psd_herm_svec(Eigen::Ref<RVec> w) {
    RMat S = smat(w);
    const Eigen::Index n = S.rows() / 2;
    CMat H(n, n);
    H.real() = 0.5 * (S.topLeftCorner(n, n) + S.bottomRightCorner(n, n));
    H.imag() = 0.5 * (S.bottomLeftCorner(n, n) - S.topRightCorner(n, n));
    H = 0.5 * (H + CMat(H.adjoint()));
    // subtract the parallel part, keep the perpendicular remainder in S
    S.topLeftCorner(n, n) -= H.real();
    S.bottomRightCorner(n, n) -= H.real();
    S.bottomLeftCorner(n, n) -= H.imag();
    S.topRightCorner(n, n) += H.imag();
    Eigen::SelfAdjointEigenSolver<CMat> es(H);
    RVec lam = es.eigenvalues().cwiseMax(0.0);
    CMat Hp = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().adjoint();
    S.topLeftCorner(n, n) += Hp.real();
    S.bottomRightCorner(n, n) += Hp.real();
    S.bottomLeftCorner(n, n) += Hp.imag();
    S.topRightCorner(n, n) -= Hp.imag();
    w = svec(RMat(0.5 * (S + RMat(S.transpose()))));
}

// Projection of the dual variable onto K* (Zero rows become free).
void project_dual_cone(const std::vector<ConeBlock>& cones, Eigen::Ref<RVec> y) {
    Eigen::Index at = 0;
    for (const auto& blk : cones) {
        const Eigen::Index rows = blk.rows();
        switch (blk.type) {
        case ConeType::Zero: break;
        case ConeType::NonNeg: y.segment(at, rows) = y.segment(at, rows).cwiseMax(0.0); break;
        case ConeType::SOC: project_soc(y.segment(at, rows)); break;
        case ConeType::Psd:
            if (blk.herm && blk.dim % 2 == 0)
                project_psd_herm_svec(y.segment(at, rows));
            else
                project_psd_svec(y.segment(at, rows));
            break;
        }
        at += rows;
    }
}

} // namespace

ConicSolution solve(const ConicProblem& prob, const SolveSettings& settings) {
    prob.validate();
    const Eigen::Index n = prob.n_var(), m = prob.n_rows();
    const Eigen::Index N = n + m; // tau lives at index N

    // Ruiz equilibration with block-uniform row scaling so the cone geometry
    // is preserved (a SOC/PSD block must be scaled by a single factor).
    SpMat A = prob.A;
    RVec D = RVec::Ones(m), E = RVec::Ones(n);
    for (int pass = 0; pass < 10; ++pass) {
        RVec rn = RVec::Zero(m), cn = RVec::Zero(n);
        for (Eigen::Index k = 0; k < A.outerSize(); ++k)
            for (SpMat::InnerIterator it(A, k); it; ++it) {
                double a = std::abs(it.value());
                rn(it.row()) = std::max(rn(it.row()), a);
                cn(it.col()) = std::max(cn(it.col()), a);
            }
        Eigen::Index at = 0;
        for (const auto& blk : prob.cones) {
            const Eigen::Index rows = blk.rows();
            if (blk.type == ConeType::SOC || blk.type == ConeType::Psd) {
                double mx = rows > 0 ? rn.segment(at, rows).maxCoeff() : 0.0;
                rn.segment(at, rows).setConstant(mx);
            }
            at += rows;
        }
        RVec dr(m), dc(n);
        for (Eigen::Index i = 0; i < m; ++i) dr(i) = rn(i) > 1e-12 ? 1.0 / std::sqrt(rn(i)) : 1.0;
        for (Eigen::Index j = 0; j < n; ++j) dc(j) = cn(j) > 1e-12 ? 1.0 / std::sqrt(cn(j)) : 1.0;
        A = dr.asDiagonal() * A * dc.asDiagonal();
        D = D.cwiseProduct(dr);
        E = E.cwiseProduct(dc);
    }
    RVec bs = D.cwiseProduct(prob.b), cs = E.cwiseProduct(prob.c);
    double sb = bs.norm() > 1e-12 ? std::clamp(1.0 / bs.norm(), 1e-4, 1e4) : 1.0;
    double sc = cs.norm() > 1e-12 ? std::clamp(1.0 / cs.norm(), 1e-4, 1e4) : 1.0;
    bs *= sb;
    cs *= sc;

    // Cached factorization for the (I+Q) linear system: with
    // M = [[I, A^T], [-A, I]], solving M(zx, zy) = (w1, w2) reduces to
    // (I + A^T A) zx = w1 - A^T w2, zy = w2 + A zx.
    SpMat K = SpMat(SpMat(A.transpose()) * A);
    SpMat In(n, n);
    In.setIdentity();
    K = K + In;
    Eigen::SimplicialLDLT<SpMat> ldlt(K);
    if (ldlt.info() != Eigen::Success)
        throw std::runtime_error("conic::solve: factorization failed");
    auto solveM = [&](const RVec& w1, const RVec& w2, RVec& zx, RVec& zy) {
        zx = ldlt.solve(w1 - A.transpose() * w2);
        zy = w2 + A * zx;
    };
    RVec gx, gy;
    solveM(cs, bs, gx, gy);
    const double gden = 1.0 + cs.dot(gx) + bs.dot(gy);

    RVec u = RVec::Zero(N + 1), v = RVec::Zero(N + 1);
    u(N) = 1.0;
    v(N) = 1.0;
    if (settings.init && settings.init->x.size() == n && settings.init->y.size() == m &&
        settings.init->s.size() == m) {
        for (Eigen::Index j = 0; j < n; ++j) u(j) = sb * settings.init->x(j) / E(j);
        for (Eigen::Index i = 0; i < m; ++i) u(n + i) = sc * settings.init->y(i) / D(i);
        for (Eigen::Index i = 0; i < m; ++i) v(n + i) = sb * D(i) * settings.init->s(i);
        v(N) = 0.0;
    }

    const double alpha = 1.8;
    const double bnorm1 = 1.0 + prob.b.norm(), cnorm1 = 1.0 + prob.c.norm();

    ConicSolution best;
    best.status = SolveStatus::MaxIter;
    best.x = RVec::Zero(n);
    best.y = RVec::Zero(m);
    best.s = RVec::Zero(m);
    best.residuals = {1e30, 1e30, 1e30};

    auto extract = [&](ConicSolution& out) -> bool {
        const double tau = u(N);
        if (tau <= 1e-9) return false;
        out.x.resize(n);
        out.y.resize(m);
        out.s.resize(m);
        for (Eigen::Index j = 0; j < n; ++j) out.x(j) = E(j) * u(j) / (sb * tau);
        for (Eigen::Index i = 0; i < m; ++i) out.y(i) = D(i) * u(n + i) / (sc * tau);
        for (Eigen::Index i = 0; i < m; ++i) out.s(i) = v(n + i) / (sb * D(i) * tau);
        out.residuals.primal = (prob.A * out.x + out.s - prob.b).norm() / bnorm1;
        out.residuals.dual = (prob.A.transpose() * out.y + prob.c).norm() / cnorm1;
        double pobj = prob.c.dot(out.x), dobj = -prob.b.dot(out.y);
        out.residuals.gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
        out.primal_obj = pobj + prob.objective_offset;
        out.dual_obj = dobj + prob.objective_offset;
        return true;
    };

    RVec wx(n), wy(m), px, py, zx, zy;
    RVec t(N + 1), z(N + 1);
    for (Eigen::Index it = 0; it < settings.max_iter; ++it) {
        // z = (I+Q)^{-1} (u+v)
        wx = u.head(n) + v.head(n);
        wy = u.segment(n, m) + v.segment(n, m);
        double wt = u(N) + v(N);
        solveM(wx, wy, px, py);
        double zt = (wt + cs.dot(px) + bs.dot(py)) / gden;
        z.head(n) = px - zt * gx;
        z.segment(n, m) = py - zt * gy;
        z(N) = zt;

        t = alpha * z + (1.0 - alpha) * u - v;
        u = t;
        project_dual_cone(prob.cones, u.segment(n, m));
        u(N) = std::max(u(N), 0.0);
        v = u - t;

        if ((it + 1) % 25 != 0 && it + 1 != settings.max_iter) continue;

        ConicSolution cand;
        if (extract(cand)) {
            double mc = std::max({cand.residuals.primal, cand.residuals.dual, cand.residuals.gap});
            double mb = std::max({best.residuals.primal, best.residuals.dual, best.residuals.gap});
            if (mc < mb) {
                best = cand;
                best.status = SolveStatus::MaxIter;
            }
            if (mc <= settings.eps) {
                best = cand;
                best.status = SolveStatus::Optimal;
                best.iterations = it + 1;
                return best;
            }
        }
        if (v(N) > std::max(u(N), 1e-12)) {
            // tau collapsing: test the homogeneous certificates in original scale.
            RVec ycert(m), xcert(n), scert(m);
            for (Eigen::Index i = 0; i < m; ++i) ycert(i) = D(i) * u(n + i) / sc;
            for (Eigen::Index j = 0; j < n; ++j) xcert(j) = E(j) * u(j) / sb;
            for (Eigen::Index i = 0; i < m; ++i) scert(i) = v(n + i) / (sb * D(i));
            double bty = prob.b.dot(ycert);
            if (bty < 0 && (prob.A.transpose() * ycert).norm() * bnorm1 <= settings.eps * (-bty)) {
                best.status = SolveStatus::Infeasible;
                best.y = ycert / (-bty);
                best.x.setZero();
                best.s.setZero();
                best.iterations = it + 1;
                return best;
            }
            double ctx = prob.c.dot(xcert);
            if (ctx < 0 && (prob.A * xcert + scert).norm() * cnorm1 <= settings.eps * (-ctx)) {
                best.status = SolveStatus::Unbounded;
                best.x = xcert / (-ctx);
                best.s = scert / (-ctx);
                best.y.setZero();
                best.iterations = it + 1;
                return best;
            }
        }
    }
    best.iterations = settings.max_iter;
    return best;
}

} // namespace pn::conic
