#include "pencilnorm/decomp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace pn::decomp {

using numkern::complete_unitary;
using numkern::herm_eig;
using numkern::psd_factor;
using numkern::schur_normal;

namespace {

const Complex J(0.0, 1.0);

// Shared-left-factor SVD pair: P Sigma Qu^H = U and P Sigma Qv^H = V, with
// Qu, Qv completed to full unitaries. Sigma comes from the averaged Gram.
struct SharedSvd {
    CMat P;
    RVec sigma;    // length p, descending
    Eigen::Index q; // numerical rank
    CMat Qu, Qv;   // r x r unitary
};

SharedSvd shared_svd(const CMat& U, const CMat& V) {
    const Eigen::Index r = U.cols();
    CMat Gram = 0.5 * (U * U.adjoint() + V * V.adjoint());
    numkern::HermEig he = herm_eig(Gram);
    SharedSvd s;
    s.P = he.Q;
    s.sigma = he.lambda.cwiseMax(0.0).cwiseSqrt();
    const double s1 = s.sigma.size() > 0 ? s.sigma(0) : 0.0;
    // The sigma are square roots of Gram eigenvalues, whose noise floor is
    // ~eps * lambda_1; cut above sqrt(eps) * sigma_1 so noise directions are
    // never mistaken for signal.
    s.q = 0;
    while (s.q < std::min<Eigen::Index>(s.sigma.size(), r) && s.sigma(s.q) > 1e-7 * (s1 + 1e-300))
        ++s.q;
    auto right_factor = [&](const CMat& M) {
        CMat B(r, s.q);
        for (Eigen::Index i = 0; i < s.q; ++i) B.col(i) = M.adjoint() * s.P.col(i) / s.sigma(i);
        // Modified Gram-Schmidt to restore exact orthonormality. Columns that
        // collapse (the factor carries no energy in that direction, e.g. one
        // input is zero where the other has noise-level content) are dropped
        // and their positions refilled from the completion.
        std::vector<Eigen::Index> goodpos, badpos;
        for (Eigen::Index i = 0; i < s.q; ++i) {
            for (int pass = 0; pass < 2; ++pass)
                for (Eigen::Index k : goodpos) B.col(i) -= B.col(k).dot(B.col(i)) * B.col(k);
            double nb = B.col(i).norm();
            if (nb > 0.1) {
                B.col(i) /= nb;
                goodpos.push_back(i);
            } else {
                badpos.push_back(i);
            }
        }
        CMat Bg(r, Eigen::Index(goodpos.size()));
        for (Eigen::Index k = 0; k < Bg.cols(); ++k) Bg.col(k) = B.col(goodpos[size_t(k)]);
        CMat full = complete_unitary(Bg, r);
        CMat out(r, r);
        Eigen::Index next = Bg.cols();
        for (Eigen::Index k = 0; k < Bg.cols(); ++k) out.col(goodpos[size_t(k)]) = full.col(k);
        for (Eigen::Index i : badpos) out.col(i) = full.col(next++);
        for (Eigen::Index i = s.q; i < r; ++i) out.col(i) = full.col(next++);
        return out;
    };
    s.Qu = right_factor(U);
    s.Qv = right_factor(V);
    return s;
}

} // namespace

CMat connector_unitary(const CMat& U, const CMat& V, double tol) {
    if (U.rows() != V.rows() || U.cols() != V.cols())
        throw std::invalid_argument("connector_unitary: shape mismatch");
    CMat GU = U * U.adjoint(), GV = V * V.adjoint();
    if ((GU - GV).norm() > tol * (1.0 + GU.norm()))
        throw std::invalid_argument(
            "connector_unitary: Gram matrices differ beyond tolerance (defect " +
            std::to_string((GU - GV).norm() / (1.0 + GU.norm())) + ", tol " +
            std::to_string(tol) + ")");
    SharedSvd s = shared_svd(U, V);
    return s.Qv * s.Qu.adjoint();
}

namespace {

// Equal-mode skew connector on shared-SVD data; the construction completes
// the partially determined rows [L11 L12] of Qu^H Qv to a matrix that is
// simultaneously unitary and skew-Hermitian.
CMat skew_equal(const CMat& U, const CMat& V, double tol) {
    const Eigen::Index r = U.cols();
    if (r == 0) return CMat(0, 0);
    SharedSvd s = shared_svd(U, V);
    const Eigen::Index q = s.q, m = r - q;
    CMat Lt = s.Qu.adjoint() * s.Qv;
    CMat L11 = 0.5 * (Lt.topLeftCorner(q, q) - CMat(Lt.topLeftCorner(q, q).adjoint()));
    CMat L12 = Lt.topRightCorner(q, m);

    numkern::SchurNormal sn =
        q > 0 ? schur_normal(L11, std::max(1e-6, tol)) : numkern::SchurNormal{CMat(0, 0), CVec(0)};
    // Purely imaginary spectrum, clamped into the closed unit disc.
    CVec delta(q);
    for (Eigen::Index i = 0; i < q; ++i)
        delta(i) = J * std::clamp(sn.lambda(i).imag(), -1.0, 1.0);
    // Group the strictly-inside eigenvalues first.
    std::vector<Eigen::Index> inside, boundary;
    for (Eigen::Index i = 0; i < q; ++i)
        (std::abs(delta(i)) * std::abs(delta(i)) < 1.0 - 1e-14 ? inside : boundary).push_back(i);
    // Each strictly-inside eigenvalue consumes one nullspace coordinate, so at
    // most m can stay inside; the excess are boundary values perturbed by
    // roundoff, snapped back onto the circle below.
    if (Eigen::Index(inside.size()) > m) {
        std::sort(inside.begin(), inside.end(), [&](Eigen::Index a, Eigen::Index b) {
            return std::abs(delta(a)) < std::abs(delta(b));
        });
        while (Eigen::Index(inside.size()) > m) {
            boundary.push_back(inside.back());
            inside.pop_back();
        }
    }
    const Eigen::Index q1 = Eigen::Index(inside.size()), q2 = Eigen::Index(boundary.size());
    CMat Q1(q, q1), Q2(q, q2);
    CVec d1(q1), d2(q2);
    for (Eigen::Index i = 0; i < q1; ++i) {
        Q1.col(i) = sn.Q.col(inside[i]);
        d1(i) = delta(inside[i]);
    }
    for (Eigen::Index i = 0; i < q2; ++i) {
        Q2.col(i) = sn.Q.col(boundary[i]);
        d2(i) = J * (delta(boundary[i]).imag() >= 0.0 ? 1.0 : -1.0);
    }
    RVec s1(q1);
    for (Eigen::Index i = 0; i < q1; ++i) s1(i) = std::sqrt(std::max(0.0, 1.0 - std::norm(d1(i))));

    CMat Omega = CMat::Identity(m, m);
    if (m > 0 && q > 0) {
        CMat V1 = CMat::Zero(q, m);
        V1.leftCols(q1) = Q1 * s1.asDiagonal();
        // The square roots s1 = sqrt(1 - |delta|^2) amplify eigenvalue noise
        // near the unit circle, so the Gram gate scales with sqrt(tol).
        Omega = connector_unitary(L12, V1, std::max(1e-5, std::sqrt(tol)));
    }

    // Middle factor over coordinate groups (q1, q2, q1, m - q1).
    const Eigen::Index kdim = q + m;
    CMat K = CMat::Zero(kdim, kdim);
    K.block(0, 0, q1, q1) = d1.asDiagonal();
    K.block(0, q1 + q2, q1, q1) = s1.asDiagonal().toDenseMatrix();
    K.block(q1, q1, q2, q2) = d2.asDiagonal();
    K.block(q1 + q2, 0, q1, q1) = (-s1).asDiagonal().toDenseMatrix();
    K.block(q1 + q2, q1 + q2, q1, q1) = d1.conjugate().asDiagonal();
    K.block(q + q1, q + q1, m - q1, m - q1) = J * CMat::Identity(m - q1, m - q1);

    CMat L = CMat::Zero(r, kdim);
    L.block(0, 0, q, q1) = Q1;
    L.block(0, q1, q, q2) = Q2;
    L.block(q, q1 + q2, m, m) = Omega.adjoint();

    CMat M = L * K * L.adjoint();
    return s.Qv * M * s.Qv.adjoint();
}

} // namespace

CMat connector_skew(const CMat& U, const CMat& V, SkewMode mode, double tol) {
    if (U.rows() != V.rows() || U.cols() != V.cols())
        throw std::invalid_argument("connector_skew: shape mismatch");
    const double scale = 1.0 + U.squaredNorm() + V.squaredNorm();
    if ((U * V.adjoint() + V * U.adjoint()).norm() > tol * scale)
        throw std::invalid_argument("connector_skew: cross-Gram hypothesis violated");
    CMat D = V * V.adjoint() - U * U.adjoint();
    if (mode == SkewMode::Equal) {
        if (D.norm() > tol * scale)
            throw std::invalid_argument("connector_skew: Gram matrices differ beyond tolerance");
        return skew_equal(U, V, tol);
    }
    numkern::HermEig he = herm_eig(D);
    if (he.lambda.size() > 0 && he.lambda(he.lambda.size() - 1) < -tol * scale)
        throw std::invalid_argument("connector_skew: U U^H exceeds V V^H beyond tolerance");
    // Augment U with a factor of the (clipped) Gram deficit.
    Eigen::Index sdim = 0;
    while (sdim < he.lambda.size() && he.lambda(sdim) > 1e-12 * scale) ++sdim;
    numkern::PsdFactor extra;
    extra.rank = sdim;
    extra.Y.resize(D.rows(), sdim);
    for (Eigen::Index k = 0; k < sdim; ++k)
        extra.Y.col(k) = he.Q.col(k) * std::sqrt(he.lambda(k));
    const Eigen::Index r = U.cols();
    CMat Uaug(U.rows(), r + sdim), Vaug(V.rows(), r + sdim);
    Uaug << U, extra.Y;
    Vaug << V, CMat::Zero(V.rows(), sdim);
    CMat full = skew_equal(Uaug, Vaug, tol);
    return full.topLeftCorner(r, r);
}

PairFactorization pair_factorize(const CMat& U, const CMat& V, const CurveSpec& curve, double tol,
                                 std::uint64_t seed) {
    if (U.rows() != V.rows() || U.cols() != V.cols())
        throw std::invalid_argument("pair_factorize: shape mismatch");
    const Eigen::Index r = U.cols();
    const double scale = 1.0 + U.squaredNorm() + V.squaredNorm();

    auto sandwich = [&](const region::HForm2& th) -> CMat {
        CMat M = th(0, 0) * (U * U.adjoint()) + th(1, 0) * (U * V.adjoint()) +
                 th(0, 1) * (V * U.adjoint()) + th(1, 1) * (V * V.adjoint());
        return 0.5 * (M + CMat(M.adjoint()));
    };
    if (sandwich(curve.phi).norm() > tol * scale * (1.0 + curve.phi.norm()))
        throw std::invalid_argument("pair_factorize: equality hypothesis violated");
    if (curve.inequality_active && U.rows() > 0) {
        numkern::HermEig hi = herm_eig(sandwich(curve.psi));
        if (hi.lambda(0) > tol * scale * (1.0 + curve.psi.norm()))
            throw std::invalid_argument("pair_factorize: inequality hypothesis violated");
    }

    region::Canonical kc = region::canonicalize(curve);
    const Eigen::Matrix2cd Rinv = kc.R.inverse();
    CMat S = kc.R(0, 0) * U + kc.R(0, 1) * V;
    CMat T = kc.R(1, 0) * U + kc.R(1, 1) * V;

    PairFactorization out;
    out.mu.resize(r);
    out.nu.resize(r);

    auto finish = [&](CMat W, CMat Q, const CVec& s, const CVec& t) {
        out.W = std::move(W);
        out.Q = std::move(Q);
        for (Eigen::Index i = 0; i < r; ++i) {
            Complex mu = Rinv(0, 0) * s(i) + Rinv(0, 1) * t(i);
            Complex nu = Rinv(1, 0) * s(i) + Rinv(1, 1) * t(i);
            double nrm = std::sqrt(std::norm(mu) + std::norm(nu));
            if (!(nrm > 0))
                throw std::runtime_error("pair_factorize: degenerate homogeneous pair");
            Complex lead = (std::abs(mu) > 1e-14 * nrm) ? mu : nu;
            Complex k = (std::abs(lead) / lead) / nrm; // normalized = k * raw
            out.mu(i) = mu * k;
            out.nu(i) = nu * k;
            if (out.W.cols() > 0) out.W.col(i) /= k;
            out.points.push_back(region::HomPoint(out.mu(i), out.nu(i)));
        }
        return out;
    };

    const double tscale = std::sqrt(scale);
    if (S.norm() + T.norm() <= 1e-10 * tscale) {
        // Zero pair: any on-curve points will do.
        std::vector<region::HomPoint> pts;
        auto cls = region::classify(curve);
        if (cls == region::CurveClass::Segment || cls == region::CurveClass::FullCurve) {
            if (r > 0) pts = region::sample_interior(curve, r, seed);
        } else {
            Eigen::Vector2cd p = Rinv * Eigen::Vector2cd(0.0, 1.0);
            pts.assign(size_t(r), region::HomPoint(p(0), p(1)));
        }
        out.W = CMat::Zero(U.rows(), r);
        out.Q = CMat::Identity(r, r);
        for (Eigen::Index i = 0; i < r; ++i) {
            out.mu(i) = pts[size_t(i)].mu;
            out.nu(i) = pts[size_t(i)].nu;
            out.points.push_back(pts[size_t(i)]);
        }
        return out;
    }

    const double eps_ag = 1e-12 * (std::abs(kc.alpha) + std::abs(kc.gamma) + 1.0);
    const bool ineq = curve.inequality_active;

    if (!ineq || kc.alpha <= eps_ag) {
        // Full curve case: S T^H + T S^H = 0 makes (S+T, S-T) Gram-equal.
        CMat Lam = connector_unitary(S + T, S - T, tol * 10.0);
        numkern::SchurNormal sn = schur_normal(Lam, 1e-5);
        CVec s(r), t(r);
        for (Eigen::Index i = 0; i < r; ++i) {
            Complex rho = sn.lambda(i) / std::abs(sn.lambda(i)); // snap to the circle
            s(i) = 0.5 * (rho + 1.0);
            t(i) = 0.5 * (rho - 1.0);
        }
        return finish((S - T) * sn.Q, sn.Q, s, t);
    }
    if (std::abs(kc.gamma) <= eps_ag) {
        // Singleton in canonical coordinates: alpha S S^H <= 0 forces S = 0.
        if (S.norm() > std::sqrt(tol * scale / kc.alpha) * 10.0 + tol * tscale)
            throw std::runtime_error("pair_factorize: case dispatch impossible (alpha > 0 = gamma "
                                     "but S != 0)");
        return finish(T, CMat::Identity(r, r), CVec::Zero(r), CVec::Ones(r));
    }
    if (kc.gamma < -eps_ag) {
        // Segment: alpha S S^H + gamma T T^H <= 0, cross terms vanish.
        const double rho0 = std::sqrt(-kc.gamma / kc.alpha);
        CMat Lam = connector_skew(S / rho0, T, SkewMode::Contraction, tol * 10.0);
        numkern::SchurNormal sn = schur_normal(Lam, 1e-5);
        CVec s(r), t = CVec::Ones(r);
        for (Eigen::Index i = 0; i < r; ++i) {
            double im = std::clamp(sn.lambda(i).imag(), -1.0, 1.0);
            s(i) = rho0 * Complex(0.0, im);
        }
        return finish(T * sn.Q, sn.Q, s, t);
    }
    throw std::runtime_error("pair_factorize: case dispatch impossible (alpha = " +
                             std::to_string(kc.alpha) + ", gamma = " + std::to_string(kc.gamma) +
                             ")");
}

CMat AtomicDecomposition::reconstruct(Eigen::Index n) const {
    CMat X = CMat::Zero(n, n);
    for (const auto& a : atoms) X += a * a.adjoint();
    return X;
}

namespace {

void merge_clusters(AtomicDecomposition& d, double point_tol) {
    const size_t r = d.atoms.size();
    if (r == 0) return;
    std::vector<int> cluster(r, -1);
    std::vector<std::vector<size_t>> groups;
    for (size_t i = 0; i < r; ++i) {
        for (size_t g = 0; g < groups.size(); ++g) {
            const auto& p = d.points[groups[g][0]];
            if (std::abs(p.mu - d.points[i].mu) + std::abs(p.nu - d.points[i].nu) <= point_tol) {
                cluster[i] = int(g);
                groups[g].push_back(i);
                break;
            }
        }
        if (cluster[i] < 0) {
            cluster[i] = int(groups.size());
            groups.push_back({i});
        }
    }
    if (groups.size() == r) return;

    AtomicDecomposition out;
    out.residual = d.residual;
    for (const auto& g : groups) {
        if (g.size() == 1) {
            out.atoms.push_back(d.atoms[g[0]]);
            out.points.push_back(d.points[g[0]]);
            continue;
        }
        const Eigen::Index n = d.atoms[g[0]].size();
        CMat M = CMat::Zero(n, n);
        for (size_t idx : g) M += d.atoms[idx] * d.atoms[idx].adjoint();
        numkern::PsdFactor f = psd_factor(M, 1e-12);
        for (Eigen::Index c = 0; c < f.rank; ++c) {
            out.atoms.push_back(f.Y.col(c));
            out.points.push_back(d.points[g[0]]);
        }
        if (size_t(f.rank) < g.size()) out.merged_clusters = true;
    }
    out.weights.resize(Eigen::Index(out.atoms.size()));
    for (size_t k = 0; k < out.atoms.size(); ++k)
        out.weights(Eigen::Index(k)) = out.atoms[k].squaredNorm();
    d = std::move(out);
}

CMat project_structure(const CMat& X, pencil::Family fam) {
    const Eigen::Index n = X.rows();
    CMat P = 0.5 * (X + CMat(X.adjoint()));
    if (fam == pencil::Family::Toeplitz) {
        for (Eigen::Index d = 0; d < n; ++d) {
            Complex avg = 0.0;
            for (Eigen::Index i = 0; i + d < n; ++i) avg += P(i + d, i);
            avg /= double(n - d);
            for (Eigen::Index i = 0; i + d < n; ++i) {
                P(i + d, i) = avg;
                P(i, i + d) = std::conj(avg);
            }
        }
    } else if (fam == pencil::Family::HankelPowers) {
        for (Eigen::Index s = 0; s <= 2 * (n - 1); ++s) {
            double avg = 0.0;
            int cnt = 0;
            for (Eigen::Index i = 0; i < n; ++i) {
                Eigen::Index j = s - i;
                if (j >= 0 && j < n) {
                    avg += P(i, j).real();
                    ++cnt;
                }
            }
            avg /= double(cnt);
            for (Eigen::Index i = 0; i < n; ++i) {
                Eigen::Index j = s - i;
                if (j >= 0 && j < n) P(i, j) = avg;
            }
        }
    }
    return P;
}

} // namespace

AtomicDecomposition decompose_psd(const CMat& X, const AtomSet& aset, double tol) {
    if (X.rows() != X.cols() || X.rows() != aset.pencil.n())
        throw std::invalid_argument("decompose_psd: X must be n x n");
    const double scale = 1.0 + X.norm();
    if (numkern::herm_residual(X) > tol * scale)
        throw std::invalid_argument("decompose_psd: X not Hermitian");

    CMat Xp = project_structure(X, aset.pencil.family);
    {
        numkern::HermEig he = herm_eig(Xp);
        if (he.lambda.size() > 0 && he.lambda(he.lambda.size() - 1) < -tol * scale)
            throw std::invalid_argument("decompose_psd: not PSD (lambda_min = " +
                                        std::to_string(he.lambda(he.lambda.size() - 1)) + ")");
        RVec clipped = he.lambda.cwiseMax(0.0);
        Xp = he.Q * clipped.asDiagonal() * he.Q.adjoint();
    }

    pencil::LmiMaps maps = pencil::lmi_maps(aset.pencil, aset.curve, Xp);
    if (maps.eq.norm() > tol * scale)
        throw std::invalid_argument("decompose_psd: LMI infeasible (equality residual " +
                                    std::to_string(maps.eq.norm()) + ")");
    if (aset.curve.inequality_active && maps.ineq.rows() > 0) {
        numkern::HermEig hi = herm_eig(maps.ineq);
        if (hi.lambda(0) > tol * scale)
            throw std::invalid_argument("decompose_psd: LMI infeasible (inequality excess " +
                                        std::to_string(hi.lambda(0)) + ")");
    }

    numkern::PsdFactor f = psd_factor(Xp, tol);
    AtomicDecomposition out;
    if (f.rank == 0) {
        out.weights.resize(0);
        out.residual = X.norm();
        return out;
    }
    CMat U = aset.pencil.F * f.Y, V = aset.pencil.G * f.Y;
    PairFactorization pf = pair_factorize(U, V, aset.curve, tol);
    CMat A = f.Y * pf.Q;
    for (Eigen::Index k = 0; k < f.rank; ++k) {
        out.atoms.push_back(A.col(k));
        out.points.push_back(pf.points[size_t(k)]);
    }
    out.weights.resize(f.rank);
    for (Eigen::Index k = 0; k < f.rank; ++k) out.weights(k) = out.atoms[size_t(k)].squaredNorm();
    merge_clusters(out, 1e-7);
    out.residual = (X - out.reconstruct(X.rows())).norm();
    return out;
}

AtomicDecomposition caratheodory_toeplitz(const CMat& X, double tol) {
    const Eigen::Index n = X.rows();
    if (X.cols() != n) throw std::invalid_argument("caratheodory_toeplitz: X must be square");
    const double scale = 1.0 + X.norm();
    // Toeplitz check.
    for (Eigen::Index i = 0; i + 1 < n; ++i)
        for (Eigen::Index j = 0; j + 1 < n; ++j)
            if (std::abs(X(i, j) - X(i + 1, j + 1)) > tol * scale)
                throw std::invalid_argument("caratheodory_toeplitz: X not Toeplitz");
    AtomSet aset(pencil::toeplitz(std::max<Eigen::Index>(n, 2)), region::unit_circle());
    if (n < 2) throw std::invalid_argument("caratheodory_toeplitz: need n >= 2");

    CMat Xp = project_structure(X, pencil::Family::Toeplitz);
    numkern::PsdFactor f = psd_factor(0.5 * (Xp + CMat(Xp.adjoint())), tol);
    AtomicDecomposition out;
    if (f.rank == 0) {
        out.weights.resize(0);
        out.residual = X.norm();
        return out;
    }
    const Eigen::Index r = f.rank;
    CMat Y1 = f.Y.topRows(n - 1), Y2 = f.Y.bottomRows(n - 1);
    bool fast_ok = false;
    numkern::SchurNormal sn;
    if (r <= n - 1) {
        CMat Lam = Y1.colPivHouseholderQr().solve(Y2);
        if ((Lam * Lam.adjoint() - CMat::Identity(r, r)).norm() <= 1e-5 * double(r)) {
            sn = schur_normal(Lam, 1e-5);
            fast_ok = true;
        }
    }
    if (!fast_ok) {
        // Full-rank or defective case: the shifted-row relation does not
        // determine a unitary; fall back to the general factorization.
        return decompose_psd(X, aset, tol);
    }
    CMat A = f.Y * sn.Q;
    for (Eigen::Index k = 0; k < r; ++k) {
        Complex lam = sn.lambda(k) / std::abs(sn.lambda(k));
        out.atoms.push_back(A.col(k));
        out.points.push_back(region::HomPoint(lam, 1.0));
    }
    out.weights.resize(r);
    for (Eigen::Index k = 0; k < r; ++k) out.weights(k) = out.atoms[size_t(k)].squaredNorm();
    merge_clusters(out, 1e-7);
    out.residual = (X - out.reconstruct(n)).norm();
    return out;
}

} // namespace pn::decomp
