#include "pencilnorm/gauge.hpp"

#include "pencilnorm/numkern.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace pn::gauge {

using conic::hmat;
using conic::hvec;
using conic::svec_len;
using numkern::herm_eig;
using region::HForm2;

// ---------------------------------------------------------------------------
// LossSpec

LossSpec LossSpec::none() { return LossSpec{}; }

LossSpec LossSpec::squared_l2(std::vector<std::pair<Eigen::Index, Eigen::Index>> idx, CVec vals,
                              double gamma) {
    LossSpec l;
    l.kind = Kind::SquaredL2;
    l.indices = std::move(idx);
    l.values = std::move(vals);
    l.gamma = gamma;
    l.validate();
    return l;
}

LossSpec LossSpec::squared_frobenius(CMat target, double gamma) {
    LossSpec l;
    l.kind = Kind::SquaredFrobenius;
    l.target = std::move(target);
    l.gamma = gamma;
    l.validate();
    return l;
}

LossSpec LossSpec::huber(std::vector<std::pair<Eigen::Index, Eigen::Index>> idx, CVec vals,
                         double gamma, double delta) {
    LossSpec l;
    l.kind = Kind::Huber;
    l.indices = std::move(idx);
    l.values = std::move(vals);
    l.gamma = gamma;
    l.delta = delta;
    l.validate();
    return l;
}

LossSpec LossSpec::spectral_norm_epigraph(CMat target, double gamma) {
    LossSpec l;
    l.kind = Kind::SpectralNormEpigraph;
    l.target = std::move(target);
    l.gamma = gamma;
    l.validate();
    return l;
}

LossSpec LossSpec::equality_on_index_set(std::vector<std::pair<Eigen::Index, Eigen::Index>> idx,
                                         CVec vals) {
    LossSpec l;
    l.kind = Kind::EqualityOnIndexSet;
    l.indices = std::move(idx);
    l.values = std::move(vals);
    l.validate();
    return l;
}

void LossSpec::validate() const {
    switch (kind) {
    case Kind::None:
        break;
    case Kind::SquaredL2:
    case Kind::Huber:
    case Kind::EqualityOnIndexSet:
        if (Eigen::Index(indices.size()) != values.size())
            throw std::invalid_argument("LossSpec: indices/values size mismatch");
        if (indices.empty()) throw std::invalid_argument("LossSpec: empty index set");
        break;
    case Kind::SquaredFrobenius:
    case Kind::SpectralNormEpigraph:
        if (target.rows() != target.cols())
            throw std::invalid_argument("LossSpec: matrix target must be square");
        break;
    }
    if (kind == Kind::Huber && !(delta > 0.0))
        throw std::invalid_argument("LossSpec: Huber delta must be positive");
    if (kind != Kind::None && kind != Kind::EqualityOnIndexSet && !(gamma > 0.0))
        throw std::invalid_argument("LossSpec: gamma must be positive");
}

// ---------------------------------------------------------------------------
// Pencil adjoint: T with Re<T, X> = Re<P, sandwich_theta(X)>.

CMat pencil_adjoint(const pencil::PencilSpec& pen, const HForm2& theta, const CMat& P) {
    if (P.rows() != pen.p() || P.cols() != pen.p())
        throw std::invalid_argument("pencil_adjoint: P must be p x p");
    const CMat PF = P * pen.F, PG = P * pen.G;
    CMat M = theta(0, 0) * (pen.F.adjoint() * PF) + theta(0, 1) * (pen.F.adjoint() * PG) +
             theta(1, 0) * (pen.G.adjoint() * PF) + theta(1, 1) * (pen.G.adjoint() * PG);
    return 0.5 * (M + CMat(M.adjoint()));
}

// ---------------------------------------------------------------------------
// ModelBuilder

namespace {

// Local variable layout for a Hermitian n x n block: n diagonal entries first,
// then (re, im) pairs over the strict lower triangle in column-major order.
Eigen::Index pair_offset(Eigen::Index n, Eigen::Index a, Eigen::Index b) {
    // a > b
    return b * (n - 1) - b * (b - 1) / 2 + (a - b - 1);
}

struct VarDecode {
    Eigen::Index a, b; // a >= b
    int part;          // 0 diag, 1 re, 2 im
};

VarDecode decode_var(Eigen::Index n, Eigen::Index v) {
    if (v < n) return {v, v, 0};
    Eigen::Index t = (v - n) / 2;
    int part = ((v - n) % 2 == 0) ? 1 : 2;
    // invert pair_offset
    Eigen::Index b = 0;
    while (pair_offset(n, n - 1, b) < t) ++b;
    if (pair_offset(n, b + 1, b) > t) --b;
    Eigen::Index a = b + 1 + (t - pair_offset(n, b + 1, b));
    return {a, b, part};
}

} // namespace

Eigen::Index ModelBuilder::add_scalar(double obj_coeff, bool nonneg) {
    if (built_) throw std::logic_error("ModelBuilder: already built");
    const Eigen::Index v = Eigen::Index(obj_.size());
    obj_.push_back(obj_coeff);
    if (nonneg) {
        const Eigen::Index row = Eigen::Index(nonneg_.b.size());
        nonneg_.trips.emplace_back(int(row), int(v), -1.0);
        nonneg_.b.push_back(0.0);
    }
    return v;
}

Eigen::Index ModelBuilder::add_herm(Eigen::Index n, const CMat& obj_weight) {
    if (built_) throw std::logic_error("ModelBuilder: already built");
    if (n < 1) throw std::invalid_argument("ModelBuilder: block side must be positive");
    CMat W = obj_weight;
    if (W.size() == 0) W = CMat::Zero(n, n);
    if (W.rows() != n || W.cols() != n)
        throw std::invalid_argument("ModelBuilder: objective weight must be n x n");
    if (numkern::herm_residual(W) > 1e-10 * (1.0 + W.norm()))
        throw std::invalid_argument("ModelBuilder: objective weight must be Hermitian");
    Block blk;
    blk.offset = Eigen::Index(obj_.size());
    blk.n = n;
    for (Eigen::Index a = 0; a < n; ++a) obj_.push_back(W(a, a).real());
    for (Eigen::Index b = 0; b < n; ++b)
        for (Eigen::Index a = b + 1; a < n; ++a) {
            obj_.push_back(2.0 * W(a, b).real());
            obj_.push_back(2.0 * W(a, b).imag());
        }
    blocks_.push_back(blk);
    return Eigen::Index(blocks_.size()) - 1;
}

CMat ModelBuilder::herm_basis(Eigen::Index blk, Eigen::Index local) const {
    const Eigen::Index n = blocks_.at(blk).n;
    VarDecode d = decode_var(n, local);
    CMat B = CMat::Zero(n, n);
    if (d.part == 0)
        B(d.a, d.a) = 1.0;
    else if (d.part == 1) {
        B(d.a, d.b) = 1.0;
        B(d.b, d.a) = 1.0;
    } else {
        B(d.a, d.b) = Complex(0.0, 1.0);
        B(d.b, d.a) = Complex(0.0, -1.0);
    }
    return B;
}

std::vector<std::pair<Eigen::Index, Complex>> ModelBuilder::entry_vars(Eigen::Index blk,
                                                                       Eigen::Index r,
                                                                       Eigen::Index c) const {
    const Block& B = blocks_.at(blk);
    if (r < 0 || r >= B.n || c < 0 || c >= B.n)
        throw std::invalid_argument("ModelBuilder: entry index out of range");
    std::vector<std::pair<Eigen::Index, Complex>> out;
    if (r == c) {
        out.emplace_back(B.offset + r, Complex(1.0, 0.0));
        return out;
    }
    const Eigen::Index a = std::max(r, c), b = std::min(r, c);
    const Eigen::Index t = pair_offset(B.n, a, b);
    const Complex im_w = (r > c) ? Complex(0.0, 1.0) : Complex(0.0, -1.0);
    out.emplace_back(B.offset + B.n + 2 * t, Complex(1.0, 0.0));
    out.emplace_back(B.offset + B.n + 2 * t + 1, im_w);
    return out;
}

Eigen::Index ModelBuilder::add_zero_row(const std::vector<std::pair<Eigen::Index, double>>& coeffs,
                                        double rhs) {
    const Eigen::Index row = Eigen::Index(zero_.b.size());
    for (const auto& [v, w] : coeffs)
        if (w != 0.0) zero_.trips.emplace_back(int(row), int(v), w);
    zero_.b.push_back(rhs);
    return row;
}

void ModelBuilder::add_psd(Eigen::Index blk) {
    if (built_) throw std::logic_error("ModelBuilder: already built");
    Block& B = blocks_.at(blk);
    if (B.psd_local >= 0) throw std::logic_error("ModelBuilder: block already constrained PSD");
    const Eigen::Index n = B.n;
    const Eigen::Index start = Eigen::Index(psd_.b.size());
    const Eigen::Index len = svec_len(2 * n);
    for (Eigen::Index v = 0; v < n * n; ++v) {
        const RVec h = hvec(herm_basis(blk, v));
        for (Eigen::Index r = 0; r < len; ++r)
            if (h(r) != 0.0) psd_.trips.emplace_back(int(start + r), int(B.offset + v), -h(r));
    }
    for (Eigen::Index r = 0; r < len; ++r) psd_.b.push_back(0.0);
    B.psd_local = Eigen::Index(psd_sides_.size());
    B.psd_start = start; // local; shifted by psd_off_ at build()
    psd_sides_.push_back(2 * n);
    psd_owner_.emplace_back(blk, B.psd_local);
}

void ModelBuilder::add_pencil(Eigen::Index blk, const pencil::PencilSpec& pen,
                              const CurveSpec& curve) {
    if (built_) throw std::logic_error("ModelBuilder: already built");
    const Block& B = blocks_.at(blk);
    pen.validate();
    if (pen.n() != B.n) throw std::invalid_argument("ModelBuilder: pencil size mismatch");
    PencilRows pr;
    pr.blk = blk;
    pr.p = pen.p();
    pr.pen = pen;
    pr.curve = curve;
    const Eigen::Index p = pen.p(), n = B.n;
    if (p == 0) {
        pencils_.push_back(pr);
        return;
    }
    pr.eq_start = Eigen::Index(zero_.b.size());
    for (Eigen::Index i = 0; i < p * p; ++i) zero_.b.push_back(0.0);
    const bool ineq = curve.inequality_active;
    const Eigen::Index ineq_len = ineq ? svec_len(2 * p) : 0;
    if (ineq) {
        pr.ineq_start = Eigen::Index(psd_.b.size()); // local; shifted at build()
        for (Eigen::Index r = 0; r < ineq_len; ++r) psd_.b.push_back(0.0);
        psd_sides_.push_back(2 * p);
        psd_owner_.emplace_back(-1, Eigen::Index(psd_sides_.size()) - 1);
    }
    auto sand = [&](const HForm2& th, Eigen::Index a, Eigen::Index b) -> CMat {
        const CVec fa = pen.F.col(a), ga = pen.G.col(a);
        const CVec fb = pen.F.col(b), gb = pen.G.col(b);
        return th(0, 0) * (fa * fb.adjoint()) + th(1, 0) * (fa * gb.adjoint()) +
               th(0, 1) * (ga * fb.adjoint()) + th(1, 1) * (ga * gb.adjoint());
    };
    const Complex j(0.0, 1.0);
    for (Eigen::Index v = 0; v < n * n; ++v) {
        VarDecode d = decode_var(n, v);
        CMat Seq, Sineq;
        auto form = [&](const HForm2& th) -> CMat {
            if (d.part == 0) return sand(th, d.a, d.a);
            if (d.part == 1) return sand(th, d.a, d.b) + sand(th, d.b, d.a);
            return j * (sand(th, d.a, d.b) - sand(th, d.b, d.a));
        };
        Seq = form(curve.phi);
        Eigen::Index row = pr.eq_start;
        for (Eigen::Index k = 0; k < p; ++k)
            for (Eigen::Index l = k; l < p; ++l) {
                const double re = Seq(k, l).real();
                if (re != 0.0) zero_.trips.emplace_back(int(row), int(B.offset + v), re);
                ++row;
                if (l > k) {
                    const double im = Seq(k, l).imag();
                    if (im != 0.0) zero_.trips.emplace_back(int(row), int(B.offset + v), im);
                    ++row;
                }
            }
        if (ineq) {
            Sineq = 0.5 * (form(curve.psi) + CMat(form(curve.psi).adjoint()));
            const RVec h = hvec(Sineq);
            for (Eigen::Index r = 0; r < ineq_len; ++r)
                if (h(r) != 0.0)
                    psd_.trips.emplace_back(int(pr.ineq_start + r), int(B.offset + v), h(r));
        }
    }
    pencils_.push_back(pr);
}

void ModelBuilder::add_pin(const std::vector<EntryTerm>& terms,
                           const std::vector<std::pair<Eigen::Index, double>>& scalar_terms,
                           Complex rhs) {
    if (built_) throw std::logic_error("ModelBuilder: already built");
    std::map<Eigen::Index, Complex> weights;
    for (const auto& t : terms)
        for (const auto& [v, w] : entry_vars(t.blk, t.row, t.col)) weights[v] += t.coeff * w;
    std::vector<std::pair<Eigen::Index, double>> re_row, im_row;
    for (const auto& [v, w] : weights) {
        re_row.emplace_back(v, w.real());
        im_row.emplace_back(v, w.imag());
    }
    for (const auto& [v, w] : scalar_terms) re_row.emplace_back(v, w);
    add_zero_row(re_row, rhs.real());
    add_zero_row(im_row, rhs.imag());
}

void ModelBuilder::add_psd_general(const CMat& constant,
                                   const std::vector<std::pair<Eigen::Index, CMat>>& terms) {
    if (built_) throw std::logic_error("ModelBuilder: already built");
    const Eigen::Index side = constant.rows();
    if (constant.cols() != side)
        throw std::invalid_argument("ModelBuilder: PSD constant must be square");
    const Eigen::Index start = Eigen::Index(psd_.b.size());
    const Eigen::Index len = svec_len(2 * side);
    const RVec bc = hvec(constant);
    for (Eigen::Index r = 0; r < len; ++r) psd_.b.push_back(bc(r));
    for (const auto& [v, coef] : terms) {
        if (coef.rows() != side || coef.cols() != side)
            throw std::invalid_argument("ModelBuilder: PSD coefficient size mismatch");
        const RVec h = hvec(coef);
        for (Eigen::Index r = 0; r < len; ++r)
            if (h(r) != 0.0) psd_.trips.emplace_back(int(start + r), int(v), -h(r));
    }
    psd_sides_.push_back(2 * side);
    psd_owner_.emplace_back(-1, Eigen::Index(psd_sides_.size()) - 1);
}

void ModelBuilder::add_loss(Eigen::Index blk, const LossSpec& loss,
                            std::optional<Eigen::Index> shift_scalar) {
    loss.validate();
    const Eigen::Index n = blocks_.at(blk).n;
    const Eigen::Index offset = blocks_.at(blk).offset;
    switch (loss.kind) {
    case LossSpec::Kind::None:
        return;
    case LossSpec::Kind::EqualityOnIndexSet: {
        for (std::size_t i = 0; i < loss.indices.size(); ++i) {
            const auto& [r, c] = loss.indices[i];
            add_pin({{blk, r, c, Complex(1.0, 0.0)}}, {}, loss.values(Eigen::Index(i)));
        }
        return;
    }
    case LossSpec::Kind::SquaredFrobenius: {
        CMat T = loss.target.size() ? loss.target : CMat::Zero(n, n);
        if (T.rows() != n) throw std::invalid_argument("ModelBuilder: loss target size mismatch");
        const Eigen::Index w = add_scalar(loss.gamma, false);
        const Eigen::Index start = Eigen::Index(soc_.b.size());
        soc_.trips.emplace_back(int(start), int(w), -1.0);
        soc_.b.push_back(1.0);
        soc_.trips.emplace_back(int(start + 1), int(w), -1.0);
        soc_.b.push_back(-1.0);
        const Eigen::Index len = svec_len(2 * n);
        const RVec bt = hvec(T);
        for (Eigen::Index r = 0; r < len; ++r) soc_.b.push_back(-2.0 * bt(r));
        for (Eigen::Index v = 0; v < n * n; ++v) {
            const RVec h = hvec(herm_basis(blk, v));
            for (Eigen::Index r = 0; r < len; ++r)
                if (h(r) != 0.0)
                    soc_.trips.emplace_back(int(start + 2 + r), int(offset + v), -2.0 * h(r));
        }
        soc_sizes_.push_back(2 + len);
        return;
    }
    case LossSpec::Kind::SquaredL2: {
        const Eigen::Index w = add_scalar(loss.gamma, false);
        const Eigen::Index start = Eigen::Index(soc_.b.size());
        soc_.trips.emplace_back(int(start), int(w), -1.0);
        soc_.b.push_back(1.0);
        soc_.trips.emplace_back(int(start + 1), int(w), -1.0);
        soc_.b.push_back(-1.0);
        Eigen::Index row = start + 2;
        for (std::size_t i = 0; i < loss.indices.size(); ++i) {
            const auto& [r, c] = loss.indices[i];
            const Complex val = loss.values(Eigen::Index(i));
            for (const auto& [v, wgt] : entry_vars(blk, r, c)) {
                if (wgt.real() != 0.0) soc_.trips.emplace_back(int(row), int(v), -2.0 * wgt.real());
                if (wgt.imag() != 0.0)
                    soc_.trips.emplace_back(int(row + 1), int(v), -2.0 * wgt.imag());
            }
            soc_.b.push_back(-2.0 * val.real());
            soc_.b.push_back(-2.0 * val.imag());
            row += 2;
        }
        soc_sizes_.push_back(2 + 2 * Eigen::Index(loss.indices.size()));
        return;
    }
    case LossSpec::Kind::Huber: {
        const Eigen::Index me = Eigen::Index(loss.indices.size());
        const Eigen::Index w = add_scalar(loss.gamma, false);
        std::vector<Eigen::Index> are(me), aim(me), tb(me);
        for (Eigen::Index i = 0; i < me; ++i) {
            are[i] = add_scalar(0.0, false);
            aim[i] = add_scalar(0.0, false);
            tb[i] = add_scalar(2.0 * loss.gamma * loss.delta, false);
        }
        // shared cone: ||a||^2 <= w
        Eigen::Index start = Eigen::Index(soc_.b.size());
        soc_.trips.emplace_back(int(start), int(w), -1.0);
        soc_.b.push_back(1.0);
        soc_.trips.emplace_back(int(start + 1), int(w), -1.0);
        soc_.b.push_back(-1.0);
        for (Eigen::Index i = 0; i < me; ++i) {
            soc_.trips.emplace_back(int(start + 2 + 2 * i), int(are[i]), -2.0);
            soc_.b.push_back(0.0);
            soc_.trips.emplace_back(int(start + 3 + 2 * i), int(aim[i]), -2.0);
            soc_.b.push_back(0.0);
        }
        soc_sizes_.push_back(2 + 2 * me);
        // per entry: |residual - a_i| <= tb_i
        for (Eigen::Index i = 0; i < me; ++i) {
            start = Eigen::Index(soc_.b.size());
            const auto& [r, c] = loss.indices[std::size_t(i)];
            const Complex val = loss.values(i);
            soc_.trips.emplace_back(int(start), int(tb[i]), -1.0);
            soc_.b.push_back(0.0);
            for (const auto& [v, wgt] : entry_vars(blk, r, c)) {
                if (wgt.real() != 0.0) soc_.trips.emplace_back(int(start + 1), int(v), -wgt.real());
                if (wgt.imag() != 0.0) soc_.trips.emplace_back(int(start + 2), int(v), -wgt.imag());
            }
            soc_.trips.emplace_back(int(start + 1), int(are[i]), 1.0);
            soc_.trips.emplace_back(int(start + 2), int(aim[i]), 1.0);
            soc_.b.push_back(-val.real());
            soc_.b.push_back(-val.imag());
            soc_sizes_.push_back(3);
        }
        return;
    }
    case LossSpec::Kind::SpectralNormEpigraph: {
        CMat T = loss.target.size() ? loss.target : CMat::Zero(n, n);
        if (T.rows() != n) throw std::invalid_argument("ModelBuilder: loss target size mismatch");
        const Eigen::Index w = add_scalar(loss.gamma, false);
        const CMat I = CMat::Identity(n, n);
        std::vector<std::pair<Eigen::Index, CMat>> minus_terms, plus_terms;
        minus_terms.emplace_back(w, I);
        plus_terms.emplace_back(w, I);
        for (Eigen::Index v = 0; v < n * n; ++v) {
            const CMat B = herm_basis(blk, v);
            minus_terms.emplace_back(offset + v, CMat(-B));
            plus_terms.emplace_back(offset + v, B);
        }
        if (shift_scalar) {
            minus_terms.emplace_back(*shift_scalar, CMat(-I));
            plus_terms.emplace_back(*shift_scalar, I);
        }
        add_psd_general(T, minus_terms);  // wI - (X + tI - T) >= 0
        add_psd_general(-T, plus_terms);  // wI + (X + tI - T) >= 0
        return;
    }
    }
}

conic::ConicProblem ModelBuilder::build() {
    if (built_) throw std::logic_error("ModelBuilder: already built");
    built_ = true;
    const Eigen::Index Z = Eigen::Index(zero_.b.size());
    const Eigen::Index N = Eigen::Index(nonneg_.b.size());
    const Eigen::Index S = Eigen::Index(soc_.b.size());
    const Eigen::Index P = Eigen::Index(psd_.b.size());
    zero_off_ = 0;
    nonneg_off_ = Z;
    soc_off_ = Z + N;
    psd_off_ = Z + N + S;
    for (auto& pr : pencils_)
        if (pr.ineq_start >= 0) pr.ineq_start += psd_off_;
    for (auto& b : blocks_)
        if (b.psd_start >= 0) b.psd_start += psd_off_;
    conic::ConicProblem prob;
    const Eigen::Index nv = Eigen::Index(obj_.size());
    prob.c = Eigen::Map<const RVec>(obj_.data(), nv);
    prob.b.resize(Z + N + S + P);
    for (Eigen::Index i = 0; i < Z; ++i) prob.b(i) = zero_.b[std::size_t(i)];
    for (Eigen::Index i = 0; i < N; ++i) prob.b(nonneg_off_ + i) = nonneg_.b[std::size_t(i)];
    for (Eigen::Index i = 0; i < S; ++i) prob.b(soc_off_ + i) = soc_.b[std::size_t(i)];
    for (Eigen::Index i = 0; i < P; ++i) prob.b(psd_off_ + i) = psd_.b[std::size_t(i)];
    std::vector<conic::Triplet> trips;
    trips.reserve(zero_.trips.size() + nonneg_.trips.size() + soc_.trips.size() +
                  psd_.trips.size());
    for (const auto& t : zero_.trips) trips.emplace_back(t.row(), t.col(), t.value());
    for (const auto& t : nonneg_.trips)
        trips.emplace_back(t.row() + int(nonneg_off_), t.col(), t.value());
    for (const auto& t : soc_.trips) trips.emplace_back(t.row() + int(soc_off_), t.col(), t.value());
    for (const auto& t : psd_.trips) trips.emplace_back(t.row() + int(psd_off_), t.col(), t.value());
    prob.A.resize(Z + N + S + P, nv);
    prob.A.setFromTriplets(trips.begin(), trips.end());
    if (Z > 0) prob.cones.push_back({conic::ConeType::Zero, Z});
    if (N > 0) prob.cones.push_back({conic::ConeType::NonNeg, N});
    for (Eigen::Index d : soc_sizes_) prob.cones.push_back({conic::ConeType::SOC, d});
    for (Eigen::Index d : psd_sides_) prob.cones.push_back({conic::ConeType::Psd, d, true});
    prob.validate();
    return prob;
}

CMat ModelBuilder::herm_value(Eigen::Index blk, const RVec& x) const {
    const Block& B = blocks_.at(blk);
    const Eigen::Index n = B.n;
    if (x.size() < B.offset + n * n)
        throw std::invalid_argument("ModelBuilder: solution vector too short");
    CMat X = CMat::Zero(n, n);
    for (Eigen::Index a = 0; a < n; ++a) X(a, a) = x(B.offset + a);
    Eigen::Index v = B.offset + n;
    for (Eigen::Index b = 0; b < n; ++b)
        for (Eigen::Index a = b + 1; a < n; ++a) {
            X(a, b) = Complex(x(v), x(v + 1));
            X(b, a) = std::conj(X(a, b));
            v += 2;
        }
    return X;
}

Eigen::Index ModelBuilder::herm_var_offset(Eigen::Index blk) const { return blocks_.at(blk).offset; }
Eigen::Index ModelBuilder::herm_side(Eigen::Index blk) const { return blocks_.at(blk).n; }
Eigen::Index ModelBuilder::psd_row_start(Eigen::Index blk) const { return blocks_.at(blk).psd_start; }

CMat ModelBuilder::herm_from_grad(Eigen::Index blk, const RVec& g_full) const {
    const Block& B = blocks_.at(blk);
    const Eigen::Index n = B.n;
    CMat T = CMat::Zero(n, n);
    for (Eigen::Index a = 0; a < n; ++a) T(a, a) = g_full(B.offset + a);
    Eigen::Index v = B.offset + n;
    for (Eigen::Index b = 0; b < n; ++b)
        for (Eigen::Index a = b + 1; a < n; ++a) {
            T(a, b) = 0.5 * Complex(g_full(v), g_full(v + 1));
            T(b, a) = std::conj(T(a, b));
            v += 2;
        }
    return T;
}

// ---------------------------------------------------------------------------
// Curve grid

std::vector<HomPoint> curve_grid(const CurveSpec& curve, Eigen::Index count) {
    if (count < 1) throw std::invalid_argument("curve_grid: need count >= 1");
    const region::Canonical can = region::canonicalize(curve);
    const Eigen::Matrix2cd Rinv = can.R.inverse();
    auto mapc = [&](Complex a, Complex b) -> HomPoint {
        Eigen::Vector2cd x = Rinv * Eigen::Vector2cd(a, b);
        return HomPoint(x(0), x(1));
    };
    const Complex j(0.0, 1.0);
    std::vector<HomPoint> pts;
    const region::CurveClass cls = region::classify(curve);
    switch (cls) {
    case region::CurveClass::Empty:
        return pts;
    case region::CurveClass::Singleton:
        pts.push_back(mapc(0.0, 1.0));
        return pts;
    case region::CurveClass::Segment: {
        if (can.alpha > 0.0) {
            const double t0 = std::sqrt(std::max(0.0, -can.gamma / can.alpha));
            for (Eigen::Index k = 0; k < count; ++k) {
                const double tau = count == 1 ? 0.0 : -t0 + 2.0 * t0 * double(k) / double(count - 1);
                pts.push_back(mapc(j * tau, 1.0));
            }
        } else {
            // complement segment: two rays through infinity
            const double t0 = std::sqrt(std::max(0.0, -can.gamma / can.alpha));
            const Eigen::Index half = std::max<Eigen::Index>(1, (count - 1) / 2);
            for (Eigen::Index k = 0; k < half; ++k) {
                const double tau = t0 / (double(k + 1) / double(half));
                pts.push_back(mapc(j * tau, 1.0));
                pts.push_back(mapc(-j * tau, 1.0));
            }
            pts.push_back(mapc(1.0, 0.0));
        }
        return pts;
    }
    case region::CurveClass::FullCurve: {
        for (Eigen::Index k = 0; k + 1 < count; ++k) {
            const double u = (double(k) + 0.5) / double(count - 1);
            const double tau = std::tan(M_PI * (u - 0.5));
            pts.push_back(mapc(j * tau, 1.0));
        }
        pts.push_back(mapc(1.0, 0.0));
        return pts;
    }
    }
    return pts;
}

// ---------------------------------------------------------------------------
// Gauge programs

GaugeProgram::GaugeProgram(AtomSet aset_) : aset(std::move(aset_)) {}

CMat GaugeProgram::X(const conic::ConicSolution& sol) const { return builder.herm_value(0, sol.x); }

CMat GaugeProgram::V(const conic::ConicSolution& sol) const {
    const auto& b = aset.pencil.block;
    if (!b) throw std::logic_error("GaugeProgram: no block structure");
    return X(sol).topLeftCorner(b->n1, b->n1);
}

CMat GaugeProgram::Yblk(const conic::ConicSolution& sol) const {
    const auto& b = aset.pencil.block;
    if (!b) throw std::logic_error("GaugeProgram: no block structure");
    return X(sol).topRightCorner(b->n1, b->n2);
}

CMat GaugeProgram::W(const conic::ConicSolution& sol) const {
    const auto& b = aset.pencil.block;
    if (!b) throw std::logic_error("GaugeProgram: no block structure");
    return X(sol).bottomRightCorner(b->n2, b->n2);
}

double GaugeProgram::noise_t(const conic::ConicSolution& sol) const {
    if (noise_var < 0) throw std::logic_error("GaugeProgram: no noise term");
    return sol.x(noise_var);
}

namespace {

CMat ident_or(const CMat& E, Eigen::Index n) {
    return E.size() == 0 ? CMat(CMat::Identity(n, n)) : E;
}

// E^H E for the symmetric case, diag(E1^H E1, E2^H E2) for block pencils.
CMat e_gram(const pencil::PencilSpec& pen) {
    const Eigen::Index n = pen.n();
    if (pen.block) {
        const auto& b = *pen.block;
        CMat Ed = CMat::Zero(n, n);
        const CMat E1 = ident_or(b.E1, b.n1), E2 = ident_or(b.E2, b.n2);
        Ed.topLeftCorner(b.n1, b.n1) = E1.adjoint() * E1;
        Ed.bottomRightCorner(b.n2, b.n2) = E2.adjoint() * E2;
        return Ed;
    }
    const CMat E = ident_or(pen.E, n);
    return E.adjoint() * E;
}

} // namespace

double gauge_value(const CMat& X, const AtomSet& aset, double tol) {
    const pencil::PencilSpec& pen = aset.pencil;
    const Eigen::Index n = pen.n();
    if (X.rows() != n || X.cols() != n) throw std::invalid_argument("gauge_value: X must be n x n");
    const double scale = 1.0 + X.norm();
    if (numkern::herm_residual(X) > tol * scale) return kInfeasibleGauge;
    numkern::HermEig he = herm_eig(X);
    if (he.lambda(n - 1) < -tol * scale) return kInfeasibleGauge;
    if (pen.p() > 0) {
        pencil::LmiMaps maps = pencil::lmi_maps(pen, aset.curve, X);
        if (maps.eq.norm() > tol * scale) return kInfeasibleGauge;
        if (aset.curve.inequality_active) {
            numkern::HermEig hi = herm_eig(maps.ineq);
            if (hi.lambda(0) > tol * scale) return kInfeasibleGauge;
        }
    }
    if (pen.block) {
        const auto& b = *pen.block;
        const CMat E1 = ident_or(b.E1, b.n1), E2 = ident_or(b.E2, b.n2);
        const CMat V = X.topLeftCorner(b.n1, b.n1), W = X.bottomRightCorner(b.n2, b.n2);
        return 0.5 * ((E1 * V * E1.adjoint()).trace().real() +
                      (E2 * W * E2.adjoint()).trace().real());
    }
    const CMat E = ident_or(pen.E, n);
    return (E * X * E.adjoint()).trace().real();
}

GaugeProgram build_symmetric(const AtomSet& aset, const LossSpec& loss, bool with_noise_term) {
    loss.validate();
    GaugeProgram prog(aset);
    prog.kind = GaugeProgram::Kind::Symmetric;
    prog.loss = loss;
    prog.with_noise_term = with_noise_term;
    const Eigen::Index n = aset.pencil.n();
    ModelBuilder mb;
    const Eigen::Index blk = mb.add_herm(n, e_gram(aset.pencil));
    mb.add_psd(blk);
    mb.add_pencil(blk, aset.pencil, aset.curve);
    std::optional<Eigen::Index> shift;
    if (with_noise_term) {
        prog.noise_var = mb.add_scalar(0.0, true);
        shift = prog.noise_var;
    }
    mb.add_loss(blk, loss, shift);
    prog.lowered = mb.build();
    prog.builder = std::move(mb);
    return prog;
}

GaugeProgram build_nonsymmetric(const AtomSet& aset, const LossSpec& loss) {
    loss.validate();
    if (!aset.pencil.block)
        throw std::invalid_argument("build_nonsymmetric: pencil has no block structure");
    GaugeProgram prog(aset);
    prog.kind = GaugeProgram::Kind::NonSymmetric;
    prog.loss = loss;
    const Eigen::Index n = aset.pencil.n();
    ModelBuilder mb;
    const Eigen::Index blk = mb.add_herm(n, CMat(0.5 * e_gram(aset.pencil)));
    mb.add_psd(blk);
    mb.add_pencil(blk, aset.pencil, aset.curve);
    mb.add_loss(blk, loss);
    prog.lowered = mb.build();
    prog.builder = std::move(mb);
    return prog;
}

// ---------------------------------------------------------------------------
// Certificates

DualCertificate extract_certificate(const GaugeProgram& prog, const conic::ConicSolution& sol) {
    if (sol.status != conic::SolveStatus::Optimal)
        throw std::runtime_error("extract_certificate: solution is not optimal");
    const ModelBuilder& mb = prog.builder;
    if (mb.pencil_rows().empty()) throw std::logic_error("extract_certificate: no pencil rows");
    const auto& pr = mb.pencil_rows().front();
    const pencil::PencilSpec& pen = pr.pen;
    const Eigen::Index p = pr.p, n = mb.herm_side(0);
    const RVec aty = prog.lowered.A.transpose() * sol.y;
    const CMat G_tot = mb.herm_from_grad(0, aty);
    CMat P0 = CMat::Zero(p, p);
    if (p > 0) {
        Eigen::Index row = pr.eq_start;
        for (Eigen::Index k = 0; k < p; ++k)
            for (Eigen::Index l = k; l < p; ++l) {
                if (l == k) {
                    P0(k, k) = sol.y(row);
                    ++row;
                } else {
                    P0(k, l) = 0.5 * Complex(sol.y(row), sol.y(row + 1));
                    P0(l, k) = std::conj(P0(k, l));
                    row += 2;
                }
            }
    }
    const CMat G_eq = p > 0 ? pencil_adjoint(pen, pr.curve.phi, P0) : CMat(CMat::Zero(n, n));
    CMat Q0 = CMat::Zero(p, p);
    CMat G_ineq = CMat::Zero(n, n);
    if (pr.ineq_start >= 0) {
        Q0 = hmat(sol.y.segment(pr.ineq_start, svec_len(2 * p)));
        G_ineq = pencil_adjoint(pen, pr.curve.psi, Q0);
    }
    CMat S0 = CMat::Zero(n, n);
    if (mb.psd_row_start(0) >= 0) S0 = hmat(sol.y.segment(mb.psd_row_start(0), svec_len(2 * n)));
    const CMat Z_loss = G_tot - G_eq - G_ineq + S0;
    const bool nonsym = prog.kind == GaugeProgram::Kind::NonSymmetric;
    const double scale = nonsym ? 2.0 : 1.0;
    CMat Zb = -scale * Z_loss;
    CMat P = scale * P0;
    CMat Q = scale * Q0;
    CMat Zoff;
    if (nonsym) {
        const auto& b = *pen.block;
        Zoff = Zb.topRightCorner(b.n1, b.n2);
        Zb.setZero();
        Zb.topRightCorner(b.n1, b.n2) = Zoff;
        Zb.bottomLeftCorner(b.n2, b.n1) = Zoff.adjoint();
    }
    const CMat Ed = e_gram(pen);
    CMat M = Zb - Ed;
    if (p > 0) M -= pencil_adjoint(pen, pr.curve.phi, P);
    if (pr.ineq_start >= 0) M -= pencil_adjoint(pen, pr.curve.psi, Q);
    M = 0.5 * (M + CMat(M.adjoint()));
    const double norm_scale = 1.0 + Ed.norm() + Zb.norm() + P.norm() + Q.norm();
    const double lmax = herm_eig(M).lambda(0);
    if (lmax > 1e-5 * norm_scale) {
        std::ostringstream msg;
        msg << "extract_certificate: dual LMI violated (lambda_max = " << lmax
            << ", scale = " << norm_scale << ")";
        throw std::runtime_error(msg.str());
    }
    if (pr.ineq_start >= 0) {
        const double qmin = herm_eig(Q).lambda(p - 1);
        if (qmin < -1e-6 * (1.0 + Q.norm()))
            throw std::runtime_error("extract_certificate: Q not PSD");
    }
    DualCertificate cert;
    cert.Z = nonsym ? Zoff : Zb;
    cert.P = P;
    cert.Q = pr.ineq_start >= 0 ? Q : CMat(CMat::Zero(p, p));
    return cert;
}

namespace {

CMat zbig_of(const DualCertificate& cert, const pencil::PencilSpec& pen) {
    const Eigen::Index n = pen.n();
    if (!pen.block) {
        if (cert.Z.rows() != n || cert.Z.cols() != n)
            throw std::invalid_argument("certificate: Z must be n x n");
        return 0.5 * (cert.Z + CMat(cert.Z.adjoint()));
    }
    const auto& b = *pen.block;
    if (cert.Z.rows() != b.n1 || cert.Z.cols() != b.n2)
        throw std::invalid_argument("certificate: Z must be n1 x n2");
    CMat Zb = CMat::Zero(n, n);
    Zb.topRightCorner(b.n1, b.n2) = cert.Z;
    Zb.bottomLeftCorner(b.n2, b.n1) = cert.Z.adjoint();
    return Zb;
}

} // namespace

CertificateReport certificate_check(const DualCertificate& cert, const AtomSet& aset,
                                    Eigen::Index grid_size) {
    const pencil::PencilSpec& pen = aset.pencil;
    const CMat Zb = zbig_of(cert, pen);
    const CMat Ed = e_gram(pen);
    const CMat M = Zb - Ed;
    const double scale = 1.0 + Zb.norm() + Ed.norm();
    CertificateReport rep;
    rep.max_violation = -std::numeric_limits<double>::infinity();
    const std::vector<HomPoint> grid = curve_grid(aset.curve, grid_size);
    for (const HomPoint& pt : grid) {
        const std::vector<CVec> basis = pencil::atom_basis(aset, pt);
        if (basis.empty()) continue;
        CMat V(pen.n(), Eigen::Index(basis.size()));
        for (std::size_t i = 0; i < basis.size(); ++i) V.col(Eigen::Index(i)) = basis[i];
        const CMat C = V.adjoint() * M * V;
        const double viol = herm_eig(C).lambda(0);
        rep.max_violation = std::max(rep.max_violation, viol);
        if (viol >= -1e-5 * scale) rep.active_points.push_back(pt);
    }
    if (!std::isfinite(rep.max_violation)) rep.max_violation = 0.0;
    return rep;
}

namespace {

HomPoint point_for_omega(const CurveSpec& curve, double w) {
    const Complex j(0.0, 1.0);
    const HomPoint cands[3] = {HomPoint::from_lambda(std::exp(j * w)), HomPoint::from_lambda(w),
                               HomPoint::from_lambda(j * w)};
    for (const HomPoint& pt : cands)
        if (std::abs(region::quad_form(curve.phi, pt)) < 1e-9 * (1.0 + curve.phi.norm()))
            return pt;
    throw std::invalid_argument("dual_polynomial: omega does not parameterize the curve");
}

CVec null1(const CMat& F, const CMat& G, const HomPoint& pt) {
    const CMat M = pt.mu * G - pt.nu * F;
    const Eigen::Index n = M.cols();
    if (M.rows() == 0) {
        if (n != 1) throw std::runtime_error("dual_polynomial: nullspace dimension != 1");
        return CVec::Ones(1);
    }
    numkern::Svd sv = numkern::svd(M);
    const double s1 = sv.sigma.size() > 0 ? sv.sigma(0) : 0.0;
    Eigen::Index r = 0;
    for (Eigen::Index i = 0; i < sv.sigma.size(); ++i)
        if (sv.sigma(i) > 1e-9 * s1) ++r;
    if (n - r != 1) throw std::runtime_error("dual_polynomial: nullspace dimension != 1");
    return sv.Q.col(n - 1);
}

} // namespace

RVec dual_polynomial(const DualCertificate& cert, const AtomSet& aset, const RVec& omega_grid) {
    const pencil::PencilSpec& pen = aset.pencil;
    RVec out(omega_grid.size());
    if (!pen.block) {
        const CMat E = ident_or(pen.E, pen.n());
        for (Eigen::Index i = 0; i < omega_grid.size(); ++i) {
            const HomPoint pt = point_for_omega(aset.curve, omega_grid(i));
            const CVec a = null1(pen.F, pen.G, pt);
            const double den = (E * a).squaredNorm();
            out(i) = (a.adjoint() * cert.Z * a)(0, 0).real() / den;
        }
        return out;
    }
    const auto& b = *pen.block;
    const CMat F1 = pen.F.topLeftCorner(b.p1, b.n1), G1 = pen.G.topLeftCorner(b.p1, b.n1);
    const CMat E1 = ident_or(b.E1, b.n1);
    for (Eigen::Index i = 0; i < omega_grid.size(); ++i) {
        const HomPoint pt = point_for_omega(aset.curve, omega_grid(i));
        const CVec v = null1(F1, G1, pt);
        out(i) = (cert.Z.adjoint() * v).norm() / (E1 * v).norm();
    }
    return out;
}

// ---------------------------------------------------------------------------
// KYP-style transfer function bound

KypReport kyp_bound_check(const CMat& A, const CMat& B, const CMat& C, const CMat& D,
                          const CurveSpec& curve, Eigen::Index grid) {
    const Eigen::Index ns = A.rows(), m = B.cols(), l = C.rows();
    if (A.cols() != ns || B.rows() != ns || C.cols() != ns || D.rows() != l || D.cols() != m)
        throw std::invalid_argument("kyp_bound_check: inconsistent state-space dimensions");
    const Eigen::Index n = l + ns + m;
    // pencil rows: the state recursion lambda x = A x + B u on the second block
    pencil::PencilSpec pen;
    pen.F = CMat::Zero(ns, n);
    pen.G = CMat::Zero(ns, n);
    pen.F.block(0, l, ns, ns) = A;
    pen.F.rightCols(m) = B;
    pen.G.block(0, l, ns, ns) = CMat::Identity(ns, ns);
    pen.E = CMat::Identity(n, n);
    pencil::PencilBlock blk;
    blk.p1 = 0;
    blk.n1 = l;
    blk.p2 = ns;
    blk.n2 = ns + m;
    blk.E1 = CMat::Identity(l, l);
    blk.E2 = CMat::Zero(m, ns + m);
    blk.E2.rightCols(m) = CMat::Identity(m, m);
    pen.block = blk;
    pen.validate();
    CMat Zb = CMat::Zero(n, n);
    Zb.topRightCorner(l, ns + m) << C, D;
    Zb.bottomLeftCorner(ns + m, l) = Zb.topRightCorner(l, ns + m).adjoint();
    const CMat Ed = e_gram(pen);

    KypReport rep;
    rep.worst_norm = 0.0;
    const std::vector<HomPoint> pts = curve_grid(curve, grid);
    for (const HomPoint& pt : pts) {
        double nrm;
        if (pt.is_infinity()) {
            nrm = numkern::svd(D).sigma.size() > 0 ? numkern::svd(D).sigma(0) : 0.0;
        } else {
            const Complex lam = pt.lambda();
            const CMat R = lam * CMat::Identity(ns, ns) - A;
            const CMat H = D + C * R.fullPivLu().solve(B);
            numkern::Svd sv = numkern::svd(H);
            nrm = sv.sigma.size() > 0 ? sv.sigma(0) : 0.0;
            if (!std::isfinite(nrm) || nrm > 1e8)
                throw std::runtime_error("kyp_bound_check: spectrum of A meets the curve");
        }
        if (nrm > rep.worst_norm) {
            rep.worst_norm = nrm;
            rep.worst_point = pt;
        }
    }

    // feasibility SDP: min t s.t. Ed - Zb + adj_phi(P) + adj_psi(Q) + t I >= 0, Q >= 0
    ModelBuilder mb;
    const Eigen::Index t = mb.add_scalar(1.0, false);
    const Eigen::Index pblk = mb.add_herm(ns, CMat::Zero(ns, ns));
    Eigen::Index qblk = -1;
    if (curve.inequality_active) {
        qblk = mb.add_herm(ns, CMat::Zero(ns, ns));
        mb.add_psd(qblk);
    }
    std::vector<std::pair<Eigen::Index, CMat>> terms;
    terms.emplace_back(t, CMat(CMat::Identity(n, n)));
    for (Eigen::Index v = 0; v < ns * ns; ++v) {
        terms.emplace_back(mb.herm_var_offset(pblk) + v,
                           pencil_adjoint(pen, curve.phi, mb.herm_basis(pblk, v)));
        if (qblk >= 0)
            terms.emplace_back(mb.herm_var_offset(qblk) + v,
                               pencil_adjoint(pen, curve.psi, mb.herm_basis(qblk, v)));
    }
    mb.add_psd_general(Ed - Zb, terms);
    conic::ConicProblem prob = mb.build();
    conic::SolveSettings st;
    st.eps = 1e-8;
    conic::ConicSolution sol = conic::solve(prob, st);
    if (sol.status != conic::SolveStatus::Optimal)
        throw std::runtime_error("kyp_bound_check: feasibility program did not solve");
    rep.holds = sol.primal_obj <= 1e-6 * (1.0 + Ed.norm() + Zb.norm());
    return rep;
}

} // namespace pn::gauge
