#include "pencilnorm/apps.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace pn::apps {

using gauge::GaugeProgram;
using gauge::LossSpec;
using pencil::AtomSet;
using region::HomPoint;

namespace {

const Complex kJ(0.0, 1.0);

CVec steering(Eigen::Index n, double omega) {
    CVec a(n);
    for (Eigen::Index t = 0; t < n; ++t) a(t) = std::exp(kJ * (omega * double(t)));
    return a;
}

region::CurveSpec arc_curve(double center, double half) {
    if (half >= M_PI - 1e-12) return region::unit_circle();
    return region::unit_circle_arc(center, half);
}

void require_solved(const conic::ConicSolution& sol, const char* who) {
    if (sol.status == conic::SolveStatus::Infeasible)
        throw std::runtime_error(std::string(who) + ": measurement equations infeasible");
    if (sol.status != conic::SolveStatus::Optimal)
        throw std::runtime_error(std::string(who) + ": solver did not converge");
}

struct Extracted {
    RVec omegas;
    RVec weights;
};

// Frequencies of the atoms of a Toeplitz PSD block, heaviest first. The
// decomposition always runs over the full circle (the well-conditioned Schur
// path); when the block was solved under an arc constraint its support already
// lies inside the arc up to solver noise, so recovered frequencies are snapped
// into [center - half, center + half] afterwards.
Extracted toeplitz_frequencies(const CMat& V, double center, double half, double tol) {
    const Eigen::Index n = V.rows();
    Extracted out;
    const double scale = V.norm();
    if (scale < 1e-10) {
        out.omegas = RVec(0);
        out.weights = RVec(0);
        return out;
    }
    pencil::PencilSpec pen = pencil::toeplitz(n);
    pen.E = CMat::Identity(n, n) / std::sqrt(double(n));
    AtomSet aset(pen, region::unit_circle());
    decomp::AtomicDecomposition dec = decomp::decompose_psd(V, aset, tol);
    std::vector<Eigen::Index> keep;
    const double cut = 1e-6 * std::max(1.0, dec.weights.size() ? dec.weights.sum() : 0.0);
    for (Eigen::Index k = 0; k < dec.weights.size(); ++k)
        if (dec.weights(k) > cut) keep.push_back(k);
    std::sort(keep.begin(), keep.end(),
              [&](Eigen::Index a, Eigen::Index b) { return dec.weights(a) > dec.weights(b); });
    out.omegas.resize(Eigen::Index(keep.size()));
    out.weights.resize(Eigen::Index(keep.size()));
    for (std::size_t i = 0; i < keep.size(); ++i) {
        double w = std::arg(dec.points[std::size_t(keep[i])].lambda());
        if (half < M_PI - 1e-12) {
            const double d = std::remainder(w - center, 2.0 * M_PI);
            w = std::remainder(center + std::clamp(d, -half, half), 2.0 * M_PI);
        }
        out.omegas(Eigen::Index(i)) = w;
        out.weights(Eigen::Index(i)) = dec.weights(keep[i]);
    }
    return out;
}

// Least-squares amplitudes of y over steering vectors at the given frequencies.
CVec ls_amplitudes(const CVec& y, const RVec& omegas) {
    const Eigen::Index r = omegas.size();
    if (r == 0) return CVec(0);
    CMat A(y.size(), r);
    for (Eigen::Index k = 0; k < r; ++k) A.col(k) = steering(y.size(), omegas(k));
    return A.colPivHouseholderQr().solve(y);
}

std::mt19937_64 trial_rng(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    std::seed_seq seq{std::uint64_t(seed), std::uint64_t(a ^ 0x9e3779b97f4a7c15ull),
                      std::uint64_t(b + 0x165667b19e3779f9ull)};
    return std::mt19937_64(seq);
}

std::vector<Eigen::Index> sample_indices(std::mt19937_64& rng, Eigen::Index n, Eigen::Index k) {
    std::vector<Eigen::Index> all(static_cast<std::size_t>(n), Eigen::Index(0));
    std::iota(all.begin(), all.end(), Eigen::Index(0));
    std::shuffle(all.begin(), all.end(), rng);
    all.resize(std::size_t(k));
    std::sort(all.begin(), all.end());
    return all;
}

} // namespace

// ---------------------------------------------------------------------------

bool MatchReport::exact(double tol_angle, double tol_mass) const {
    for (std::size_t i = 0; i < pairing.size(); ++i)
        if (pairing[i] < 0 || errors(Eigen::Index(i)) > tol_angle) return false;
    return unmatched_mass <= tol_mass;
}

MatchReport match_atoms(const RVec& truth, const RVec& est, const RVec& est_mag, double gate,
                        double period) {
    if (est.size() != est_mag.size())
        throw std::invalid_argument("match_atoms: estimate/magnitude size mismatch");
    auto dist = [&](double a, double b) {
        double d = std::abs(a - b);
        if (period > 0.0) {
            d = std::fmod(d, period);
            d = std::min(d, period - d);
        }
        return d;
    };
    MatchReport rep;
    rep.pairing.assign(std::size_t(truth.size()), -1);
    rep.errors = RVec::Constant(truth.size(), std::numeric_limits<double>::infinity());
    std::vector<bool> used(std::size_t(est.size()), false);
    for (Eigen::Index round = 0; round < truth.size(); ++round) {
        double best = gate;
        Eigen::Index bi = -1, bj = -1;
        for (Eigen::Index i = 0; i < truth.size(); ++i) {
            if (rep.pairing[std::size_t(i)] >= 0) continue;
            for (Eigen::Index j = 0; j < est.size(); ++j) {
                if (used[std::size_t(j)]) continue;
                const double d = dist(truth(i), est(j));
                if (d <= best) {
                    best = d;
                    bi = i;
                    bj = j;
                }
            }
        }
        if (bi < 0) break;
        rep.pairing[std::size_t(bi)] = bj;
        rep.errors(bi) = best;
        used[std::size_t(bj)] = true;
    }
    for (Eigen::Index j = 0; j < est.size(); ++j)
        if (!used[std::size_t(j)]) rep.unmatched_mass += est_mag(j);
    return rep;
}

// ---------------------------------------------------------------------------

CVec synth_signal(const LineSpectrumModel& model, Eigen::Index N,
                  const std::optional<Corruption>& corruption, std::uint64_t seed) {
    if (N < 1) throw std::invalid_argument("synth_signal: need N >= 1");
    if (model.omegas.size() != model.coeffs.size())
        throw std::invalid_argument("synth_signal: omegas/coeffs size mismatch");
    if (corruption && corruption->count > N)
        throw std::invalid_argument("synth_signal: corruption count exceeds N");
    CVec y = CVec::Zero(N);
    for (Eigen::Index k = 0; k < model.omegas.size(); ++k)
        y += model.coeffs(k) * steering(N, model.omegas(k));
    std::mt19937_64 rng(seed);
    if (model.sigma > 0.0) {
        std::normal_distribution<double> g(0.0, model.sigma / std::sqrt(2.0));
        for (Eigen::Index t = 0; t < N; ++t) y(t) += Complex(g(rng), g(rng));
    }
    if (corruption && corruption->count > 0) {
        std::vector<Eigen::Index> pos = sample_indices(rng, N, corruption->count);
        std::uniform_real_distribution<double> ph(0.0, 2.0 * M_PI);
        for (Eigen::Index p : pos) y(p) += corruption->magnitude * std::exp(kJ * ph(rng));
    }
    return y;
}

CMat sample_covariance(const CVec& y, Eigen::Index n) {
    const Eigen::Index N = y.size();
    if (n < 1 || N < n) throw std::invalid_argument("sample_covariance: signal shorter than n");
    const Eigen::Index m = N - n + 1;
    CMat H(n, m);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index jj = 0; jj < m; ++jj) H(i, jj) = y(i + jj);
    CMat R = (H * H.adjoint()) / double(m);
    return 0.5 * (R + CMat(R.adjoint()));
}

// ---------------------------------------------------------------------------

RecoveryResult covfit(const CMat& Rm, double gamma, const conic::SolveSettings& settings) {
    const Eigen::Index n = Rm.rows();
    if (Rm.cols() != n) throw std::invalid_argument("covfit: R_m must be square");
    if (numkern::herm_residual(Rm) > 1e-8 * (1.0 + Rm.norm()))
        throw std::invalid_argument("covfit: R_m must be Hermitian");
    pencil::PencilSpec pen = pencil::toeplitz(n);
    pen.E = CMat::Identity(n, n) / std::sqrt(double(n));
    AtomSet aset(pen, region::unit_circle());
    GaugeProgram prog =
        gauge::build_symmetric(aset, LossSpec::spectral_norm_epigraph(Rm, gamma), true);
    conic::ConicSolution sol = conic::solve(prog.lowered, settings);
    require_solved(sol, "covfit");
    const CMat X = prog.X(sol);
    RecoveryResult res;
    res.objective = sol.primal_obj;
    res.noise_estimate = prog.noise_t(sol);
    decomp::AtomicDecomposition dec = decomp::caratheodory_toeplitz(X, 1e-4);
    std::vector<Eigen::Index> order(std::size_t(dec.weights.size()));
    std::iota(order.begin(), order.end(), Eigen::Index(0));
    std::sort(order.begin(), order.end(),
              [&](Eigen::Index a, Eigen::Index b) { return dec.weights(a) > dec.weights(b); });
    res.omegas.resize(Eigen::Index(order.size()));
    res.magnitudes.resize(Eigen::Index(order.size()));
    for (std::size_t i = 0; i < order.size(); ++i) {
        res.omegas(Eigen::Index(i)) = std::arg(dec.points[std::size_t(order[i])].lambda());
        res.magnitudes(Eigen::Index(i)) = dec.weights(order[i]) / double(n); // per-line power
    }
    try {
        res.certificate = gauge::extract_certificate(prog, sol);
    } catch (const std::exception&) {
        res.certificate.reset();
    }
    return res;
}

// ---------------------------------------------------------------------------

RecoveryResult linespec_huber(const CVec& ym, double gamma, double delta, double omega_c,
                              HuberVariant variant, Eigen::Index n1,
                              const conic::SolveSettings& settings) {
    const Eigen::Index n = ym.size();
    if (n < 3) throw std::invalid_argument("linespec_huber: signal too short");
    if (!(std::abs(omega_c) <= M_PI)) throw std::invalid_argument("linespec_huber: |omega_c| > pi");
    const region::CurveSpec curve = arc_curve(0.0, omega_c);
    RecoveryResult res;
    CMat V;
    Eigen::Index nv = 0;
    if (variant == HuberVariant::Vector) {
        pencil::PencilSpec pen = pencil::toeplitz_with_free_block(n, 1);
        pen.block->E1 = CMat::Identity(n, n) / std::sqrt(double(n));
        AtomSet aset(pen, curve);
        std::vector<std::pair<Eigen::Index, Eigen::Index>> idx;
        for (Eigen::Index t = 0; t < n; ++t) idx.emplace_back(t, n);
        GaugeProgram prog =
            gauge::build_nonsymmetric(aset, LossSpec::huber(idx, ym, gamma, delta));
        conic::ConicSolution sol = conic::solve(prog.lowered, settings);
        require_solved(sol, "linespec_huber");
        res.objective = sol.primal_obj;
        res.y = prog.Yblk(sol).col(0);
        V = prog.V(sol);
        nv = n;
        try {
            res.certificate = gauge::extract_certificate(prog, sol);
        } catch (const std::exception&) {
        }
    } else {
        if (n1 <= 0) n1 = (n + 1) / 2;
        const Eigen::Index n2 = n + 1 - n1;
        if (n1 < 2 || n2 < 2 || n1 + n2 - 1 != n)
            throw std::invalid_argument("linespec_huber: invalid Hankel split");
        pencil::PencilSpec pen = pencil::hankel_block(n1, n2);
        pen.block->E1 = CMat::Identity(n1, n1) / std::sqrt(double(n1));
        pen.block->E2 = CMat::Identity(n2, n2) / std::sqrt(double(n2));
        AtomSet aset(pen, curve);
        // representative positions of y_t: first row then last column of Y
        std::vector<std::pair<Eigen::Index, Eigen::Index>> idx;
        for (Eigen::Index t = 0; t < n; ++t) {
            if (t < n2)
                idx.emplace_back(0, n1 + t);
            else
                idx.emplace_back(t - n2 + 1, n1 + n2 - 1);
        }
        GaugeProgram prog =
            gauge::build_nonsymmetric(aset, LossSpec::huber(idx, ym, gamma, delta));
        conic::ConicSolution sol = conic::solve(prog.lowered, settings);
        require_solved(sol, "linespec_huber");
        res.objective = sol.primal_obj;
        const CMat Y = prog.Yblk(sol);
        res.y.resize(n);
        for (Eigen::Index t = 0; t < n; ++t)
            res.y(t) = t < n2 ? Y(0, t) : Y(t - n2 + 1, n2 - 1);
        V = prog.V(sol);
        nv = n1;
        try {
            res.certificate = gauge::extract_certificate(prog, sol);
        } catch (const std::exception&) {
        }
    }
    Extracted ext = toeplitz_frequencies(V, 0.0, std::abs(omega_c), 1e-4);
    res.omegas = ext.omegas;
    res.coeffs = ls_amplitudes(res.y, ext.omegas);
    res.magnitudes = res.coeffs.cwiseAbs();
    (void)nv;
    return res;
}

// ---------------------------------------------------------------------------

RecoveryResult doa_intervals(const CVec& b1, const CVec& b2,
                             const std::vector<Eigen::Index>& I1,
                             const std::vector<Eigen::Index>& I2,
                             const std::vector<Sector>& sectors, Eigen::Index n, double alpha,
                             const conic::SolveSettings& settings) {
    const std::size_t s = sectors.size();
    if (s != 1 && s != 3) throw std::invalid_argument("doa_intervals: need 1 or 3 sectors");
    if (Eigen::Index(I1.size()) != b1.size() || Eigen::Index(I2.size()) != b2.size())
        throw std::invalid_argument("doa_intervals: index/measurement size mismatch");
    if (s == 1 && !I2.empty())
        throw std::invalid_argument("doa_intervals: single-sector form takes I2 empty");
    for (Eigen::Index i : I1)
        if (i < 0 || i >= n) throw std::invalid_argument("doa_intervals: index out of range");
    for (Eigen::Index i : I2)
        if (i < 0 || i >= n) throw std::invalid_argument("doa_intervals: index out of range");

    gauge::ModelBuilder mb;
    std::vector<Eigen::Index> blks;
    std::vector<region::CurveSpec> curves;
    std::vector<double> centers, halves;
    CMat C = CMat::Zero(n + 1, n + 1);
    C.topLeftCorner(n, n) = CMat::Identity(n, n) / (2.0 * double(n));
    C(n, n) = 0.5;
    for (const Sector& sec : sectors) {
        const double wlo = alpha * std::sin(sec.lo), whi = alpha * std::sin(sec.hi);
        if (!(whi > wlo)) throw std::invalid_argument("doa_intervals: empty sector");
        centers.push_back(0.5 * (wlo + whi));
        halves.push_back(0.5 * (whi - wlo));
        curves.push_back(arc_curve(0.5 * (wlo + whi), 0.5 * (whi - wlo)));
        pencil::PencilSpec pen = pencil::toeplitz_with_free_block(n, 1);
        pen.block->E1 = CMat::Identity(n, n) / std::sqrt(double(n));
        const Eigen::Index blk = mb.add_herm(n + 1, C);
        mb.add_psd(blk);
        mb.add_pencil(blk, pen, curves.back());
        blks.push_back(blk);
    }
    for (std::size_t pos = 0; pos < I1.size(); ++pos) {
        std::vector<gauge::ModelBuilder::EntryTerm> terms{{blks[0], I1[pos], n, Complex(1.0)}};
        if (s == 3) terms.push_back({blks[1], I1[pos], n, Complex(1.0)});
        mb.add_pin(terms, {}, b1(Eigen::Index(pos)));
    }
    if (s == 3)
        for (std::size_t pos = 0; pos < I2.size(); ++pos)
            mb.add_pin({{blks[1], I2[pos], n, Complex(1.0)}, {blks[2], I2[pos], n, Complex(1.0)}},
                       {}, b2(Eigen::Index(pos)));
    conic::ConicProblem prob = mb.build();
    conic::ConicSolution sol = conic::solve(prob, settings);
    require_solved(sol, "doa_intervals");

    RecoveryResult res;
    res.objective = sol.primal_obj;
    res.y = CVec::Zero(n);
    std::vector<double> omegas, thetas, mags;
    std::vector<Complex> coeffs;
    for (std::size_t j = 0; j < s; ++j) {
        const CMat Xj = mb.herm_value(blks[j], sol.x);
        const CVec yj = Xj.col(n).head(n);
        res.y += yj;
        Extracted ext = toeplitz_frequencies(Xj.topLeftCorner(n, n), centers[j], halves[j], 1e-4);
        const CVec cj = ls_amplitudes(yj, ext.omegas);
        for (Eigen::Index k = 0; k < ext.omegas.size(); ++k) {
            omegas.push_back(ext.omegas(k));
            const double sn = std::clamp(ext.omegas(k) / alpha, -1.0, 1.0);
            thetas.push_back(std::asin(sn));
            coeffs.push_back(cj(k));
            mags.push_back(std::abs(cj(k)));
            res.sector.push_back(Eigen::Index(j));
        }
    }
    res.omegas = Eigen::Map<RVec>(omegas.data(), Eigen::Index(omegas.size()));
    res.thetas = Eigen::Map<RVec>(thetas.data(), Eigen::Index(thetas.size()));
    res.magnitudes = Eigen::Map<RVec>(mags.data(), Eigen::Index(mags.size()));
    res.coeffs = Eigen::Map<CVec>(coeffs.data(), Eigen::Index(coeffs.size()));
    return res;
}

// ---------------------------------------------------------------------------

RecoveryResult doa_mmv(const CMat& B, const std::vector<Eigen::Index>& I, double theta_c,
                       double alpha, Eigen::Index n, const conic::SolveSettings& settings) {
    const Eigen::Index m = B.cols();
    if (Eigen::Index(I.size()) != B.rows())
        throw std::invalid_argument("doa_mmv: index/measurement size mismatch");
    if (!(std::abs(theta_c) < M_PI / 2.0)) throw std::invalid_argument("doa_mmv: |theta_c| >= pi/2");
    for (Eigen::Index i : I)
        if (i < 0 || i >= n) throw std::invalid_argument("doa_mmv: index out of range");
    const double omega_c = alpha * std::sin(theta_c);
    const region::CurveSpec curve = arc_curve(0.0, omega_c);
    pencil::PencilSpec pen = pencil::toeplitz_with_free_block(n, m);
    pen.block->E1 = CMat::Identity(n, n) / std::sqrt(double(n));
    AtomSet aset(pen, curve);
    std::vector<std::pair<Eigen::Index, Eigen::Index>> idx;
    CVec vals(Eigen::Index(I.size()) * m);
    Eigen::Index k = 0;
    for (Eigen::Index jj = 0; jj < m; ++jj)
        for (std::size_t pos = 0; pos < I.size(); ++pos) {
            idx.emplace_back(I[pos], n + jj);
            vals(k++) = B(Eigen::Index(pos), jj);
        }
    GaugeProgram prog =
        gauge::build_nonsymmetric(aset, LossSpec::equality_on_index_set(idx, vals));
    conic::ConicSolution sol = conic::solve(prog.lowered, settings);
    require_solved(sol, "doa_mmv");

    RecoveryResult res;
    res.objective = sol.primal_obj;
    const CMat Y = prog.Yblk(sol);
    Extracted ext = toeplitz_frequencies(prog.V(sol), 0.0, omega_c, 1e-4);
    const Eigen::Index r = ext.omegas.size();
    res.omegas = ext.omegas;
    res.thetas.resize(r);
    res.magnitudes.resize(r);
    if (r > 0) {
        CMat A(n, r);
        for (Eigen::Index kk = 0; kk < r; ++kk) A.col(kk) = steering(n, ext.omegas(kk));
        const CMat Crows = A.colPivHouseholderQr().solve(Y); // row k = c_k^H
        for (Eigen::Index kk = 0; kk < r; ++kk) {
            res.thetas(kk) = std::asin(std::clamp(ext.omegas(kk) / alpha, -1.0, 1.0));
            res.magnitudes(kk) = Crows.row(kk).norm() / std::sqrt(double(m));
        }
    }
    try {
        res.certificate = gauge::extract_certificate(prog, sol);
    } catch (const std::exception&) {
    }
    return res;
}

// ---------------------------------------------------------------------------

RVec rate_truth_angles(Eigen::Index sources) {
    // paper-like layout: two sources in each outer sector, three in the middle.
    // The pairs straddling the sector boundaries are separated by under one
    // DFT bin at n = 50 (unresolvable without side information) while every
    // within-sector pair stays well separated, so sector intervals carry real
    // information.
    const double base[7] = {-1.05, -0.545, -0.505, 0.02, 0.508, 0.548, 1.02};
    RVec out(sources);
    for (Eigen::Index k = 0; k < sources; ++k) {
        const double a = base[k % 7];
        // shifted copies stay inside the same sector for k >= 7
        out(k) = a + 0.04 * double(k / 7);
    }
    std::sort(out.data(), out.data() + out.size());
    return out;
}

std::vector<RatePoint> recovery_rate(const RateConfig& config, std::uint64_t seed) {
    if (config.trials < 1) throw std::invalid_argument("recovery_rate: need trials >= 1");
    const Eigen::Index n = config.n;
    const RVec truth = rate_truth_angles(config.sources);
    const Sector real_sectors[3] = {{-M_PI / 2.0, -M_PI / 6.0},
                                    {-M_PI / 6.0, M_PI / 6.0},
                                    {M_PI / 6.0, M_PI / 2.0}};
    auto sector_of = [&](double th) {
        if (th <= -M_PI / 6.0) return 0;
        if (th < M_PI / 6.0) return 1;
        return 2;
    };
    std::vector<Sector> sectors(3);
    for (int j = 0; j < 3; ++j)
        sectors[std::size_t(j)] =
            config.with_intervals ? real_sectors[j] : Sector{-M_PI / 2.0, M_PI / 2.0};

    std::vector<RatePoint> table;
    for (Eigen::Index count : config.measurement_counts) {
        Eigen::Index ok = 0;
        for (Eigen::Index trial = 0; trial < config.trials; ++trial) {
            std::mt19937_64 rng = trial_rng(seed, std::uint64_t(count), std::uint64_t(trial));
            std::uniform_real_distribution<double> mag(0.5, 2.0), ph(0.0, 2.0 * M_PI);
            CVec x(truth.size());
            for (Eigen::Index k = 0; k < truth.size(); ++k)
                x(k) = mag(rng) * std::exp(kJ * ph(rng));
            CVec ycomp[3] = {CVec::Zero(n), CVec::Zero(n), CVec::Zero(n)};
            for (Eigen::Index k = 0; k < truth.size(); ++k)
                ycomp[sector_of(truth(k))] +=
                    x(k) * steering(n, config.alpha * std::sin(truth(k)));
            const Eigen::Index half = std::max<Eigen::Index>(1, count / 2);
            std::vector<Eigen::Index> I1 = sample_indices(rng, n, half);
            std::vector<Eigen::Index> I2 = sample_indices(rng, n, count - half);
            CVec b1(Eigen::Index(I1.size())), b2(Eigen::Index(I2.size()));
            for (std::size_t p = 0; p < I1.size(); ++p)
                b1(Eigen::Index(p)) = ycomp[0](I1[p]) + ycomp[1](I1[p]);
            for (std::size_t p = 0; p < I2.size(); ++p)
                b2(Eigen::Index(p)) = ycomp[1](I2[p]) + ycomp[2](I2[p]);
            bool success = false;
            try {
                conic::SolveSettings st;
                st.eps = config.solver_eps;
                st.max_iter = config.solver_max_iter;
                RecoveryResult res =
                    doa_intervals(b1, b2, I1, I2, sectors, n, config.alpha, st);
                // merge duplicate angles across sectors before scoring
                std::vector<double> th, ms;
                for (Eigen::Index kk = 0; kk < res.thetas.size(); ++kk) {
                    bool merged = false;
                    for (std::size_t q = 0; q < th.size(); ++q)
                        if (std::abs(th[q] - res.thetas(kk)) < 1e-3) {
                            ms[q] += res.magnitudes(kk);
                            merged = true;
                            break;
                        }
                    if (!merged) {
                        th.push_back(res.thetas(kk));
                        ms.push_back(res.magnitudes(kk));
                    }
                }
                RVec est = Eigen::Map<RVec>(th.data(), Eigen::Index(th.size()));
                RVec estm = Eigen::Map<RVec>(ms.data(), Eigen::Index(ms.size()));
                MatchReport rep = match_atoms(truth, est, estm, 1e-3);
                success = rep.exact(1e-3, 1e-3);
            } catch (const std::exception&) {
                success = false;
            }
            if (success) ++ok;
        }
        table.push_back({count, double(ok) / double(config.trials)});
    }
    return table;
}

// ---------------------------------------------------------------------------

RVec matrix_pencil(const CVec& y, Eigen::Index n1, Eigen::Index r) {
    const Eigen::Index N = y.size();
    if (n1 < 2 || N < n1 + 1) throw std::invalid_argument("matrix_pencil: bad Hankel size");
    const Eigen::Index n2 = N - n1 + 1;
    if (r < 1 || r > std::min(n1, n2 - 1))
        throw std::invalid_argument("matrix_pencil: bad model order");
    CMat H(n1, n2);
    for (Eigen::Index i = 0; i < n1; ++i)
        for (Eigen::Index jj = 0; jj < n2; ++jj) H(i, jj) = y(i + jj);
    const CMat H1 = H.leftCols(n2 - 1), H2 = H.rightCols(n2 - 1);
    numkern::Svd sv = numkern::svd(H1);
    const CMat Ur = sv.P.leftCols(r), Vr = sv.Q.leftCols(r);
    CMat M = Ur.adjoint() * H2 * Vr;
    for (Eigen::Index k = 0; k < r; ++k) M.row(k) /= std::max(sv.sigma(k), 1e-300);
    Eigen::ComplexEigenSolver<CMat> es(M);
    RVec out(r);
    for (Eigen::Index k = 0; k < r; ++k) out(k) = std::arg(es.eigenvalues()(k));
    std::sort(out.data(), out.data() + r);
    return out;
}

} // namespace pn::apps
