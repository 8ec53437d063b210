#include "pencilnorm/apps.hpp"

#include <doctest.h>

#include <cmath>

using namespace pn;
using apps::HuberVariant;
using apps::LineSpectrumModel;
using apps::RecoveryResult;

namespace {

const Complex kJ(0.0, 1.0);

CVec steering(Eigen::Index n, double omega) {
    CVec a(n);
    for (Eigen::Index t = 0; t < n; ++t) a(t) = std::exp(kJ * (omega * double(t)));
    return a;
}

double huber_phi(double u, double delta) {
    return std::abs(u) <= delta ? u * u : delta * (2.0 * std::abs(u) - delta);
}

std::vector<Eigen::Index> all_indices(Eigen::Index n) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n), Eigen::Index(0));
    for (Eigen::Index i = 0; i < n; ++i) idx[std::size_t(i)] = i;
    return idx;
}

} // namespace

TEST_CASE("synth_signal is exact without noise and scales with sigma") {
    LineSpectrumModel model;
    model.omegas = RVec(2);
    model.omegas << 0.4, -1.1;
    model.coeffs = CVec(2);
    model.coeffs << Complex(1.5, 0.0), Complex(0.0, -0.7);

    CVec y = apps::synth_signal(model, 24, std::nullopt, 7);
    CVec ref = model.coeffs(0) * steering(24, 0.4) + model.coeffs(1) * steering(24, -1.1);
    CHECK((y - ref).norm() < 1e-14);

    model.sigma = 3.0;
    const Eigen::Index N = 20000;
    CVec yn = apps::synth_signal(model, N, std::nullopt, 11);
    CVec clean = CVec::Zero(N);
    for (Eigen::Index k = 0; k < 2; ++k)
        clean += model.coeffs(k) * steering(N, model.omegas(k));
    const double var = (yn - clean).squaredNorm() / double(N);
    CHECK(var == doctest::Approx(9.0).epsilon(0.05));
}

TEST_CASE("synth_signal corruption hits exactly count entries at fixed magnitude") {
    LineSpectrumModel model;
    model.omegas = RVec::Zero(1);
    model.coeffs = CVec::Ones(1);
    apps::Corruption corr{5, 10.0};
    CVec y = apps::synth_signal(model, 40, corr, 3);
    CVec clean = apps::synth_signal(model, 40, std::nullopt, 3);
    Eigen::Index hits = 0;
    for (Eigen::Index t = 0; t < 40; ++t) {
        const double d = std::abs(y(t) - clean(t));
        if (d > 1e-12) {
            CHECK(d == doctest::Approx(10.0).epsilon(1e-12));
            ++hits;
        }
    }
    CHECK(hits == 5);
}

TEST_CASE("sample_covariance of a pure exponential is the rank-one steering dyad") {
    const Eigen::Index n = 6, N = 30;
    const double omega = 0.9;
    CVec y = steering(N, omega);
    CMat R = apps::sample_covariance(y, n);
    CVec a = steering(n, omega);
    CHECK((R - a * a.adjoint()).norm() < 1e-12);
    CHECK(numkern::herm_residual(R) < 1e-14);
}

TEST_CASE("matrix_pencil recovers clean exponential frequencies") {
    LineSpectrumModel model;
    model.omegas = RVec(3);
    model.omegas << -1.3, 0.2, 1.9;
    model.coeffs = CVec(3);
    model.coeffs << Complex(1.0, 0.3), Complex(-0.5, 0.9), Complex(0.2, -1.1);
    CVec y = apps::synth_signal(model, 25, std::nullopt, 5);
    RVec est = apps::matrix_pencil(y, 12, 3);
    REQUIRE(est.size() == 3);
    RVec truth = model.omegas;
    std::sort(truth.data(), truth.data() + 3);
    CHECK((est - truth).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("match_atoms pairs greedily and wraps periodic coordinates") {
    RVec truth(2), est(3), mag(3);
    truth << 0.0, 3.1;
    est << 3.12, 0.01, -3.1;
    mag << 1.0, 2.0, 0.25;
    apps::MatchReport rep = apps::match_atoms(truth, est, mag, 0.1);
    CHECK(rep.pairing[0] == 1);
    CHECK(rep.pairing[1] == 0);
    CHECK(rep.errors(0) == doctest::Approx(0.01));
    CHECK(rep.unmatched_mass == doctest::Approx(0.25));
    CHECK(!rep.exact(1e-3, 1e-3));
    CHECK(rep.exact(0.05, 0.3));

    // -3.1 is 0.083 away from 3.1 around the circle
    apps::MatchReport wrap = apps::match_atoms(truth, est, mag, 0.1, 2.0 * M_PI);
    CHECK(wrap.pairing[1] == 0);
    apps::MatchReport wrap2 =
        apps::match_atoms(truth.tail(1), est.tail(1), mag.tail(1), 0.1, 2.0 * M_PI);
    CHECK(wrap2.pairing[0] == 0);
    CHECK(wrap2.errors(0) == doctest::Approx(2.0 * M_PI - 6.2).epsilon(1e-9));
}

TEST_CASE("covfit on a white covariance returns pure noise") {
    const Eigen::Index n = 6;
    CMat R = 1.3 * CMat::Identity(n, n);
    conic::SolveSettings st;
    st.eps = 1e-8;
    RecoveryResult res = apps::covfit(R, 1.0, st);
    REQUIRE(res.noise_estimate.has_value());
    CHECK(*res.noise_estimate == doctest::Approx(1.3).epsilon(1e-4));
    double mass = res.magnitudes.size() ? res.magnitudes.sum() : 0.0;
    CHECK(mass < 1e-4);
}

TEST_CASE("covfit recovers lines from an exact covariance") {
    const Eigen::Index n = 8;
    const double p1 = 2.0, p2 = 1.0, sig2 = 0.5;
    CVec a1 = steering(n, 0.7), a2 = steering(n, -1.4);
    CMat R = p1 * a1 * a1.adjoint() + p2 * a2 * a2.adjoint() + sig2 * CMat::Identity(n, n);
    conic::SolveSettings st;
    st.eps = 1e-8;
    RecoveryResult res = apps::covfit(R, 1.0, st);
    REQUIRE(res.noise_estimate.has_value());
    CHECK(*res.noise_estimate == doctest::Approx(sig2).epsilon(0.02));
    RVec truth(2);
    truth << -1.4, 0.7;
    apps::MatchReport rep =
        apps::match_atoms(truth, res.omegas, res.magnitudes, 1e-2, 2.0 * M_PI);
    CHECK(rep.exact(1e-3, 0.05));
    REQUIRE(rep.pairing[0] >= 0);
    REQUIRE(rep.pairing[1] >= 0);
    CHECK(res.magnitudes(rep.pairing[0]) == doctest::Approx(p2).epsilon(0.05));
    CHECK(res.magnitudes(rep.pairing[1]) == doctest::Approx(p1).epsilon(0.05));
}

TEST_CASE("linespec_huber variants agree on a clean single line") {
    const Eigen::Index n = 12;
    const double omega = 0.3, gamma = 10.0, delta = 1.0, omega_c = 0.8;
    CVec ym = Complex(1.5, 0.0) * steering(n, omega);
    conic::SolveSettings st;
    st.eps = 1e-9;
    RecoveryResult rv = apps::linespec_huber(ym, gamma, delta, omega_c, HuberVariant::Vector, 0, st);
    RecoveryResult rh =
        apps::linespec_huber(ym, gamma, delta, omega_c, HuberVariant::HankelMatrix, 0, st);

    REQUIRE(rv.omegas.size() == 1);
    CHECK(rv.omegas(0) == doctest::Approx(omega).epsilon(1e-2));
    CHECK(std::abs(rv.coeffs(0)) == doctest::Approx(1.5).epsilon(0.05));
    REQUIRE(rh.omegas.size() == 1);
    CHECK(rh.omegas(0) == doctest::Approx(omega).epsilon(1e-2));

    CHECK((rv.y - ym).norm() < 0.1); // mild shrinkage only
    CHECK((rv.y - rh.y).cwiseAbs().maxCoeff() < 1e-4);
    CHECK(rv.objective == doctest::Approx(rh.objective).epsilon(1e-5));

    // objective = atomic mass + Huber penalty of the residual
    double loss = 0.0;
    for (Eigen::Index t = 0; t < n; ++t) loss += gamma * huber_phi(std::abs(rv.y(t) - ym(t)), delta);
    CHECK(rv.objective == doctest::Approx(std::abs(rv.coeffs(0)) + loss).epsilon(1e-3));
}

TEST_CASE("linespec_huber maps the zero signal to zero") {
    CVec ym = CVec::Zero(10);
    RecoveryResult res = apps::linespec_huber(ym, 2.0, 1.0, 1.0, HuberVariant::Vector);
    CHECK(res.omegas.size() == 0);
    CHECK(res.y.norm() < 1e-6);
    CHECK(res.objective == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("doa_intervals single sector recovers a fully observed source") {
    const Eigen::Index n = 10;
    const double alpha = M_PI, theta = 0.4;
    const Complex c(1.2, -0.5);
    CVec b = c * steering(n, alpha * std::sin(theta));
    conic::SolveSettings st;
    st.eps = 1e-9;
    RecoveryResult res = apps::doa_intervals(b, CVec(0), all_indices(n), {}, {{0.1, 0.7}}, n,
                                             alpha, st);
    REQUIRE(res.thetas.size() == 1);
    CHECK(res.thetas(0) == doctest::Approx(theta).epsilon(1e-4));
    CHECK(std::abs(res.coeffs(0) - c) < 1e-3);
    CHECK(res.objective == doctest::Approx(std::abs(c)).epsilon(1e-4));
    CHECK((res.y - b).norm() < 1e-4);
}

TEST_CASE("doa_intervals with zero measurements returns zero") {
    const Eigen::Index n = 8;
    CVec b = CVec::Zero(n);
    RecoveryResult res =
        apps::doa_intervals(b, CVec(0), all_indices(n), {}, {{-0.5, 0.5}}, n, M_PI);
    CHECK(res.thetas.size() == 0);
    CHECK(res.objective == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("doa_intervals three sectors separate fully observed sources") {
    const Eigen::Index n = 12;
    const double alpha = M_PI;
    RVec truth(3);
    truth << -0.9, 0.1, 0.8; // one per sector
    CVec c(3);
    c << Complex(1.0, 0.4), Complex(-0.8, 0.6), Complex(0.5, -1.0);
    CVec y1 = c(0) * steering(n, alpha * std::sin(truth(0)));
    CVec y2 = c(1) * steering(n, alpha * std::sin(truth(1)));
    CVec y3 = c(2) * steering(n, alpha * std::sin(truth(2)));
    std::vector<apps::Sector> sectors{
        {-M_PI / 2.0, -M_PI / 6.0}, {-M_PI / 6.0, M_PI / 6.0}, {M_PI / 6.0, M_PI / 2.0}};
    conic::SolveSettings st;
    st.eps = 1e-9;
    RecoveryResult res =
        apps::doa_intervals(y1 + y2, y2 + y3, all_indices(n), all_indices(n), sectors, n, alpha, st);
    apps::MatchReport rep = apps::match_atoms(truth, res.thetas, res.magnitudes, 1e-2);
    CHECK(rep.exact(2e-3, 1e-2));
    for (Eigen::Index k = 0; k < 3; ++k) {
        REQUIRE(rep.pairing[std::size_t(k)] >= 0);
        CHECK(res.magnitudes(rep.pairing[std::size_t(k)]) ==
              doctest::Approx(std::abs(c(k))).epsilon(0.02));
    }
}

TEST_CASE("doa_mmv handles zero data and matches the single-snapshot program") {
    const Eigen::Index n = 10;
    const double alpha = 2.0, theta_c = M_PI / 4.0;

    RecoveryResult z = apps::doa_mmv(CMat::Zero(n, 2), all_indices(n), theta_c, alpha, n);
    CHECK(z.omegas.size() == 0);
    CHECK(z.objective == doctest::Approx(0.0).epsilon(1e-6));

    const double theta = 0.3;
    const Complex c(0.9, 0.7);
    CVec b = c * steering(n, alpha * std::sin(theta));
    conic::SolveSettings st;
    st.eps = 1e-9;
    RecoveryResult mmv = apps::doa_mmv(b, all_indices(n), theta_c, alpha, n, st);
    RecoveryResult itv = apps::doa_intervals(b, CVec(0), all_indices(n), {},
                                             {{-theta_c, theta_c}}, n, alpha, st);
    CHECK(mmv.objective == doctest::Approx(itv.objective).epsilon(1e-5));
    REQUIRE(mmv.thetas.size() == 1);
    CHECK(mmv.thetas(0) == doctest::Approx(theta).epsilon(1e-4));
    CHECK(mmv.magnitudes(0) == doctest::Approx(std::abs(c)).epsilon(1e-3));
}

TEST_CASE("doa_mmv recovers multiple snapshots exactly under full observation") {
    const Eigen::Index n = 10, m = 3;
    const double alpha = 2.0, theta_c = M_PI / 4.0;
    RVec truth(2);
    truth << -0.5, 0.35;
    CMat Cm(2, m);
    Cm << Complex(1.0, 0.2), Complex(-0.3, 0.8), Complex(0.5, 0.0),
          Complex(0.0, -1.1), Complex(0.7, 0.4), Complex(-0.6, 0.3);
    CMat B = CMat::Zero(n, m);
    for (Eigen::Index k = 0; k < 2; ++k)
        B += steering(n, alpha * std::sin(truth(k))) * Cm.row(k);
    conic::SolveSettings st;
    st.eps = 1e-9;
    RecoveryResult res = apps::doa_mmv(B, all_indices(n), theta_c, alpha, n, st);
    apps::MatchReport rep = apps::match_atoms(truth, res.thetas, res.magnitudes, 1e-2);
    CHECK(rep.exact(1e-3, 1e-2));
    for (Eigen::Index k = 0; k < 2; ++k) {
        REQUIRE(rep.pairing[std::size_t(k)] >= 0);
        CHECK(res.magnitudes(rep.pairing[std::size_t(k)]) ==
              doctest::Approx(Cm.row(k).norm() / std::sqrt(double(m))).epsilon(1e-3));
    }
}

TEST_CASE("rate_truth_angles is sorted and well separated") {
    RVec a = apps::rate_truth_angles(7);
    REQUIRE(a.size() == 7);
    for (Eigen::Index k = 0; k < 7; ++k) CHECK(std::abs(a(k)) < M_PI / 2.0);
    for (Eigen::Index k = 1; k < 7; ++k) CHECK(a(k) - a(k - 1) > 0.02);
    // within each sector the frequency separation supports recovery at the
    // default array size; across sector boundaries the pairs are deliberately
    // closer than the unconstrained resolution limit
    auto sector_of = [](double th) {
        return th <= -M_PI / 6.0 ? 0 : (th < M_PI / 6.0 ? 1 : 2);
    };
    for (Eigen::Index k = 1; k < 7; ++k) {
        const double gap = M_PI * (std::sin(a(k)) - std::sin(a(k - 1)));
        if (sector_of(a(k)) == sector_of(a(k - 1)))
            CHECK(gap > 4.0 * 2.0 * M_PI / 50.0);
        else
            CHECK(gap < 1.0 * 2.0 * M_PI / 50.0);
    }
    RVec b = apps::rate_truth_angles(9);
    for (Eigen::Index k = 1; k < 9; ++k) CHECK(b(k) > b(k - 1));
}

TEST_CASE("recovery_rate is one under full observation") {
    apps::RateConfig cfg;
    cfg.n = 12;
    cfg.sources = 2;
    cfg.measurement_counts = {24};
    cfg.trials = 2;
    cfg.with_intervals = true;
    cfg.solver_eps = 1e-8;
    std::vector<apps::RatePoint> pts = apps::recovery_rate(cfg, 17);
    REQUIRE(pts.size() == 1);
    CHECK(pts[0].count == 24);
    CHECK(pts[0].rate == doctest::Approx(1.0));
}
