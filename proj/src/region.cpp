#include "pencilnorm/region.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace pn::region {

namespace {
const Complex J(0.0, 1.0);
}

HForm2 phi_unit_circle() {
    HForm2 m;
    m << 1.0, 0.0, 0.0, -1.0;
    return m;
}

HForm2 phi_imag_axis() {
    HForm2 m;
    m << 0.0, 1.0, 1.0, 0.0;
    return m;
}

HForm2 phi_real_axis() {
    HForm2 m;
    m << 0.0, J, -J, 0.0;
    return m;
}

HomPoint::HomPoint(Complex mu_, Complex nu_) {
    double nrm = std::sqrt(std::norm(mu_) + std::norm(nu_));
    if (!(nrm > 0.0) || !std::isfinite(nrm))
        throw std::invalid_argument("HomPoint: (mu, nu) must be nonzero and finite");
    mu = mu_ / nrm;
    nu = nu_ / nrm;
    Complex lead = (std::abs(mu) > 1e-14) ? mu : nu;
    Complex phase = lead / std::abs(lead);
    mu /= phase;
    nu /= phase;
}

double quad_form(const HForm2& theta, const HomPoint& p) {
    Eigen::Vector2cd v(p.mu, p.nu);
    return (v.adjoint() * (0.5 * (theta + theta.adjoint())) * v)(0).real();
}

CurveSpec::CurveSpec(const HForm2& phi_, const HForm2& psi_) {
    phi = 0.5 * (phi_ + phi_.adjoint());
    psi = 0.5 * (psi_ + psi_.adjoint());
    double det = (phi(0, 0).real() * phi(1, 1).real() - std::norm(phi(0, 1)));
    if (!(det < -1e-12)) throw std::invalid_argument("CurveSpec: det(Phi) must be negative");
    inequality_active = psi.norm() > 1e-14 * (1.0 + phi.norm());
    if (inequality_active && classify(*this) == CurveClass::Empty)
        throw std::invalid_argument("CurveSpec: constraint set is empty");
}

bool contains(const CurveSpec& c, const HomPoint& p, double tol) {
    double sphi = 1.0 + c.phi.norm();
    if (std::abs(quad_form(c.phi, p)) > tol * sphi) return false;
    if (!c.inequality_active) return true;
    return quad_form(c.psi, p) <= tol * (1.0 + c.psi.norm());
}

CurveSpec make_curve(CurveKind kind, double a, double b) {
    HForm2 phi, psi;
    psi.setZero();
    switch (kind) {
    case CurveKind::UnitCircle:
        phi = phi_unit_circle();
        break;
    case CurveKind::UnitCircleArc: // |omega - a| <= b
        if (b < 0.0 || b > M_PI) throw std::invalid_argument("unit_circle_arc: need 0 <= b <= pi");
        phi = phi_unit_circle();
        psi << 0.0, -std::exp(J * a), -std::exp(-J * a), 2.0 * std::cos(b);
        break;
    case CurveKind::CircleComplementArc: // omega in [a, 2pi - a]
        if (a < 0.0 || a > M_PI)
            throw std::invalid_argument("circle_complement_arc: need 0 <= a <= pi");
        phi = phi_unit_circle();
        psi << 0.0, 1.0, 1.0, -2.0 * std::cos(a);
        break;
    case CurveKind::ImagAxis:
        phi = phi_imag_axis();
        break;
    case CurveKind::ImagInterval: // Im(lambda) in [a, b]
        if (a > b) throw std::invalid_argument("imag_interval: need a <= b");
        phi = phi_imag_axis();
        psi << 2.0, -J * (a + b), J * (a + b), 2.0 * a * b;
        break;
    case CurveKind::ImagComplement: // |Im(lambda)| >= a
        if (a < 0.0) throw std::invalid_argument("imag_complement: need a >= 0");
        phi = phi_imag_axis();
        psi << -1.0, 0.0, 0.0, a * a;
        break;
    case CurveKind::RealAxis:
        phi = phi_real_axis();
        break;
    case CurveKind::RealInterval: // lambda in [a, b]
        if (a > b) throw std::invalid_argument("real_interval: need a <= b");
        phi = phi_real_axis();
        psi << 2.0, -(a + b), -(a + b), 2.0 * a * b;
        break;
    case CurveKind::RealComplement: // lambda outside (a, b)
        if (a > b) throw std::invalid_argument("real_complement: need a <= b");
        phi = phi_real_axis();
        psi << -2.0, (a + b), (a + b), -2.0 * a * b;
        break;
    case CurveKind::RealHalflineGeq: // lambda >= a
        phi = phi_real_axis();
        psi << 0.0, -1.0, -1.0, 2.0 * a;
        break;
    case CurveKind::RealHalflineLeq: // lambda <= a
        phi = phi_real_axis();
        psi << 0.0, 1.0, 1.0, -2.0 * a;
        break;
    }
    return CurveSpec(phi, psi);
}

namespace {

// Eigen-decomposition of the real symmetric [[x, w], [w, y]]:
// returns alpha >= gamma and the unit eigenvector (u, v) for alpha.
struct Sym2Eig {
    double alpha, gamma, u, v;
};

Sym2Eig sym2_eig(double x, double w, double y) {
    Sym2Eig e;
    double scale = std::abs(x) + std::abs(y) + std::abs(w);
    if (std::abs(w) <= 1e-15 * (scale + 1.0)) {
        if (x >= y) {
            e = {x, y, 1.0, 0.0};
        } else {
            e = {y, x, 0.0, 1.0};
        }
        return e;
    }
    double mid = 0.5 * (x + y);
    double disc = std::hypot(0.5 * (x - y), w);
    e.alpha = mid + disc;
    e.gamma = mid - disc;
    double u = w, v = e.alpha - x;
    double n = std::hypot(u, v);
    u /= n;
    v /= n;
    if (u < 0.0 || (u == 0.0 && v < 0.0)) {
        u = -u;
        v = -v;
    }
    e.u = u;
    e.v = v;
    return e;
}

Eigen::Vector2cd phase_normalized(Eigen::Vector2cd v) {
    Complex lead = (std::abs(v(0)) > 1e-14) ? v(0) : v(1);
    return v * (std::abs(lead) / lead);
}

} // namespace

Canonical canonicalize(const CurveSpec& c) {
    double det = c.phi(0, 0).real() * c.phi(1, 1).real() - std::norm(c.phi(0, 1));
    if (!(det < -1e-12)) throw std::invalid_argument("canonicalize: det(Phi) must be negative");

    // Congruence of Phi to Phi_i = [[0,1],[1,0]].
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(c.phi);
    double d_neg = es.eigenvalues()(0), d_pos = es.eigenvalues()(1);
    Eigen::Vector2cd u_neg = phase_normalized(es.eigenvectors().col(0));
    Eigen::Vector2cd u_pos = phase_normalized(es.eigenvectors().col(1));
    Eigen::Matrix2cd U;
    U.col(0) = u_pos;
    U.col(1) = u_neg;
    Eigen::Matrix2cd S = Eigen::Matrix2cd::Zero();
    S(0, 0) = std::sqrt(d_pos);
    S(1, 1) = std::sqrt(-d_neg);
    Eigen::Matrix2cd V;
    V << 1.0, 1.0, 1.0, -1.0;
    V /= std::sqrt(2.0);
    Eigen::Matrix2cd R1 = V * S * U.adjoint();
    Eigen::Matrix2cd R1inv = U * S.inverse() * V;

    // Transformed Psi and its structured 2x2 eigen-decomposition.
    Eigen::Matrix2cd psi_t = R1inv.adjoint() * c.psi * R1inv;
    double x = psi_t(0, 0).real();
    double y = psi_t(1, 1).real();
    double beta = psi_t(0, 1).real();
    double z = psi_t(0, 1).imag();
    Sym2Eig e = sym2_eig(x, -z, y);
    Eigen::Matrix2cd Q;
    Q << e.u, J * e.v, J * e.v, e.u;

    Canonical out;
    out.R = Q.adjoint() * R1;
    out.alpha = e.alpha;
    out.beta = beta;
    out.gamma = e.gamma;
    return out;
}

CurveClass classify(const CurveSpec& c) {
    if (!c.inequality_active) return CurveClass::FullCurve;
    Canonical k = canonicalize(c);
    double eps = 1e-12 * (std::abs(k.alpha) + std::abs(k.gamma) + 1.0);
    if (k.gamma > eps) return CurveClass::Empty; // 0 < gamma <= alpha
    if (std::abs(k.gamma) <= eps) {
        if (k.alpha > eps) return CurveClass::Singleton;
        return CurveClass::FullCurve; // alpha <= 0 <= ... inequality redundant
    }
    // gamma < 0
    if (k.alpha > eps) return CurveClass::Segment;
    return CurveClass::FullCurve;
}

std::vector<HomPoint> sample_interior(const CurveSpec& c, Eigen::Index k, std::uint64_t seed) {
    if (k < 1) throw std::invalid_argument("sample_interior: k >= 1 required");
    CurveClass cls = classify(c);
    if (cls == CurveClass::Empty || cls == CurveClass::Singleton)
        throw std::invalid_argument("sample_interior: curve has no interior");
    Canonical kc = canonicalize(c);
    Eigen::Matrix2cd Rinv = kc.R.inverse();
    double eps = 1e-12 * (std::abs(kc.alpha) + std::abs(kc.gamma) + 1.0);
    bool strict_needed =
        c.inequality_active && (std::abs(kc.alpha) > eps || std::abs(kc.gamma) > eps);

    std::mt19937_64 rng(seed ^ 0xa02bdbf7bb3c0a7ull);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);

    auto lift = [&](double tau) {
        Eigen::Vector2cd p_can(J * tau, 1.0);
        Eigen::Vector2cd p = Rinv * p_can;
        return HomPoint(p(0), p(1));
    };
    auto strict_ok = [&](const HomPoint& p) {
        if (!strict_needed) return true;
        return quad_form(c.psi, p) < -1e-12 * (1.0 + c.psi.norm());
    };

    std::vector<HomPoint> pts;
    pts.reserve(k);
    auto distinct = [&](const HomPoint& p) {
        for (const auto& q : pts)
            if (std::abs(p.mu - q.mu) + std::abs(p.nu - q.nu) < 1e-9) return false;
        return true;
    };

    for (Eigen::Index i = 1; i <= k; ++i) {
        double node = std::cos((2.0 * i - 1.0) * M_PI / (2.0 * k));
        double tau;
        if (cls == CurveClass::Segment) {
            tau = std::sqrt(-kc.gamma / kc.alpha) * node;
        } else {
            tau = std::tan(0.5 * M_PI * node * 0.999);
        }
        HomPoint p = lift(tau);
        int guard = 0;
        while ((!strict_ok(p) || !distinct(p)) && guard++ < 256) {
            double span = (cls == CurveClass::Segment) ? std::sqrt(-kc.gamma / kc.alpha) : 2.0;
            tau = 0.5 * (tau + span * unif(rng));
            p = lift(tau);
        }
        if (guard >= 256)
            throw std::runtime_error("sample_interior: could not find distinct interior points");
        pts.push_back(p);
    }
    return pts;
}

} // namespace pn::region
