#pragma once

#include "pencilnorm/numkern.hpp"

#include <cstdint>
#include <vector>

namespace pn::region {

using HForm2 = Eigen::Matrix2cd; // Hermitian 2x2 form

// Canonical forms for the unit circle, the imaginary axis and the real axis.
HForm2 phi_unit_circle(); // diag(1, -1)
HForm2 phi_imag_axis();   // [[0, 1], [1, 0]]
HForm2 phi_real_axis();   // [[0, i], [-i, 0]]

/// A point of the closed complex plane in homogeneous coordinates.
/// Normalized: ||(mu, nu)|| = 1 and the first nonzero component is rotated to
/// be real nonnegative, so equality comparison and dedup are well-defined.
struct HomPoint {
    Complex mu{0.0, 0.0};
    Complex nu{1.0, 0.0};

    HomPoint() = default;
    HomPoint(Complex mu_, Complex nu_); // normalizes; throws on (0,0)

    static HomPoint from_lambda(Complex lambda) { return HomPoint(lambda, 1.0); }
    static HomPoint infinity() { return HomPoint(1.0, 0.0); }

    bool is_infinity(double tol = 1e-12) const { return std::abs(nu) <= tol; }
    Complex lambda() const { return mu / nu; } // finite points only
};

double quad_form(const HForm2& theta, const HomPoint& p);

enum class CurveClass { Empty, Singleton, Segment, FullCurve };

/// Canonicalization data: Phi = R^H Phi_i R, Psi = R^H [[a, b], [b, g]] R.
struct Canonical {
    Eigen::Matrix2cd R;
    double alpha = 0.0, beta = 0.0, gamma = 0.0;
};

/// A line/circle segment of the closed complex plane:
/// C = { (mu, nu) : q_Phi = 0, q_Psi <= 0 }, det Phi < 0.
struct CurveSpec {
    HForm2 phi;
    HForm2 psi;
    bool inequality_active = false;

    CurveSpec() : phi(phi_unit_circle()), psi(HForm2::Zero()) {}
    CurveSpec(const HForm2& phi_, const HForm2& psi_);
};

bool contains(const CurveSpec& c, const HomPoint& p, double tol = 1e-9);

enum class CurveKind {
    UnitCircle,
    UnitCircleArc,      // |omega - a| <= b, 0 <= b <= pi
    CircleComplementArc, // omega in [a, 2pi - a], 0 <= a <= pi
    ImagAxis,
    ImagInterval,       // Im(lambda) in [a, b]
    ImagComplement,     // |Im(lambda)| >= a, a >= 0
    RealAxis,
    RealInterval,       // lambda in [a, b]
    RealComplement,     // lambda outside (a, b)
    RealHalflineGeq,    // lambda >= a
    RealHalflineLeq,    // lambda <= a
};

CurveSpec make_curve(CurveKind kind, double a = 0.0, double b = 0.0);

// Named convenience constructors.
inline CurveSpec unit_circle() { return make_curve(CurveKind::UnitCircle); }
inline CurveSpec unit_circle_arc(double a, double b) { return make_curve(CurveKind::UnitCircleArc, a, b); }
inline CurveSpec imag_axis() { return make_curve(CurveKind::ImagAxis); }
inline CurveSpec real_axis() { return make_curve(CurveKind::RealAxis); }
inline CurveSpec real_interval(double a, double b) { return make_curve(CurveKind::RealInterval, a, b); }

Canonical canonicalize(const CurveSpec& c);
CurveClass classify(const CurveSpec& c);

/// k distinct points with q_Phi = 0 and (if the inequality is active)
/// q_Psi strictly negative. Chebyshev-spaced on the canonical segment;
/// the seed only perturbs on (unlikely) duplicate collisions.
std::vector<HomPoint> sample_interior(const CurveSpec& c, Eigen::Index k, std::uint64_t seed = 0);

} // namespace pn::region
