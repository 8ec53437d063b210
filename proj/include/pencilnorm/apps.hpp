#pragma once

#include "pencilnorm/decomp.hpp"
#include "pencilnorm/gauge.hpp"

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

namespace pn::apps {

struct LineSpectrumModel {
    RVec omegas;  // radians
    CVec coeffs;  // complex amplitudes, same length
    double sigma = 0.0;
};

struct MatchReport {
    std::vector<Eigen::Index> pairing; // truth index -> estimate index (-1 unmatched)
    RVec errors;                       // per truth entry; inf when unmatched
    double unmatched_mass = 0.0;       // total magnitude of unmatched estimates
    bool exact(double tol_angle, double tol_mass) const;
};

/// Greedy nearest-neighbor pairing within `gate`; `period` > 0 wraps the
/// coordinate (2*pi for frequencies), 0 compares on the line.
MatchReport match_atoms(const RVec& truth, const RVec& est, const RVec& est_mag, double gate,
                        double period = 0.0);

struct RecoveryResult {
    RVec omegas;                       // recovered frequencies
    RVec thetas;                       // arrival angles (DOA only)
    RVec magnitudes;                   // per-atom mass
    CVec coeffs;                       // complex amplitudes when scalar-valued
    std::vector<Eigen::Index> sector;  // per-atom sector id (interval DOA)
    CVec y;                            // denoised signal (line-spectrum fits)
    std::optional<double> noise_estimate;
    double objective = 0.0;
    std::optional<gauge::DualCertificate> certificate;
};

struct Corruption {
    Eigen::Index count = 0;
    double magnitude = 0.0;
};

CVec synth_signal(const LineSpectrumModel& model, Eigen::Index N,
                  const std::optional<Corruption>& corruption, std::uint64_t seed);

/// Scaled Gram of the n x (N-n+1) Hankel matrix of y.
CMat sample_covariance(const CVec& y, Eigen::Index n);

RecoveryResult covfit(const CMat& Rm, double gamma, const conic::SolveSettings& settings = {});

enum class HuberVariant { Vector, HankelMatrix };

/// Huber-penalized line-spectrum fit on the arc |omega| <= omega_c; n1 is the
/// row count of the Hankel variable for the matrix variant (0 picks (n+1)/2).
RecoveryResult linespec_huber(const CVec& ym, double gamma, double delta, double omega_c,
                              HuberVariant variant, Eigen::Index n1 = 0,
                              const conic::SolveSettings& settings = {});

struct Sector {
    double lo = 0.0, hi = 0.0; // arrival angle range, within (-pi/2, pi/2)
};

/// Sector-constrained DOA with shared measurements: one component per sector,
/// pins (y_1+y_2)_{I1} = b1 and (y_2+y_3)_{I2} = b2 (single-sector form pins
/// (y_1)_{I1} = b1 and requires I2 empty). Angles map to arcs via
/// omega = alpha sin(theta).
RecoveryResult doa_intervals(const CVec& b1, const CVec& b2,
                             const std::vector<Eigen::Index>& I1,
                             const std::vector<Eigen::Index>& I2,
                             const std::vector<Sector>& sectors, Eigen::Index n,
                             double alpha = M_PI, const conic::SolveSettings& settings = {});

/// Multiple-measurement-vector DOA: Y_I = B with |theta| <= theta_c.
RecoveryResult doa_mmv(const CMat& B, const std::vector<Eigen::Index>& I, double theta_c,
                       double alpha, Eigen::Index n, const conic::SolveSettings& settings = {});

struct RateConfig {
    Eigen::Index n = 50;
    Eigen::Index sources = 7;
    std::vector<Eigen::Index> measurement_counts;
    Eigen::Index trials = 20;
    bool with_intervals = true;
    double alpha = M_PI;
    double solver_eps = 1e-5;
    Eigen::Index solver_max_iter = 15000; // stalled solves count as failures
};

struct RatePoint {
    Eigen::Index count = 0;
    double rate = 0.0;
};

/// Exact-recovery rate per measurement budget (threshold 1e-3 in angle and in
/// spurious mass); data generation depends only on (seed, trial), not on
/// with_intervals, so paired comparisons share instances.
std::vector<RatePoint> recovery_rate(const RateConfig& config, std::uint64_t seed);

/// The fixed source angles used by recovery_rate (paper-like layout across the
/// three sectors), truncated/extended deterministically to `sources`.
RVec rate_truth_angles(Eigen::Index sources);

/// Matrix-pencil comparator: frequencies of the r dominant modes from an
/// n1-row Hankel matrix of y.
RVec matrix_pencil(const CVec& y, Eigen::Index n1, Eigen::Index r);

} // namespace pn::apps
