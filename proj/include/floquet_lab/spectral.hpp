#pragma once

#include <cstddef>
#include <vector>

#include "floquet_lab/floquet.hpp"

namespace floquet_lab {

inline constexpr double residual_gate = 1e-8;

/// Eigendecomposition of V with the convention V v_j = exp(-i theta_j) v_j.
struct SpectralResult {
    std::vector<double> theta;  // sorted, each in [0, 2pi)
    CMatrix eigenvectors;       // column j belongs to theta[j]
    std::vector<double> residuals;
    bool converged = false;

    std::size_t dim() const noexcept { return theta.size(); }
};

SpectralResult quasi_energies(const CMatrix& unitary);
SpectralResult quasi_energies(const FloquetModel& model);

struct SpacingStats {
    std::vector<double> spacings;  // circular gaps in units of the mean gap 2pi/dim
    std::vector<double> ratios;    // min(s_j, s_j+1) / max(s_j, s_j+1), circular
    double mean_ratio = 0.0;
    std::vector<double> cdf_x;     // sorted spacings
    std::vector<double> cdf_y;     // empirical CDF at cdf_x
};

SpacingStats level_spacing_stats(const std::vector<double>& sorted_theta);
SpacingStats level_spacing_stats(const SpectralResult& result);

struct ScanAxes {
    std::vector<double> theta_grid;
    std::vector<double> epsilon_ladder;  // decreasing

    /// 512 uniform points on [0, 2pi) and epsilon = 2^-1 ... 2^-14.
    static ScanAxes defaults();
    static ScanAxes uniform(std::size_t theta_points, int first_exponent, int last_exponent);
};

/// Values on a theta x epsilon grid, row-major in theta.
struct MeasureScan {
    std::vector<double> theta_grid;
    std::vector<double> epsilon_ladder;
    std::vector<double> values;

    double at(std::size_t i_theta, std::size_t i_eps) const {
        return values[i_theta * epsilon_ladder.size() + i_eps];
    }
};

/// Poisson kernel (1/2pi)(1 - r^2)/(1 - 2r cos t + r^2), r = exp(-eps).
double poisson_kernel(double t, double eps);

/// sum_j delta_eps(theta - theta_j) |<v_j, y>|^2 from the eigendecomposition.
MeasureScan spectral_density(const SpectralResult& spectrum, const StateVector& y, const ScanAxes& axes);
MeasureScan spectral_density(const FloquetModel& model, const StateVector& y, const ScanAxes& axes);

/// (1 - e^{-2 eps}) / (2pi) * ||(1 - V e^{i theta} e^{-eps})^{-1} y||^2 by dense linear solves.
MeasureScan spectral_density_resolvent(const CMatrix& unitary, const StateVector& y, const ScanAxes& axes);

// Boundary-value operators of U = exp(-i H0 T / hbar) against a coupling A whose rows in
// K-space are the columns of `coupling` (dim x N). The columns need not be orthonormal.

/// Largest eigenvalue of the N x N PSD matrix A F*(theta+ i eps) F(theta + i eps) A*.
double g_epsilon_norm(const BaseHamiltonian& base, const CMatrix& coupling, double theta, double epsilon);

/// Per-level contributions |(a)_n|^2 / |1 - e^{-eps} e^{i(theta - T alpha_n / hbar)}|^2 of a single vector.
std::vector<double> g_epsilon_terms(const BaseHamiltonian& base, const CVector& a, double theta, double epsilon);

struct TraceResult {
    double value = 0.0;
    bool divergent = false;
};

/// tr G_eps; epsilon = 0 is allowed and flags exactly aligned phases as divergent.
TraceResult trace_g_epsilon(const BaseHamiltonian& base, const CMatrix& coupling, double theta, double epsilon);

struct BoundaryOperator {
    CMatrix q;
    double hs_norm = 0.0;
};

/// Q(z) = A (1 - U z)^{-1} A*, z = e^{i theta} e^{-eps}.
BoundaryOperator q_boundary(const BaseHamiltonian& base, const CMatrix& coupling, double theta, double epsilon);

struct SupportScanConfig {
    ScanAxes axes = ScanAxes::defaults();
    double threshold = 0.5;
};

struct SupportScan {
    std::vector<double> theta_grid;
    std::vector<double> g_exponent;  // p in g ~ eps^-p
    std::vector<double> q_exponent;  // p in ||Q(eps_k+1) - Q(eps_k)||_HS ~ eps^-p
    std::vector<double> flagged;     // theta values exceeding the threshold
    MeasureScan g_values;
};

/// Growth exponent of values along a decreasing ladder: -slope of log v against log eps.
/// Exactly vanishing sequences report 0.
double growth_exponent(const std::vector<double>& epsilon, const std::vector<double>& values);

SupportScan singular_support_scan(const BaseHamiltonian& base, const CMatrix& coupling,
                                  const SupportScanConfig& config = {});

}  // namespace floquet_lab
