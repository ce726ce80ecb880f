#include "floquet_lab/spectral.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>

#include "floquet_lab/error.hpp"

namespace floquet_lab {

namespace {

// theta - phase reduced to [-pi, pi].
double phase_offset(double theta, double phase) { return std::remainder(theta - phase, two_pi); }

// |1 - r e^{i d}|^2 = (1 - r)^2 + 4 r sin^2(d/2) without cancellation near r = 1, d = 0.
double resolvent_denominator(double one_minus_r, double r, double d) {
    const double s = std::sin(0.5 * d);
    return one_minus_r * one_minus_r + 4.0 * r * s * s;
}

void require_positive_epsilon(double epsilon) {
    if (!(epsilon > 0.0)) throw Error(ErrorKind::invalid_input, "epsilon must be > 0");
}

void require_coupling(const BaseHamiltonian& base, const CMatrix& coupling) {
    if (static_cast<std::size_t>(coupling.rows()) != base.dim()) {
        throw Error(ErrorKind::invalid_input, "coupling vectors do not match the base dimension");
    }
}

}  // namespace

SpectralResult quasi_energies(const CMatrix& unitary) {
    if (unitary.rows() != unitary.cols() || unitary.rows() == 0) {
        throw Error(ErrorKind::invalid_input, "quasi_energies needs a non-empty square matrix");
    }
    const Eigen::Index dim = unitary.rows();

    // For a normal matrix the Schur form is diagonal, so the Schur vectors are an orthonormal
    // eigenbasis, degenerate clusters included.
    Eigen::ComplexSchur<CMatrix> schur(unitary);
    if (schur.info() != Eigen::Success) {
        throw Error(ErrorKind::numerical_failure,
                    "Schur decomposition did not converge (dim " + std::to_string(dim) + ")");
    }
    const CMatrix& t = schur.matrixT();
    const CMatrix& q = schur.matrixU();

    std::vector<double> raw_theta(static_cast<std::size_t>(dim));
    for (Eigen::Index j = 0; j < dim; ++j) {
        const Complex ev = t(j, j);
        if (!(std::abs(ev) > 0.0)) {
            throw Error(ErrorKind::numerical_failure, "zero eigenvalue: matrix is not unitary");
        }
        raw_theta[static_cast<std::size_t>(j)] = wrap_phase(-std::arg(ev));
    }

    std::vector<std::size_t> order(static_cast<std::size_t>(dim));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return raw_theta[a] < raw_theta[b]; });

    SpectralResult out;
    out.theta.resize(order.size());
    out.residuals.resize(order.size());
    out.eigenvectors.resize(dim, dim);
    for (std::size_t j = 0; j < order.size(); ++j) {
        const auto src = static_cast<Eigen::Index>(order[j]);
        const auto dst = static_cast<Eigen::Index>(j);
        out.theta[j] = raw_theta[order[j]];
        out.eigenvectors.col(dst) = q.col(src);
    }
    const CMatrix vq = unitary * out.eigenvectors;
    out.converged = true;
    for (std::size_t j = 0; j < order.size(); ++j) {
        const auto c = static_cast<Eigen::Index>(j);
        const Complex ev = std::polar(1.0, -out.theta[j]);
        out.residuals[j] = (vq.col(c) - ev * out.eigenvectors.col(c)).norm();
        if (!(out.residuals[j] < residual_gate)) out.converged = false;
    }
    return out;
}

SpectralResult quasi_energies(const FloquetModel& model) { return quasi_energies(dense_floquet_matrix(model)); }

SpacingStats level_spacing_stats(const std::vector<double>& sorted_theta) {
    const std::size_t dim = sorted_theta.size();
    if (dim < 3) throw Error(ErrorKind::invalid_input, "spacing statistics need at least 3 phases");

    SpacingStats out;
    out.spacings.resize(dim);
    const double mean_gap = two_pi / static_cast<double>(dim);
    for (std::size_t j = 0; j < dim; ++j) {
        double gap = j + 1 < dim ? sorted_theta[j + 1] - sorted_theta[j]
                                 : sorted_theta.front() + two_pi - sorted_theta.back();
        if (gap < 1e-12) gap = 0.0;
        out.spacings[j] = gap / mean_gap;
    }

    out.ratios.resize(dim);
    double sum = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
        const double a = out.spacings[j];
        const double b = out.spacings[(j + 1) % dim];
        const double hi = std::max(a, b);
        // Two coincident zero gaps are equal gaps.
        out.ratios[j] = hi > 0.0 ? std::min(a, b) / hi : 1.0;
        sum += out.ratios[j];
    }
    out.mean_ratio = sum / static_cast<double>(dim);

    out.cdf_x = out.spacings;
    std::sort(out.cdf_x.begin(), out.cdf_x.end());
    out.cdf_y.resize(dim);
    for (std::size_t j = 0; j < dim; ++j) out.cdf_y[j] = static_cast<double>(j + 1) / static_cast<double>(dim);
    return out;
}

SpacingStats level_spacing_stats(const SpectralResult& result) { return level_spacing_stats(result.theta); }

ScanAxes ScanAxes::uniform(std::size_t theta_points, int first_exponent, int last_exponent) {
    if (theta_points == 0 || last_exponent < first_exponent) {
        throw Error(ErrorKind::invalid_input, "scan axes need theta points and a non-empty ladder");
    }
    ScanAxes axes;
    axes.theta_grid.resize(theta_points);
    for (std::size_t i = 0; i < theta_points; ++i) {
        axes.theta_grid[i] = two_pi * static_cast<double>(i) / static_cast<double>(theta_points);
    }
    for (int e = first_exponent; e <= last_exponent; ++e) axes.epsilon_ladder.push_back(std::ldexp(1.0, -e));
    return axes;
}

ScanAxes ScanAxes::defaults() { return uniform(512, 1, 14); }

double poisson_kernel(double t, double eps) {
    require_positive_epsilon(eps);
    const double one_minus_r = -std::expm1(-eps);
    const double r = std::exp(-eps);
    // 1 - r^2 = (1 - r)(1 + r)
    return one_minus_r * (1.0 + r) / (two_pi * resolvent_denominator(one_minus_r, r, std::remainder(t, two_pi)));
}

MeasureScan spectral_density(const SpectralResult& spectrum, const StateVector& y, const ScanAxes& axes) {
    if (!spectrum.converged) {
        throw Error(ErrorKind::unconverged_spectrum, "spectral result failed the residual gate");
    }
    if (static_cast<std::size_t>(y.size()) != spectrum.dim()) {
        throw Error(ErrorKind::invalid_input, "state dimension does not match the spectrum");
    }
    for (double e : axes.epsilon_ladder) require_positive_epsilon(e);

    const CVector overlaps = spectrum.eigenvectors.adjoint() * y;
    MeasureScan scan{axes.theta_grid, axes.epsilon_ladder, {}};
    scan.values.resize(axes.theta_grid.size() * axes.epsilon_ladder.size());
    for (std::size_t i = 0; i < axes.theta_grid.size(); ++i) {
        for (std::size_t k = 0; k < axes.epsilon_ladder.size(); ++k) {
            CompensatedSum acc;
            for (std::size_t j = 0; j < spectrum.dim(); ++j) {
                const double w = std::norm(overlaps[static_cast<Eigen::Index>(j)]);
                if (w == 0.0) continue;
                acc.add(poisson_kernel(axes.theta_grid[i] - spectrum.theta[j], axes.epsilon_ladder[k]) * w);
            }
            scan.values[i * axes.epsilon_ladder.size() + k] = acc.value();
        }
    }
    return scan;
}

MeasureScan spectral_density(const FloquetModel& model, const StateVector& y, const ScanAxes& axes) {
    return spectral_density(quasi_energies(model), y, axes);
}

MeasureScan spectral_density_resolvent(const CMatrix& unitary, const StateVector& y, const ScanAxes& axes) {
    if (unitary.rows() != y.size() || unitary.cols() != y.size()) {
        throw Error(ErrorKind::invalid_input, "state dimension does not match the operator");
    }
    for (double e : axes.epsilon_ladder) require_positive_epsilon(e);

    const Eigen::Index dim = unitary.rows();
    MeasureScan scan{axes.theta_grid, axes.epsilon_ladder, {}};
    scan.values.resize(axes.theta_grid.size() * axes.epsilon_ladder.size());
    CMatrix system(dim, dim);
    for (std::size_t i = 0; i < axes.theta_grid.size(); ++i) {
        for (std::size_t k = 0; k < axes.epsilon_ladder.size(); ++k) {
            const double eps = axes.epsilon_ladder[k];
            const Complex z = std::polar(std::exp(-eps), axes.theta_grid[i]);
            system = -z * unitary;
            system.diagonal().array() += 1.0;
            const CVector x = system.partialPivLu().solve(y);
            const double prefactor = -std::expm1(-2.0 * eps) / two_pi;
            scan.values[i * axes.epsilon_ladder.size() + k] = prefactor * x.squaredNorm();
        }
    }
    return scan;
}

std::vector<double> g_epsilon_terms(const BaseHamiltonian& base, const CVector& a, double theta, double epsilon) {
    require_positive_epsilon(epsilon);
    if (static_cast<std::size_t>(a.size()) != base.dim()) {
        throw Error(ErrorKind::invalid_input, "coefficient vector does not match the base dimension");
    }
    const double one_minus_r = -std::expm1(-epsilon);
    const double r = std::exp(-epsilon);
    std::vector<double> terms(base.dim());
    for (std::size_t n = 0; n < base.dim(); ++n) {
        const double num = std::norm(a[static_cast<Eigen::Index>(n)]);
        terms[n] = num == 0.0 ? 0.0
                              : num / resolvent_denominator(one_minus_r, r, phase_offset(theta, base.level_phase(n)));
    }
    return terms;
}

double g_epsilon_norm(const BaseHamiltonian& base, const CMatrix& coupling, double theta, double epsilon) {
    require_positive_epsilon(epsilon);
    require_coupling(base, coupling);
    if (coupling.cols() == 0) return 0.0;
    const double one_minus_r = -std::expm1(-epsilon);
    const double r = std::exp(-epsilon);
    Eigen::VectorXd w(coupling.rows());
    for (Eigen::Index n = 0; n < coupling.rows(); ++n) {
        w[n] = 1.0 / resolvent_denominator(one_minus_r, r,
                                           phase_offset(theta, base.level_phase(static_cast<std::size_t>(n))));
    }
    const CMatrix g = coupling.adjoint() * w.asDiagonal() * coupling;
    if (g.rows() == 1) return std::abs(g(0, 0));
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(g, Eigen::EigenvaluesOnly);
    return eig.eigenvalues().maxCoeff();
}

TraceResult trace_g_epsilon(const BaseHamiltonian& base, const CMatrix& coupling, double theta, double epsilon) {
    if (!(epsilon >= 0.0)) throw Error(ErrorKind::invalid_input, "epsilon must be >= 0");
    require_coupling(base, coupling);
    const double one_minus_r = -std::expm1(-epsilon);
    const double r = std::exp(-epsilon);
    TraceResult out;
    CompensatedSum acc;
    for (Eigen::Index n = 0; n < coupling.rows(); ++n) {
        const double num = coupling.row(n).squaredNorm();
        if (num == 0.0) continue;
        const double phase = base.level_phase(static_cast<std::size_t>(n));
        const double d = phase_offset(theta, phase);
        const double den = resolvent_denominator(one_minus_r, r, d);
        const double aligned_tol = 16.0 * DBL_EPSILON * std::max({1.0, std::abs(theta), std::abs(phase)});
        if (epsilon == 0.0 && std::abs(d) <= aligned_tol) {
            out.divergent = true;
            continue;
        }
        acc.add(num / den);
    }
    out.value = out.divergent ? std::numeric_limits<double>::infinity() : acc.value();
    return out;
}

BoundaryOperator q_boundary(const BaseHamiltonian& base, const CMatrix& coupling, double theta, double epsilon) {
    require_positive_epsilon(epsilon);
    require_coupling(base, coupling);
    const double r = std::exp(-epsilon);
    const double one_minus_r = -std::expm1(-epsilon);
    CVector w(coupling.rows());
    for (Eigen::Index n = 0; n < coupling.rows(); ++n) {
        const double d = phase_offset(theta, base.level_phase(static_cast<std::size_t>(n)));
        // 1 - r e^{i d}, real part written as (1 - r) + 2 r sin^2(d/2).
        const double s = std::sin(0.5 * d);
        const Complex den(one_minus_r + 2.0 * r * s * s, -r * std::sin(d));
        w[n] = 1.0 / den;
    }
    BoundaryOperator out;
    out.q = coupling.adjoint() * w.asDiagonal() * coupling;
    out.hs_norm = out.q.norm();
    return out;
}

double growth_exponent(const std::vector<double>& epsilon, const std::vector<double>& values) {
    if (epsilon.size() != values.size()) {
        throw Error(ErrorKind::invalid_input, "ladder and values differ in length");
    }
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] > 0.0 && std::isfinite(values[i])) {
            lx.push_back(std::log(epsilon[i]));
            ly.push_back(std::log(values[i]));
        }
    }
    if (lx.size() < 2) return 0.0;
    return -fit_line(lx, ly).slope;
}

SupportScan singular_support_scan(const BaseHamiltonian& base, const CMatrix& coupling,
                                  const SupportScanConfig& config) {
    require_coupling(base, coupling);
    const auto& ladder = config.axes.epsilon_ladder;
    if (ladder.size() < 3) throw Error(ErrorKind::invalid_input, "support scan needs at least 3 ladder rungs");
    for (double e : ladder) require_positive_epsilon(e);

    SupportScan out;
    out.theta_grid = config.axes.theta_grid;
    out.g_values = MeasureScan{config.axes.theta_grid, ladder, {}};
    out.g_values.values.reserve(config.axes.theta_grid.size() * ladder.size());

    const std::vector<double> diff_ladder(ladder.begin() + 1, ladder.end());
    for (double theta : config.axes.theta_grid) {
        std::vector<double> g(ladder.size());
        std::vector<double> diffs(ladder.size() - 1);
        CMatrix previous;
        for (std::size_t k = 0; k < ladder.size(); ++k) {
            g[k] = g_epsilon_norm(base, coupling, theta, ladder[k]);
            CMatrix q = q_boundary(base, coupling, theta, ladder[k]).q;
            if (k > 0) diffs[k - 1] = (q - previous).norm();
            previous = std::move(q);
        }
        out.g_values.values.insert(out.g_values.values.end(), g.begin(), g.end());
        const double pg = growth_exponent(ladder, g);
        const double pq = growth_exponent(diff_ladder, diffs);
        out.g_exponent.push_back(pg);
        out.q_exponent.push_back(pq);
        if (pg > config.threshold || pq > config.threshold) out.flagged.push_back(theta);
    }
    return out;
}

}  // namespace floquet_lab
