#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "floquet_lab/model.hpp"

namespace floquet_lab {

enum class CheckKind { equality, positivity, predicate };

struct KernelCheck {
    std::string name;
    CheckKind kind = CheckKind::equality;
    double tolerance = 0.0;
    double max_abs_error = 0.0;
    double min_value = 0.0;
    std::size_t samples = 0;
    bool pass = false;
};

/// Gating checks plus non-gating diagnostics (e.g. a rejected formula variant).
struct KernelCheckReport {
    std::string name;
    std::string grid;
    std::vector<KernelCheck> checks;
    std::vector<KernelCheck> diagnostics;
    std::vector<std::string> findings;

    bool pass() const;
    double max_abs_error() const;
};

KernelCheck equality_check(std::string name, double max_abs_error, double tolerance, std::size_t samples);
KernelCheck positivity_check(std::string name, double min_value, std::size_t samples);

// -- smoothed delta --------------------------------------------------------------------------

/// (1/2pi)(1 - e^{-2 eps}) / (1 - 2 e^{-eps} cos t + e^{-2 eps}).
double delta_eps_closed(double t, double eps);

struct SeriesValue {
    double value = 0.0;
    double imag_residue = 0.0;
};

/// Truncated two-sided geometric series; terms = 0 leaves 1/(2pi).
SeriesValue delta_eps_series(double t, double eps, unsigned terms);

/// Upper bound e^{-eps terms} / (pi (1 - e^{-eps})) on |series - closed|.
double delta_eps_tail_bound(double eps, unsigned terms);

// -- Fourier kernel --------------------------------------------------------------------------

/// i pi e^{-2|t|} t^{-1} (1 - e^{i kappa t}); t = 0 is filled with the limit pi kappa.
Complex phi_lambda(double t, double kappa);

enum class NumeratorVariant {
    equation,  // second numerator term kappa omega (4 + omega^2)
    table,     // second numerator term kappa omega (4 + omega^2)^2
};

std::string_view to_string(NumeratorVariant variant);

double fourier_numerator(double omega, double kappa, NumeratorVariant variant = NumeratorVariant::equation);
double fourier_denominator(double omega, double kappa);

/// pi arctan(n / d).
double phi_tilde_analytic(double omega, double kappa, NumeratorVariant variant = NumeratorVariant::equation);

/// -pi Arg(1 + S^2) + pi [arctan S + arctan S*], S = kappa / (2 + i omega).
double phi_tilde_two_part(double omega, double kappa);

struct QuadratureValue {
    double value = 0.0;
    double imag_residue = 0.0;
    double error_estimate = 0.0;
};

/// Adaptive Gauss-Kronrod transform of phi_lambda over [-20, 20] split at t = 0.
QuadratureValue phi_tilde_numeric(double omega, double kappa);

struct FourierGridRow {
    double omega;
    double kappa;
    double analytic;
    double numeric;
    double table_variant;
    double two_part;
};

std::vector<FourierGridRow> fourier_grid(std::span<const double> omegas, std::span<const double> kappas);

/// Analytic vs quadrature agreement, positivity and the spot value; both numerator variants
/// are scored and the one matching quadrature is named in the findings.
KernelCheckReport fourier_check(std::span<const FourierGridRow> rows, double tolerance = 1e-6);

/// Term-by-term signs of n(omega, kappa) (kappa factor dropped) and d(omega, kappa) by omega region.
KernelCheckReport sign_table_check();

// -- delta identity --------------------------------------------------------------------------

KernelCheckReport delta_identity_check(unsigned terms = 200);

// -- telescoping identity --------------------------------------------------------------------

struct TelescopingSides {
    Complex sum;    // sum_{n=a..b} (phi, V^-n V[V*, A] V^n phi)
    Complex ends;   // (phi, V^-b A V^b phi) - (phi, V^-(a-1) A V^(a-1) phi)
    double bound;   // 2 ||A|| ||phi||^2
};

TelescopingSides telescoping_sides(const CMatrix& v, const CMatrix& a, const CVector& phi, unsigned first,
                                   unsigned last);

/// Random unitary V, random self-adjoint A and random phi drawn from `seed`.
KernelCheckReport telescoping_check(std::size_t dim, unsigned first, unsigned last, std::uint64_t seed,
                                    bool central_a = false);

// -- scaling ---------------------------------------------------------------------------------

/// 1 / ||A*A|| for A with K-space rows given by `vectors`; ||A*A|| is the top Gram eigenvalue.
double c_scaling(std::span<const CVector> vectors);
double c_scaling(const RankNPerturbation& pert);

/// All verification reports used by the CLI `verify` experiment.
struct VerifySuite {
    std::vector<KernelCheckReport> reports;
    std::vector<FourierGridRow> fourier_rows;

    bool pass() const;
};

VerifySuite run_verify_suite(std::uint64_t seed = 12345);

}  // namespace floquet_lab
