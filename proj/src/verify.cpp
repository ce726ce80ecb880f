#include "floquet_lab/verify.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "floquet_lab/error.hpp"
#include "floquet_lab/spectral.hpp"

namespace floquet_lab {

namespace {

constexpr double pi = std::numbers::pi;

void require_kappa(double kappa) {
    if (!(kappa >= 0.0 && kappa <= 1.0)) {
        throw Error(ErrorKind::out_of_range, "kappa must lie in [0, 1]");
    }
}

std::string format_double(double x) {
    std::ostringstream os;
    os.precision(6);
    os << x;
    return os.str();
}

}  // namespace

bool KernelCheckReport::pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const KernelCheck& c) { return c.pass; });
}

double KernelCheckReport::max_abs_error() const {
    double m = 0.0;
    for (const auto& c : checks) {
        if (c.kind == CheckKind::equality) m = std::max(m, c.max_abs_error);
    }
    return m;
}

KernelCheck equality_check(std::string name, double max_abs_error, double tolerance, std::size_t samples) {
    KernelCheck c;
    c.name = std::move(name);
    c.kind = CheckKind::equality;
    c.tolerance = tolerance;
    c.max_abs_error = max_abs_error;
    c.samples = samples;
    c.pass = max_abs_error < tolerance;
    return c;
}

KernelCheck positivity_check(std::string name, double min_value, std::size_t samples) {
    KernelCheck c;
    c.name = std::move(name);
    c.kind = CheckKind::positivity;
    c.min_value = min_value;
    c.samples = samples;
    c.pass = min_value > 0.0;
    return c;
}

double delta_eps_closed(double t, double eps) {
    if (!(eps > 0.0)) throw Error(ErrorKind::invalid_input, "eps must be > 0");
    return poisson_kernel(t, eps);
}

SeriesValue delta_eps_series(double t, double eps, unsigned terms) {
    if (!(eps > 0.0)) throw Error(ErrorKind::invalid_input, "eps must be > 0");
    // sum_{n=0}^{K} e^{in(t + i eps)} + sum_{n=-K}^{0} e^{in(t - i eps)} - 1
    Complex acc(-1.0, 0.0);
    for (unsigned k = 0; k <= terms; ++k) {
        const double n = static_cast<double>(k);
        const double decay = std::exp(-n * eps);
        acc += std::polar(decay, n * t);
        acc += std::polar(decay, -n * t);
    }
    acc /= two_pi;
    return {acc.real(), std::abs(acc.imag())};
}

double delta_eps_tail_bound(double eps, unsigned terms) {
    return std::exp(-eps * static_cast<double>(terms)) / (pi * -std::expm1(-eps));
}

Complex phi_lambda(double t, double kappa) {
    require_kappa(kappa);
    if (t == 0.0) return {pi * kappa, 0.0};
    // (1 - e^{i k t}) / t = 2 sin^2(k t / 2) / t - i sin(k t) / t
    const double half = std::sin(0.5 * kappa * t);
    const double even = std::sin(kappa * t) / t;
    const double odd = 2.0 * half * half / t;
    return pi * std::exp(-2.0 * std::abs(t)) * Complex(even, odd);
}

std::string_view to_string(NumeratorVariant variant) {
    return variant == NumeratorVariant::equation ? "equation" : "table";
}

double fourier_numerator(double omega, double kappa, NumeratorVariant variant) {
    const double q = 4.0 + omega * omega;
    const double second = variant == NumeratorVariant::equation ? kappa * omega * q : kappa * omega * q * q;
    return 4.0 * kappa * (q * q + second + kappa * kappa * (4.0 - omega * omega) - kappa * kappa * kappa * omega);
}

double fourier_denominator(double omega, double kappa) {
    const double q = 4.0 + omega * omega;
    const double k2 = kappa * kappa;
    return q * q * q - 2.0 * k2 * omega * omega * q - 16.0 * k2 * kappa * omega - k2 * k2 * (4.0 - omega * omega);
}

double phi_tilde_analytic(double omega, double kappa, NumeratorVariant variant) {
    require_kappa(kappa);
    return pi * std::atan(fourier_numerator(omega, kappa, variant) / fourier_denominator(omega, kappa));
}

double phi_tilde_two_part(double omega, double kappa) {
    require_kappa(kappa);
    const Complex s = kappa / Complex(2.0, omega);
    const double first = -pi * std::arg(1.0 + s * s);
    const double second = pi * (std::atan(s) + std::atan(std::conj(s))).real();
    return first + second;
}

QuadratureValue phi_tilde_numeric(double omega, double kappa) {
    require_kappa(kappa);
    constexpr double half_width = 20.0;
    constexpr unsigned max_depth = 15;
    constexpr double rel_tol = 1e-11;
    using Rule = boost::math::quadrature::gauss_kronrod<double, 61>;

    auto re = [&](double t) { return (phi_lambda(t, kappa) * std::polar(1.0, -omega * t)).real(); };
    auto im = [&](double t) { return (phi_lambda(t, kappa) * std::polar(1.0, -omega * t)).imag(); };

    QuadratureValue out;
    double err = 0.0;
    double value = 0.0;
    double imag = 0.0;
    for (auto [a, b] : {std::pair{-half_width, 0.0}, std::pair{0.0, half_width}}) {
        value += Rule::integrate(re, a, b, max_depth, rel_tol, &err);
        out.error_estimate += err;
        imag += Rule::integrate(im, a, b, max_depth, rel_tol, &err);
        out.error_estimate += err;
    }
    out.value = value;
    out.imag_residue = std::abs(imag);
    if (!std::isfinite(value) || out.error_estimate > 1e-8) {
        throw Error(ErrorKind::numerical_failure,
                    "quadrature did not converge at omega=" + format_double(omega) + ", kappa=" + format_double(kappa));
    }
    return out;
}

std::vector<FourierGridRow> fourier_grid(std::span<const double> omegas, std::span<const double> kappas) {
    std::vector<FourierGridRow> rows;
    rows.reserve(omegas.size() * kappas.size());
    for (double k : kappas) {
        for (double w : omegas) {
            rows.push_back({w, k, phi_tilde_analytic(w, k), phi_tilde_numeric(w, k).value,
                            phi_tilde_analytic(w, k, NumeratorVariant::table), phi_tilde_two_part(w, k)});
        }
    }
    return rows;
}

KernelCheckReport fourier_check(std::span<const FourierGridRow> rows, double tolerance) {
    KernelCheckReport rep;
    rep.name = "fourier_transform";
    double wmin = std::numeric_limits<double>::infinity(), wmax = -wmin, kmin = wmin, kmax = -wmin;
    double err_eq = 0.0, err_table = 0.0, err_two_part = 0.0;
    double min_analytic = std::numeric_limits<double>::infinity();
    double min_numeric = min_analytic, min_table = min_analytic;
    for (const auto& r : rows) {
        wmin = std::min(wmin, r.omega);
        wmax = std::max(wmax, r.omega);
        kmin = std::min(kmin, r.kappa);
        kmax = std::max(kmax, r.kappa);
        err_eq = std::max(err_eq, std::abs(r.analytic - r.numeric));
        err_table = std::max(err_table, std::abs(r.table_variant - r.numeric));
        err_two_part = std::max(err_two_part, std::abs(r.analytic - r.two_part));
        min_analytic = std::min(min_analytic, r.analytic);
        min_numeric = std::min(min_numeric, r.numeric);
        min_table = std::min(min_table, r.table_variant);
    }
    rep.grid = "omega in [" + format_double(wmin) + ", " + format_double(wmax) + "], kappa in [" +
               format_double(kmin) + ", " + format_double(kmax) + "], " + std::to_string(rows.size()) + " points";

    const NumeratorVariant selected = err_eq <= err_table ? NumeratorVariant::equation : NumeratorVariant::table;
    const double err_selected = std::min(err_eq, err_table);
    const double err_rejected = std::max(err_eq, err_table);
    const double min_selected = selected == NumeratorVariant::equation ? min_analytic : min_table;
    const double min_rejected = selected == NumeratorVariant::equation ? min_table : min_analytic;
    const std::string rejected(to_string(selected == NumeratorVariant::equation ? NumeratorVariant::table
                                                                                 : NumeratorVariant::equation));

    rep.checks.push_back(equality_check("analytic_vs_quadrature", err_selected, tolerance, rows.size()));
    rep.checks.push_back(equality_check("analytic_vs_two_part_route", err_two_part, 1e-10, rows.size()));
    rep.checks.push_back(positivity_check("analytic_positive", min_selected, rows.size()));
    rep.checks.push_back(positivity_check("quadrature_positive", min_numeric, rows.size()));

    // Spot value at omega = 0, kappa = 1: pi arctan(4/3) = 2 pi arctan(1/2).
    const double spot = pi * std::atan(4.0 / 3.0);
    const double spot_err = std::max({std::abs(phi_tilde_analytic(0.0, 1.0) - spot),
                                      std::abs(phi_tilde_numeric(0.0, 1.0).value - spot),
                                      std::abs(phi_tilde_two_part(0.0, 1.0) - spot),
                                      std::abs(2.0 * pi * std::atan(0.5) - spot)});
    rep.checks.push_back(equality_check("spot_value_omega0_kappa1", spot_err, tolerance, 4));

    // Validity window of the closed form, on a finer and wider grid than the quadrature rows.
    double min_wide = std::numeric_limits<double>::infinity();
    std::size_t wide_samples = 0;
    for (int i = 0; i <= 800; ++i) {
        const double w = -40.0 + 0.1 * i;
        for (int j = 1; j <= 100; ++j) {
            min_wide = std::min(min_wide, phi_tilde_analytic(w, 0.01 * j, selected));
            ++wide_samples;
        }
    }
    rep.checks.push_back(positivity_check("analytic_positive_wide_grid", min_wide, wide_samples));

    rep.diagnostics.push_back(equality_check(rejected + "_variant_vs_quadrature", err_rejected, tolerance, rows.size()));
    rep.diagnostics.push_back(positivity_check(rejected + "_variant_positive", min_rejected, rows.size()));

    rep.findings.push_back("numerator variant matching quadrature: " + std::string(to_string(selected)) +
                           " (max abs error " + format_double(err_selected) + ")");
    rep.findings.push_back("numerator variant rejected by quadrature: " + rejected + " (max abs error " +
                           format_double(err_rejected) + ")");
    return rep;
}

KernelCheckReport sign_table_check() {
    struct Region {
        const char* label;
        std::vector<double> omegas;
    };
    const std::vector<Region> regions = {
        {"omega<-2", {-40.0, -10.0, -5.0, -3.0, -2.5, -2.05}},
        {"-2<omega<0", {-1.95, -1.5, -1.0, -0.5, -0.05}},
        {"0<omega<2", {0.05, 0.5, 1.0, 1.5, 1.95}},
        {"omega>2", {2.05, 2.5, 3.0, 5.0, 10.0, 40.0}},
    };
    const std::vector<double> kappas = {0.1, 0.5, 1.0};

    // Expected signs from the table, rows = regions, columns = terms.
    const int numerator_signs[4][4] = {{+1, -1, -1, +1}, {+1, -1, +1, +1}, {+1, +1, +1, -1}, {+1, +1, -1, -1}};
    const int denominator_signs[4][4] = {{+1, -1, +1, +1}, {+1, -1, +1, -1}, {+1, -1, -1, -1}, {+1, -1, -1, +1}};

    auto numerator_terms = [](double w, double k, NumeratorVariant v) {
        const double q = 4.0 + w * w;
        return std::array<double, 4>{q * q, v == NumeratorVariant::equation ? k * w * q : k * w * q * q,
                                     k * k * (4.0 - w * w), -k * k * k * w};
    };
    auto denominator_terms = [](double w, double k) {
        const double q = 4.0 + w * w;
        return std::array<double, 4>{q * q * q, -2.0 * k * k * w * w * q, -16.0 * k * k * k * w,
                                     -k * k * k * k * (4.0 - w * w)};
    };
    auto sign = [](double x) { return x > 0.0 ? 1 : (x < 0.0 ? -1 : 0); };

    KernelCheckReport rep;
    rep.name = "sign_table";
    rep.grid = "4 omega regions x {0.1, 0.5, 1.0} kappa, interior samples";

    for (auto variant : {NumeratorVariant::equation, NumeratorVariant::table}) {
        std::size_t failing = 0, samples = 0;
        for (std::size_t r = 0; r < regions.size(); ++r) {
            for (int term = 0; term < 8; ++term) {
                bool cell_ok = true;
                for (double w : regions[r].omegas) {
                    for (double k : kappas) {
                        const int got = term < 4 ? sign(numerator_terms(w, k, variant)[term])
                                                 : sign(denominator_terms(w, k)[term - 4]);
                        const int want = term < 4 ? numerator_signs[r][term] : denominator_signs[r][term - 4];
                        cell_ok = cell_ok && got == want;
                        ++samples;
                    }
                }
                if (!cell_ok) {
                    ++failing;
                    rep.findings.push_back(std::string(to_string(variant)) + " variant: cell (" + regions[r].label +
                                           ", " + (term < 4 ? "numerator" : "denominator") + " term " +
                                           std::to_string(term % 4 + 1) + ") disagrees with the table");
                }
            }
        }
        KernelCheck c;
        c.name = "sign_cells_" + std::string(to_string(variant)) + "_variant";
        c.kind = CheckKind::predicate;
        c.max_abs_error = static_cast<double>(failing);
        c.samples = samples;
        c.pass = failing == 0;
        rep.checks.push_back(c);
        rep.findings.push_back(std::string(to_string(variant)) + " variant: " + std::to_string(32 - failing) +
                               "/32 sign cells agree");

        double min_ratio = std::numeric_limits<double>::infinity();
        std::size_t ratio_samples = 0;
        for (int i = 0; i <= 800; ++i) {
            const double w = -40.0 + 0.1 * i;
            for (int j = 1; j <= 100; ++j) {
                const double k = 0.01 * j;
                min_ratio = std::min(min_ratio, fourier_numerator(w, k, variant) / fourier_denominator(w, k));
                ++ratio_samples;
            }
        }
        auto ratio = positivity_check("ratio_positive_" + std::string(to_string(variant)) + "_variant", min_ratio,
                                      ratio_samples);
        if (variant == NumeratorVariant::equation) {
            rep.checks.push_back(ratio);
        } else {
            rep.diagnostics.push_back(ratio);
        }
    }
    return rep;
}

KernelCheckReport delta_identity_check(unsigned terms) {
    KernelCheckReport rep;
    rep.name = "delta_epsilon";
    const std::vector<double> eps_values = {0.2, 0.35, 0.5, 1.0, 2.0};
    constexpr int t_points = 50;
    rep.grid = std::to_string(t_points) + " t in [-pi, pi] x eps {0.2, 0.35, 0.5, 1, 2}, " + std::to_string(terms) +
               " series terms";

    double max_err = 0.0, max_imag = 0.0;
    for (int i = 0; i < t_points; ++i) {
        const double t = -pi + two_pi * i / (t_points - 1);
        for (double eps : eps_values) {
            const auto s = delta_eps_series(t, eps, terms);
            max_err = std::max(max_err, std::abs(s.value - delta_eps_closed(t, eps)));
            max_imag = std::max(max_imag, s.imag_residue);
        }
    }
    rep.checks.push_back(equality_check("series_vs_closed_form", max_err, 1e-10, t_points * eps_values.size()));
    rep.checks.push_back(equality_check("series_imaginary_residue", max_imag, 1e-12, t_points * eps_values.size()));

    // Periodic trapezoid rule; error decays like e^{-eps M}.
    double max_norm_err = 0.0;
    for (double eps : {1.0, 0.1, 0.01}) {
        const auto m = static_cast<int>(std::ceil(60.0 / eps));
        CompensatedSum acc;
        for (int j = 0; j < m; ++j) acc.add(delta_eps_closed(-pi + two_pi * j / m, eps));
        max_norm_err = std::max(max_norm_err, std::abs(acc.value() * two_pi / m - 1.0));
    }
    rep.checks.push_back(equality_check("normalization_integral", max_norm_err, 1e-8, 3));

    // Tail bound and geometric rate at t = 0, where every tail term has the same sign.
    double worst_excess = -std::numeric_limits<double>::infinity();
    double worst_rate = 0.0;
    std::size_t rate_samples = 0;
    for (double eps : {0.25, 0.5, 1.0}) {
        double previous = 0.0;
        for (unsigned k = 1; k <= 30; ++k) {
            for (double t : {0.0, 0.3, 1.7, pi}) {
                const double e = std::abs(delta_eps_series(t, eps, k).value - delta_eps_closed(t, eps));
                worst_excess = std::max(worst_excess, e - delta_eps_tail_bound(eps, k));
            }
            const double e0 = std::abs(delta_eps_series(0.0, eps, k).value - delta_eps_closed(0.0, eps));
            // Below ~1e-9 the rounding of the closed form dominates the ratio.
            if (k > 1 && e0 > 1e-9) {
                worst_rate = std::max(worst_rate, std::abs(e0 / previous - std::exp(-eps)));
                ++rate_samples;
            }
            previous = e0;
        }
    }
    KernelCheck bound;
    bound.name = "tail_bound_holds";
    bound.kind = CheckKind::predicate;
    bound.max_abs_error = std::max(worst_excess, 0.0);
    bound.samples = 3 * 30 * 4;
    bound.pass = worst_excess <= 1e-15;
    rep.checks.push_back(bound);
    rep.checks.push_back(equality_check("geometric_rate_exp_minus_eps", worst_rate, 1e-6, rate_samples));
    return rep;
}

TelescopingSides telescoping_sides(const CMatrix& v, const CMatrix& a, const CVector& phi, unsigned first,
                                   unsigned last) {
    if (first < 1 || last < first) throw Error(ErrorKind::invalid_input, "need 1 <= a <= b");
    if (v.rows() != v.cols() || a.rows() != v.rows() || a.cols() != v.cols() || phi.size() != v.rows()) {
        throw Error(ErrorKind::invalid_input, "telescoping operands have inconsistent shapes");
    }
    // V [V*, A] = A - V A V*
    const CMatrix commutator_term = v * (v.adjoint() * a - a * v.adjoint());

    CVector x = phi;  // V^n phi
    Complex before(0.0, 0.0);
    Complex sum(0.0, 0.0);
    for (unsigned n = 1; n <= last; ++n) {
        if (n == first) before = x.dot(a * x);  // n - 1 = a - 1
        x = v * x;
        if (n >= first) sum += x.dot(commutator_term * x);
    }
    const Complex after = x.dot(a * x);

    Eigen::SelfAdjointEigenSolver<CMatrix> eig(a, Eigen::EigenvaluesOnly);
    const double a_norm = eig.eigenvalues().cwiseAbs().maxCoeff();
    return {sum, after - before, 2.0 * a_norm * phi.squaredNorm()};
}

KernelCheckReport telescoping_check(std::size_t dim, unsigned first, unsigned last, std::uint64_t seed,
                                    bool central_a) {
    if (dim < 2) throw Error(ErrorKind::invalid_dimension, "telescoping check needs dim >= 2");
    const CMatrix v = random_unitary(dim, seed);
    const CMatrix a = central_a ? CMatrix::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim))
                                : random_hermitian(dim, seed ^ 0x9e3779b97f4a7c15ULL);
    const CVector phi = complex_gaussian(dim, 1, seed ^ 0xc2b2ae3d27d4eb4fULL).col(0);
    const auto sides = telescoping_sides(v, a, phi, first, last);

    KernelCheckReport rep;
    rep.name = "telescoping";
    rep.grid = "dim " + std::to_string(dim) + ", n = " + std::to_string(first) + ".." + std::to_string(last) +
               ", seed " + std::to_string(seed);
    rep.checks.push_back(equality_check("telescoping_identity", std::abs(sides.sum - sides.ends), 1e-11, 1));
    KernelCheck bound;
    bound.name = "schwarz_bound";
    bound.kind = CheckKind::predicate;
    bound.min_value = sides.bound - std::abs(sides.sum);
    bound.samples = 1;
    bound.pass = std::abs(sides.sum) <= sides.bound;
    rep.checks.push_back(bound);
    return rep;
}

namespace {

KernelCheckReport telescoping_suite(std::uint64_t seed, std::size_t triples) {
    std::mt19937_64 gen(seed);
    std::uniform_int_distribution<unsigned> first_dist(1, 10);
    std::uniform_int_distribution<unsigned> span_dist(0, 30);
    const std::size_t dims[] = {4, 8, 16};

    KernelCheckReport rep;
    rep.name = "telescoping";
    rep.grid = std::to_string(triples) + " seeded (V, A, phi) triples over dims {4, 8, 16}";
    double max_err = 0.0, min_slack = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < triples; ++i) {
        const unsigned a = first_dist(gen);
        const unsigned b = a + span_dist(gen);
        const auto sub = telescoping_check(dims[i % 3], a, b, gen());
        max_err = std::max(max_err, sub.checks[0].max_abs_error);
        min_slack = std::min(min_slack, sub.checks[1].min_value);
    }
    rep.checks.push_back(equality_check("telescoping_identity", max_err, 1e-11, triples));
    KernelCheck bound;
    bound.name = "schwarz_bound";
    bound.kind = CheckKind::predicate;
    bound.min_value = min_slack;
    bound.samples = triples;
    bound.pass = min_slack >= 0.0;
    rep.checks.push_back(bound);
    return rep;
}

KernelCheckReport scaling_suite() {
    KernelCheckReport rep;
    rep.name = "c_scaling";
    rep.grid = "orthonormal rank 1..4 at dim 16; rank-1 vector of norm 2";
    double max_err = 0.0;
    for (std::size_t rank = 1; rank <= 4; ++rank) {
        std::vector<CoefficientProfile> profiles;
        for (std::size_t k = 0; k < rank; ++k) profiles.push_back(CoefficientProfile::power_law(16, 1.0 + k, k + 1));
        const auto pert = RankNPerturbation::from_profiles(profiles, std::vector<double>(rank, 1.0));
        max_err = std::max(max_err, std::abs(c_scaling(pert) - 1.0));
    }
    rep.checks.push_back(equality_check("orthonormal_family_gives_one", max_err, 1e-12, 4));
    CVector doubled = CVector::Zero(16);
    doubled[3] = 2.0;
    const std::vector<CVector> raw{doubled};
    rep.checks.push_back(equality_check("scaled_vector_gives_quarter", std::abs(c_scaling(raw) - 0.25), 1e-15, 1));
    return rep;
}

}  // namespace

double c_scaling(std::span<const CVector> vectors) {
    if (vectors.empty()) throw Error(ErrorKind::undefined_scaling, "empty perturbation");
    const auto n = static_cast<Eigen::Index>(vectors.size());
    CMatrix gram(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) gram(i, j) = vectors[i].dot(vectors[j]);
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(gram, Eigen::EigenvaluesOnly);
    const double top = eig.eigenvalues().maxCoeff();
    if (!(top > 0.0)) throw Error(ErrorKind::undefined_scaling, "zero perturbation has no scaling");
    return 1.0 / top;
}

double c_scaling(const RankNPerturbation& pert) {
    std::vector<CVector> cols;
    for (Eigen::Index k = 0; k < pert.vectors().cols(); ++k) cols.emplace_back(pert.vectors().col(k));
    return c_scaling(cols);
}

bool VerifySuite::pass() const {
    return std::all_of(reports.begin(), reports.end(), [](const KernelCheckReport& r) { return r.pass(); });
}

VerifySuite run_verify_suite(std::uint64_t seed) {
    VerifySuite suite;
    suite.reports.push_back(delta_identity_check(200));

    std::vector<double> omegas, kappas;
    for (int i = 0; i <= 40; ++i) omegas.push_back(-10.0 + 0.5 * i);
    for (int j = 1; j <= 10; ++j) kappas.push_back(0.1 * j);
    suite.fourier_rows = fourier_grid(omegas, kappas);
    suite.reports.push_back(fourier_check(suite.fourier_rows));

    suite.reports.push_back(sign_table_check());
    suite.reports.push_back(telescoping_suite(seed, 100));
    suite.reports.push_back(scaling_suite());
    return suite;
}

}  // namespace floquet_lab
