#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "floquet_lab/error.hpp"
#include "floquet_lab/verify.hpp"

using namespace floquet_lab;

namespace {

constexpr double pi = std::numbers::pi;

ErrorKind kind_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an Error");
    return ErrorKind::invalid_input;
}

// Composite Simpson on [-L, L] of the textbook kernel, written out independently of phi_lambda.
double simpson_transform(double omega, double kappa) {
    constexpr double half_width = 20.0;
    constexpr int panels = 400000;
    const double h = 2.0 * half_width / panels;
    auto f = [&](double t) {
        if (t == 0.0) return pi * kappa;
        const std::complex<double> kernel =
            std::complex<double>(0.0, pi) * std::exp(-2.0 * std::abs(t)) / t * (1.0 - std::polar(1.0, kappa * t));
        return (kernel * std::polar(1.0, -omega * t)).real();
    };
    double sum = f(-half_width) + f(half_width);
    for (int i = 1; i < panels; ++i) sum += f(-half_width + i * h) * (i % 2 ? 4.0 : 2.0);
    return sum * h / 3.0;
}

const KernelCheck* find_check(const KernelCheckReport& rep, const std::string& name) {
    for (const auto& c : rep.checks) {
        if (c.name == name) return &c;
    }
    for (const auto& c : rep.diagnostics) {
        if (c.name == name) return &c;
    }
    return nullptr;
}

}  // namespace

TEST_CASE("check semantics") {
    CHECK(equality_check("e", 1e-7, 1e-6, 3).pass);
    CHECK_FALSE(equality_check("e", 1e-6, 1e-6, 3).pass);
    CHECK_FALSE(equality_check("e", NAN, 1e-6, 3).pass);
    CHECK(positivity_check("p", 1e-300, 3).pass);
    CHECK_FALSE(positivity_check("p", 0.0, 3).pass);

    KernelCheckReport rep;
    rep.checks.push_back(equality_check("a", 1e-9, 1e-8, 1));
    rep.diagnostics.push_back(equality_check("b", 1.0, 1e-8, 1));
    CHECK(rep.pass());
    CHECK(rep.max_abs_error() == doctest::Approx(1e-9));
    rep.checks.push_back(positivity_check("c", -1.0, 1));
    CHECK_FALSE(rep.pass());
}

TEST_CASE("smoothed delta closed form") {
    const double e1 = std::exp(-1.0);
    CHECK(delta_eps_closed(0.0, 1.0) == doctest::Approx((1.0 + e1) / (1.0 - e1) / (2.0 * pi)).epsilon(1e-15));
    CHECK(delta_eps_closed(0.0, 1.0) == doctest::Approx(0.344403).epsilon(1e-6));
    CHECK(delta_eps_closed(pi, 1e-9) < 1e-9);
    CHECK(delta_eps_closed(2.0, 50.0) == doctest::Approx(1.0 / (2.0 * pi)).epsilon(1e-15));
    CHECK(1.0 / (2.0 * pi) == doctest::Approx(0.159155).epsilon(1e-6));
    CHECK(kind_of([] { delta_eps_closed(0.0, 0.0); }) == ErrorKind::invalid_input);
    CHECK(kind_of([] { delta_eps_closed(0.0, -1.0); }) == ErrorKind::invalid_input);
}

TEST_CASE("smoothed delta series") {
    const auto s = delta_eps_series(0.3, 0.5, 60);
    CHECK(std::abs(s.value - delta_eps_closed(0.3, 0.5)) < 1e-10);
    CHECK(s.imag_residue < 1e-12);
    CHECK(delta_eps_series(1.7, 0.8, 0).value == 1.0 / (2.0 * pi));

    for (double eps : {0.2, 0.5, 1.0}) {
        for (unsigned terms : {1u, 5u, 20u, 80u}) {
            for (double t : {0.0, 0.9, pi}) {
                const double err = std::abs(delta_eps_series(t, eps, terms).value - delta_eps_closed(t, eps));
                CHECK(err <= delta_eps_tail_bound(eps, terms) * (1.0 + 1e-12) + 1e-15);
            }
        }
    }
}

TEST_CASE("smoothed delta series converges geometrically") {
    const double eps = 0.4;
    // At t = 0 the truncation error is exactly (1/pi) r^(m+1) / (1 - r): each term adds a factor e^-eps.
    for (unsigned m = 5; m < 40; ++m) {
        const double e1 = delta_eps_closed(0.0, eps) - delta_eps_series(0.0, eps, m).value;
        const double e2 = delta_eps_closed(0.0, eps) - delta_eps_series(0.0, eps, m + 1).value;
        CHECK(e2 / e1 == doctest::Approx(std::exp(-eps)).epsilon(1e-6));
    }
}

TEST_CASE("smoothed delta normalization") {
    for (double eps : {1.0, 0.3, 0.05}) {
        const int m = static_cast<int>(std::ceil(80.0 / eps));
        double sum = 0.0;
        for (int i = 0; i < m; ++i) sum += delta_eps_closed(-pi + 2.0 * pi * i / m, eps);
        CHECK(std::abs(sum * 2.0 * pi / m - 1.0) < 1e-10);
    }
}

TEST_CASE("kernel phi_lambda") {
    for (double t : {-3.0, -0.2, 0.0, 0.7, 5.0}) CHECK(std::abs(phi_lambda(t, 0.0)) == 0.0);
    CHECK(phi_lambda(0.0, 1.0) == Complex(pi, 0.0));
    CHECK(std::abs(phi_lambda(1e-8, 1.0) - pi) < 1e-7);
    CHECK(std::abs(phi_lambda(-1e-8, 0.5) - pi * 0.5) < 1e-7);
    CHECK(kind_of([] { phi_lambda(1.0, 1.5); }) == ErrorKind::out_of_range);
    CHECK(kind_of([] { phi_lambda(1.0, -0.1); }) == ErrorKind::out_of_range);

    // Envelope: |1 - e^{i x}| <= min(|x|, 2).
    for (double kappa : {0.1, 0.6, 1.0}) {
        for (double t = -15.0; t <= 15.0; t += 0.37) {
            const double env = pi * std::exp(-2.0 * std::abs(t)) * std::min(kappa, 2.0 / std::abs(t));
            CHECK(std::abs(phi_lambda(t, kappa)) <= env * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("analytic transform values") {
    CHECK(fourier_numerator(0.0, 1.0) == doctest::Approx(80.0));
    CHECK(fourier_denominator(0.0, 1.0) == doctest::Approx(60.0));
    CHECK(phi_tilde_analytic(0.0, 1.0) == doctest::Approx(pi * std::atan(4.0 / 3.0)).epsilon(1e-15));
    CHECK(phi_tilde_analytic(0.0, 1.0) == doctest::Approx(2.0 * pi * std::atan(0.5)).epsilon(1e-14));
    CHECK(std::abs(phi_tilde_analytic(0.0, 1.0) - 2.9131838445828108) < 1e-14);  // 30-digit reference
    for (double w : {-7.0, 0.0, 3.0}) CHECK(phi_tilde_analytic(w, 0.0) == 0.0);
    // The two numerator variants differ only through the second term.
    CHECK(fourier_numerator(0.0, 0.7, NumeratorVariant::table) == fourier_numerator(0.0, 0.7));
    CHECK(fourier_numerator(1.0, 0.7, NumeratorVariant::table) != fourier_numerator(1.0, 0.7));
}

TEST_CASE("analytic transform is positive on the wide grid") {
    double lowest = 1.0;
    for (int i = 0; i <= 800; ++i) {
        for (int j = 1; j <= 100; ++j) lowest = std::min(lowest, phi_tilde_analytic(-40.0 + 0.1 * i, 0.01 * j));
    }
    CHECK(lowest > 0.0);
}

TEST_CASE("two-part route agrees with the closed form") {
    for (double w = -10.0; w <= 10.0; w += 0.25) {
        for (double k = 0.05; k <= 1.0; k += 0.05) CHECK(std::abs(phi_tilde_two_part(w, k) - phi_tilde_analytic(w, k)) < 1e-10);
    }
}

TEST_CASE("quadrature transform") {
    const auto spot = phi_tilde_numeric(0.0, 1.0);
    CHECK(std::abs(spot.value - phi_tilde_analytic(0.0, 1.0)) < 1e-6);
    CHECK(spot.imag_residue < 1e-8);
    CHECK(spot.error_estimate < 1e-8);
    CHECK(std::abs(phi_tilde_numeric(2.5, 0.0).value) < 1e-10);

    for (double w : {-9.5, -2.0, 0.5, 4.0}) {
        for (double k : {0.3, 1.0}) {
            const double q = phi_tilde_numeric(w, k).value;
            CHECK(std::abs(q - simpson_transform(w, k)) < 1e-8);
            CHECK(std::abs(q - phi_tilde_analytic(w, k)) < 1e-6);
        }
    }
    CHECK(kind_of([] { phi_tilde_numeric(0.0, 2.0); }) == ErrorKind::out_of_range);
}

TEST_CASE("Fourier check selects the quadrature-consistent numerator") {
    std::vector<double> omegas, kappas;
    for (int i = 0; i <= 40; i += 4) omegas.push_back(-10.0 + 0.5 * i);
    for (int j = 1; j <= 10; j += 3) kappas.push_back(0.1 * j);
    const auto rows = fourier_grid(omegas, kappas);
    CHECK(rows.size() == omegas.size() * kappas.size());
    const auto rep = fourier_check(rows);
    CHECK(rep.pass());
    REQUIRE(find_check(rep, "analytic_vs_quadrature"));
    CHECK(find_check(rep, "analytic_vs_quadrature")->max_abs_error < 1e-6);
    CHECK(find_check(rep, "spot_value_omega0_kappa1")->pass);
    const bool names_equation = std::any_of(rep.findings.begin(), rep.findings.end(), [](const std::string& f) {
        return f.find("matching quadrature: equation") != std::string::npos;
    });
    CHECK(names_equation);
    CHECK_FALSE(rep.diagnostics.empty());
}

TEST_CASE("sign table") {
    const auto rep = sign_table_check();
    CHECK(rep.pass());
    // kappa^2 (4 - omega^2) at omega = 3 is negative.
    const double third = fourier_numerator(3.0, 0.5) / (4.0 * 0.5) - 169.0 - 0.5 * 3.0 * 13.0 + 0.125 * 3.0;
    CHECK(third == doctest::Approx(0.25 * (4.0 - 9.0)));
    CHECK(third < 0.0);
    REQUIRE(find_check(rep, "sign_cells_equation_variant"));
    CHECK(find_check(rep, "sign_cells_equation_variant")->pass);
    CHECK(find_check(rep, "sign_cells_table_variant")->pass);
    CHECK(find_check(rep, "ratio_positive_equation_variant")->pass);
}

TEST_CASE("delta identity report") {
    const auto rep = delta_identity_check(200);
    CHECK(rep.pass());
    CHECK(find_check(rep, "series_vs_closed_form")->max_abs_error < 1e-10);
    CHECK(find_check(rep, "series_vs_closed_form")->samples == 250);
    CHECK(find_check(rep, "normalization_integral")->max_abs_error < 1e-8);
}

TEST_CASE("telescoping identity") {
    const auto one = telescoping_check(6, 1, 1, 3);
    CHECK(one.pass());
    CHECK(one.max_abs_error() < 1e-13);

    const auto many = telescoping_check(8, 1, 20, 42);
    CHECK(many.pass());
    CHECK(many.max_abs_error() < 1e-11);

    const auto central = telescoping_check(8, 2, 9, 5, true);
    CHECK(central.pass());

    const CMatrix v = random_unitary(5, 9);
    const CMatrix id = CMatrix::Identity(5, 5);
    CVector phi = complex_gaussian(5, 1, 10).col(0);
    const auto sides = telescoping_sides(v, id, phi, 1, 12);
    CHECK(std::abs(sides.sum) < 1e-13);
    CHECK(std::abs(sides.ends) < 1e-13);

    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const CMatrix vv = random_unitary(6, seed);
        const CMatrix a = random_hermitian(6, seed + 50);
        const CVector p = complex_gaussian(6, 1, seed + 90).col(0);
        const auto s = telescoping_sides(vv, a, p, 3, 40);
        CHECK(std::abs(s.sum - s.ends) < 1e-11);
        CHECK(std::abs(s.sum) <= s.bound * (1.0 + 1e-12));
    }
}

TEST_CASE("c scaling") {
    const auto pert = RankNPerturbation::from_profiles(
        std::vector{CoefficientProfile::power_law(16, 2.0), CoefficientProfile::power_law(16, 0.6, 1)}, {1.0, 1.0});
    CHECK(c_scaling(pert) == doctest::Approx(1.0).epsilon(1e-12));

    CVector twice = CVector::Zero(4);
    twice[1] = 2.0;
    std::vector<CVector> scaled = {twice};
    CHECK(c_scaling(scaled) == doctest::Approx(0.25).epsilon(1e-15));

    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const CMatrix g = complex_gaussian(10, 3, seed);
        std::vector<CVector> cols = {g.col(0), g.col(1), g.col(2)};
        Eigen::SelfAdjointEigenSolver<CMatrix> es(g * g.adjoint());
        CHECK(c_scaling(cols) * es.eigenvalues().maxCoeff() == doctest::Approx(1.0).epsilon(1e-12));
    }

    std::vector<CVector> zero = {CVector::Zero(3)};
    CHECK(kind_of([&] { c_scaling(zero); }) == ErrorKind::undefined_scaling);
    std::vector<CVector> none;
    CHECK(kind_of([&] { c_scaling(none); }) == ErrorKind::undefined_scaling);
}

TEST_CASE("verify suite") {
    const auto suite = run_verify_suite();
    CHECK(suite.pass());
    CHECK(suite.fourier_rows.size() == 410);
    std::vector<std::string> names;
    for (const auto& r : suite.reports) {
        names.push_back(r.name);
        CHECK_MESSAGE(r.pass(), r.name);
    }
    CHECK(names.size() == 5);
}
