#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/LU>

#include "floquet_lab/error.hpp"
#include "floquet_lab/spectral.hpp"

using namespace floquet_lab;

namespace {

constexpr double pi = std::numbers::pi;

CVector basis(std::size_t dim, std::size_t k) {
    CVector e = CVector::Zero(static_cast<Eigen::Index>(dim));
    e[static_cast<Eigen::Index>(k)] = 1.0;
    return e;
}

FloquetModel profile_model(BaseKind kind, std::size_t dim, std::vector<double> gammas, std::vector<double> lambdas) {
    std::vector<CoefficientProfile> ps;
    for (std::size_t k = 0; k < gammas.size(); ++k) ps.push_back(CoefficientProfile::power_law(dim, gammas[k], 40 + k));
    return FloquetModel(build_base_hamiltonian(kind, dim), RankNPerturbation::from_profiles(ps, std::move(lambdas)));
}

double circular_distance(double a, double b) { return std::abs(std::remainder(a - b, two_pi)); }

// Textbook form in extended precision; the cancellation in the denominator costs about
// log10(1/eps^2) digits.
double poisson_oracle(double t, double eps) {
    const long double r = std::exp(-static_cast<long double>(eps));
    const long double den = 1.0L - 2.0L * r * std::cos(static_cast<long double>(t)) + r * r;
    return static_cast<double>((1.0L - r * r) / (2.0L * std::numbers::pi_v<long double> * den));
}

}  // namespace

TEST_CASE("quasi-energies of the free rotor") {
    const auto base = build_base_hamiltonian(BaseKind::rotor, 24);
    std::vector<CVector> e0 = {basis(24, 3)};
    const FloquetModel model(base, RankNPerturbation(e0, {0.0}));
    const auto res = quasi_energies(model);
    std::vector<double> expected;
    for (std::size_t n = 0; n < 24; ++n) expected.push_back(wrap_phase(base.level_phase(n)));
    std::sort(expected.begin(), expected.end());
    REQUIRE(res.converged);
    for (std::size_t j = 0; j < 24; ++j) CHECK(circular_distance(res.theta[j], expected[j]) < 1e-10);
}

TEST_CASE("quasi-energy of the scalar model") {
    BaseParams p;
    p.period_T = 1.1;
    p.custom_alpha = {3.0};
    const auto base = build_base_hamiltonian(BaseKind::custom, 1, p);
    std::vector<CVector> e0 = {basis(1, 0)};
    const FloquetModel model(base, RankNPerturbation(e0, {0.4}));
    const auto res = quasi_energies(model);
    CHECK(circular_distance(res.theta[0], wrap_phase(1.1 * 3.0 - 0.4)) < 1e-14);
}

TEST_CASE("quasi-energies reproduce the determinant") {
    for (auto kind : {BaseKind::rotor, BaseKind::linear, BaseKind::harmonic}) {
        const auto model = profile_model(kind, 48, {2.0, 0.6}, {0.8, 1.9});
        const CMatrix v = dense_floquet_matrix(model);
        const auto res = quasi_energies(v);
        Complex product = 1.0;
        for (double t : res.theta) product *= std::polar(1.0, -t);
        const Complex det = v.partialPivLu().determinant();
        CHECK(std::abs(product - det) / std::abs(det) < 1e-8);
    }
}

TEST_CASE("spectral result invariants") {
    const auto model = profile_model(BaseKind::rotor, 96, {0.7, 1.5, 3.0}, {0.5, 1.0, 2.0});
    const auto res = quasi_energies(model);
    CHECK(res.converged);
    CHECK(std::is_sorted(res.theta.begin(), res.theta.end()));
    CHECK(res.theta.front() >= 0.0);
    CHECK(res.theta.back() < two_pi);
    CHECK(*std::max_element(res.residuals.begin(), res.residuals.end()) < 1e-8);
    const CMatrix& w = res.eigenvectors;
    CHECK((w.adjoint() * w - CMatrix::Identity(96, 96)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("global phase shifts every quasi-energy") {
    const auto model = profile_model(BaseKind::rotor, 64, {1.2}, {1.0});
    const CMatrix v = dense_floquet_matrix(model);
    const auto before = quasi_energies(v);
    for (double alpha : {0.3, 2.0, -1.0}) {
        const auto after = quasi_energies(std::polar(1.0, alpha) * v);
        // Match as sets on the circle: each shifted phase has a partner.
        for (double t : before.theta) {
            const double target = t - alpha;
            double best = 1.0;
            for (double s : after.theta) best = std::min(best, circular_distance(s, target));
            CHECK(best < 1e-10);
        }
    }
}

TEST_CASE("degenerate spectrum keeps an orthonormal eigenbasis") {
    BaseParams p;
    p.period_T = 2.0 * pi;
    const auto base = build_base_hamiltonian(BaseKind::rotor, 20, p);  // U = identity
    std::vector<CVector> e = {basis(20, 0), basis(20, 5)};
    const auto res = quasi_energies(FloquetModel(base, RankNPerturbation(e, {0.7, 1.4})));
    CHECK(res.converged);
    const CMatrix& w = res.eigenvectors;
    CHECK((w.adjoint() * w - CMatrix::Identity(20, 20)).cwiseAbs().maxCoeff() < 1e-12);
    const std::size_t zeros = static_cast<std::size_t>(std::count_if(
        res.theta.begin(), res.theta.end(), [](double t) { return circular_distance(t, 0.0) < 1e-12; }));
    CHECK(zeros == 18);
}

TEST_CASE("level spacing hand cases") {
    std::vector<double> grid;
    for (int j = 0; j < 8; ++j) grid.push_back(two_pi * j / 8.0);
    const auto uniform = level_spacing_stats(grid);
    for (double s : uniform.spacings) CHECK(s == doctest::Approx(1.0).epsilon(1e-14));
    for (double r : uniform.ratios) CHECK(r == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(uniform.mean_ratio == doctest::Approx(1.0));

    const auto three = level_spacing_stats(std::vector<double>{0.0, pi / 2.0, pi});
    REQUIRE(three.spacings.size() == 3);
    CHECK(three.spacings[0] == doctest::Approx(0.75).epsilon(1e-14));
    CHECK(three.spacings[1] == doctest::Approx(0.75).epsilon(1e-14));
    CHECK(three.spacings[2] == doctest::Approx(1.5).epsilon(1e-14));

    const auto dup = level_spacing_stats(std::vector<double>{1.0, 1.0, 2.0, 4.0});
    CHECK(dup.spacings[0] == 0.0);
    for (double r : dup.ratios) CHECK((r >= 0.0 && r <= 1.0));

    CHECK_THROWS_AS(level_spacing_stats(std::vector<double>{0.0, 1.0}), Error);
}

TEST_CASE("spacing statistics of random unitaries") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto stats = level_spacing_stats(quasi_energies(random_unitary(60, seed)));
        CHECK(stats.mean_ratio > 0.0);
        CHECK(stats.mean_ratio < 1.0);
        double total = 0.0;
        for (double s : stats.spacings) total += s;
        CHECK(total == doctest::Approx(60.0).epsilon(1e-12));
        CHECK(std::is_sorted(stats.cdf_x.begin(), stats.cdf_x.end()));
        CHECK(std::is_sorted(stats.cdf_y.begin(), stats.cdf_y.end()));
        CHECK(stats.cdf_y.back() == doctest::Approx(1.0));
    }
}

TEST_CASE("Poisson kernel") {
    CHECK(poisson_kernel(0.0, 1.0) == doctest::Approx((1.0 + std::exp(-1.0)) / (two_pi * (1.0 - std::exp(-1.0)))).epsilon(1e-15));
    CHECK(poisson_kernel(0.0, 1.0) == doctest::Approx(0.344403).epsilon(1e-6));
    for (double t : {-3.0, -0.1, 0.0, 1e-9, 2.0, pi}) {
        for (double eps : {1e-4, 0.01, 0.5, 3.0}) {
            CHECK(poisson_kernel(t, eps) == doctest::Approx(poisson_oracle(t, eps)).epsilon(1e-10));
            CHECK(poisson_kernel(t + two_pi, eps) == doctest::Approx(poisson_kernel(t, eps)).epsilon(1e-12));
        }
    }
    CHECK(poisson_kernel(1.0, 40.0) == doctest::Approx(1.0 / two_pi).epsilon(1e-14));
}

TEST_CASE("spectral density of an eigenvector") {
    const auto model = profile_model(BaseKind::rotor, 32, {2.0}, {1.0});
    const auto res = quasi_energies(model);
    const CVector y = res.eigenvectors.col(7);
    ScanAxes axes{{res.theta[7], wrap_phase(res.theta[7] + pi)}, {1.0, 0.25}};
    const auto scan = spectral_density(res, y, axes);
    CHECK(scan.at(0, 0) == doctest::Approx(0.344403).epsilon(1e-6));
    CHECK(scan.at(0, 1) == doctest::Approx(poisson_oracle(0.0, 0.25)).epsilon(1e-10));
    CHECK(scan.at(1, 0) == doctest::Approx(poisson_oracle(pi, 1.0)).epsilon(1e-10));
}

TEST_CASE("spectral density ignores eigenvectors orthogonal to y") {
    const auto model = profile_model(BaseKind::rotor, 16, {2.0}, {1.0});
    const auto res = quasi_energies(model);
    const CVector y = (res.eigenvectors.col(2) + res.eigenvectors.col(9)) / std::sqrt(2.0);
    ScanAxes axes{{res.theta[4]}, {0.01}};
    const double value = spectral_density(res, y, axes).at(0, 0);
    const double expected = 0.5 * (poisson_oracle(res.theta[4] - res.theta[2], 0.01) +
                                   poisson_oracle(res.theta[4] - res.theta[9], 0.01));
    CHECK(value == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("spectral density integrates to the squared norm") {
    const auto model = profile_model(BaseKind::rotor, 24, {0.8}, {1.3});
    const auto res = quasi_energies(model);
    const CVector y = basis(24, 0);
    for (double eps : {1.0, 0.1, 0.02}) {
        // Periodic trapezoid: spectrally accurate once the grid resolves the kernel width.
        const std::size_t m = static_cast<std::size_t>(std::ceil(60.0 / eps));
        ScanAxes axes;
        for (std::size_t i = 0; i < m; ++i) axes.theta_grid.push_back(two_pi * i / m);
        axes.epsilon_ladder = {eps};
        const auto scan = spectral_density(res, y, axes);
        double total = 0.0;
        for (double v : scan.values) {
            CHECK(v >= 0.0);
            total += v;
        }
        CHECK(std::abs(total * two_pi / m - 1.0) < 1e-6);
    }
}

TEST_CASE("eigen and resolvent forms of the density agree") {
    const auto model = profile_model(BaseKind::rotor, 20, {0.6, 2.0}, {1.0, 0.5});
    const auto res = quasi_energies(model);
    const CVector y = (basis(20, 0) + basis(20, 3)) / std::sqrt(2.0);
    const auto axes = ScanAxes::uniform(40, 1, 8);
    const auto a = spectral_density(res, y, axes);
    const auto b = spectral_density_resolvent(dense_floquet_matrix(model), y, axes);
    REQUIRE(a.values.size() == b.values.size());
    for (std::size_t i = 0; i < a.values.size(); ++i) CHECK(std::abs(a.values[i] - b.values[i]) < 1e-8);
}

TEST_CASE("spectral density refuses an unconverged spectrum") {
    const auto model = profile_model(BaseKind::rotor, 8, {2.0}, {1.0});
    auto res = quasi_energies(model);
    res.converged = false;
    try {
        spectral_density(res, basis(8, 0), ScanAxes::uniform(4, 1, 2));
        FAIL("expected unconverged-spectrum");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::unconverged_spectrum);
    }
}

TEST_CASE("default scan axes") {
    const auto axes = ScanAxes::defaults();
    CHECK(axes.theta_grid.size() == 512);
    CHECK(axes.theta_grid.front() == 0.0);
    CHECK(axes.theta_grid.back() < two_pi);
    REQUIRE(axes.epsilon_ladder.size() == 14);
    CHECK(axes.epsilon_ladder.front() == 0.5);
    CHECK(axes.epsilon_ladder.back() == std::ldexp(1.0, -14));
    CHECK(std::is_sorted(axes.epsilon_ladder.rbegin(), axes.epsilon_ladder.rend()));
}

TEST_CASE("g_epsilon scalar closed form") {
    BaseParams p;
    p.custom_alpha = {0.0};
    const auto base = build_base_hamiltonian(BaseKind::custom, 1, p);
    const CMatrix a = CMatrix::Ones(1, 1);
    for (double eps : {2.0, 0.5, 1e-3, 1e-8}) {
        const double expected = 1.0 / std::pow(1.0 + std::exp(-eps), 2);
        CHECK(g_epsilon_norm(base, a, pi, eps) == doctest::Approx(expected).epsilon(1e-13));
    }
    CHECK(g_epsilon_norm(base, a, pi, 1e-12) == doctest::Approx(0.25).epsilon(1e-10));
}

TEST_CASE("g_epsilon ignores aligned levels with zero coefficient") {
    const auto base = build_base_hamiltonian(BaseKind::linear, 6);
    CVector a = CVector::Zero(6);
    a[0] = 1.0;
    const double aligned = wrap_phase(base.level_phase(3));
    const auto terms = g_epsilon_terms(base, a, aligned, 1e-6);
    CHECK(terms[3] == 0.0);
    CHECK(g_epsilon_norm(base, a, aligned, 1e-6) == doctest::Approx(terms[0]));
}

TEST_CASE("g_epsilon approaches the squared norm for large epsilon") {
    const auto base = build_base_hamiltonian(BaseKind::rotor, 40);
    const CVector a = materialize_profile(CoefficientProfile::power_law(40, 1.0, 2));
    CHECK(g_epsilon_norm(base, a, 1.0, 40.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("g_epsilon matrix norm matches the Gram eigenvalue oracle") {
    const auto base = build_base_hamiltonian(BaseKind::rotor, 30);
    const CMatrix a = complex_gaussian(30, 3, 4);
    const double theta = 1.7, eps = 0.05;
    const double r = std::exp(-eps);
    CMatrix g = CMatrix::Zero(3, 3);
    for (Eigen::Index n = 0; n < 30; ++n) {
        const double den = std::norm(1.0 - r * std::polar(1.0, theta - base.level_phase(static_cast<std::size_t>(n))));
        g += a.row(n).adjoint() * a.row(n) / den;
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> es(g);
    CHECK(g_epsilon_norm(base, a, theta, eps) == doctest::Approx(es.eigenvalues().maxCoeff()).epsilon(1e-12));
    CHECK(trace_g_epsilon(base, a, theta, eps).value == doctest::Approx(g.trace().real()).epsilon(1e-12));
}

TEST_CASE("g_epsilon terms turn once along the ladder") {
    // Each term is 1 / (1 - 2 r cos(phi) + r^2) with r = e^-eps: it grows as eps shrinks while
    // e^-eps <= cos(phi) and falls afterwards.
    const auto base = build_base_hamiltonian(BaseKind::rotor, 50);
    const CVector a = materialize_profile(CoefficientProfile::power_law(50, 0.9, 5));
    for (double theta : {0.0, 0.4, 3.0, 5.9}) {
        std::vector<double> previous;
        for (int k = 1; k <= 14; ++k) {
            const double eps = std::ldexp(1.0, -k);
            const auto terms = g_epsilon_terms(base, a, theta, eps);
            for (std::size_t n = 0; n < 50 && k > 1; ++n) {
                CHECK(terms[n] >= 0.0);
                const double c = std::cos(theta - base.level_phase(n));
                const double turn = c > 0.0 ? -std::log(c) : std::numeric_limits<double>::infinity();
                const double slack = 1e-12 * terms[n];
                if (eps >= turn) CHECK(terms[n] >= previous[n] - slack);
                if (2.0 * eps <= turn) CHECK(terms[n] <= previous[n] + slack);
            }
            previous = terms;
        }
    }
}

TEST_CASE("trace of G at epsilon zero") {
    BaseParams p;
    p.custom_alpha = {0.0, 1.0};
    const auto base = build_base_hamiltonian(BaseKind::custom, 2, p);
    const CMatrix a = basis(2, 0);
    const auto anti = trace_g_epsilon(base, a, pi, 0.0);
    CHECK_FALSE(anti.divergent);
    CHECK(anti.value == doctest::Approx(0.25).epsilon(1e-14));
    const auto aligned = trace_g_epsilon(base, a, 0.0, 0.0);
    CHECK(aligned.divergent);
    CHECK(std::isinf(aligned.value));
    CHECK(trace_g_epsilon(base, a, 0.3, 50.0).value == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("Q boundary operator") {
    const auto base = build_base_hamiltonian(BaseKind::rotor, 12);
    const auto pert = RankNPerturbation::from_profiles(
        std::vector{CoefficientProfile::power_law(12, 1.0, 1), CoefficientProfile::power_law(12, 2.0, 2)}, {1.0, 1.0});
    const auto far = q_boundary(base, pert.vectors(), 0.7, 60.0);
    CHECK((far.q - CMatrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(far.hs_norm == doctest::Approx(std::sqrt(2.0)).epsilon(1e-13));

    BaseParams p;
    p.custom_alpha = {1.5};
    const auto scalar = build_base_hamiltonian(BaseKind::custom, 1, p);
    const double theta = 0.9, eps = 0.2;
    const Complex z = std::polar(std::exp(-eps), theta);
    const Complex expected = 1.0 / (1.0 - std::polar(1.0, -scalar.level_phase(0)) * z);
    const auto q = q_boundary(scalar, CMatrix::Ones(1, 1), theta, eps);
    CHECK(std::abs(q.q(0, 0) - expected) < 1e-14);
    CHECK(q.hs_norm == doctest::Approx(std::abs(expected)).epsilon(1e-14));
}

TEST_CASE("Q Cauchy differences shrink at a generic angle") {
    const auto base = build_base_hamiltonian(BaseKind::rotor, 64);
    const CMatrix a = materialize_profile(CoefficientProfile::power_law(64, 2.0, 3));
    // Midway between the two closest levels around 1.0.
    std::vector<double> phases;
    for (std::size_t n = 0; n < 64; ++n) phases.push_back(wrap_phase(base.level_phase(n)));
    std::sort(phases.begin(), phases.end());
    const auto hi = std::upper_bound(phases.begin(), phases.end(), 1.0);
    const double theta = 0.5 * (*(hi - 1) + *hi);
    const double gap = 0.5 * (*hi - *(hi - 1));
    std::vector<double> diffs;
    for (int k = 1; k < 20; ++k) {
        const auto q1 = q_boundary(base, a, theta, std::ldexp(1.0, -k)).q;
        const auto q2 = q_boundary(base, a, theta, std::ldexp(1.0, -k - 1)).q;
        diffs.push_back((q1 - q2).norm());
    }
    const int start = static_cast<int>(std::ceil(-std::log2(gap))) + 1;
    for (int k = start; k + 1 < static_cast<int>(diffs.size()); ++k) CHECK(diffs[k + 1] < diffs[k]);
}

TEST_CASE("growth exponent of synthetic ladders") {
    std::vector<double> eps, inv2, flat, zero;
    for (int k = 1; k <= 12; ++k) {
        const double e = std::ldexp(1.0, -k);
        eps.push_back(e);
        inv2.push_back(3.0 / (e * e));
        flat.push_back(0.7);
        zero.push_back(0.0);
    }
    CHECK(growth_exponent(eps, inv2) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(std::abs(growth_exponent(eps, flat)) < 1e-12);
    CHECK(growth_exponent(eps, zero) == 0.0);
}

TEST_CASE("singular-support scan") {
    const auto base = build_base_hamiltonian(BaseKind::rotor, 64);
    SupportScanConfig config;
    config.axes = ScanAxes::uniform(64, 1, 14);

    const auto empty = singular_support_scan(base, CMatrix::Zero(64, 1), config);
    CHECK(empty.flagged.empty());

    const CMatrix l1 = materialize_profile(CoefficientProfile::power_law(64, 2.0));
    const auto smooth = singular_support_scan(base, l1, config);
    CHECK(smooth.g_values.values.size() == 64 * 14);
    // At finite size the only growth comes from grid points next to unperturbed levels.
    const Eigen::VectorXd weights = l1.col(0).cwiseAbs2();
    for (double theta : smooth.flagged) {
        double nearest = two_pi;
        for (std::size_t n = 0; n < 64; ++n) {
            if (weights[static_cast<Eigen::Index>(n)] > 1e-6) {
                nearest = std::min(nearest, circular_distance(theta, base.level_phase(n)));
            }
        }
        CHECK(nearest < two_pi / 64);
    }

    SupportScanConfig aligned;
    aligned.axes.theta_grid = {wrap_phase(base.level_phase(5))};
    const auto peak = singular_support_scan(base, basis(64, 5), aligned);
    CHECK(peak.g_exponent[0] == doctest::Approx(2.0).epsilon(0.05));
    REQUIRE(peak.flagged.size() == 1);
    CHECK(peak.flagged[0] == aligned.axes.theta_grid[0]);

    const auto again = singular_support_scan(base, l1, config);
    CHECK(again.g_exponent == smooth.g_exponent);
    CHECK(again.q_exponent == smooth.q_exponent);
}
