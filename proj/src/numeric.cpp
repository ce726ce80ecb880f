#include "floquet_lab/numeric.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "floquet_lab/error.hpp"

namespace floquet_lab {

void CompensatedSum::add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
        carry_ += (sum_ - t) + x;
    } else {
        carry_ += (x - t) + sum_;
    }
    sum_ = t;
}

double compensated_sum(std::span<const double> xs) noexcept {
    CompensatedSum acc;
    for (double x : xs) acc.add(x);
    return acc.value();
}

double stable_norm(const CVector& x) noexcept {
    CompensatedSum acc;
    for (Eigen::Index i = 0; i < x.size(); ++i) acc.add(std::norm(x[i]));
    return std::sqrt(acc.value());
}

double wrap_phase(double theta) noexcept {
    double r = std::fmod(theta, two_pi);
    if (r < 0.0) r += two_pi;
    if (r >= two_pi) r = 0.0;
    return r;
}

CMatrix complex_gaussian(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
    CMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            const double re = normal(gen);
            const double im = normal(gen);
            m(i, j) = Complex(re, im);
        }
    }
    return m;
}

CMatrix random_unitary(std::size_t dim, std::uint64_t seed) {
    const CMatrix g = complex_gaussian(dim, dim, seed);
    Eigen::HouseholderQR<CMatrix> qr(g);
    return qr.householderQ() * CMatrix::Identity(g.rows(), g.cols());
}

CMatrix random_hermitian(std::size_t dim, std::uint64_t seed) {
    const CMatrix g = complex_gaussian(dim, dim, seed);
    return (g + g.adjoint()) / (2.0 * std::sqrt(static_cast<double>(dim)));
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw Error(ErrorKind::invalid_input, "line fit needs at least two paired samples");
    }
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0.0) {
        throw Error(ErrorKind::invalid_input, "line fit abscissae are all equal");
    }
    LineFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (fit.intercept + fit.slope * x[i]);
        ss_res += r * r;
    }
    // A flat response that is fitted exactly counts as a perfect fit.
    fit.r2 = syy > 0.0 ? 1.0 - ss_res / syy : (ss_res == 0.0 ? 1.0 : 0.0);
    return fit;
}

}  // namespace floquet_lab
