#pragma once

#include <complex>
#include <cstdint>
#include <numbers>
#include <span>

#include <Eigen/Dense>

namespace floquet_lab {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

/// Amplitudes in the H0 eigenbasis.
using StateVector = CVector;

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Neumaier-compensated accumulator.
class CompensatedSum {
public:
    void add(double x) noexcept;
    double value() const noexcept { return sum_ + carry_; }

private:
    double sum_ = 0.0;
    double carry_ = 0.0;
};

double compensated_sum(std::span<const double> xs) noexcept;

/// l2 norm with compensated accumulation of |x_n|^2.
double stable_norm(const CVector& x) noexcept;

/// Reduce an angle to [0, 2pi).
double wrap_phase(double theta) noexcept;

/// Entries of a seeded complex Gaussian matrix (unit variance per entry).
CMatrix complex_gaussian(std::size_t rows, std::size_t cols, std::uint64_t seed);

/// Haar-like random unitary: QR of a seeded complex Gaussian matrix.
CMatrix random_unitary(std::size_t dim, std::uint64_t seed);

/// Random Hermitian matrix scaled to O(1) operator norm.
CMatrix random_hermitian(std::size_t dim, std::uint64_t seed);

/// Least-squares line y = intercept + slope x.
struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 1.0;
};

LineFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace floquet_lab
