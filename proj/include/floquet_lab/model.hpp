#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "floquet_lab/numeric.hpp"

namespace floquet_lab {

/// 2*pi times the golden ratio; keeps T*alpha_n/hbar away from rational multiples of 2*pi.
inline constexpr double default_period = two_pi * std::numbers::phi;

enum class BaseKind { rotor, linear, harmonic, custom };

std::string_view to_string(BaseKind kind);
std::optional<BaseKind> parse_base_kind(std::string_view name);

/// Diagonal H0 = sum_n alpha_n |phi_n><phi_n| truncated to `dim` levels, with period and hbar.
class BaseHamiltonian {
public:
    BaseHamiltonian(std::vector<double> alpha, double period_T, double hbar);

    std::size_t dim() const noexcept { return alpha_.size(); }
    const std::vector<double>& alpha() const noexcept { return alpha_; }
    double period() const noexcept { return period_; }
    double hbar() const noexcept { return hbar_; }

    /// T * alpha_n / hbar, the phase accumulated by level n over one period.
    double level_phase(std::size_t n) const noexcept { return period_ * alpha_[n] / hbar_; }

private:
    std::vector<double> alpha_;
    double period_;
    double hbar_;
};

struct BaseParams {
    double period_T = default_period;
    double hbar = 1.0;
    std::vector<double> custom_alpha;
};

BaseHamiltonian build_base_hamiltonian(BaseKind kind, std::size_t dim, const BaseParams& params = {});

enum class ProfileFamily { power_law, exponential, explicit_list };

std::string_view to_string(ProfileFamily family);
std::optional<ProfileFamily> parse_profile_family(std::string_view name);

/// Generating law for the coefficients (a_k)_n of one perturbation vector.
struct CoefficientProfile {
    ProfileFamily family = ProfileFamily::power_law;
    std::size_t dim = 1;
    double gamma = 2.0;  // power_law: |a_n| ~ (n+1)^-gamma
    double rate = 1.0;   // exponential: |a_n| ~ exp(-rate n)
    std::vector<Complex> values;  // explicit_list
    // Declared power-law tail exponent of an explicit list, if it samples a known family.
    std::optional<double> tail_gamma;
    std::optional<std::uint64_t> phase_seed;

    static CoefficientProfile power_law(std::size_t dim, double gamma,
                                        std::optional<std::uint64_t> seed = std::nullopt);
    static CoefficientProfile exponential(std::size_t dim, double rate,
                                          std::optional<std::uint64_t> seed = std::nullopt);
    static CoefficientProfile explicit_list(std::vector<Complex> values);
};

/// Unit l2 vector following the profile law. Generated families get deterministic
/// unit-circle phases when a phase seed is set.
CVector materialize_profile(const CoefficientProfile& profile);

enum class SummabilityTag { neither = 0, l2_only = 1, l1 = 2 };

std::string_view to_string(SummabilityTag tag);

struct SummabilityClass {
    SummabilityTag tag = SummabilityTag::neither;
    double l1_partial = 0.0;           // sum_{n<dim} |a_n| of the unit vector
    double divergence_estimate = 0.0;  // extrapolated sum_{n>=dim} |a_n|, +inf when divergent
    bool truncated_classification = false;
};

SummabilityClass classify_summability(const CoefficientProfile& profile);

/// Gram-Schmidt with one reorthogonalization pass. Columns of the result are orthonormal
/// and span the inputs; the first input direction is kept.
CMatrix orthonormalize(std::span<const CVector> vectors, double dependency_tol = 1e-10);

/// Rank-N kick A*WA = sum_k lambda_k |psi_k><psi_k| with orthonormal psi_k.
class RankNPerturbation {
public:
    /// Orthonormalizes `vectors` before storing them.
    RankNPerturbation(std::span<const CVector> vectors, std::vector<double> lambdas,
                      std::vector<SummabilityClass> classes = {});

    static RankNPerturbation from_profiles(std::span<const CoefficientProfile> profiles,
                                           std::vector<double> lambdas);

    std::size_t rank() const noexcept { return static_cast<std::size_t>(psi_.cols()); }
    std::size_t dim() const noexcept { return static_cast<std::size_t>(psi_.rows()); }

    /// dim x N matrix whose columns are psi_k.
    const CMatrix& vectors() const noexcept { return psi_; }
    const std::vector<double>& lambdas() const noexcept { return lambdas_; }
    const std::vector<SummabilityClass>& classes() const noexcept { return classes_; }

    RankNPerturbation with_lambdas(std::vector<double> lambdas) const;

private:
    RankNPerturbation() = default;

    CMatrix psi_;
    std::vector<double> lambdas_;
    std::vector<SummabilityClass> classes_;
};

struct HFiniteSum {
    double partial_sum = 0.0;
    SummabilityTag verdict = SummabilityTag::neither;
    bool truncated_classification = false;
};

/// sum_{n<dim} |A phi_n| with |A phi_n|^2 = sum_k |(a_k)_n|^2.
double strongly_h_finite_sum(const CMatrix& coupling);
HFiniteSum strongly_h_finite_sum(const RankNPerturbation& pert);

}  // namespace floquet_lab
