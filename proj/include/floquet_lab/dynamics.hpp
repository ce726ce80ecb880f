#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "floquet_lab/floquet.hpp"

namespace floquet_lab {

struct EvolveOptions {
    double renormalize_above = 1e-12;  // drift that triggers renormalization
    double tail_fraction = 0.05;       // top share of basis states watched for leakage
    double tail_threshold = 0.01;      // probability in the tail that marks contamination
};

/// Observables sampled along psi_{n+1} = V psi_n. Index i corresponds to step n[i].
struct TrajectoryRecord {
    std::size_t steps = 0;
    std::size_t record_every = 1;
    std::vector<std::size_t> n;
    std::vector<double> energy;
    std::vector<Complex> autocorr;
    std::vector<double> participation;
    std::vector<double> norm_drift;  // | ||psi_n|| - 1 | before any renormalization at step n
    std::size_t renormalizations = 0;
    double max_norm_drift = 0.0;
    double max_step_drift = 0.0;  // max | ||V psi|| / ||psi|| - 1 | over single steps
    double max_tail_weight = 0.0;
    bool truncation_contaminated = false;
};

TrajectoryRecord evolve(const FloquetModel& model, const StateVector& psi0, std::size_t steps,
                        std::size_t record_every = 1, const EvolveOptions& options = {});

double energy_expectation(const StateVector& state, const BaseHamiltonian& base);

/// (1/N) sum_{n=1..N} |autocorr[n]|^2; autocorr[0] is the initial overlap and is skipped.
double wiener_average(std::span<const Complex> autocorr, std::size_t count);

double participation_ratio(const StateVector& state);

/// Probability carried by the top `fraction` of basis states.
double tail_weight(const StateVector& state, double fraction);

struct GrowthWindow {
    double lo = 1e2;
    double hi = 1e4;
};

struct GrowthFit {
    double exponent = 0.0;
    double r2 = 1.0;
    double offset = 0.0;  // subtracted shift when the energies were moved to E - min + 1
    bool offset_applied = false;
    std::size_t samples = 0;
};

/// Slope of log E against log n for samples with lo <= n <= hi. Non-positive energies are
/// a fit-domain error unless `allow_offset` shifts the window to E - min + 1.
GrowthFit growth_fit(std::span<const std::size_t> n, std::span<const double> energy,
                     GrowthWindow window = {}, bool allow_offset = false);

enum class DiffusionLabel { recurrent_like, inconclusive, diffusive_like, suppressed };

std::string_view to_string(DiffusionLabel label);

/// exponent > 0.7 diffusive-like, < 0.2 recurrent-like; suppressed on truncation leakage.
DiffusionLabel classify_growth(const GrowthFit& fit, bool truncation_contaminated);

}  // namespace floquet_lab
