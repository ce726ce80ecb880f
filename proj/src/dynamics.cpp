#include "floquet_lab/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "floquet_lab/error.hpp"

namespace floquet_lab {

double energy_expectation(const StateVector& state, const BaseHamiltonian& base) {
    if (static_cast<std::size_t>(state.size()) != base.dim()) {
        throw Error(ErrorKind::invalid_input, "state dimension does not match the Hamiltonian");
    }
    CompensatedSum acc;
    for (std::size_t n = 0; n < base.dim(); ++n) {
        acc.add(base.alpha()[n] * std::norm(state[static_cast<Eigen::Index>(n)]));
    }
    return acc.value();
}

double participation_ratio(const StateVector& state) {
    CompensatedSum acc;
    for (Eigen::Index n = 0; n < state.size(); ++n) {
        const double p = std::norm(state[n]);
        acc.add(p * p);
    }
    return 1.0 / acc.value();
}

double tail_weight(const StateVector& state, double fraction) {
    const auto dim = static_cast<std::size_t>(state.size());
    auto count = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(dim)));
    count = std::clamp<std::size_t>(count, 1, dim);
    return state.tail(static_cast<Eigen::Index>(count)).squaredNorm();
}

double wiener_average(std::span<const Complex> autocorr, std::size_t count) {
    if (count == 0 || count + 1 > autocorr.size()) {
        throw Error(ErrorKind::invalid_input, "wiener average needs 1 <= N < recorded length");
    }
    CompensatedSum acc;
    for (std::size_t n = 1; n <= count; ++n) acc.add(std::norm(autocorr[n]));
    return acc.value() / static_cast<double>(count);
}

TrajectoryRecord evolve(const FloquetModel& model, const StateVector& psi0, std::size_t steps,
                        std::size_t record_every, const EvolveOptions& options) {
    if (static_cast<std::size_t>(psi0.size()) != model.dim()) {
        throw Error(ErrorKind::invalid_input, "initial state dimension does not match the model");
    }
    if (std::abs(stable_norm(psi0) - 1.0) > 1e-10) {
        throw Error(ErrorKind::invalid_input, "initial state must have unit norm");
    }
    if (steps == 0 || record_every == 0) {
        throw Error(ErrorKind::invalid_input, "steps and record_every must be >= 1");
    }

    TrajectoryRecord rec;
    rec.steps = steps;
    rec.record_every = record_every;
    const std::size_t samples = steps / record_every + 1;
    rec.n.reserve(samples);
    rec.energy.reserve(samples);
    rec.autocorr.reserve(samples);
    rec.participation.reserve(samples);
    rec.norm_drift.reserve(samples);

    StateVector psi = psi0;
    auto record = [&](std::size_t n, double drift) {
        rec.n.push_back(n);
        rec.energy.push_back(energy_expectation(psi, model.base()));
        rec.autocorr.push_back(psi0.dot(psi));
        rec.participation.push_back(participation_ratio(psi));
        rec.norm_drift.push_back(drift);
        const double tail = tail_weight(psi, options.tail_fraction);
        rec.max_tail_weight = std::max(rec.max_tail_weight, tail);
    };

    double previous_norm = psi.norm();
    record(0, std::abs(previous_norm - 1.0));
    for (std::size_t n = 1; n <= steps; ++n) {
        model.step(psi);
        double norm = psi.norm();
        const double drift = std::abs(norm - 1.0);
        rec.max_norm_drift = std::max(rec.max_norm_drift, drift);
        rec.max_step_drift = std::max(rec.max_step_drift, std::abs(norm / previous_norm - 1.0));
        if (!std::isfinite(norm)) {
            throw Error(ErrorKind::numerical_failure, "state became non-finite at step " + std::to_string(n));
        }
        if (drift > options.renormalize_above) {
            psi /= norm;
            norm = 1.0;
            ++rec.renormalizations;
        }
        previous_norm = norm;
        if (n % record_every == 0) record(n, drift);
    }
    rec.truncation_contaminated = rec.max_tail_weight > options.tail_threshold;
    return rec;
}

GrowthFit growth_fit(std::span<const std::size_t> n, std::span<const double> energy, GrowthWindow window,
                     bool allow_offset) {
    if (n.size() != energy.size()) throw Error(ErrorKind::invalid_input, "step and energy series differ in length");
    std::vector<double> steps, values;
    for (std::size_t i = 0; i < n.size(); ++i) {
        const auto step = static_cast<double>(n[i]);
        if (step >= window.lo && step <= window.hi && step > 0.0) {
            steps.push_back(step);
            values.push_back(energy[i]);
        }
    }
    if (steps.size() < 2) throw Error(ErrorKind::invalid_input, "growth window holds fewer than two samples");

    GrowthFit fit;
    fit.samples = steps.size();
    const double lowest = *std::min_element(values.begin(), values.end());
    if (!(lowest > 0.0)) {
        if (!allow_offset) {
            throw Error(ErrorKind::fit_domain, "non-positive energy in the growth window");
        }
        fit.offset = lowest - 1.0;
        fit.offset_applied = true;
        for (double& v : values) v -= fit.offset;
    }
    for (double& s : steps) s = std::log(s);
    for (double& v : values) v = std::log(v);
    const LineFit line = fit_line(steps, values);
    fit.exponent = line.slope;
    fit.r2 = line.r2;
    return fit;
}

std::string_view to_string(DiffusionLabel label) {
    switch (label) {
        case DiffusionLabel::recurrent_like: return "recurrent-like";
        case DiffusionLabel::inconclusive: return "inconclusive";
        case DiffusionLabel::diffusive_like: return "diffusive-like";
        case DiffusionLabel::suppressed: return "suppressed";
    }
    return "unknown";
}

DiffusionLabel classify_growth(const GrowthFit& fit, bool truncation_contaminated) {
    if (truncation_contaminated) return DiffusionLabel::suppressed;
    if (fit.exponent > 0.7) return DiffusionLabel::diffusive_like;
    if (fit.exponent < 0.2) return DiffusionLabel::recurrent_like;
    return DiffusionLabel::inconclusive;
}

}  // namespace floquet_lab
