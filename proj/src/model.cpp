#include "floquet_lab/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "floquet_lab/error.hpp"

namespace floquet_lab {

std::string_view to_string(BaseKind kind) {
    switch (kind) {
        case BaseKind::rotor: return "rotor";
        case BaseKind::linear: return "linear";
        case BaseKind::harmonic: return "harmonic";
        case BaseKind::custom: return "custom";
    }
    return "unknown";
}

std::optional<BaseKind> parse_base_kind(std::string_view name) {
    for (auto k : {BaseKind::rotor, BaseKind::linear, BaseKind::harmonic, BaseKind::custom}) {
        if (to_string(k) == name) return k;
    }
    return std::nullopt;
}

BaseHamiltonian::BaseHamiltonian(std::vector<double> alpha, double period_T, double hbar)
    : alpha_(std::move(alpha)), period_(period_T), hbar_(hbar) {
    if (alpha_.empty()) {
        throw Error(ErrorKind::invalid_dimension, "base Hamiltonian needs at least one level");
    }
    if (!std::all_of(alpha_.begin(), alpha_.end(), [](double a) { return std::isfinite(a); })) {
        throw Error(ErrorKind::invalid_input, "eigenvalues must be finite");
    }
    if (!(period_ > 0.0) || !std::isfinite(period_)) {
        throw Error(ErrorKind::invalid_input, "period T must be positive");
    }
    if (!(hbar_ > 0.0) || !std::isfinite(hbar_)) {
        throw Error(ErrorKind::invalid_input, "hbar must be positive");
    }
}

BaseHamiltonian build_base_hamiltonian(BaseKind kind, std::size_t dim, const BaseParams& params) {
    if (dim == 0) throw Error(ErrorKind::invalid_dimension, "dim must be >= 1");
    std::vector<double> alpha(dim);
    switch (kind) {
        case BaseKind::rotor:
            for (std::size_t n = 0; n < dim; ++n) alpha[n] = static_cast<double>(n) * static_cast<double>(n);
            break;
        case BaseKind::linear:
            for (std::size_t n = 0; n < dim; ++n) alpha[n] = static_cast<double>(n);
            break;
        case BaseKind::harmonic:
            for (std::size_t n = 0; n < dim; ++n) alpha[n] = static_cast<double>(n) + 0.5;
            break;
        case BaseKind::custom:
            if (params.custom_alpha.size() != dim) {
                throw Error(ErrorKind::invalid_input,
                            "custom eigenvalue list has " + std::to_string(params.custom_alpha.size()) +
                                " entries, expected " + std::to_string(dim));
            }
            alpha = params.custom_alpha;
            break;
    }
    return BaseHamiltonian(std::move(alpha), params.period_T, params.hbar);
}

std::string_view to_string(ProfileFamily family) {
    switch (family) {
        case ProfileFamily::power_law: return "power_law";
        case ProfileFamily::exponential: return "exponential";
        case ProfileFamily::explicit_list: return "explicit";
    }
    return "unknown";
}

std::optional<ProfileFamily> parse_profile_family(std::string_view name) {
    for (auto f : {ProfileFamily::power_law, ProfileFamily::exponential, ProfileFamily::explicit_list}) {
        if (to_string(f) == name) return f;
    }
    return std::nullopt;
}

CoefficientProfile CoefficientProfile::power_law(std::size_t dim, double gamma,
                                                 std::optional<std::uint64_t> seed) {
    CoefficientProfile p;
    p.family = ProfileFamily::power_law;
    p.dim = dim;
    p.gamma = gamma;
    p.phase_seed = seed;
    return p;
}

CoefficientProfile CoefficientProfile::exponential(std::size_t dim, double rate,
                                                   std::optional<std::uint64_t> seed) {
    CoefficientProfile p;
    p.family = ProfileFamily::exponential;
    p.dim = dim;
    p.rate = rate;
    p.phase_seed = seed;
    return p;
}

CoefficientProfile CoefficientProfile::explicit_list(std::vector<Complex> values) {
    CoefficientProfile p;
    p.family = ProfileFamily::explicit_list;
    p.dim = values.size();
    p.values = std::move(values);
    return p;
}

namespace {

CVector raw_profile(const CoefficientProfile& profile) {
    if (profile.dim == 0) throw Error(ErrorKind::invalid_dimension, "profile dim must be >= 1");
    const auto dim = static_cast<Eigen::Index>(profile.dim);
    CVector v(dim);
    switch (profile.family) {
        case ProfileFamily::power_law:
            if (!(profile.gamma > 0.0)) {
                throw Error(ErrorKind::invalid_input, "power-law exponent gamma must be > 0");
            }
            for (Eigen::Index n = 0; n < dim; ++n) {
                v[n] = std::pow(static_cast<double>(n + 1), -profile.gamma);
            }
            break;
        case ProfileFamily::exponential:
            if (!(profile.rate > 0.0)) {
                throw Error(ErrorKind::invalid_input, "exponential rate must be > 0");
            }
            for (Eigen::Index n = 0; n < dim; ++n) {
                v[n] = std::exp(-profile.rate * static_cast<double>(n));
            }
            break;
        case ProfileFamily::explicit_list:
            if (profile.values.size() != profile.dim) {
                throw Error(ErrorKind::invalid_input, "explicit profile length does not match dim");
            }
            for (Eigen::Index n = 0; n < dim; ++n) {
                v[n] = profile.values[static_cast<std::size_t>(n)];
                if (!std::isfinite(v[n].real()) || !std::isfinite(v[n].imag())) {
                    throw Error(ErrorKind::invalid_input, "explicit profile has non-finite entries");
                }
            }
            return v;
    }
    if (profile.phase_seed) {
        std::mt19937_64 gen(*profile.phase_seed);
        std::uniform_real_distribution<double> phase(0.0, two_pi);
        for (Eigen::Index n = 0; n < dim; ++n) v[n] *= std::polar(1.0, phase(gen));
    }
    return v;
}

SummabilityTag classify_gamma(double gamma) {
    if (gamma > 1.0) return SummabilityTag::l1;
    if (gamma > 0.5) return SummabilityTag::l2_only;
    return SummabilityTag::neither;
}

}  // namespace

CVector materialize_profile(const CoefficientProfile& profile) {
    CVector v = raw_profile(profile);
    const double norm = stable_norm(v);
    if (norm == 0.0) throw Error(ErrorKind::degenerate_profile, "profile has zero norm");
    v /= norm;
    return v;
}

std::string_view to_string(SummabilityTag tag) {
    switch (tag) {
        case SummabilityTag::l1: return "l1";
        case SummabilityTag::l2_only: return "l2_only";
        case SummabilityTag::neither: return "neither";
    }
    return "unknown";
}

SummabilityClass classify_summability(const CoefficientProfile& profile) {
    const CVector raw = raw_profile(profile);
    const double norm = stable_norm(raw);
    if (norm == 0.0) throw Error(ErrorKind::degenerate_profile, "profile has zero norm");

    SummabilityClass out;
    CompensatedSum l1;
    for (Eigen::Index n = 0; n < raw.size(); ++n) l1.add(std::abs(raw[n]));
    out.l1_partial = l1.value() / norm;

    constexpr double inf = std::numeric_limits<double>::infinity();
    const auto d = static_cast<double>(profile.dim);
    // Tail estimates use the same normalization as the materialized vector.
    auto power_tail = [&](double gamma) {
        return gamma > 1.0 ? std::pow(d + 1.0, 1.0 - gamma) / (gamma - 1.0) / norm : inf;
    };

    switch (profile.family) {
        case ProfileFamily::power_law:
            out.tag = classify_gamma(profile.gamma);
            out.divergence_estimate = power_tail(profile.gamma);
            break;
        case ProfileFamily::exponential:
            out.tag = SummabilityTag::l1;
            out.divergence_estimate = std::exp(-profile.rate * d) / (-std::expm1(-profile.rate)) / norm;
            break;
        case ProfileFamily::explicit_list:
            if (profile.tail_gamma) {
                out.tag = classify_gamma(*profile.tail_gamma);
                out.divergence_estimate = power_tail(*profile.tail_gamma);
            } else {
                // Any finite list is absolutely summable.
                out.tag = SummabilityTag::l1;
                out.divergence_estimate = 0.0;
                out.truncated_classification = true;
            }
            break;
    }
    return out;
}

CMatrix orthonormalize(std::span<const CVector> vectors, double dependency_tol) {
    if (vectors.empty()) throw Error(ErrorKind::invalid_input, "no vectors to orthonormalize");
    const Eigen::Index dim = vectors.front().size();
    if (dim == 0) throw Error(ErrorKind::invalid_dimension, "vectors are empty");
    if (static_cast<Eigen::Index>(vectors.size()) > dim) {
        throw Error(ErrorKind::dependent_vectors, "more vectors than the space dimension");
    }
    CMatrix q(dim, static_cast<Eigen::Index>(vectors.size()));
    for (std::size_t k = 0; k < vectors.size(); ++k) {
        if (vectors[k].size() != dim) {
            throw Error(ErrorKind::invalid_input, "vectors have inconsistent lengths");
        }
        const auto col = static_cast<Eigen::Index>(k);
        CVector v = vectors[k];
        const double original = stable_norm(v);
        // Classical Gram-Schmidt, applied twice.
        for (int pass = 0; pass < 2 && col > 0; ++pass) {
            const CVector proj = q.leftCols(col).adjoint() * v;
            v -= q.leftCols(col) * proj;
        }
        const double pivot = stable_norm(v);
        if (!(pivot >= dependency_tol * std::max(original, 1.0)) || original == 0.0) {
            throw Error(ErrorKind::dependent_vectors,
                        "vector " + std::to_string(k) + " is linearly dependent on its predecessors");
        }
        q.col(col) = v / pivot;
    }
    return q;
}

RankNPerturbation::RankNPerturbation(std::span<const CVector> vectors, std::vector<double> lambdas,
                                     std::vector<SummabilityClass> classes)
    : psi_(orthonormalize(vectors)), lambdas_(std::move(lambdas)), classes_(std::move(classes)) {
    if (lambdas_.size() != static_cast<std::size_t>(psi_.cols())) {
        throw Error(ErrorKind::invalid_input, "need one strength per perturbation vector");
    }
    if (!std::all_of(lambdas_.begin(), lambdas_.end(), [](double l) { return std::isfinite(l); })) {
        throw Error(ErrorKind::invalid_input, "strengths must be finite");
    }
    if (!classes_.empty() && classes_.size() != lambdas_.size()) {
        throw Error(ErrorKind::invalid_input, "summability classes do not match the rank");
    }
}

RankNPerturbation RankNPerturbation::from_profiles(std::span<const CoefficientProfile> profiles,
                                                   std::vector<double> lambdas) {
    std::vector<CVector> vectors;
    std::vector<SummabilityClass> classes;
    vectors.reserve(profiles.size());
    for (const auto& p : profiles) {
        vectors.push_back(materialize_profile(p));
        classes.push_back(classify_summability(p));
    }
    return RankNPerturbation(vectors, std::move(lambdas), std::move(classes));
}

RankNPerturbation RankNPerturbation::with_lambdas(std::vector<double> lambdas) const {
    if (lambdas.size() != lambdas_.size()) {
        throw Error(ErrorKind::invalid_input, "need one strength per perturbation vector");
    }
    RankNPerturbation copy;
    copy.psi_ = psi_;
    copy.lambdas_ = std::move(lambdas);
    copy.classes_ = classes_;
    return copy;
}

double strongly_h_finite_sum(const CMatrix& coupling) {
    CompensatedSum acc;
    for (Eigen::Index n = 0; n < coupling.rows(); ++n) {
        CompensatedSum row;
        for (Eigen::Index k = 0; k < coupling.cols(); ++k) row.add(std::norm(coupling(n, k)));
        acc.add(std::sqrt(row.value()));
    }
    return acc.value();
}

HFiniteSum strongly_h_finite_sum(const RankNPerturbation& pert) {
    HFiniteSum out;
    out.partial_sum = strongly_h_finite_sum(pert.vectors());
    if (pert.classes().empty()) {
        out.verdict = SummabilityTag::l1;
        out.truncated_classification = true;
        return out;
    }
    out.verdict = SummabilityTag::l1;
    for (const auto& c : pert.classes()) {
        out.verdict = std::min(out.verdict, c.tag);
        out.truncated_classification = out.truncated_classification || c.truncated_classification;
    }
    return out;
}

}  // namespace floquet_lab
