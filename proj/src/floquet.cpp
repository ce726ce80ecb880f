#include "floquet_lab/floquet.hpp"

#include <cmath>
#include <string>

#include "floquet_lab/error.hpp"

namespace floquet_lab {

namespace {

void require_dim(std::size_t expected, Eigen::Index got) {
    if (static_cast<std::size_t>(got) != expected) {
        throw Error(ErrorKind::invalid_input, "state has dimension " + std::to_string(got) +
                                                  ", expected " + std::to_string(expected));
    }
}

CVector phases_of(const BaseHamiltonian& base) {
    CVector p(static_cast<Eigen::Index>(base.dim()));
    for (std::size_t n = 0; n < base.dim(); ++n) {
        p[static_cast<Eigen::Index>(n)] = std::polar(1.0, -base.level_phase(n));
    }
    return p;
}

void kick_in_place(const CMatrix& psi, const CVector& z, StateVector& x) {
    CVector c = psi.adjoint() * x;
    c.array() *= z.array();
    x.noalias() += psi * c;
}

}  // namespace

CVector kick_amplitudes(const RankNPerturbation& pert, double hbar) {
    CVector z(static_cast<Eigen::Index>(pert.rank()));
    for (std::size_t k = 0; k < pert.rank(); ++k) {
        // exp(i x) - 1 = 2i sin(x/2) exp(i x/2), accurate for small x.
        const double half = 0.5 * pert.lambdas()[k] / hbar;
        z[static_cast<Eigen::Index>(k)] = Complex(0.0, 2.0 * std::sin(half)) * std::polar(1.0, half);
    }
    return z;
}

FloquetModel::FloquetModel(BaseHamiltonian base, RankNPerturbation pert)
    : base_(std::move(base)), pert_(std::move(pert)) {
    if (base_.dim() != pert_.dim()) {
        throw Error(ErrorKind::invalid_input, "perturbation vectors have length " + std::to_string(pert_.dim()) +
                                                  " but the base has dim " + std::to_string(base_.dim()));
    }
    z_ = floquet_lab::kick_amplitudes(pert_, base_.hbar());
    phases_ = phases_of(base_);
}

FloquetModel FloquetModel::with_lambdas(std::vector<double> lambdas) const {
    return FloquetModel(base_, pert_.with_lambdas(std::move(lambdas)));
}

void FloquetModel::step(StateVector& x) const {
    x.array() *= phases_.array();
    kick_in_place(pert_.vectors(), z_, x);
}

StateVector apply_base_propagator(const BaseHamiltonian& base, const StateVector& x) {
    require_dim(base.dim(), x.size());
    StateVector out = x;
    out.array() *= phases_of(base).array();
    return out;
}

StateVector apply_kick(const RankNPerturbation& pert, double hbar, const StateVector& x) {
    require_dim(pert.dim(), x.size());
    StateVector out = x;
    kick_in_place(pert.vectors(), kick_amplitudes(pert, hbar), out);
    return out;
}

StateVector apply_floquet(const FloquetModel& model, const StateVector& x) {
    require_dim(model.dim(), x.size());
    StateVector out = x;
    model.step(out);
    return out;
}

CMatrix dense_floquet_matrix(const FloquetModel& model, std::size_t dense_limit) {
    const std::size_t dim = model.dim();
    if (dim > dense_limit) {
        throw Error(ErrorKind::too_large, "dim " + std::to_string(dim) + " exceeds the dense limit " +
                                              std::to_string(dense_limit));
    }
    // Column j is V e_j = phase_j (e_j + sum_k Z_k conj((psi_k)_j) psi_k).
    const CMatrix& psi = model.perturbation().vectors();
    CMatrix v = psi * model.kick_amplitudes().asDiagonal() * psi.adjoint();
    v.diagonal().array() += 1.0;
    v = v * model.base_phases().asDiagonal();
    return v;
}

CMatrix dense_kick_matrix(const RankNPerturbation& pert, double hbar) {
    const CMatrix& psi = pert.vectors();
    CMatrix k = psi * kick_amplitudes(pert, hbar).asDiagonal() * psi.adjoint();
    k.diagonal().array() += 1.0;
    return k;
}

}  // namespace floquet_lab
