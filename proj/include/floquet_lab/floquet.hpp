#pragma once

#include <cstddef>
#include <vector>

#include "floquet_lab/model.hpp"

namespace floquet_lab {

inline constexpr std::size_t default_dense_limit = 4096;

/// V = exp(i A*WA / hbar) exp(-i H0 T / hbar), applied as diagonal phases then a rank-N update.
class FloquetModel {
public:
    FloquetModel(BaseHamiltonian base, RankNPerturbation pert);

    const BaseHamiltonian& base() const noexcept { return base_; }
    const RankNPerturbation& perturbation() const noexcept { return pert_; }
    std::size_t dim() const noexcept { return base_.dim(); }

    /// Z_k = exp(i lambda_k / hbar) - 1.
    const CVector& kick_amplitudes() const noexcept { return z_; }
    /// exp(-i T alpha_n / hbar).
    const CVector& base_phases() const noexcept { return phases_; }

    FloquetModel with_lambdas(std::vector<double> lambdas) const;

    /// In-place x <- V x; the hot loop of long trajectories.
    void step(StateVector& x) const;

private:
    BaseHamiltonian base_;
    RankNPerturbation pert_;
    CVector z_;
    CVector phases_;
};

CVector kick_amplitudes(const RankNPerturbation& pert, double hbar);

StateVector apply_base_propagator(const BaseHamiltonian& base, const StateVector& x);
StateVector apply_kick(const RankNPerturbation& pert, double hbar, const StateVector& x);
StateVector apply_floquet(const FloquetModel& model, const StateVector& x);

CMatrix dense_floquet_matrix(const FloquetModel& model, std::size_t dense_limit = default_dense_limit);

/// Dense exp(i A*WA / hbar), for cross-checks.
CMatrix dense_kick_matrix(const RankNPerturbation& pert, double hbar);

}  // namespace floquet_lab
