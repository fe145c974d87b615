// oracle.hpp: independent reference evaluations used to validate the network code.
#pragma once

#include "tempo/bath.hpp"
#include "tempo/process.hpp"
#include "tempo/tensor.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace tempo::oracle {

/// Direct product over i >= j of [b_{i-j}] for every multi-index (leg 1, ..., leg k), leg k fastest.
DenseTensor brute_force_influence(const bath::InfluenceTensorSet& bset, std::size_t k);

/// Sum over all compound paths of F times the Trotter string; seq holds A_0 .. A_{k-1} (optionally A_k).
Eigen::MatrixXcd path_sum_state(const bath::InfluenceTensorSet& bset, const process::SystemSpec& sys, double dt,
                                std::size_t k, std::span<const process::Intervention> seq);

struct FewModeModel {
    std::vector<bath::DiscreteMode> modes;
    int n_max = 6;  // Fock levels per mode: 0 .. n_max-1
    process::SystemSpec sys;
    double beta = std::numeric_limits<double>::infinity();

    std::size_t dimension() const;
    void validate() const;
};

struct FewModeRun {
    std::vector<Eigen::MatrixXcd> trajectory;  // reduced rho_0 .. rho_k
    double max_norm_drift = 0.0;               // |tr chi - 1| over the run
    double thermal_leak = 0.0;                 // Gibbs weight beyond the Fock cutoff, worst mode
    bool truncation_warning = false;
};

/// Exact evolution of system plus modes; insertions act as (A x 1) chi (B x 1)^dagger at their steps.
/// Without insertions this is the reduced trajectory; with them, trajectory[j] is the conditioned state.
FewModeRun exact_few_mode_trajectory(const FewModeModel& model, const bath::TimeGrid& grid,
                                     std::span<const process::Insertion> insertions = {});

/// tr of the final state of the run above, with A_k applied when an insertion sits at step k.
cplx exact_few_mode_correlation(const FewModeModel& model, const bath::TimeGrid& grid,
                                std::span<const process::Insertion> insertions);

}  // namespace tempo::oracle
