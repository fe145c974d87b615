// process.hpp: Trotter-dressed process tensor and its contraction with interventions.
//
// Step j of a run is V^{1/2} W_j V^{1/2} A_{j-1}, where W_j multiplies by the
// influence MPS site of leg j. rho_j denotes the state after step j and before A_j.
#pragma once

#include "tempo/network.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

namespace tempo::process {

struct SystemSpec {
    std::size_t d = 2;
    Eigen::MatrixXcd h0;
    Eigen::MatrixXcd s_op;  // diagonal in the computational basis
    Eigen::MatrixXcd rho0;

    std::vector<double> lambdas() const;
    void validate() const;
};

/// h0 = Omega sigma_x / 2 + epsilon sigma_z / 2, s = sigma_z / 2, basis (up, down).
SystemSpec spin_boson(double omega, double epsilon, const Eigen::MatrixXcd& rho0);

Eigen::MatrixXcd pauli_x();
Eigen::MatrixXcd pauli_y();
Eigen::MatrixXcd pauli_z();
// |down><up| in the (up, down) basis.
Eigen::MatrixXcd lowering();

struct LiouvillePropagator {
    Eigen::MatrixXcd v_half;
};

LiouvillePropagator free_half_propagator(const SystemSpec& sys, double dt);

/// rho -> A rho B^dagger, or an arbitrary d^2 x d^2 superoperator.
struct Intervention {
    enum class Kind { identity, general };
    Kind kind = Kind::identity;
    Eigen::MatrixXcd matrix;

    static Intervention identity(std::size_t d);
    static Intervention sandwich(const Eigen::MatrixXcd& left, const Eigen::MatrixXcd& right);
    static Intervention superoperator(const Eigen::MatrixXcd& m);

    bool is_identity() const noexcept { return kind == Kind::identity; }
};

struct Insertion {
    std::size_t step = 0;
    Eigen::MatrixXcd left;
    Eigen::MatrixXcd right;
};

struct BreakPolicy {
    enum class Mode { none, cut_at_times, every_step };
    Mode mode = Mode::none;
    std::vector<std::size_t> cuts;  // steps at which the bath is restarted

    static BreakPolicy none() { return {}; }
    static BreakPolicy cut_at(std::vector<std::size_t> steps) { return {Mode::cut_at_times, std::move(steps)}; }
    static BreakPolicy every_step() { return {Mode::every_step, {}}; }

    void validate(std::size_t k) const;
};

/// Read-only contraction engine over one influence MPS.
class Evaluator {
public:
    Evaluator(const network::InfluenceMPS& fmps, const SystemSpec& sys, double dt, BreakPolicy policy = {});

    std::size_t k() const noexcept { return fmps_->k(); }
    std::size_t d() const noexcept { return sys_.d; }
    const BreakPolicy& policy() const noexcept { return policy_; }

    /// rho_0 .. rho_k. seq holds A_0 .. A_{k-1}; shorter sequences are padded with identities.
    std::vector<Eigen::MatrixXcd> states(std::span<const Intervention> seq) const;

    /// rho_k, or A_k[rho_k] when seq has k + 1 entries.
    Eigen::MatrixXcd final_state(std::span<const Intervention> seq) const;

    /// tr of the final state with the insertions as the only non-identity interventions.
    cplx correlation(std::span<const Insertion> insertions) const;

private:
    const network::InfluenceMPS* fmps_;
    SystemSpec sys_;
    BreakPolicy policy_;
    Eigen::MatrixXcd v_half_;
    // env_[n]: sites n+1 .. k summed against the normalized diagonal, as a bond vector.
    std::vector<Eigen::VectorXcd> env_;
    std::vector<bool> cut_;
};

Eigen::MatrixXcd contract_with_interventions(const network::InfluenceMPS& fmps, const SystemSpec& sys,
                                             std::span<const Intervention> seq, double dt);

/// rho_1 .. rho_k under identity interventions.
std::vector<Eigen::MatrixXcd> density_trajectory(const network::InfluenceMPS& fmps, const SystemSpec& sys, double dt);

cplx multitime_correlation(const network::InfluenceMPS& fmps, const SystemSpec& sys, double dt,
                           std::span<const Insertion> insertions);

Evaluator apply_break_policy(const network::InfluenceMPS& fmps, BreakPolicy policy, const SystemSpec& sys, double dt);

/// Columns: t, then re/im of rho(i, j) in column-major order.
void write_trajectory_csv(std::ostream& os, const std::vector<Eigen::MatrixXcd>& traj, double dt,
                          std::size_t first_step = 1);

}  // namespace tempo::process
