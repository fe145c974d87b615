// network.hpp: time-evolving MPO rows and the iterative contraction of the
// influence functional into a matrix product state.
//
// Legs are numbered in time, 1..k. Boundary and influence MPS sites are stored in
// chronological order: site n carries the compound index of leg n+1.
#pragma once

#include "tempo/bath.hpp"
#include "tempo/tensor.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace tempo::network {

enum class Scheme { nonlocal, local };

std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& s);

/// Kronecker-delta threading of one influence-tensor row.
///
/// A row touches a contiguous run of legs. One index (the "thread") runs along
/// the whole run and carries the value of the row's open leg; at each leg the
/// MPS value is multiplied by factor(thread, leg index). Only part of the open
/// leg's value matters (lambda_s - lambda_r when it is the later leg, the pair
/// (lambda_s, lambda_r) when it is the earlier one), so the thread runs over
/// those classes.
struct MpoSite {
    std::size_t leg = 0;         // 1-based time index of the leg this site multiplies
    std::size_t separation = 0;  // l of the influence tensor b_l used here
    Eigen::MatrixXcd factor;     // threads x d^2

    /// Materialized (thread_in, phys_out, phys_in, thread_out) tensor; absent bonds have extent 1.
    DenseTensor to_dense(bool thread_in, bool thread_out) const;
};

struct MpoRow {
    Scheme scheme = Scheme::nonlocal;
    std::size_t row_index = 0;
    std::size_t threads = 1;
    std::vector<MpoSite> sites;  // chronological; the thread spans all of them

    std::size_t first_leg() const { return sites.front().leg; }
    std::size_t last_leg() const { return sites.back().leg; }
};

/// Row i of the non-local scheme: b_0 at leg i, b_l at leg i-l down to leg 1 (or the depth cap).
MpoRow build_nonlocal_row(std::size_t i, const bath::InfluenceTensorSet& bset);

/// Row i of the local scheme over a horizon of k legs: b_0 at leg i, b_l at leg i+l up to leg k.
MpoRow build_local_row(std::size_t i, std::size_t k, const bath::InfluenceTensorSet& bset);

struct ContractionStats {
    std::vector<std::size_t> max_bond;         // per iteration, after compression
    std::vector<double> iteration_seconds;     // per iteration wall time
    std::vector<double> discarded_per_iteration;
    // Sum over all truncations of the relative discarded weight (dropped sigma^2 / all sigma^2).
    double cumulative_discarded = 0.0;
    double total_seconds = 0.0;
};

/// Chain of (left bond, d^2, right bond) tensors. Sites [0, finalized) are fixed;
/// the active boundary is [finalized, size).
struct BoundaryMPS {
    std::vector<DenseTensor> sites;
    std::size_t finalized = 0;
    ContractionStats stats;

    std::size_t max_bond() const;
    void validate() const;
};

/// Multiply the row into the chain. Sites of the row must already exist.
void apply_row(BoundaryMPS& mps, const MpoRow& row);

/// One left sweep (right to left) then one right sweep of truncated SVDs over the
/// active boundary. Discarded weights are added to stats.
BoundaryMPS sweep_compress(BoundaryMPS mps, double lambda_c, bool orthogonalize = true);
void sweep_compress_inplace(BoundaryMPS& mps, double lambda_c, bool orthogonalize = true);

/// Compressed matrix-product form of F_{k:0}.
struct InfluenceMPS {
    Scheme scheme = Scheme::nonlocal;
    std::size_t d = 0;
    std::vector<double> lambdas;
    double dt = 0.0;
    double lambda_c = 0.0;
    std::vector<DenseTensor> sites;  // site n <-> leg n+1
    ContractionStats stats;

    std::size_t k() const noexcept { return sites.size(); }
    std::size_t d2() const noexcept { return d * d; }
    std::size_t max_bond() const;

    /// F at one multi-index; legs[n] is the compound index of leg n+1.
    cplx element(std::span<const std::size_t> legs) const;
    /// Full tensor over (leg 1, ..., leg k); refuses more than 2^20 entries.
    DenseTensor dense() const;
};

struct ContractionOptions {
    double lambda_c = 0.0;
    // Called after every iteration with (iteration, current boundary).
    std::function<void(std::size_t, const BoundaryMPS&)> on_iteration;
    // Non-local scheme: lossless QR pass before the truncating sweeps, so that the left sweep
    // truncates in an orthonormal gauge. Off gives the bare left + right sweep.
    bool orthogonalize = true;
};

InfluenceMPS contract_nonlocal(const bath::InfluenceTensorSet& bset, const bath::TimeGrid& grid, double lambda_c);
InfluenceMPS contract_nonlocal(const bath::InfluenceTensorSet& bset, const bath::TimeGrid& grid,
                               const ContractionOptions& opts);
InfluenceMPS contract_local(const bath::InfluenceTensorSet& bset, const bath::TimeGrid& grid, double lambda_c);
InfluenceMPS contract_local(const bath::InfluenceTensorSet& bset, const bath::TimeGrid& grid,
                            const ContractionOptions& opts);
InfluenceMPS contract(Scheme scheme, const bath::InfluenceTensorSet& bset, const bath::TimeGrid& grid,
                      const ContractionOptions& opts);

/// Copy of bset with b_l set to all-ones for every l > m.
bath::InfluenceTensorSet memory_truncate(const bath::InfluenceTensorSet& bset, std::size_t m);

/// Binary container: see README ("InfluenceMPS file format").
void write_influence_mps(std::ostream& os, const InfluenceMPS& mps);
InfluenceMPS read_influence_mps(std::istream& is);

}  // namespace tempo::network
