#include "tempo/process.hpp"

#include "tempo/errors.hpp"
#include "tempo/liouville.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <ostream>

namespace tempo::process {

namespace {

bool hermitian(const Eigen::MatrixXcd& m, double tol) {
    return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol * std::max(1.0, m.cwiseAbs().maxCoeff());
}

// X'[r, a] = sum_l X[l, a] site[l, a, r]
Eigen::MatrixXcd absorb_site(const Eigen::MatrixXcd& x, const DenseTensor& site) {
    const std::size_t l = site.extent(0), p = site.extent(1), r = site.extent(2);
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(p));
    const cplx* s = site.data().data();
    for (std::size_t a = 0; a < p; ++a) {
        cplx* o = out.col(static_cast<Eigen::Index>(a)).data();
        for (std::size_t b = 0; b < l; ++b) {
            const cplx xv = x(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a));
            if (xv == cplx(0.0)) {
                continue;
            }
            const cplx* row = s + (b * p + a) * r;
            for (std::size_t c = 0; c < r; ++c) {
                o[c] += xv * row[c];
            }
        }
    }
    return out;
}

}  // namespace

// -------------------------------- system --------------------------------------

std::vector<double> SystemSpec::lambdas() const {
    std::vector<double> out(d);
    for (std::size_t i = 0; i < d; ++i) {
        out[i] = s_op(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)).real();
    }
    return out;
}

void SystemSpec::validate() const {
    const auto n = static_cast<Eigen::Index>(d);
    if (d == 0) {
        throw DimensionError("system dimension must be positive");
    }
    for (const auto* m : {&h0, &s_op, &rho0}) {
        if (m->rows() != n || m->cols() != n) {
            throw DimensionError("system operators must be " + std::to_string(d) + "x" + std::to_string(d));
        }
        if (!m->allFinite()) {
            throw ConfigError("system operators must be finite");
        }
    }
    if (!hermitian(h0, 1e-12)) {
        throw ConfigError("h0 is not Hermitian");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i != j && s_op(i, j) != cplx(0.0)) {
                throw ConfigError("coupling operator must be diagonal in the computational basis");
            }
        }
        if (s_op(i, i).imag() != 0.0) {
            throw ConfigError("coupling operator must be Hermitian");
        }
    }
    if (!hermitian(rho0, 1e-12)) {
        throw ConfigError("rho0 is not Hermitian");
    }
    if (std::abs(rho0.trace() - 1.0) > 1e-10) {
        throw ConfigError("rho0 must have unit trace");
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho0);
    if (es.eigenvalues().minCoeff() < -1e-12) {
        throw ConfigError("rho0 is not positive semidefinite");
    }
}

Eigen::MatrixXcd pauli_x() {
    Eigen::MatrixXcd m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}

Eigen::MatrixXcd pauli_y() {
    Eigen::MatrixXcd m(2, 2);
    m << 0, cplx(0, -1), cplx(0, 1), 0;
    return m;
}

Eigen::MatrixXcd pauli_z() {
    Eigen::MatrixXcd m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}

Eigen::MatrixXcd lowering() {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(2, 2);
    m(1, 0) = 1.0;
    return m;
}

SystemSpec spin_boson(double omega, double epsilon, const Eigen::MatrixXcd& rho0) {
    SystemSpec sys;
    sys.d = 2;
    sys.h0 = 0.5 * omega * pauli_x() + 0.5 * epsilon * pauli_z();
    sys.s_op = 0.5 * pauli_z();
    sys.rho0 = rho0;
    sys.validate();
    return sys;
}

LiouvillePropagator free_half_propagator(const SystemSpec& sys, double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw DomainError("free_half_propagator: dt must be positive");
    }
    sys.validate();
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(sys.h0);
    const Eigen::VectorXcd phase =
        (es.eigenvalues().cast<cplx>() * cplx(0.0, -0.5 * dt)).array().exp().matrix();
    const Eigen::MatrixXcd u = es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint();
    return {sandwich_superoperator(u, u)};
}

// ------------------------------ interventions ---------------------------------

Intervention Intervention::identity(std::size_t d) {
    const auto n = static_cast<Eigen::Index>(d * d);
    return {Kind::identity, Eigen::MatrixXcd::Identity(n, n)};
}

Intervention Intervention::sandwich(const Eigen::MatrixXcd& left, const Eigen::MatrixXcd& right) {
    if (left.rows() != left.cols() || right.rows() != right.cols() || left.rows() != right.rows()) {
        throw DimensionError("intervention operators must be square and of equal size");
    }
    return {Kind::general, sandwich_superoperator(left, right)};
}

Intervention Intervention::superoperator(const Eigen::MatrixXcd& m) {
    if (m.rows() != m.cols()) {
        throw DimensionError("superoperator must be square");
    }
    return {Kind::general, m};
}

void BreakPolicy::validate(std::size_t k) const {
    for (std::size_t c : cuts) {
        if (c > k) {
            throw ConfigError("break policy cut at step " + std::to_string(c) + " lies beyond the grid (k = " +
                              std::to_string(k) + ")");
        }
    }
    if (mode != Mode::cut_at_times && !cuts.empty()) {
        throw ConfigError("break policy lists cut steps but its mode does not use them");
    }
}

// -------------------------------- evaluator -----------------------------------

Evaluator::Evaluator(const network::InfluenceMPS& fmps, const SystemSpec& sys, double dt, BreakPolicy policy)
    : fmps_(&fmps), sys_(sys), policy_(std::move(policy)) {
    sys_.validate();
    if (fmps.d != sys_.d) {
        throw ConfigError("influence MPS and system disagree on the dimension");
    }
    const auto lam = sys_.lambdas();
    for (std::size_t i = 0; i < sys_.d; ++i) {
        if (std::abs(lam[i] - fmps.lambdas[i]) > 1e-12 * std::max(1.0, std::abs(lam[i]))) {
            throw ConfigError("influence MPS was built for a different coupling eigenbasis");
        }
    }
    if (std::abs(fmps.dt - dt) > 1e-12 * dt) {
        throw ConfigError("influence MPS was built on a different time step");
    }
    if (fmps.k() == 0) {
        throw ConfigError("influence MPS has no legs");
    }
    policy_.validate(fmps.k());
    v_half_ = free_half_propagator(sys_, dt).v_half;

    const std::size_t k = fmps.k();
    const std::size_t d2 = fmps.d2();
    env_.resize(k + 1);
    env_[k] = Eigen::VectorXcd::Ones(1);
    for (std::size_t n = k; n-- > 0;) {
        const DenseTensor& s = fmps.sites[n];
        const std::size_t l = s.extent(0), r = s.extent(2);
        Eigen::VectorXcd e = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(l));
        const double u = 1.0 / static_cast<double>(sys_.d);
        for (std::size_t b = 0; b < l; ++b) {
            cplx acc = 0.0;
            for (std::size_t q = 0; q < sys_.d; ++q) {
                const std::size_t a = compound_index(q, q, sys_.d);
                const cplx* row = &s[(b * d2 + a) * r];
                for (std::size_t c = 0; c < r; ++c) {
                    acc += row[c] * env_[n + 1](static_cast<Eigen::Index>(c));
                }
            }
            e(static_cast<Eigen::Index>(b)) = u * acc;
        }
        env_[n] = std::move(e);
    }

    cut_.assign(k + 1, false);
    if (policy_.mode == BreakPolicy::Mode::every_step) {
        std::fill(cut_.begin(), cut_.end(), true);
    } else {
        for (std::size_t c : policy_.cuts) {
            cut_[c] = true;
        }
    }
}

std::vector<Eigen::MatrixXcd> Evaluator::states(std::span<const Intervention> seq) const {
    const std::size_t k = fmps_->k();
    const auto d2 = static_cast<Eigen::Index>(fmps_->d2());
    if (seq.size() > k + 1) {
        throw ConfigError("intervention sequence longer than k + 1");
    }
    for (const auto& a : seq) {
        if (a.matrix.rows() != d2 || a.matrix.cols() != d2) {
            throw DimensionError("intervention has the wrong superoperator size");
        }
    }
    const auto dd = static_cast<Eigen::Index>(sys_.d);
    const Eigen::MatrixXcd vt = v_half_.transpose();

    std::vector<Eigen::MatrixXcd> out(k + 1);
    out[0] = sys_.rho0;
    Eigen::MatrixXcd x = vectorize(sys_.rho0).transpose();  // bond x d^2
    std::size_t n = 0;
    for (std::size_t j = 1; j <= k; ++j) {
        if (cut_[j - 1] && n > 0) {
            x = vectorize(out[j - 1]).transpose();
            n = 0;
        }
        if (j - 1 < seq.size() && !seq[j - 1].is_identity()) {
            x = x * (v_half_ * seq[j - 1].matrix).transpose();
        } else {
            x = x * vt;
        }
        x = absorb_site(x, fmps_->sites[n]);
        ++n;
        x = x * vt;
        const Eigen::VectorXcd v = x.transpose() * env_[n];
        out[j] = unvectorize(v, dd);
    }
    return out;
}

Eigen::MatrixXcd Evaluator::final_state(std::span<const Intervention> seq) const {
    const std::size_t k = fmps_->k();
    auto st = states(seq.size() > k ? seq.first(k) : seq);
    Eigen::MatrixXcd rho = std::move(st.back());
    if (seq.size() == k + 1 && !seq[k].is_identity()) {
        rho = unvectorize(seq[k].matrix * vectorize(rho), static_cast<Eigen::Index>(sys_.d));
    }
    return rho;
}

cplx Evaluator::correlation(std::span<const Insertion> insertions) const {
    const std::size_t k = fmps_->k();
    std::vector<Intervention> seq(k + 1, Intervention::identity(sys_.d));
    std::size_t last = 0;
    for (std::size_t i = 0; i < insertions.size(); ++i) {
        const auto& ins = insertions[i];
        if (ins.step > k) {
            throw ConfigError("insertion step " + std::to_string(ins.step) + " lies beyond the grid");
        }
        if (i > 0 && ins.step <= last) {
            throw ConfigError("insertion steps must be strictly increasing (step " + std::to_string(ins.step) + ")");
        }
        last = ins.step;
        seq[ins.step] = Intervention::sandwich(ins.left, ins.right);
    }
    return final_state(seq).trace();
}

// ------------------------------- free functions -------------------------------

Eigen::MatrixXcd contract_with_interventions(const network::InfluenceMPS& fmps, const SystemSpec& sys,
                                             std::span<const Intervention> seq, double dt) {
    if (seq.size() != fmps.k() && seq.size() != fmps.k() + 1) {
        throw ConfigError("intervention sequence must have k or k + 1 entries");
    }
    return Evaluator(fmps, sys, dt).final_state(seq);
}

std::vector<Eigen::MatrixXcd> density_trajectory(const network::InfluenceMPS& fmps, const SystemSpec& sys, double dt) {
    auto st = Evaluator(fmps, sys, dt).states({});
    st.erase(st.begin());
    return st;
}

cplx multitime_correlation(const network::InfluenceMPS& fmps, const SystemSpec& sys, double dt,
                           std::span<const Insertion> insertions) {
    return Evaluator(fmps, sys, dt).correlation(insertions);
}

Evaluator apply_break_policy(const network::InfluenceMPS& fmps, BreakPolicy policy, const SystemSpec& sys, double dt) {
    return Evaluator(fmps, sys, dt, std::move(policy));
}

void write_trajectory_csv(std::ostream& os, const std::vector<Eigen::MatrixXcd>& traj, double dt,
                          std::size_t first_step) {
    if (traj.empty()) {
        return;
    }
    const Eigen::Index d = traj.front().rows();
    os << "t";
    for (Eigen::Index c = 0; c < d; ++c) {
        for (Eigen::Index r = 0; r < d; ++r) {
            os << ",re_rho" << r << c << ",im_rho" << r << c;
        }
    }
    os << '\n';
    const auto old_prec = os.precision(17);
    for (std::size_t j = 0; j < traj.size(); ++j) {
        os << dt * static_cast<double>(first_step + j);
        for (Eigen::Index c = 0; c < d; ++c) {
            for (Eigen::Index r = 0; r < d; ++r) {
                os << ',' << traj[j](r, c).real() << ',' << traj[j](r, c).imag();
            }
        }
        os << '\n';
    }
    os.precision(old_prec);
}

}  // namespace tempo::process
