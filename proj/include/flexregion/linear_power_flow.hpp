#pragma once

// First-order model of the AC power-flow equations around the flat start
// (all voltage magnitudes 1 p.u., all angles 0): Jacobian blocks, the
// injection offsets the expansion point itself produces, and sending-end
// branch flows as linear forms of the state.

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "flexregion/grid.hpp"

namespace flexregion {

struct JacobianBlocks {
  Eigen::MatrixXd j_p_theta;  // dP/dtheta
  Eigen::MatrixXd j_p_u;      // dP/dU
  Eigen::MatrixXd j_q_theta;  // dQ/dtheta
  Eigen::MatrixXd j_q_u;      // dQ/dU
  int slack = 0;
};

struct ReferenceInjection {
  Eigen::VectorXd p_ref;
  Eigen::VectorXd q_ref;
};

// Sending-end flow of one line as a linear form over (theta, du) plus a
// constant: P = p_theta.theta + p_du.du + p_const and likewise for Q.
struct BranchFlow {
  Eigen::VectorXd p_theta, p_du, q_theta, q_du;
  double p_const = 0.0;
  double q_const = 0.0;
};

struct BranchFlowMap {
  std::vector<BranchFlow> lines;
};

inline JacobianBlocks build_jacobian(const Network& net) {
  const int n = net.n_buses();
  JacobianBlocks jac;
  jac.j_p_theta = Eigen::MatrixXd::Zero(n, n);
  jac.j_p_u = Eigen::MatrixXd::Zero(n, n);
  jac.j_q_u = Eigen::MatrixXd::Zero(n, n);
  for (const Line& line : net.lines()) {
    const int i = net.bus_index(line.from);
    const int k = net.bus_index(line.to);
    const double g = line.g;
    const double b = line.b;
    const double half_sh = 0.5 * line.b_sh;

    jac.j_p_theta(i, i) += -b;
    jac.j_p_theta(k, k) += -b;
    jac.j_p_theta(i, k) += b;
    jac.j_p_theta(k, i) += b;

    jac.j_p_u(i, i) += g;
    jac.j_p_u(k, k) += g;
    jac.j_p_u(i, k) += -g;
    jac.j_p_u(k, i) += -g;

    jac.j_q_u(i, i) += -2.0 * half_sh - b;
    jac.j_q_u(k, k) += -2.0 * half_sh - b;
    jac.j_q_u(i, k) += b;
    jac.j_q_u(k, i) += b;
  }
  jac.j_q_theta = -jac.j_p_u;
  jac.slack = net.slack_index();
  return jac;
}

// Injections produced by the expansion point itself. Active power is zero;
// each line end sees half the line's shunt susceptance, which at 1 p.u.
// voltage consumes -b_sh/2 of reactive power.
inline ReferenceInjection reference_injections(const Network& net) {
  const int n = net.n_buses();
  ReferenceInjection ref;
  ref.p_ref = Eigen::VectorXd::Zero(n);
  ref.q_ref = Eigen::VectorXd::Zero(n);
  for (const Line& line : net.lines()) {
    const double half_sh = 0.5 * line.b_sh;
    ref.q_ref(net.bus_index(line.from)) -= half_sh;
    ref.q_ref(net.bus_index(line.to)) -= half_sh;
  }
  return ref;
}

inline BranchFlowMap branch_flow_map(const Network& net) {
  const int n = net.n_buses();
  BranchFlowMap map;
  map.lines.reserve(net.lines().size());
  for (const Line& line : net.lines()) {
    const int i = net.bus_index(line.from);
    const int k = net.bus_index(line.to);
    const double g = line.g;
    const double b = line.b;
    const double half_sh = 0.5 * line.b_sh;
    BranchFlow f;
    f.p_theta = Eigen::VectorXd::Zero(n);
    f.p_du = Eigen::VectorXd::Zero(n);
    f.q_theta = Eigen::VectorXd::Zero(n);
    f.q_du = Eigen::VectorXd::Zero(n);
    f.p_theta(i) = -b;
    f.p_theta(k) = b;
    f.p_du(i) = g;
    f.p_du(k) = -g;
    f.q_theta(i) = -g;
    f.q_theta(k) = g;
    f.q_du(i) = -b - 2.0 * half_sh;
    f.q_du(k) = b;
    f.q_const = -half_sh;
    map.lines.push_back(std::move(f));
  }
  return map;
}

inline std::pair<Eigen::VectorXd, Eigen::VectorXd> injections_from_state(
    const JacobianBlocks& jac, const ReferenceInjection& ref,
    const Eigen::VectorXd& theta, const Eigen::VectorXd& du) {
  const auto n = jac.j_p_theta.rows();
  if (theta.size() != n || du.size() != n)
    throw InputError("injections_from_state: state dimension mismatch");
  if (std::abs(theta(jac.slack)) > 1e-12 || std::abs(du(jac.slack)) > 1e-12)
    throw InputError("injections_from_state: nonzero slack state entries");
  Eigen::VectorXd p = ref.p_ref + jac.j_p_theta * theta + jac.j_p_u * du;
  Eigen::VectorXd q = ref.q_ref + jac.j_q_theta * theta + jac.j_q_u * du;
  return {std::move(p), std::move(q)};
}

// Solves the reduced linear model for the state given injections at every
// non-slack bus (slack entries of the inputs are ignored; slack state is 0).
class LinearStateSolver {
 public:
  LinearStateSolver(const Network& net, const JacobianBlocks& jac,
                    ReferenceInjection ref)
      : n_(net.n_buses()), slack_(jac.slack), ref_(std::move(ref)) {
    const int m = n_ - 1;
    reduced_.resize(2 * m, 2 * m);
    keep_.reserve(static_cast<std::size_t>(m));
    for (int i = 0; i < n_; ++i) {
      if (i != slack_) keep_.push_back(i);
    }
    for (int r = 0; r < m; ++r) {
      for (int c = 0; c < m; ++c) {
        reduced_(r, c) = jac.j_p_theta(keep_[r], keep_[c]);
        reduced_(r, m + c) = jac.j_p_u(keep_[r], keep_[c]);
        reduced_(m + r, c) = jac.j_q_theta(keep_[r], keep_[c]);
        reduced_(m + r, m + c) = jac.j_q_u(keep_[r], keep_[c]);
      }
    }
    lu_.compute(reduced_);
    if (!lu_.isInvertible())
      throw InputError("linear power-flow model is singular");
  }

  std::pair<Eigen::VectorXd, Eigen::VectorXd> solve_state(
      const Eigen::VectorXd& p, const Eigen::VectorXd& q) const {
    const int m = n_ - 1;
    Eigen::VectorXd rhs(2 * m);
    for (int r = 0; r < m; ++r) {
      rhs(r) = p(keep_[r]) - ref_.p_ref(keep_[r]);
      rhs(m + r) = q(keep_[r]) - ref_.q_ref(keep_[r]);
    }
    Eigen::VectorXd x = lu_.solve(rhs);
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(n_);
    Eigen::VectorXd du = Eigen::VectorXd::Zero(n_);
    for (int r = 0; r < m; ++r) {
      theta(keep_[r]) = x(r);
      du(keep_[r]) = x(m + r);
    }
    return {std::move(theta), std::move(du)};
  }

 private:
  int n_;
  int slack_;
  ReferenceInjection ref_;
  std::vector<int> keep_;
  Eigen::MatrixXd reduced_;
  Eigen::FullPivLU<Eigen::MatrixXd> lu_;
};

}  // namespace flexregion
