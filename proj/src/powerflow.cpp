#include "critbus/powerflow.h"

#include <cmath>
#include <iomanip>

namespace critbus {

std::string_view to_string(DivergenceReason reason) {
  switch (reason) {
    case DivergenceReason::iteration_limit:
      return "iteration_limit";
    case DivergenceReason::singular_jacobian:
      return "singular_jacobian";
    case DivergenceReason::voltage_out_of_range:
      return "voltage_out_of_range";
  }
  return "iteration_limit";
}

PowerFlowProblem::PowerFlowProblem(const Case &c, const OutageSet &outages, const LoadOverrides &overrides)
    : case_(&c), ybus_(build_ybus(c, outages)) {
  const auto n = static_cast<Eigen::Index>(c.bus_count());
  p_sched_ = Eigen::VectorXd::Zero(n);
  q_sched_ = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto &bus = c.buses()[static_cast<std::size_t>(i)];
    p_sched_(i) = bus.p_gen - bus.p_load;
    q_sched_(i) = bus.q_gen - bus.q_load;
  }
  for (const auto &[bus_id, inc] : overrides) {
    const auto i = static_cast<Eigen::Index>(c.bus_index(bus_id));
    p_sched_(i) -= inc.dp;
    q_sched_(i) -= inc.dq;
  }
  for (std::size_t i = 0; i < c.bus_count(); ++i) {
    const auto kind = c.buses()[i].kind;
    if (kind != BusKind::slack) angle_buses_.push_back(i);
    if (kind == BusKind::load) magnitude_buses_.push_back(i);
  }
}

VoltageState PowerFlowProblem::flat_start() const {
  const auto n = static_cast<Eigen::Index>(case_->bus_count());
  VoltageState s{Eigen::VectorXd::Ones(n), Eigen::VectorXd::Zero(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto &bus = case_->buses()[static_cast<std::size_t>(i)];
    if (bus.kind != BusKind::load) s.magnitude(i) = bus.v_setpoint;
  }
  return s;
}

Eigen::VectorXcd PowerFlowProblem::injections(const VoltageState &state) const {
  const Eigen::Index n = ybus_.rows();
  Eigen::VectorXcd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = std::polar(state.magnitude(i), state.angle(i));
  const Eigen::VectorXcd current = ybus_ * v;
  return v.cwiseProduct(current.conjugate());
}

Eigen::VectorXd PowerFlowProblem::mismatch(const VoltageState &state) const {
  const Eigen::VectorXcd s = injections(state);
  Eigen::VectorXd out(static_cast<Eigen::Index>(unknown_count()));
  Eigen::Index row = 0;
  for (auto i : angle_buses_) {
    const auto k = static_cast<Eigen::Index>(i);
    out(row++) = p_sched_(k) - s(k).real();
  }
  for (auto i : magnitude_buses_) {
    const auto k = static_cast<Eigen::Index>(i);
    out(row++) = q_sched_(k) - s(k).imag();
  }
  return out;
}

Eigen::MatrixXd PowerFlowProblem::jacobian(const VoltageState &state) const {
  const Eigen::VectorXcd s = injections(state);
  const auto &vm = state.magnitude;
  const auto &va = state.angle;

  const auto na = static_cast<Eigen::Index>(angle_buses_.size());
  const auto nm = static_cast<Eigen::Index>(magnitude_buses_.size());
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(na + nm, na + nm);

  // Row quantity (P or Q at bus i) differentiated w.r.t. column unknown (angle or
  // magnitude at bus k); standard polar-form partials.
  auto dp_dangle = [&](Eigen::Index i, Eigen::Index k) {
    const double g = ybus_(i, k).real(), b = ybus_(i, k).imag();
    if (i == k) return -s(i).imag() - b * vm(i) * vm(i);
    const double t = va(i) - va(k);
    return vm(i) * vm(k) * (g * std::sin(t) - b * std::cos(t));
  };
  auto dp_dmag = [&](Eigen::Index i, Eigen::Index k) {
    const double g = ybus_(i, k).real(), b = ybus_(i, k).imag();
    if (i == k) return s(i).real() / vm(i) + g * vm(i);
    const double t = va(i) - va(k);
    return vm(i) * (g * std::cos(t) + b * std::sin(t));
  };
  auto dq_dangle = [&](Eigen::Index i, Eigen::Index k) {
    const double g = ybus_(i, k).real(), b = ybus_(i, k).imag();
    if (i == k) return s(i).real() - g * vm(i) * vm(i);
    const double t = va(i) - va(k);
    return -vm(i) * vm(k) * (g * std::cos(t) + b * std::sin(t));
  };
  auto dq_dmag = [&](Eigen::Index i, Eigen::Index k) {
    const double g = ybus_(i, k).real(), b = ybus_(i, k).imag();
    if (i == k) return s(i).imag() / vm(i) - b * vm(i);
    const double t = va(i) - va(k);
    return vm(i) * (g * std::sin(t) - b * std::cos(t));
  };

  for (Eigen::Index r = 0; r < na; ++r) {
    const auto i = static_cast<Eigen::Index>(angle_buses_[static_cast<std::size_t>(r)]);
    for (Eigen::Index c = 0; c < na; ++c) {
      jac(r, c) = dp_dangle(i, static_cast<Eigen::Index>(angle_buses_[static_cast<std::size_t>(c)]));
    }
    for (Eigen::Index c = 0; c < nm; ++c) {
      jac(r, na + c) = dp_dmag(i, static_cast<Eigen::Index>(magnitude_buses_[static_cast<std::size_t>(c)]));
    }
  }
  for (Eigen::Index r = 0; r < nm; ++r) {
    const auto i = static_cast<Eigen::Index>(magnitude_buses_[static_cast<std::size_t>(r)]);
    for (Eigen::Index c = 0; c < na; ++c) {
      jac(na + r, c) = dq_dangle(i, static_cast<Eigen::Index>(angle_buses_[static_cast<std::size_t>(c)]));
    }
    for (Eigen::Index c = 0; c < nm; ++c) {
      jac(na + r, na + c) = dq_dmag(i, static_cast<Eigen::Index>(magnitude_buses_[static_cast<std::size_t>(c)]));
    }
  }
  return jac;
}

namespace {

double max_abs(const Eigen::VectorXd &v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

// Below this reciprocal condition estimate the Newton step is treated as singular.
constexpr double kSingularRcond = 1e-13;

}  // namespace

SolveOutcome PowerFlowProblem::solve(const PowerFlowOptions &options, const VoltageState *start) const {
  VoltageState state = (start == nullptr || options.flat_start) ? flat_start() : *start;
  // setpoint buses are pinned whatever the start point says
  for (std::size_t i = 0; i < case_->bus_count(); ++i) {
    const auto &bus = case_->buses()[i];
    const auto k = static_cast<Eigen::Index>(i);
    if (bus.kind != BusKind::load) state.magnitude(k) = bus.v_setpoint;
    if (bus.kind == BusKind::slack) state.angle(k) = 0.0;
  }

  const auto na = static_cast<Eigen::Index>(angle_buses_.size());
  double last = 0.0;
  for (int iter = 0;; ++iter) {
    const Eigen::VectorXd mis = mismatch(state);
    last = max_abs(mis);
    if (options.trace != nullptr) {
      *options.trace << "  iter " << iter << "  max|mismatch| = " << std::scientific << std::setprecision(3) << last
                     << std::defaultfloat << '\n';
    }
    if (std::isfinite(last) && last < options.tol) {
      return PowerFlowSolution{std::move(state), iter, last};
    }
    if (iter >= options.max_iter || !std::isfinite(last)) {
      return Diverged{DivergenceReason::iteration_limit, iter, last};
    }

    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(jacobian(state));
    if (!(lu.rcond() > kSingularRcond)) {
      return Diverged{DivergenceReason::singular_jacobian, iter, last};
    }
    const Eigen::VectorXd dx = lu.solve(mis);

    for (Eigen::Index r = 0; r < na; ++r) {
      state.angle(static_cast<Eigen::Index>(angle_buses_[static_cast<std::size_t>(r)])) += dx(r);
    }
    for (std::size_t r = 0; r < magnitude_buses_.size(); ++r) {
      const auto k = static_cast<Eigen::Index>(magnitude_buses_[r]);
      state.magnitude(k) += dx(na + static_cast<Eigen::Index>(r));
      const double vm = state.magnitude(k);
      if (!(vm > 0.0 && vm <= 2.0)) {
        return Diverged{DivergenceReason::voltage_out_of_range, iter + 1, last};
      }
    }
  }
}

SolveOutcome solve(const Case &c, const OutageSet &outages, const LoadOverrides &overrides,
                   const PowerFlowOptions &options) {
  for (const auto &[bus_id, inc] : overrides) {
    (void)inc;
    if (c.buses()[c.bus_index(bus_id)].kind != BusKind::load) {
      throw CaseError(CaseError::Kind::bad_value, "load override at non-load bus " + std::to_string(bus_id));
    }
  }
  return PowerFlowProblem(c, outages, overrides).solve(options);
}

std::vector<BranchFlow> line_flows(const Case &c, const OutageSet &outages, const VoltageState &state) {
  std::vector<BranchFlow> flows;
  for (const auto &br : c.branches()) {
    if (!c.in_service(br, outages)) continue;
    const auto i = static_cast<Eigen::Index>(c.bus_index(br.from_bus));
    const auto j = static_cast<Eigen::Index>(c.bus_index(br.to_bus));
    const std::complex<double> vi = std::polar(state.magnitude(i), state.angle(i));
    const std::complex<double> vj = std::polar(state.magnitude(j), state.angle(j));
    const std::complex<double> ys = br.series_admittance();
    const std::complex<double> yc(0.0, br.b_half);

    // power entering the branch at each terminal
    const std::complex<double> s_ij = vi * std::conj((vi - vj) * ys + vi * yc);
    const std::complex<double> s_ji = vj * std::conj((vj - vi) * ys + vj * yc);

    BranchFlow f;
    f.branch_id = br.id;
    const bool forward = s_ij.real() >= 0.0;
    const std::complex<double> s_send = forward ? s_ij : s_ji;
    const std::complex<double> s_back = forward ? s_ji : s_ij;
    f.sending_bus = forward ? br.from_bus : br.to_bus;
    f.receiving_bus = forward ? br.to_bus : br.from_bus;
    f.p_send = s_send.real();
    f.q_send = s_send.imag();
    f.p_recv = -s_back.real();
    f.q_recv = -s_back.imag();
    f.p_loss = f.p_send - f.p_recv;
    f.q_loss = f.q_send - f.q_recv;
    flows.push_back(std::move(f));
  }
  return flows;
}

}  // namespace critbus
