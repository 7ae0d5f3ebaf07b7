#include "pdg/discretization.hpp"

#include <cmath>
#include <string>

#include "pdg/errors.hpp"

namespace pdg {

VecX VehicleSystem::rate(const VecX& x, const VecX& u) const {
  return state_rate(StateVector(x), Vec3(u), p_);
}

void VehicleSystem::jacobians(const VecX& x, const VecX& u, MatX& fx, MatX& fu) const {
  const Linearization lin = linearize(1.0, StateVector(x), Vec3(u), p_);
  fx = lin.A;
  fu = lin.B;
}

void VehicleSystem::project(VecX& x) const {
  StateVector y(x);
  renormalize_pose(y);
  x = y;
}

VecX foh(const VecX& u_i, const VecX& u_ip1, double tau_i, double tau_ip1, double tau) {
  const double width = tau_ip1 - tau_i;
  const double slack = 1e-12 * std::max(1.0, std::abs(tau_ip1));
  if (!(width > 0.0) || tau < tau_i - slack || tau > tau_ip1 + slack) {
    throw InvalidArgument("foh: tau outside the interval");
  }
  const double lp = std::clamp((tau - tau_i) / width, 0.0, 1.0);
  return (1.0 - lp) * u_i + lp * u_ip1;
}

namespace {

// Jointly integrated quantities on one interval.
struct Augmented {
  VecX x;
  MatX Phi, Psi, Im, Ip;
  VecX Is, Ir;

  Augmented axpy(double h, const Augmented& d) const {
    return {x + h * d.x, Phi + h * d.Phi, Psi + h * d.Psi, Im + h * d.Im, Ip + h * d.Ip, Is + h * d.Is, Ir + h * d.Ir};
  }
};

bool finite(const Augmented& a) {
  return a.x.allFinite() && a.Phi.allFinite() && a.Psi.allFinite() && a.Im.allFinite() && a.Ip.allFinite() &&
         a.Is.allFinite() && a.Ir.allFinite();
}

void check_reference(const ContinuousSystem& sys, const ReferenceTrajectory& ref) {
  if (ref.N() < 2) throw InvalidArgument("reference needs at least two nodes");
  if (ref.x_bar.cols() != sys.state_dim() || ref.u_bar.cols() != sys.control_dim() || ref.u_bar.rows() != ref.N()) {
    throw InvalidArgument("reference dimensions do not match the system");
  }
  if (!(ref.s_bar > 0.0)) throw InvalidArgument("time dilation must be positive");
}

// One RK4 step of the state alone; throws PropagationFailure on non-finite output.
VecX rk4_state(const ContinuousSystem& sys, const VecX& x, double s, const VecX& u0, const VecX& u1, double t0,
               double t1, double a, double b, int interval) {
  auto u_at = [&](double t) { return foh(u0, u1, t0, t1, t); };
  const double h = b - a;
  try {
    const VecX k1 = s * sys.rate(x, u_at(a));
    const VecX k2 = s * sys.rate(x + 0.5 * h * k1, u_at(a + 0.5 * h));
    const VecX k3 = s * sys.rate(x + 0.5 * h * k2, u_at(a + 0.5 * h));
    const VecX k4 = s * sys.rate(x + h * k3, u_at(b));
    VecX out = x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!out.allFinite()) throw PropagationFailure(interval, "non-finite state");
    sys.project(out);
    return out;
  } catch (const InvalidState& e) {
    throw PropagationFailure(interval, e.what());
  }
}

}  // namespace

DiscreteLtvNode discretize_interval(const ContinuousSystem& sys, const ReferenceTrajectory& ref, int i, int substeps,
                                    const VecX& scale) {
  check_reference(sys, ref);
  if (i < 0 || i > ref.N() - 2) throw InvalidArgument("interval index out of range");
  if (substeps < 1) throw InvalidArgument("substeps must be at least 1");

  const int n = sys.state_dim();
  const int m = sys.control_dim();
  const double s = ref.s_bar;
  const double t0 = ref.tau(i), t1 = ref.tau(i + 1);
  const VecX u0 = ref.u_bar.row(i).transpose();
  const VecX u1 = ref.u_bar.row(i + 1).transpose();

  MatX fx(n, n), fu(n, m);
  auto derivative = [&](double t, const Augmented& y) {
    const double lp = (t - t0) / (t1 - t0);
    const double lm = 1.0 - lp;
    const VecX u = lm * u0 + lp * u1;
    VecX f;
    try {
      f = sys.rate(y.x, u);
      sys.jacobians(y.x, u, fx, fu);
    } catch (const InvalidState& e) {
      throw PropagationFailure(i, e.what());
    }
    const MatX A = s * fx;
    const MatX B = s * fu;
    const VecX R = -A * y.x - B * u;
    const MatX PsiB = y.Psi * B;
    Augmented d;
    d.x = s * f;
    d.Phi = A * y.Phi;
    d.Psi = -y.Psi * A;
    d.Im = lm * PsiB;
    d.Ip = lp * PsiB;
    d.Is = y.Psi * f;
    d.Ir = y.Psi * R;
    return d;
  };

  Augmented y{ref.x_bar.row(i).transpose(), MatX::Identity(n, n), MatX::Identity(n, n), MatX::Zero(n, m),
              MatX::Zero(n, m), VecX::Zero(n), VecX::Zero(n)};
  const double h = (t1 - t0) / substeps;
  for (int k = 0; k < substeps; ++k) {
    const double a = t0 + k * h;
    const Augmented k1 = derivative(a, y);
    const Augmented k2 = derivative(a + 0.5 * h, y.axpy(0.5 * h, k1));
    const Augmented k3 = derivative(a + 0.5 * h, y.axpy(0.5 * h, k2));
    const Augmented k4 = derivative(a + h, y.axpy(h, k3));
    y = y.axpy(h / 6.0, k1).axpy(h / 3.0, k2).axpy(h / 3.0, k3).axpy(h / 6.0, k4);
    if (!finite(y)) throw PropagationFailure(i, "non-finite integrand");
    sys.project(y.x);
  }

  DiscreteLtvNode node;
  node.A = y.Phi;
  node.A_inv = y.Psi;
  node.Bm = y.Phi * y.Im;
  node.Bp = y.Phi * y.Ip;
  node.S = y.Phi * y.Is;
  node.R_quadrature = y.Phi * y.Ir;
  node.x_end = y.x;
  // The per-substep pose projection is not part of the linear map, so the
  // quadrature remainder misses x_end by the integration error. Taking R from
  // the endpoint makes the model exact at the reference.
  node.R = y.x - node.A * ref.x_bar.row(i).transpose() - node.Bm * u0 - node.Bp * u1 - node.S * s;
  VecX diff = y.x - ref.x_bar.row(i + 1).transpose();
  if (scale.size() == n) diff = diff.cwiseQuotient(scale);
  node.defect = diff.norm();
  return node;
}

std::vector<DiscreteLtvNode> discretize(const ContinuousSystem& sys, const ReferenceTrajectory& ref, int substeps,
                                        const VecX& scale) {
  check_reference(sys, ref);
  std::vector<DiscreteLtvNode> nodes;
  nodes.reserve(ref.N() - 1);
  for (int i = 0; i + 1 < ref.N(); ++i) nodes.push_back(discretize_interval(sys, ref, i, substeps, scale));
  return nodes;
}

VecX compute_defects(const ReferenceTrajectory& ref, const std::vector<DiscreteLtvNode>& nodes, const VecX& scale) {
  VecX out(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    VecX diff = nodes[i].x_end - ref.x_bar.row(static_cast<Eigen::Index>(i) + 1).transpose();
    if (scale.size() == diff.size()) diff = diff.cwiseQuotient(scale);
    out(static_cast<Eigen::Index>(i)) = diff.norm();
  }
  return out;
}

MatX propagate_dense(const ContinuousSystem& sys, const VecX& x0, const MatX& U, double s, int substeps, int dense) {
  if (!(s > 0.0)) throw InvalidArgument("time dilation must be positive");
  if (substeps < 1 || dense < 1) throw InvalidArgument("substeps and dense must be at least 1");
  if (U.rows() < 2 || U.cols() != sys.control_dim() || x0.size() != sys.state_dim()) {
    throw InvalidArgument("propagation dimensions do not match the system");
  }
  const int N = static_cast<int>(U.rows());
  const double dtau = 1.0 / (N - 1);
  const int steps_per_sample = std::max(1, (substeps + dense - 1) / dense);
  MatX out((N - 1) * dense + 1, x0.size());
  VecX x = x0;
  out.row(0) = x.transpose();
  for (int i = 0; i + 1 < N; ++i) {
    const double t0 = i * dtau, t1 = (i + 1) * dtau;
    const VecX u0 = U.row(i).transpose(), u1 = U.row(i + 1).transpose();
    for (int d = 0; d < dense; ++d) {
      const double a0 = t0 + (t1 - t0) * d / dense;
      const double b0 = t0 + (t1 - t0) * (d + 1) / dense;
      const double h = (b0 - a0) / steps_per_sample;
      for (int k = 0; k < steps_per_sample; ++k) {
        const double a = a0 + k * h;
        const double b = (k + 1 == steps_per_sample) ? b0 : a + h;
        x = rk4_state(sys, x, s, u0, u1, t0, t1, a, b, i);
      }
      out.row(i * dense + d + 1) = x.transpose();
    }
  }
  return out;
}

MatX propagate_nonlinear(const ContinuousSystem& sys, const VecX& x0, const MatX& U, double s, int substeps) {
  return propagate_dense(sys, x0, U, s, substeps, 1);
}

}  // namespace pdg
