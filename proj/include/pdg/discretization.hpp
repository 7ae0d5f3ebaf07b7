#pragma once

// First-order-hold discretization of the time-dilated dynamics
//   dx/dtau = s f(x, u),   tau in [0, 1],
// about a reference trajectory on a uniform grid tau_i = i / (N - 1).

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "pdg/dynamics.hpp"

namespace pdg {

using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

/// Undilated dynamics f(x, u) with analytic Jacobians. The dilated form and its
/// s-derivative follow from F = s f.
class ContinuousSystem {
 public:
  virtual ~ContinuousSystem() = default;
  virtual int state_dim() const = 0;
  virtual int control_dim() const = 0;
  virtual VecX rate(const VecX& x, const VecX& u) const = 0;
  /// Fills fx = df/dx and fu = df/du.
  virtual void jacobians(const VecX& x, const VecX& u, MatX& fx, MatX& fu) const = 0;
  /// Projection applied after every integration substep.
  virtual void project(VecX& /*x*/) const {}
};

/// The 6-DoF vehicle with pose renormalization after every substep.
class VehicleSystem final : public ContinuousSystem {
 public:
  explicit VehicleSystem(VehicleParams p) : p_(std::move(p)) {}
  int state_dim() const override { return kStateDim; }
  int control_dim() const override { return kControlDim; }
  VecX rate(const VecX& x, const VecX& u) const override;
  void jacobians(const VecX& x, const VecX& u, MatX& fx, MatX& fu) const override;
  void project(VecX& x) const override;
  const VehicleParams& params() const { return p_; }

 private:
  VehicleParams p_;
};

/// x' = A x + B u. Used to check the discretization against closed forms.
class LinearSystem final : public ContinuousSystem {
 public:
  LinearSystem(MatX A, MatX B) : A_(std::move(A)), B_(std::move(B)) {}
  int state_dim() const override { return static_cast<int>(A_.rows()); }
  int control_dim() const override { return static_cast<int>(B_.cols()); }
  VecX rate(const VecX& x, const VecX& u) const override { return A_ * x + B_ * u; }
  void jacobians(const VecX&, const VecX&, MatX& fx, MatX& fu) const override {
    fx = A_;
    fu = B_;
  }

 private:
  MatX A_, B_;
};

struct ReferenceTrajectory {
  double s_bar = 1.0;
  MatX x_bar;  // N x n_x
  MatX u_bar;  // N x n_u

  int N() const { return static_cast<int>(x_bar.rows()); }
  double dtau() const { return 1.0 / (N() - 1); }
  double tau(int i) const { return i * dtau(); }
};

/// x_{i+1} = A x_i + Bm u_i + Bp u_{i+1} + S s + R, plus the reset-integration
/// endpoint and the resulting defect.
struct DiscreteLtvNode {
  MatX A, Bm, Bp;
  VecX S, R;      // R is taken so that the model reproduces x_end exactly
  VecX R_quadrature;  // R from integrating the affine remainder
  MatX A_inv;      // Phi(tau_i, tau_{i+1}) from the adjoint integration
  VecX x_end;      // reference state integrated from x_bar_i
  double defect = 0.0;
};

inline constexpr int kDefaultSubsteps = 30;

/// FOH interpolation on [tau_i, tau_{i+1}]. Throws InvalidArgument outside the interval.
Eigen::VectorXd foh(const VecX& u_i, const VecX& u_ip1, double tau_i, double tau_ip1, double tau);

/// Discretizes interval i (0-based, i in [0, N-2]). `scale` (optional, size n_x)
/// divides the endpoint mismatch before taking the defect norm.
/// Throws PropagationFailure carrying i if any integrand turns non-finite.
DiscreteLtvNode discretize_interval(const ContinuousSystem& sys, const ReferenceTrajectory& ref, int i,
                                    int substeps = kDefaultSubsteps, const VecX& scale = VecX());

std::vector<DiscreteLtvNode> discretize(const ContinuousSystem& sys, const ReferenceTrajectory& ref,
                                        int substeps = kDefaultSubsteps, const VecX& scale = VecX());

/// Defects ||(x_end_i - x_bar_{i+1}) / scale||_2 for every interval.
VecX compute_defects(const ReferenceTrajectory& ref, const std::vector<DiscreteLtvNode>& nodes,
                     const VecX& scale = VecX());

/// Single-shot RK4 propagation of x0 under FOH controls U (N x n_u) with total
/// time s. Returns the N x n_x state at the grid nodes.
MatX propagate_nonlinear(const ContinuousSystem& sys, const VecX& x0, const MatX& U, double s,
                         int substeps = kDefaultSubsteps);

/// Same, but also returns `dense` samples per interval (including the left node)
/// for plotting. Rows: (N - 1) * dense + 1.
MatX propagate_dense(const ContinuousSystem& sys, const VecX& x0, const MatX& U, double s, int substeps,
                     int dense);

}  // namespace pdg
