#pragma once

// Successive convexification driver: scaling, defect-driven trust-region
// weights, virtual control, convex subproblem assembly and the outer loop.

#include <optional>
#include <string>
#include <vector>

#include "pdg/constraints.hpp"
#include "pdg/discretization.hpp"
#include "pdg/socp.hpp"

namespace pdg {

/// Everything that defines one landing problem.
struct GuidanceProblem {
  VehicleParams vehicle;
  ConstraintParams limits;
  BoundaryConditions bc;

  void validate() const;
};

enum class TrustRegionForm { SumOfNorms, Squared };

struct ScvxConfig {
  int N = 35;
  double dx_tol = 0.01;        // scaled, infinity norm over nodes
  double w_vc = 1e4;
  double defect_floor = 1e-4;
  int max_iterations = 30;
  int substeps = kDefaultSubsteps;
  TrustRegionForm trust_region = TrustRegionForm::Squared;
  double s_min = 1e-3;         // lower bound on the scaled time dilation
  /// Convergence additionally requires every scaled defect of the final
  /// iterate to be at most this. Set <= 0 to use the state test alone.
  double defect_tol = 1e-6;
  SolverSettings solver;
  /// A subproblem that stops early (iteration limit or lost interior) is still
  /// used when its KKT residuals are all below this.
  double accept_tol = 1e-6;
  /// When non-empty, every subproblem is written there as subproblem_<k>.txt.
  std::string dump_dir;

  void validate() const;
};

/// x = Px x^, u = Pu u^, s = pt s^ (offsets are zero).
struct ScalingSet {
  StateVector Px = StateVector::Ones();
  double Pu = 1.0;
  double pt = 1.0;
};

struct Iterate {
  double s = 1.0;
  MatX X;        // N x 17
  MatX U;        // N x 3
  VecX eta;      // N, scaled trust radii
  MatX nu;       // (N-1) x 17, scaled virtual control
  VecX defects;  // N-1, of this iterate's own propagation
  double fuel_cost = 0.0;  // -m_N / m0
  double J_tr = 0.0;
  double J_vc = 0.0;

  int N() const { return static_cast<int>(X.rows()); }
  ReferenceTrajectory reference() const { return {s, X, U}; }
};

enum class ScvxStatus { Converged, MaxIterations };
std::string to_string(ScvxStatus s);

struct IterationRecord {
  int iteration = 0;
  double final_mass = 0.0;
  double total_defect = 0.0;  // of the reference this subproblem was built on
  double max_defect = 0.0;
  double eta_l1 = 0.0;
  double nu_l1 = 0.0;
  double dx = 0.0;            // scaled state change
  double max_scaled_state = 0.0;  // max |x^| over the new iterate
  double s = 0.0;
  SolverStatus solver_status = SolverStatus::Optimal;
  int solver_iterations = 0;
  double solve_ms = 0.0;
  double propagate_ms = 0.0;
};

struct ConvergedSolution {
  Iterate iterate;
  int iterations = 0;
  ScvxStatus status = ScvxStatus::MaxIterations;
  std::vector<IterationRecord> history;
};

/// Straight-line guess: mass linear to max(m_dry, 0.9 m0), position and
/// velocity linear between the boundary values, constant attitude qf, zero
/// rates, hover thrust clamped to [0, u_max], s = |r0 - rf| / max(1, |v0|)
/// clamped to [1, 100] s.
Iterate initial_guess(const GuidanceProblem& prob, int N);

/// w_i = 1 / max(defect_i, floor) for the N-1 intervals; the last node copies
/// the last interval's weight.
VecX update_trust_weights(const VecX& defects, double floor);

/// Px = diag(m0, 1_4, |r0|/2 1_4, w_max 1_4, |v0| 1_4), Pu = u_max, pt = s_prev.
/// A zero |r0| or |v0| falls back to 1.
ScalingSet build_scaling(const GuidanceProblem& prob, double s_prev);

/// Variable ids of an assembled subproblem.
struct SubproblemLayout {
  std::vector<NodeVariables> nodes;
  int s = -1;
  int nu_plus = -1;   // (N-1) * 17 nonneg
  int nu_minus = -1;
  int tr_x = -1;      // N trust radii (state part for the sum-of-norms form)
  int tr_u = -1;      // N control parts; pinned to zero in the squared form
};

struct Subproblem {
  ProgramBuilder builder;
  SubproblemLayout layout;
};

/// Assembles the convex subproblem about `ref` (which must carry X, U, s).
/// With `virtual_control` false the dynamics rows are hard equalities.
Subproblem build_subproblem(const Iterate& ref, const std::vector<DiscreteLtvNode>& ltv, const VecX& weights,
                            const ScalingSet& scaling, const GuidanceProblem& prob, const ScvxConfig& cfg,
                            bool virtual_control = true);

/// Maps a solution of the assembled program back to a physical iterate.
Iterate extract_iterate(const Subproblem& sub, const Eigen::VectorXd& builder_values, const ScalingSet& scaling,
                        const VecX& weights, const GuidanceProblem& prob, const ScvxConfig& cfg);

/// max_i |Px^-1 (x_i - x_bar_i)|_inf
double scaled_state_change(const MatX& X, const MatX& X_prev, const ScalingSet& scaling);

/// Scales each node pose by 1/|q1| and removes the q1 component of q2. The
/// linearized dynamics do not preserve the unit manifold while the propagator
/// does, so iterates are projected before they become the next reference.
void project_poses(Eigen::MatrixXd& X);

/// True iff scaled_state_change < dx_tol (strict).
bool converged(const MatX& X, const MatX& X_prev, const ScalingSet& scaling, double dx_tol);

/// Full SCvx loop. Throws SolverFailure (with the iteration index) when a
/// subproblem does not solve and PropagationFailure when integration breaks.
ConvergedSolution solve_guidance(const GuidanceProblem& prob, const ScvxConfig& cfg,
                                 const std::optional<Iterate>& guess = std::nullopt);

}  // namespace pdg
