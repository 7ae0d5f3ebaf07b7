#include "pdg/scvx.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>

#include "pdg/errors.hpp"

namespace pdg {

namespace si = state_index;

namespace {

constexpr int kOmegaSlot = si::kOmega + 3;
constexpr int kVelocitySlot = si::kVelocity + 3;

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

VecX defects_of(const std::vector<DiscreteLtvNode>& ltv) {
  VecX d(ltv.size());
  for (size_t i = 0; i < ltv.size(); ++i) d(static_cast<Eigen::Index>(i)) = ltv[i].defect;
  return d;
}

}  // namespace

void GuidanceProblem::validate() const {
  vehicle.validate();
  limits.validate();
  if (!(bc.m0 > vehicle.m_dry)) throw InvalidArgument("m0: must exceed m_dry");
  if (!bc.qf.is_unit()) throw InvalidArgument("qf: must be a unit quaternion");
  if (approach_cone(pose_from(bc.qf, bc.r0_I).vector(), limits.gamma_max) > 0.0) {
    throw InvalidArgument("r0_I: initial position lies outside the approach cone");
  }
}

void ScvxConfig::validate() const {
  if (N < 2) throw InvalidArgument("N: need at least 2 nodes");
  if (!(dx_tol > 0.0)) throw InvalidArgument("dx_tol: must be positive");
  if (!(w_vc > 0.0)) throw InvalidArgument("w_vc: must be positive");
  if (!(defect_floor > 0.0)) throw InvalidArgument("defect_floor: must be positive");
  if (max_iterations < 1) throw InvalidArgument("max_iterations: must be at least 1");
  if (substeps < 1) throw InvalidArgument("substeps: must be at least 1");
  if (!(s_min > 0.0)) throw InvalidArgument("s_min: must be positive");
  if (!(accept_tol > 0.0)) throw InvalidArgument("accept_tol: must be positive");
}

std::string to_string(ScvxStatus s) { return s == ScvxStatus::Converged ? "converged" : "max_iterations"; }

Iterate initial_guess(const GuidanceProblem& prob, int N) {
  if (N < 2) throw InvalidArgument("N: need at least 2 nodes");
  const BoundaryConditions& bc = prob.bc;
  const double m_end = std::max(prob.vehicle.m_dry, 0.9 * bc.m0);
  const Vec3 g_B = to_body(bc.qf, prob.vehicle.g_I);

  Iterate it;
  it.X.resize(N, kStateDim);
  it.U.resize(N, kControlDim);
  for (int i = 0; i < N; ++i) {
    const double t = static_cast<double>(i) / (N - 1);
    RigidBodyState st;
    st.m = (1 - t) * bc.m0 + t * m_end;
    st.pose = pose_from(bc.qf, (1 - t) * bc.r0_I + t * bc.rf_I);
    st.dvel.v_B = to_body(bc.qf, (1 - t) * bc.v0_I + t * bc.vf_I);
    it.X.row(i) = st.pack().transpose();

    Vec3 u = -st.m * g_B;
    if (u.norm() > prob.limits.u_max) u *= prob.limits.u_max / u.norm();
    if (u.norm() == 0.0) u = Vec3(0, 0, prob.limits.u_min);
    it.U.row(i) = u.transpose();
  }
  it.s = std::clamp((bc.r0_I - bc.rf_I).norm() / std::max(1.0, bc.v0_I.norm()), 1.0, 100.0);
  it.eta = VecX::Zero(N);
  it.nu = MatX::Zero(N - 1, kStateDim);
  it.defects = VecX::Zero(N - 1);
  return it;
}

VecX update_trust_weights(const VecX& defects, double floor) {
  if (defects.size() < 1) throw InvalidArgument("defects: need at least one interval");
  VecX w(defects.size() + 1);
  for (Eigen::Index i = 0; i < defects.size(); ++i) {
    if (!(defects(i) >= 0.0)) throw InvalidArgument("defects: must be non-negative");
    w(i) = 1.0 / std::max(defects(i), floor);
  }
  w(defects.size()) = w(defects.size() - 1);
  return w;
}

ScalingSet build_scaling(const GuidanceProblem& prob, double s_prev) {
  if (!(s_prev > 0.0)) throw InvalidArgument("s_prev: must be positive");
  auto or_one = [](double v) { return v > 0.0 ? v : 1.0; };
  ScalingSet sc;
  sc.Px(si::kMass) = prob.bc.m0;
  sc.Px.segment<4>(si::kAttitude).setOnes();
  sc.Px.segment<4>(si::kDualPart).setConstant(or_one(0.5 * prob.bc.r0_I.norm()));
  sc.Px.segment<4>(si::kOmega).setConstant(prob.limits.omega_max);
  sc.Px.segment<4>(si::kVelocity).setConstant(or_one(prob.bc.v0_I.norm()));
  sc.Pu = prob.limits.u_max;
  sc.pt = s_prev;
  return sc;
}

Subproblem build_subproblem(const Iterate& ref, const std::vector<DiscreteLtvNode>& ltv, const VecX& weights,
                            const ScalingSet& sc, const GuidanceProblem& prob, const ScvxConfig& cfg,
                            bool virtual_control) {
  const int N = ref.N();
  if (N < 2 || ref.U.rows() != N || ref.X.cols() != kStateDim || ref.U.cols() != kControlDim) {
    throw InvalidArgument("build_subproblem: reference has inconsistent dimensions");
  }
  if (static_cast<int>(ltv.size()) != N - 1 || weights.size() != N) {
    throw InvalidArgument("build_subproblem: LTV nodes or weights do not match the node count");
  }

  Subproblem sub;
  ProgramBuilder& pb = sub.builder;
  SubproblemLayout& L = sub.layout;
  const ConstraintParams& lim = prob.limits;

  for (int i = 0; i < N; ++i) {
    NodeVariables v;
    v.x = pb.add_free(kStateDim, "x" + std::to_string(i));
    v.u = pb.add_free(kControlDim, "u" + std::to_string(i));
    v.x_scale = sc.Px;
    v.u_scale = sc.Pu;
    L.nodes.push_back(v);
  }
  L.s = pb.add_free(1, "s");
  pb.add_nonneg_constraint(LinExpr::var(L.s).add(LinExpr(-cfg.s_min)), "s_min");
  if (virtual_control) {
    L.nu_plus = pb.add_nonneg((N - 1) * kStateDim, "nu+");
    L.nu_minus = pb.add_nonneg((N - 1) * kStateDim, "nu-");
  }
  L.tr_x = pb.add_free(N, "tr_x");
  L.tr_u = pb.add_free(N, "tr_u");

  // Objective: -m_N / m0 + w' eta + w_vc |nu|_1
  pb.add_objective(L.nodes[N - 1].x + si::kMass, -1.0);
  for (int i = 0; i < N; ++i) {
    pb.add_objective(L.tr_x + i, weights(i));
    pb.add_objective(L.tr_u + i, weights(i));
  }
  if (virtual_control) {
    for (int k = 0; k < (N - 1) * kStateDim; ++k) {
      pb.add_objective(L.nu_plus + k, cfg.w_vc);
      pb.add_objective(L.nu_minus + k, cfg.w_vc);
    }
  }

  // Dynamics, each row divided by the state scale of its component, so the
  // virtual control is in scaled units.
  for (int i = 0; i + 1 < N; ++i) {
    const DiscreteLtvNode& d = ltv[i];
    const NodeVariables& a = L.nodes[i];
    const NodeVariables& b = L.nodes[i + 1];
    for (int r = 0; r < kStateDim; ++r) {
      const double inv = 1.0 / sc.Px(r);
      LinExpr e(d.R(r) * inv);
      e.add(b.state(r, -inv));
      for (int c = 0; c < kStateDim; ++c) {
        if (d.A(r, c) != 0.0) e.add(a.state(c, d.A(r, c) * inv));
      }
      for (int c = 0; c < kControlDim; ++c) {
        if (d.Bm(r, c) != 0.0) e.add(a.control(c, d.Bm(r, c) * inv));
        if (d.Bp(r, c) != 0.0) e.add(b.control(c, d.Bp(r, c) * inv));
      }
      e.add(L.s, d.S(r) * sc.pt * inv);
      if (virtual_control) {
        e.add(L.nu_plus + i * kStateDim + r, 1.0);
        e.add(L.nu_minus + i * kStateDim + r, -1.0);
      }
      pb.add_equality(e, "dyn" + std::to_string(i));
    }
  }

  // Trust regions. Sum of norms: |x^ - x_bar^| <= tr_x, |u^ - u_bar^| <= tr_u.
  // Squared: |x^ - x_bar^|^2 + |u^ - u_bar^|^2 <= tr_x as the rotated cone
  // |(2 d, tr_x - 1)| <= tr_x + 1, with tr_u pinned to zero.
  for (int i = 0; i < N; ++i) {
    const NodeVariables& v = L.nodes[i];
    std::vector<LinExpr> dx, du;
    for (int k = 0; k < kStateDim; ++k) {
      LinExpr e = LinExpr::var(v.x + k);
      e.constant = -ref.X(i, k) / sc.Px(k);
      dx.push_back(e);
    }
    for (int k = 0; k < kControlDim; ++k) {
      LinExpr e = LinExpr::var(v.u + k);
      e.constant = -ref.U(i, k) / sc.Pu;
      du.push_back(e);
    }
    if (cfg.trust_region == TrustRegionForm::SumOfNorms) {
      std::vector<LinExpr> cx{LinExpr::var(L.tr_x + i)};
      cx.insert(cx.end(), dx.begin(), dx.end());
      pb.add_soc_constraint(cx, "tr_x" + std::to_string(i));
      std::vector<LinExpr> cu{LinExpr::var(L.tr_u + i)};
      cu.insert(cu.end(), du.begin(), du.end());
      pb.add_soc_constraint(cu, "tr_u" + std::to_string(i));
    } else {
      LinExpr head = LinExpr::var(L.tr_x + i);
      head.constant = 1.0;
      LinExpr tail = LinExpr::var(L.tr_x + i);
      tail.constant = -1.0;
      std::vector<LinExpr> c{head, tail};
      for (const auto* part : {&dx, &du}) {
        for (const LinExpr& e : *part) c.push_back(LinExpr().add(e, 2.0));
      }
      pb.add_soc_constraint(c, "tr" + std::to_string(i));
      pb.add_equality(LinExpr::var(L.tr_u + i), "tr_u" + std::to_string(i));
    }
  }

  for (int i = 0; i < N; ++i) {
    const NodeVariables& v = L.nodes[i];
    const std::string tag = "n" + std::to_string(i);
    const StateVector xb = ref.X.row(i).transpose();
    add_state_path_rows(pb, v, xb, lim, tag);
    add_control_rows(pb, v, ref.U.row(i).transpose(), lim, tag);
    if (lim.stc_enabled) add_stc_row(pb, v, xb, lim, tag);
    if (i + 1 < N) add_rate_rows(pb, v, L.nodes[i + 1], ref.s / (N - 1), lim, tag);
    if (i > 0 && i + 1 < N) {
      pb.add_equality(LinExpr::var(v.x + kOmegaSlot), tag + ".slot");
      pb.add_equality(LinExpr::var(v.x + kVelocitySlot), tag + ".slot");
    }
  }
  add_initial_rows(pb, L.nodes[0], prob.bc, ref.X.row(0).segment<4>(si::kAttitude).transpose());
  add_final_rows(pb, L.nodes[N - 1], prob.bc, prob.vehicle.m_dry);
  return sub;
}

Iterate extract_iterate(const Subproblem& sub, const Eigen::VectorXd& val, const ScalingSet& sc, const VecX& weights,
                        const GuidanceProblem& prob, const ScvxConfig& cfg) {
  const SubproblemLayout& L = sub.layout;
  const int N = static_cast<int>(L.nodes.size());
  Iterate it;
  it.X.resize(N, kStateDim);
  it.U.resize(N, kControlDim);
  it.eta.resize(N);
  for (int i = 0; i < N; ++i) {
    for (int k = 0; k < kStateDim; ++k) it.X(i, k) = sc.Px(k) * val(L.nodes[i].x + k);
    for (int k = 0; k < kControlDim; ++k) it.U(i, k) = sc.Pu * val(L.nodes[i].u + k);
    it.eta(i) = val(L.tr_x + i) + val(L.tr_u + i);
  }
  it.s = sc.pt * val(L.s);
  it.nu = MatX::Zero(N - 1, kStateDim);
  if (L.nu_plus >= 0) {
    for (int i = 0; i + 1 < N; ++i) {
      for (int r = 0; r < kStateDim; ++r) {
        const int k = i * kStateDim + r;
        it.nu(i, r) = val(L.nu_plus + k) - val(L.nu_minus + k);
      }
    }
  }
  it.fuel_cost = -it.X(N - 1, si::kMass) / prob.bc.m0;
  it.J_tr = weights.dot(it.eta);
  it.J_vc = cfg.w_vc * it.nu.cwiseAbs().sum();
  it.defects = VecX::Zero(N - 1);
  return it;
}

double scaled_state_change(const MatX& X, const MatX& X_prev, const ScalingSet& sc) {
  if (X.rows() != X_prev.rows() || X.cols() != X_prev.cols() || X.cols() != kStateDim) {
    throw InvalidArgument("scaled_state_change: shape mismatch");
  }
  double worst = 0.0;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const StateVector d = (X.row(i) - X_prev.row(i)).transpose().cwiseQuotient(sc.Px);
    worst = std::max(worst, d.cwiseAbs().maxCoeff());
  }
  return worst;
}

void project_poses(MatX& X) {
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    Vec4 q1 = X.row(i).segment<4>(si::kAttitude).transpose();
    Vec4 q2 = X.row(i).segment<4>(si::kDualPart).transpose();
    const double n = q1.norm();
    if (!(n > 0.0)) throw InvalidState("attitude quaternion has zero norm at node " + std::to_string(i));
    q1 /= n;
    q2 /= n;
    q2 -= q1.dot(q2) * q1;
    X.row(i).segment<4>(si::kAttitude) = q1.transpose();
    X.row(i).segment<4>(si::kDualPart) = q2.transpose();
  }
}

bool converged(const MatX& X, const MatX& X_prev, const ScalingSet& sc, double dx_tol) {
  return scaled_state_change(X, X_prev, sc) < dx_tol;
}

ConvergedSolution solve_guidance(const GuidanceProblem& prob, const ScvxConfig& cfg,
                                 const std::optional<Iterate>& guess) {
  prob.validate();
  cfg.validate();
  const VehicleSystem sys(prob.vehicle);

  Iterate ref = guess ? *guess : initial_guess(prob, cfg.N);
  if (ref.N() != cfg.N) throw InvalidArgument("guess: node count differs from the configuration");

  auto t0 = std::chrono::steady_clock::now();
  ScalingSet sc = build_scaling(prob, ref.s);
  std::vector<DiscreteLtvNode> ltv = discretize(sys, ref.reference(), cfg.substeps, sc.Px);
  ref.defects = defects_of(ltv);
  double propagate_ms = elapsed_ms(t0);

  ConvergedSolution out;
  double last_dx = std::numeric_limits<double>::infinity();
  for (int k = 1;; ++k) {
    if (k > 1) {
      const bool defects_ok = cfg.defect_tol <= 0.0 || ref.defects.maxCoeff() <= cfg.defect_tol;
      if (last_dx < cfg.dx_tol && defects_ok) {
        out.status = ScvxStatus::Converged;
        break;
      }
      if (k > cfg.max_iterations) {
        out.status = ScvxStatus::MaxIterations;
        break;
      }
    }

    IterationRecord rec;
    rec.iteration = k;
    rec.total_defect = ref.defects.sum();
    rec.max_defect = ref.defects.maxCoeff();
    rec.propagate_ms = propagate_ms;

    const VecX w = update_trust_weights(ref.defects, cfg.defect_floor);
    t0 = std::chrono::steady_clock::now();
    const Subproblem sub = build_subproblem(ref, ltv, w, sc, prob, cfg);
    const ConeProgram prog = sub.builder.build();
    if (!cfg.dump_dir.empty()) {
      std::ofstream os(cfg.dump_dir + "/subproblem_" + std::to_string(k) + ".txt");
      if (!os) throw Error("cannot write subproblem dump to " + cfg.dump_dir);
      write_program(prog, os);
    }
    const SolverSolution sol = solve(prog, cfg.solver);
    rec.solve_ms = elapsed_ms(t0);
    rec.solver_status = sol.status;
    rec.solver_iterations = sol.iterations;
    const bool usable = sol.status == SolverStatus::Optimal ||
                        ((sol.status == SolverStatus::MaxIters || sol.status == SolverStatus::NumericalFailure) &&
                         std::max({sol.primal_residual, sol.dual_residual, sol.gap}) <= cfg.accept_tol);
    if (!usable) {
      throw SolverFailure(k, fmt::format("{} (primal {:.1e}, dual {:.1e}, gap {:.1e})", to_string(sol.status),
                                         sol.primal_residual, sol.dual_residual, sol.gap));
    }

    Iterate next = extract_iterate(sub, sub.builder.values(sol.x), sc, w, prob, cfg);
    project_poses(next.X);
    last_dx = scaled_state_change(next.X, ref.X, sc);
    rec.max_scaled_state = (next.X.array().rowwise() / sc.Px.transpose().array()).abs().maxCoeff();

    t0 = std::chrono::steady_clock::now();
    sc = build_scaling(prob, next.s);
    ltv = discretize(sys, next.reference(), cfg.substeps, sc.Px);
    next.defects = defects_of(ltv);
    propagate_ms = elapsed_ms(t0);

    rec.final_mass = next.X(cfg.N - 1, si::kMass);
    rec.eta_l1 = next.eta.lpNorm<1>();
    rec.nu_l1 = next.nu.lpNorm<1>();
    rec.dx = last_dx;
    rec.s = next.s;
    out.history.push_back(rec);
    spdlog::debug(
        "scvx iter={} m_N={:.3f} s={:.4f} sum_defect={:.3e} max_defect={:.3e} eta_l1={:.3e} nu_l1={:.3e} dx={:.3e} "
        "ipm={} {} solve_ms={:.1f} prop_ms={:.1f}",
        k, rec.final_mass, rec.s, rec.total_defect, rec.max_defect, rec.eta_l1, rec.nu_l1, rec.dx,
        rec.solver_iterations, to_string(rec.solver_status), rec.solve_ms, rec.propagate_ms);

    ref = std::move(next);
    out.iterations = k;
  }
  out.iterate = std::move(ref);
  return out;
}

}  // namespace pdg
