#include <Eigen/OrderingMethods>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <limits>

#include <spdlog/spdlog.h>

#include "pdg/errors.hpp"
#include "pdg/socp.hpp"

namespace pdg {

namespace {

using VecX = Eigen::VectorXd;
using cone::NtScaling;

// Quasi-definite KKT matrix [H + reg, A'; A, -reg] with H = W^2 on the conic
// block and zero on the free block, factored by sparse LDL' with AMD ordering.
class KktSystem {
 public:
  KktSystem(const SparseMat& A, const ConeSpec& cones, double reg)
      : A_(A), At_(A.transpose()), cones_(cones), n_(A.cols()), m_(A.rows()), reg_(reg) {}

  // scaling == nullptr selects H = I (used for the starting point).
  bool factor(const NtScaling* scaling) {
    scaling_ = scaling;
    for (int attempt = 0; attempt < 4; ++attempt) {
      assemble();
      if (!analyzed_) {
        ldl_.analyzePattern(K_);
        analyzed_ = true;
      }
      ldl_.factorize(K_);
      if (ldl_.info() == Eigen::Success && ldl_.vectorD().allFinite() && (ldl_.vectorD().array() != 0.0).all()) {
        return true;
      }
      reg_ *= 100.0;
    }
    return false;
  }

  // Iterative refinement against the unregularized matrix; stops as soon as
  // a correction fails to reduce the residual.
  VecX solve(const VecX& rhs, int refine_steps) const {
    VecX sol = ldl_.solve(rhs);
    VecX r = rhs - multiply(sol);
    double res = r.lpNorm<Eigen::Infinity>();
    const double target = 1e-14 * (1.0 + rhs.lpNorm<Eigen::Infinity>());
    for (int k = 0; k < refine_steps && res > target; ++k) {
      const VecX cand = sol + ldl_.solve(r);
      const VecX rc = rhs - multiply(cand);
      const double rc_norm = rc.lpNorm<Eigen::Infinity>();
      if (!(rc_norm < res)) break;
      sol = cand;
      r = rc;
      res = rc_norm;
    }
    return sol;
  }

 private:
  VecX h_times(const VecX& p) const {
    if (!scaling_) return p;
    VecX out = VecX::Zero(n_);
    const int f = cones_.free;
    out.tail(n_ - f) = scaling_->apply(scaling_->apply(p.tail(n_ - f)));
    return out;
  }

  // Unregularized K times v.
  VecX multiply(const VecX& v) const {
    VecX out(n_ + m_);
    const VecX p = v.head(n_), q = v.tail(m_);
    out.head(n_) = h_times(p) + At_ * q;
    out.tail(m_) = A_ * p;
    return out;
  }

  void assemble() {
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(A_.nonZeros() + n_ + m_ + 64);
    const int f = cones_.free;
    const int l = cones_.nonneg;
    for (int j = 0; j < f; ++j) t.emplace_back(j, j, (scaling_ ? 0.0 : 1.0) + reg_);
    for (int j = 0; j < l; ++j) t.emplace_back(f + j, f + j, (scaling_ ? scaling_->orthant_w2()(j) : 1.0) + reg_);
    int off = f + l;
    for (std::size_t s = 0; s < cones_.soc.size(); ++s) {
      const int q = cones_.soc[s];
      if (scaling_) {
        const Eigen::MatrixXd w2 = scaling_->soc_w2(static_cast<int>(s));
        for (int c = 0; c < q; ++c) {
          for (int r = c; r < q; ++r) t.emplace_back(off + r, off + c, w2(r, c) + (r == c ? reg_ : 0.0));
        }
      } else {
        for (int c = 0; c < q; ++c) {
          for (int r = c; r < q; ++r) t.emplace_back(off + r, off + c, (r == c ? 1.0 + reg_ : 0.0));
        }
      }
      off += q;
    }
    for (int k = 0; k < A_.outerSize(); ++k) {
      for (SparseMat::InnerIterator it(A_, k); it; ++it) t.emplace_back(n_ + it.row(), it.col(), it.value());
    }
    for (int i = 0; i < m_; ++i) t.emplace_back(n_ + i, n_ + i, -reg_);
    K_.resize(n_ + m_, n_ + m_);
    K_.setFromTriplets(t.begin(), t.end());
  }

  const SparseMat& A_;
  SparseMat At_;
  ConeSpec cones_;
  int n_, m_;
  double reg_;
  const NtScaling* scaling_ = nullptr;
  SparseMat K_;
  Eigen::SimplicialLDLT<SparseMat, Eigen::Lower, Eigen::AMDOrdering<int>> ldl_;
  bool analyzed_ = false;
};

// Moves the conic part of v into the interior: v + (1 + a) e when the smallest
// eigenvalue -a is not positive.
void shift_into_cone(const cone::Layout& k, Eigen::Ref<VecX> v) {
  if (k.dim() == 0) return;
  const double a = -cone::min_eigenvalue(k, v);
  if (a >= 0.0) v += (1.0 + a) * cone::identity(k);
}

struct Direction {
  VecX dx, dy, dz;
  double dtau = 0.0, dkappa = 0.0;
};

SolverSolution solve_presolved(const ConeProgram& prog, const SolverSettings& st) {
  const int n = prog.n(), m = prog.m();
  const int f = prog.cones.free;
  const int nc = n - f;
  const cone::Layout K = prog.cones.conic();
  const double nu = K.degree();
  const VecX& c = prog.c;
  const VecX& b = prog.b;
  const SparseMat& A = prog.A;
  const SparseMat At = A.transpose();
  const double bnorm = b.norm(), cnorm = c.norm();

  SolverSolution out;
  KktSystem kkt(A, prog.cones, st.static_reg);

  // starting point: least-norm primal and dual points shifted into the cone
  if (!kkt.factor(nullptr)) {
    out.status = SolverStatus::NumericalFailure;
    out.x = VecX::Zero(n);
    out.y = VecX::Zero(m);
    out.z = VecX::Zero(n);
    return out;
  }
  VecX rhs(n + m);
  rhs << VecX::Zero(n), b;
  VecX x = kkt.solve(rhs, st.refine_steps).head(n);
  rhs << c, VecX::Zero(m);
  const VecX sol0 = kkt.solve(rhs, st.refine_steps);
  VecX z = sol0.head(n);
  VecX y = sol0.tail(m);
  z.head(f).setZero();
  shift_into_cone(K, x.tail(nc));
  shift_into_cone(K, z.tail(nc));
  double tau = 1.0, kappa = 1.0;

  NtScaling W;
  // Best normalized iterate seen so far, returned when the solve stops early.
  struct Snapshot {
    VecX x, y, z;
    double tau = 1.0, merit = std::numeric_limits<double>::infinity();
  } best;
  auto finish = [&](SolverStatus status, double scale_x, double scale_y) {
    out.status = status;
    out.x = x * scale_x;
    out.y = y * scale_y;
    out.z = z * scale_y;
    out.objective = c.dot(out.x);
    const KktResiduals r = kkt_residuals(prog, out);
    out.primal_residual = r.primal;
    out.dual_residual = r.dual;
    out.gap = r.gap;
    return out;
  };

  for (int iter = 0;; ++iter) {
    out.iterations = iter;
    const VecX rp = A * x - b * tau;
    const VecX rd = At * y + z - c * tau;
    const double cx = c.dot(x), by = b.dot(y);
    const double rg = cx - by + kappa;
    const double xz = x.tail(nc).dot(z.tail(nc));
    const double mu = (xz + tau * kappa) / (nu + 1.0);

    // termination on the normalized iterate
    const double pres = rp.norm() / tau / (1.0 + bnorm);
    const double dres = rd.norm() / tau / (1.0 + cnorm);
    const double pcost = cx / tau;
    const double gap = std::abs(xz) / (tau * tau);
    if (pres <= st.tol && dres <= st.tol && gap <= st.tol * (1.0 + std::abs(pcost))) {
      return finish(SolverStatus::Optimal, 1.0 / tau, 1.0 / tau);
    }
    if (by > 0.0 && (At * y + z).norm() <= st.tol * by * std::max(1.0, cnorm)) {
      return finish(SolverStatus::PrimalInfeasible, 0.0, 1.0 / by);
    }
    if (cx < 0.0 && (A * x).norm() <= st.tol * (-cx) * std::max(1.0, bnorm)) {
      return finish(SolverStatus::DualInfeasible, -1.0 / cx, 0.0);
    }
    spdlog::trace("ipm iter={} pres={:.2e} dres={:.2e} gap={:.2e} pcost={:.6e} tau={:.2e} kappa={:.2e} mu={:.2e}", iter,
                  pres, dres, gap, pcost, tau, kappa, mu);
    const double merit = std::max({pres, dres, gap / (1.0 + std::abs(pcost))});
    if (merit < best.merit) best = {x, y, z, tau, merit};
    auto stop = [&](SolverStatus status) {
      x = best.x;
      y = best.y;
      z = best.z;
      return finish(status, 1.0 / best.tau, 1.0 / best.tau);
    };
    if (iter >= st.max_iters) return stop(SolverStatus::MaxIters);

    try {
      W.update(K, x.tail(nc), z.tail(nc));
    } catch (const InvalidState&) {
      return stop(SolverStatus::NumericalFailure);
    }
    if (!kkt.factor(&W)) return stop(SolverStatus::NumericalFailure);
    const VecX& lambda = W.lambda();

    rhs << -c, b;
    const VecX s1 = kkt.solve(rhs, st.refine_steps);
    const double denom = c.dot(s1.head(n)) + b.dot(s1.tail(m)) - kappa / tau;

    auto direction = [&](double sigma, const VecX& dc, double rtk) {
      VecX r(n + m);
      r.head(n) = (1.0 - sigma) * rd;
      r.segment(f, nc) += W.apply(dc);
      r.tail(m) = -(1.0 - sigma) * rp;
      const VecX s2 = kkt.solve(r, st.refine_steps);
      Direction d;
      d.dtau = (-(1.0 - sigma) * rg - c.dot(s2.head(n)) - b.dot(s2.tail(m)) - rtk / tau) / denom;
      d.dkappa = (rtk - kappa * d.dtau) / tau;
      d.dx = s2.head(n) + d.dtau * s1.head(n);
      d.dy = -(s2.tail(m) + d.dtau * s1.tail(m));
      d.dz = VecX::Zero(n);
      d.dz.tail(nc) = W.apply(VecX(dc - W.apply(d.dx.tail(nc))));
      return d;
    };
    auto step_length = [&](const Direction& d) {
      double a = std::min(cone::max_step(K, x.tail(nc), d.dx.tail(nc)), cone::max_step(K, z.tail(nc), d.dz.tail(nc)));
      if (d.dtau < 0.0) a = std::min(a, -tau / d.dtau);
      if (d.dkappa < 0.0) a = std::min(a, -kappa / d.dkappa);
      return a;
    };

    // predictor
    const Direction aff = direction(0.0, -lambda, -tau * kappa);
    const double alpha_aff = std::min(1.0, step_length(aff));
    const double sigma = std::pow(1.0 - alpha_aff, 3);

    // corrector
    const VecX second_order = cone::jordan_product(K, W.apply_inverse(aff.dz.tail(nc)), W.apply(aff.dx.tail(nc)));
    const VecX rc = -cone::jordan_product(K, lambda, lambda) - second_order + sigma * mu * cone::identity(K);
    const VecX dc = cone::jordan_divide(K, lambda, rc);
    const double rtk = -tau * kappa - aff.dtau * aff.dkappa + sigma * mu;
    const Direction d = direction(sigma, dc, rtk);
    const double alpha = std::min(1.0, st.step_damping * step_length(d));

    if (!(alpha > 1e-10) || !d.dx.allFinite() || !d.dz.allFinite() || !std::isfinite(d.dtau)) {
      return stop(SolverStatus::NumericalFailure);
    }
    x += alpha * d.dx;
    y += alpha * d.dy;
    z += alpha * d.dz;
    tau += alpha * d.dtau;
    kappa += alpha * d.dkappa;
  }
}

}  // namespace

SolverSolution solve(const ConeProgram& prog, const SolverSettings& settings) {
  prog.validate();
  const int m = prog.m();

  // presolve: drop empty rows, and report a nonzero right-hand side on one
  std::vector<int> keep;
  keep.reserve(m);
  Eigen::VectorXi row_nnz = Eigen::VectorXi::Zero(m);
  for (int k = 0; k < prog.A.outerSize(); ++k) {
    for (SparseMat::InnerIterator it(prog.A, k); it; ++it) {
      if (it.value() != 0.0) ++row_nnz(it.row());
    }
  }
  for (int i = 0; i < m; ++i) {
    if (row_nnz(i) > 0) {
      keep.push_back(i);
    } else if (std::abs(prog.b(i)) > settings.tol * (1.0 + prog.b.norm())) {
      SolverSolution out;
      out.status = SolverStatus::PrimalInfeasible;
      out.x = Eigen::VectorXd::Zero(prog.n());
      out.z = Eigen::VectorXd::Zero(prog.n());
      out.y = Eigen::VectorXd::Zero(m);
      out.y(i) = 1.0 / prog.b(i);
      return out;
    }
  }
  if (static_cast<int>(keep.size()) == m) return solve_presolved(prog, settings);

  ConeProgram reduced;
  reduced.c = prog.c;
  reduced.cones = prog.cones;
  reduced.b.resize(static_cast<int>(keep.size()));
  std::vector<int> new_row(m, -1);
  for (std::size_t r = 0; r < keep.size(); ++r) {
    new_row[keep[r]] = static_cast<int>(r);
    reduced.b(static_cast<int>(r)) = prog.b(keep[r]);
  }
  std::vector<Eigen::Triplet<double>> trip;
  for (int k = 0; k < prog.A.outerSize(); ++k) {
    for (SparseMat::InnerIterator it(prog.A, k); it; ++it) {
      if (new_row[it.row()] >= 0) trip.emplace_back(new_row[it.row()], it.col(), it.value());
    }
  }
  reduced.A.resize(static_cast<int>(keep.size()), prog.n());
  reduced.A.setFromTriplets(trip.begin(), trip.end());
  SolverSolution sol = solve_presolved(reduced, settings);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(m);
  for (std::size_t r = 0; r < keep.size(); ++r) y(keep[r]) = sol.y(static_cast<int>(r));
  sol.y = y;
  if (sol.status != SolverStatus::PrimalInfeasible && sol.status != SolverStatus::DualInfeasible) {
    const KktResiduals res = kkt_residuals(prog, sol);
    sol.primal_residual = res.primal;
    sol.dual_residual = res.dual;
    sol.gap = res.gap;
  }
  return sol;
}

}  // namespace pdg
