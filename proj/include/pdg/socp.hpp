#pragma once

// Second-order cone programs in standard form
//   minimize c'x  subject to  A x = b,  x in K,
// with K = R^f (free) x R^l_+ x Q^{q_1} x ... x Q^{q_p}, and a primal-dual
// interior-point solver based on the homogeneous self-dual embedding.

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <iosfwd>
#include <string>
#include <vector>

#include "pdg/cones.hpp"

namespace pdg {

using SparseMat = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

struct ConeSpec {
  int free = 0;
  int nonneg = 0;
  std::vector<int> soc;

  int size() const;
  cone::Layout conic() const { return {nonneg, soc}; }
};

struct ConeProgram {
  Eigen::VectorXd c;
  SparseMat A;
  Eigen::VectorXd b;
  ConeSpec cones;
  std::vector<std::string> var_names;  // optional, for diagnostics
  std::vector<std::string> row_names;  // optional

  int n() const { return static_cast<int>(c.size()); }
  int m() const { return static_cast<int>(b.size()); }
  /// Throws InvalidArgument on inconsistent dimensions or cone sizes.
  void validate() const;
};

enum class SolverStatus { Optimal, PrimalInfeasible, DualInfeasible, MaxIters, NumericalFailure };

const char* to_string(SolverStatus s);

struct SolverSettings {
  double tol = 1e-8;
  int max_iters = 100;
  double static_reg = 1e-7;
  int refine_steps = 5;
  double step_damping = 0.99;
};

struct SolverSolution {
  Eigen::VectorXd x, y, z;
  SolverStatus status = SolverStatus::NumericalFailure;
  double objective = 0.0;
  double gap = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  int iterations = 0;
};

struct KktResiduals {
  double primal = 0.0;  // ||Ax - b|| / (1 + ||b||)
  double dual = 0.0;    // ||A'y + z - c|| / (1 + ||c||)
  double gap = 0.0;     // |x'z| / (1 + |c'x|)
};

KktResiduals kkt_residuals(const ConeProgram& prog, const SolverSolution& sol);

/// On Optimal, all three KKT residuals are <= tol. On PrimalInfeasible, y is a
/// certificate with b'y = 1, A'y + z ~ 0, z in K*. On DualInfeasible, x is a
/// certificate with c'x = -1, Ax ~ 0, x in K.
SolverSolution solve(const ConeProgram& prog, const SolverSettings& settings = {});

/// Plain-text sparse dump: "n m", cone line "f l p q_1 .. q_p", "nnz", COO
/// triplets "row col value", then b and c one value per line.
void write_program(const ConeProgram& prog, std::ostream& os);
ConeProgram read_program(std::istream& is);

/// Affine expression sum_k coef_k * var_k + constant over builder variable ids.
struct LinExpr {
  std::vector<std::pair<int, double>> terms;
  double constant = 0.0;

  LinExpr() = default;
  explicit LinExpr(double c) : constant(c) {}
  static LinExpr var(int id, double coef = 1.0) {
    LinExpr e;
    e.terms.emplace_back(id, coef);
    return e;
  }
  LinExpr& add(int id, double coef) {
    if (coef != 0.0) terms.emplace_back(id, coef);
    return *this;
  }
  LinExpr& add(const LinExpr& o, double scale = 1.0);
  double evaluate(const Eigen::VectorXd& values) const;
};

/// Collects variables and "affine expression in cone" constraints and lowers
/// them to standard form. Cone constraints on expressions become slack cone
/// variables tied by equality rows.
class ProgramBuilder {
 public:
  /// Returns the id of the first of `count` consecutive variables.
  int add_free(int count, const std::string& name = {});
  int add_nonneg(int count, const std::string& name = {});
  /// A block of `count` variables that itself lies in Q^count.
  int add_soc_var(int count, const std::string& name = {});

  void add_objective(int id, double coef);

  /// expr == 0
  void add_equality(const LinExpr& expr, const std::string& name = {});
  /// expr >= 0
  void add_nonneg_constraint(const LinExpr& expr, const std::string& name = {});
  /// exprs[0] >= ||exprs[1..]||
  void add_soc_constraint(const std::vector<LinExpr>& exprs, const std::string& name = {});

  int num_variables() const { return static_cast<int>(kinds_.size()); }

  /// Standard form; variables are reordered by cone, so use `values` to map back.
  ConeProgram build() const;
  /// Values of all builder variables (by id) from a solution of build().
  Eigen::VectorXd values(const Eigen::VectorXd& x) const;

 private:
  enum class Kind { Free, Nonneg, Soc };
  int add_block(Kind kind, int count, const std::string& name);

  std::vector<Kind> kinds_;
  std::vector<int> soc_block_;  // block index for Soc variables, -1 otherwise
  std::vector<int> soc_sizes_;
  std::vector<std::string> names_;
  std::vector<std::pair<int, double>> objective_;
  std::vector<LinExpr> rows_;
  std::vector<std::string> row_names_;
};

}  // namespace pdg
