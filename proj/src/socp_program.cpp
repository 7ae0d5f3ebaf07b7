#include <iomanip>
#include <istream>
#include <ostream>

#include "pdg/errors.hpp"
#include "pdg/socp.hpp"

namespace pdg {

int ConeSpec::size() const {
  int n = free + nonneg;
  for (int q : soc) n += q;
  return n;
}

void ConeProgram::validate() const {
  if (cones.free < 0 || cones.nonneg < 0) throw InvalidArgument("negative cone size");
  for (int q : cones.soc) {
    if (q < 1) throw InvalidArgument("second-order cone size must be at least 1");
  }
  if (cones.size() != n()) throw InvalidArgument("cone sizes do not sum to the number of variables");
  if (A.rows() != m() || A.cols() != n()) throw InvalidArgument("constraint matrix has the wrong shape");
  if (!c.allFinite() || !b.allFinite()) throw InvalidArgument("non-finite problem data");
  for (int k = 0; k < A.outerSize(); ++k) {
    for (SparseMat::InnerIterator it(A, k); it; ++it) {
      if (!std::isfinite(it.value())) throw InvalidArgument("non-finite constraint coefficient");
    }
  }
}

const char* to_string(SolverStatus s) {
  switch (s) {
    case SolverStatus::Optimal: return "optimal";
    case SolverStatus::PrimalInfeasible: return "primal-infeasible";
    case SolverStatus::DualInfeasible: return "dual-infeasible";
    case SolverStatus::MaxIters: return "max-iters";
    case SolverStatus::NumericalFailure: return "numerical-failure";
  }
  return "unknown";
}

KktResiduals kkt_residuals(const ConeProgram& prog, const SolverSolution& sol) {
  KktResiduals r;
  const double cx = prog.c.dot(sol.x);
  r.primal = (prog.A * sol.x - prog.b).norm() / (1.0 + prog.b.norm());
  r.dual = (prog.A.transpose() * sol.y + sol.z - prog.c).norm() / (1.0 + prog.c.norm());
  r.gap = std::abs(sol.x.dot(sol.z)) / (1.0 + std::abs(cx));
  return r;
}

void write_program(const ConeProgram& prog, std::ostream& os) {
  os << std::setprecision(17);
  os << prog.n() << ' ' << prog.m() << '\n';
  os << prog.cones.free << ' ' << prog.cones.nonneg << ' ' << prog.cones.soc.size();
  for (int q : prog.cones.soc) os << ' ' << q;
  os << '\n' << prog.A.nonZeros() << '\n';
  for (int k = 0; k < prog.A.outerSize(); ++k) {
    for (SparseMat::InnerIterator it(prog.A, k); it; ++it) {
      os << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
    }
  }
  for (int i = 0; i < prog.m(); ++i) os << prog.b(i) << '\n';
  for (int j = 0; j < prog.n(); ++j) os << prog.c(j) << '\n';
}

ConeProgram read_program(std::istream& is) {
  ConeProgram p;
  int n = 0, m = 0, nsoc = 0;
  long nnz = 0;
  if (!(is >> n >> m >> p.cones.free >> p.cones.nonneg >> nsoc) || n < 0 || m < 0 || nsoc < 0) {
    throw InvalidArgument("malformed program header");
  }
  p.cones.soc.resize(nsoc);
  for (int& q : p.cones.soc) {
    if (!(is >> q)) throw InvalidArgument("malformed cone line");
  }
  if (!(is >> nnz) || nnz < 0) throw InvalidArgument("malformed nonzero count");
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(nnz);
  for (long k = 0; k < nnz; ++k) {
    int r = 0, c = 0;
    double v = 0.0;
    if (!(is >> r >> c >> v) || r < 0 || r >= m || c < 0 || c >= n) throw InvalidArgument("malformed triplet");
    trip.emplace_back(r, c, v);
  }
  p.A.resize(m, n);
  p.A.setFromTriplets(trip.begin(), trip.end());
  p.b.resize(m);
  p.c.resize(n);
  for (int i = 0; i < m; ++i) {
    if (!(is >> p.b(i))) throw InvalidArgument("malformed b");
  }
  for (int j = 0; j < n; ++j) {
    if (!(is >> p.c(j))) throw InvalidArgument("malformed c");
  }
  p.validate();
  return p;
}

LinExpr& LinExpr::add(const LinExpr& o, double scale) {
  for (const auto& [id, coef] : o.terms) add(id, scale * coef);
  constant += scale * o.constant;
  return *this;
}

double LinExpr::evaluate(const Eigen::VectorXd& values) const {
  double v = constant;
  for (const auto& [id, coef] : terms) v += coef * values(id);
  return v;
}

int ProgramBuilder::add_block(Kind kind, int count, const std::string& name) {
  if (count < 1) throw InvalidArgument("variable block must be non-empty");
  const int first = num_variables();
  const int block = kind == Kind::Soc ? static_cast<int>(soc_sizes_.size()) : -1;
  if (kind == Kind::Soc) soc_sizes_.push_back(count);
  for (int k = 0; k < count; ++k) {
    kinds_.push_back(kind);
    soc_block_.push_back(block);
    names_.push_back(count == 1 ? name : name + "[" + std::to_string(k) + "]");
  }
  return first;
}

int ProgramBuilder::add_free(int count, const std::string& name) { return add_block(Kind::Free, count, name); }
int ProgramBuilder::add_nonneg(int count, const std::string& name) { return add_block(Kind::Nonneg, count, name); }
int ProgramBuilder::add_soc_var(int count, const std::string& name) { return add_block(Kind::Soc, count, name); }

void ProgramBuilder::add_objective(int id, double coef) {
  if (id < 0 || id >= num_variables()) throw InvalidArgument("objective references an unknown variable");
  objective_.emplace_back(id, coef);
}

void ProgramBuilder::add_equality(const LinExpr& expr, const std::string& name) {
  for (const auto& t : expr.terms) {
    if (t.first < 0 || t.first >= num_variables()) throw InvalidArgument("constraint references an unknown variable");
  }
  rows_.push_back(expr);
  row_names_.push_back(name);
}

void ProgramBuilder::add_nonneg_constraint(const LinExpr& expr, const std::string& name) {
  const int s = add_nonneg(1, name.empty() ? "slack" : name + ".slack");
  LinExpr row = expr;
  row.add(s, -1.0);
  add_equality(row, name);
}

void ProgramBuilder::add_soc_constraint(const std::vector<LinExpr>& exprs, const std::string& name) {
  if (exprs.empty()) throw InvalidArgument("empty cone constraint");
  const int q = static_cast<int>(exprs.size());
  const int s = add_soc_var(q, name.empty() ? "slack" : name + ".slack");
  for (int k = 0; k < q; ++k) {
    LinExpr row = exprs[k];
    row.add(s + k, -1.0);
    add_equality(row, name.empty() ? std::string() : name + "[" + std::to_string(k) + "]");
  }
}

ConeProgram ProgramBuilder::build() const {
  const int nv = num_variables();
  // standard-form position of each builder variable: free, orthant, then cones in block order
  std::vector<int> pos(nv);
  int next = 0;
  ConeProgram p;
  for (int v = 0; v < nv; ++v) {
    if (kinds_[v] == Kind::Free) pos[v] = next++;
  }
  p.cones.free = next;
  for (int v = 0; v < nv; ++v) {
    if (kinds_[v] == Kind::Nonneg) pos[v] = next++;
  }
  p.cones.nonneg = next - p.cones.free;
  for (int v = 0; v < nv; ++v) {
    if (kinds_[v] == Kind::Soc) pos[v] = next++;
  }
  p.cones.soc = soc_sizes_;

  p.c = Eigen::VectorXd::Zero(nv);
  for (const auto& [id, coef] : objective_) p.c(pos[id]) += coef;

  const int m = static_cast<int>(rows_.size());
  std::vector<Eigen::Triplet<double>> trip;
  p.b.resize(m);
  for (int i = 0; i < m; ++i) {
    for (const auto& [id, coef] : rows_[i].terms) trip.emplace_back(i, pos[id], coef);
    p.b(i) = -rows_[i].constant;
  }
  p.A.resize(m, nv);
  p.A.setFromTriplets(trip.begin(), trip.end());
  p.A.makeCompressed();
  p.var_names.resize(nv);
  for (int v = 0; v < nv; ++v) p.var_names[pos[v]] = names_[v];
  p.row_names = row_names_;
  return p;
}

Eigen::VectorXd ProgramBuilder::values(const Eigen::VectorXd& x) const {
  const int nv = num_variables();
  if (x.size() != nv) throw InvalidArgument("solution size does not match the builder");
  std::vector<int> pos(nv);
  int next = 0;
  for (Kind kind : {Kind::Free, Kind::Nonneg, Kind::Soc}) {
    for (int v = 0; v < nv; ++v) {
      if (kinds_[v] == kind) pos[v] = next++;
    }
  }
  Eigen::VectorXd out(nv);
  for (int v = 0; v < nv; ++v) out(v) = x(pos[v]);
  return out;
}

}  // namespace pdg
