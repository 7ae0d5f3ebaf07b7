#pragma once

// Operations on products of nonnegative orthants and second-order cones
//   Q^q = { (t, v) : t >= ||v|| },
// stored as one vector: the orthant entries first, then each SOC block.

#include <Eigen/Dense>
#include <vector>

namespace pdg::cone {

using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

struct Layout {
  int nonneg = 0;
  std::vector<int> soc;

  int dim() const;
  /// Barrier degree: one per orthant entry and per SOC.
  int degree() const;
};

/// Identity element: ones on the orthant, (1, 0, ..., 0) on each SOC.
VecX identity(const Layout& k);

/// Smallest Jordan eigenvalue: min_i v_i on the orthant, t - ||v|| on each SOC.
double min_eigenvalue(const Layout& k, const VecX& v);

bool in_interior(const Layout& k, const VecX& v);

/// sup { a >= 0 : u + a d in K } for u in int K; +infinity if unbounded.
double max_step(const Layout& k, const VecX& u, const VecX& d);

/// u o v: elementwise on the orthant, (u'v, u0 v1 + v0 u1) on each SOC.
VecX jordan_product(const Layout& k, const VecX& u, const VecX& v);

/// Solves lambda o d = r for d, lambda in int K.
VecX jordan_divide(const Layout& k, const VecX& lambda, const VecX& r);

/// Nesterov-Todd scaling W (symmetric, block diagonal) with W x = W^-1 z = lambda.
class NtScaling {
 public:
  /// x and z must lie in int K.
  void update(const Layout& k, const VecX& x, const VecX& z);

  VecX apply(const VecX& v) const;          // W v
  VecX apply_inverse(const VecX& v) const;  // W^-1 v
  const VecX& lambda() const { return lambda_; }

  /// Dense W^2 block for SOC j (size q_j x q_j).
  MatX soc_w2(int j) const;
  /// W^2 diagonal on the orthant.
  const VecX& orthant_w2() const { return d2_; }

 private:
  Layout k_;
  VecX d_, d2_;                // orthant scaling sqrt(z/x) and its square
  std::vector<double> beta_;   // SOC scale factors eta
  std::vector<VecX> v_;        // SOC scaling points w = (a, q), a^2 - ||q||^2 = 1
  VecX lambda_;
};

}  // namespace pdg::cone
