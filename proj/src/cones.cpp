#include "pdg/cones.hpp"

#include <cmath>
#include <limits>

#include "pdg/errors.hpp"

namespace pdg::cone {

namespace {

// J-norm sqrt(t^2 - ||v||^2), computed as sqrt((t - ||v||)(t + ||v||)).
double soc_jnorm(const Eigen::Ref<const VecX>& u) {
  const double r = u.tail(u.size() - 1).norm();
  return std::sqrt(std::max(0.0, (u(0) - r) * (u(0) + r)));
}

VecX apply_j(const Eigen::Ref<const VecX>& u) {
  VecX out = -u;
  out(0) = u(0);
  return out;
}

}  // namespace

int Layout::dim() const {
  int n = nonneg;
  for (int q : soc) n += q;
  return n;
}

int Layout::degree() const { return nonneg + static_cast<int>(soc.size()); }

VecX identity(const Layout& k) {
  VecX e = VecX::Zero(k.dim());
  e.head(k.nonneg).setOnes();
  int off = k.nonneg;
  for (int q : k.soc) {
    e(off) = 1.0;
    off += q;
  }
  return e;
}

double min_eigenvalue(const Layout& k, const VecX& v) {
  double m = std::numeric_limits<double>::infinity();
  if (k.nonneg > 0) m = v.head(k.nonneg).minCoeff();
  int off = k.nonneg;
  for (int q : k.soc) {
    m = std::min(m, v(off) - v.segment(off + 1, q - 1).norm());
    off += q;
  }
  return m;
}

bool in_interior(const Layout& k, const VecX& v) { return min_eigenvalue(k, v) > 0.0; }

double max_step(const Layout& k, const VecX& u, const VecX& d) {
  double alpha = std::numeric_limits<double>::infinity();
  for (int i = 0; i < k.nonneg; ++i) {
    if (d(i) < 0.0) alpha = std::min(alpha, -u(i) / d(i));
  }
  int off = k.nonneg;
  for (int q : k.soc) {
    const auto uu = u.segment(off, q);
    const auto dd = d.segment(off, q);
    const double un = soc_jnorm(uu);
    if (!(un > 0.0)) return 0.0;
    // map u to the identity and measure d in that frame
    const VecX ub = uu / un;
    const double rho0 = (ub(0) * dd(0) - ub.tail(q - 1).dot(dd.tail(q - 1))) / un;
    const double factor = (rho0 + dd(0) / un) / (ub(0) + 1.0);
    const VecX rho1 = dd.tail(q - 1) / un - factor * ub.tail(q - 1);
    const double inv = rho1.norm() - rho0;
    if (inv > 0.0) alpha = std::min(alpha, 1.0 / inv);
    off += q;
  }
  return alpha;
}

VecX jordan_product(const Layout& k, const VecX& u, const VecX& v) {
  VecX out(u.size());
  out.head(k.nonneg) = u.head(k.nonneg).cwiseProduct(v.head(k.nonneg));
  int off = k.nonneg;
  for (int q : k.soc) {
    const auto a = u.segment(off, q);
    const auto b = v.segment(off, q);
    out(off) = a.dot(b);
    out.segment(off + 1, q - 1) = a(0) * b.tail(q - 1) + b(0) * a.tail(q - 1);
    off += q;
  }
  return out;
}

VecX jordan_divide(const Layout& k, const VecX& lambda, const VecX& r) {
  VecX out(r.size());
  out.head(k.nonneg) = r.head(k.nonneg).cwiseQuotient(lambda.head(k.nonneg));
  int off = k.nonneg;
  for (int q : k.soc) {
    const auto a = lambda.segment(off, q);
    const auto d = r.segment(off, q);
    const double det = a(0) * a(0) - a.tail(q - 1).squaredNorm();
    const double u0 = (a(0) * d(0) - a.tail(q - 1).dot(d.tail(q - 1))) / det;
    out(off) = u0;
    out.segment(off + 1, q - 1) = (d.tail(q - 1) - u0 * a.tail(q - 1)) / a(0);
    off += q;
  }
  return out;
}

void NtScaling::update(const Layout& k, const VecX& x, const VecX& z) {
  k_ = k;
  d2_ = z.head(k.nonneg).cwiseQuotient(x.head(k.nonneg));
  d_ = d2_.cwiseSqrt();
  beta_.assign(k.soc.size(), 1.0);
  v_.assign(k.soc.size(), VecX());
  int off = k.nonneg;
  for (std::size_t j = 0; j < k.soc.size(); ++j) {
    const int q = k.soc[j];
    const auto xs = x.segment(off, q);
    const auto zs = z.segment(off, q);
    const double xn = soc_jnorm(xs), zn = soc_jnorm(zs);
    if (!(xn > 0.0) || !(zn > 0.0)) throw InvalidState("NT scaling needs interior points");
    const VecX xb = xs / xn, zb = zs / zn;
    const double gamma = std::sqrt(0.5 * (1.0 + xb.dot(zb)));
    beta_[j] = std::sqrt(zn / xn);
    v_[j] = (zb + apply_j(xb)) / (2.0 * gamma);
    off += q;
  }
  lambda_ = apply(x);
}

// With w = (a, q), a^2 - ||q||^2 = 1, the SOC block of W is
//   eta [a, q'; q, I + q q' / (1 + a)]
// and its inverse flips the sign of q and divides by eta.
VecX NtScaling::apply(const VecX& u) const {
  VecX out(u.size());
  out.head(k_.nonneg) = d_.cwiseProduct(u.head(k_.nonneg));
  int off = k_.nonneg;
  for (std::size_t j = 0; j < k_.soc.size(); ++j) {
    const int q = k_.soc[j];
    const auto s = u.segment(off, q);
    const double a = v_[j](0);
    const auto w = v_[j].tail(q - 1);
    const double ws = w.dot(s.tail(q - 1));
    out(off) = beta_[j] * (a * s(0) + ws);
    out.segment(off + 1, q - 1) = beta_[j] * (s.tail(q - 1) + (s(0) + ws / (1.0 + a)) * w);
    off += q;
  }
  return out;
}

VecX NtScaling::apply_inverse(const VecX& u) const {
  VecX out(u.size());
  out.head(k_.nonneg) = u.head(k_.nonneg).cwiseQuotient(d_);
  int off = k_.nonneg;
  for (std::size_t j = 0; j < k_.soc.size(); ++j) {
    const int q = k_.soc[j];
    const auto s = u.segment(off, q);
    const double a = v_[j](0);
    const auto w = v_[j].tail(q - 1);
    const double ws = w.dot(s.tail(q - 1));
    out(off) = (a * s(0) - ws) / beta_[j];
    out.segment(off + 1, q - 1) = (s.tail(q - 1) + (-s(0) + ws / (1.0 + a)) * w) / beta_[j];
    off += q;
  }
  return out;
}

MatX NtScaling::soc_w2(int j) const {
  const int q = k_.soc[j];
  const double a = v_[j](0);
  const VecX w = v_[j].tail(q - 1);
  MatX W(q, q);
  W(0, 0) = a;
  W.block(0, 1, 1, q - 1) = w.transpose();
  W.block(1, 0, q - 1, 1) = w;
  W.bottomRightCorner(q - 1, q - 1) = MatX::Identity(q - 1, q - 1) + w * w.transpose() / (1.0 + a);
  W *= beta_[j];
  return W * W;
}

}  // namespace pdg::cone
