#include "pdg/report.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "pdg/errors.hpp"

namespace pdg {

namespace si = state_index;
using nlohmann::json;

namespace {

constexpr double kRadToDeg = 180.0 / M_PI;

struct RowValues {
  Vec3 r_I;
  double tilt_deg, gimbal_deg, slant_m, los_deg;
};

RowValues derived(const StateVector& x, const Vec3& u, const ConstraintParams& lim) {
  const Quaternion q1(Vec4(x.segment<4>(si::kAttitude)));
  const Quaternion q2(Vec4(x.segment<4>(si::kDualPart)));
  RowValues v;
  v.r_I = 2.0 * multiply(q2, conjugate(q1)).vec();
  v.tilt_deg = std::acos(std::clamp(to_inertial(q1, Vec3::UnitZ()).z(), -1.0, 1.0)) * kRadToDeg;
  const double un = u.norm();
  v.gimbal_deg = un > 0.0 ? std::acos(std::clamp(u.z() / un, -1.0, 1.0)) * kRadToDeg : 0.0;
  v.slant_m = v.r_I.norm();
  v.los_deg = 0.0;
  if (v.slant_m > 0.0) {
    const Vec3 to_site = to_body(q1, -v.r_I) / v.slant_m;
    v.los_deg = std::acos(std::clamp(lim.p_B.normalized().dot(to_site), -1.0, 1.0)) * kRadToDeg;
  }
  return v;
}

void write_row(std::ostream& os, double tau, double t, const StateVector& x, const Vec3& u,
               const ConstraintParams& lim, int dense) {
  const RowValues d = derived(x, u, lim);
  os << fmt::format("{:.9g},{:.9g},{:.9g}", tau, t, x(si::kMass));
  for (int k = 0; k < 4; ++k) os << fmt::format(",{:.9g}", x(si::kAttitude + k));
  for (int k = 0; k < 3; ++k) os << fmt::format(",{:.9g}", d.r_I(k));
  for (int k = 0; k < 3; ++k) os << fmt::format(",{:.9g}", x(si::kOmega + k));
  for (int k = 0; k < 3; ++k) os << fmt::format(",{:.9g}", x(si::kVelocity + k));
  for (int k = 0; k < 3; ++k) os << fmt::format(",{:.9g}", u(k));
  os << fmt::format(",{:.9g},{:.9g},{:.9g},{:.9g},{}\n", d.tilt_deg, d.gimbal_deg, d.slant_m, d.los_deg, dense);
}

Vec3 control_at(const MatX& U, int dense_row, int dense) {
  const int i = std::min(dense_row / dense, static_cast<int>(U.rows()) - 2);
  const double lam = static_cast<double>(dense_row - i * dense) / dense;
  return ((1.0 - lam) * U.row(i) + lam * U.row(i + 1)).transpose();
}

template <class T>
std::string join(const std::vector<T>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt::format("{}", v[i]);
  return s;
}

json log_stats_json(const LogStats& s) {
  return {{"count", s.count}, {"mu_log", s.mu}, {"sigma_log", s.sigma},
          {"geometric_mean", s.count ? s.geometric_mean() : 0.0}, {"three_sigma", s.count ? s.three_sigma() : 0.0}};
}

json summary_json(const CampaignSummary& s) {
  return {{"trials", s.trials},
          {"converged", s.converged},
          {"successes", s.successes},
          {"success_rate", s.success_rate},
          {"mean_iterations", s.mean_iterations},
          {"position_error_m", log_stats_json(s.position)},
          {"velocity_error_mps", log_stats_json(s.velocity)},
          {"solve_ms", {{"mean", s.ms_mean}, {"p50", s.ms_p50}, {"p90", s.ms_p90}, {"p99", s.ms_p99}, {"max", s.ms_max}}},
          {"wall_s", s.wall_s}};
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Dense samples of the pieces that the plots need.
struct DenseSeries {
  std::vector<double> t, x, y, z, thrust, gimbal, tilt, slant, los;
};

DenseSeries dense_series(const SolveOutcome& out) {
  DenseSeries d;
  const Iterate& it = out.solution.iterate;
  const bool dense = out.dense_per_interval > 0 && out.dense.rows() > 0;
  const MatX& X = dense ? out.dense : it.X;
  const int per = dense ? out.dense_per_interval : 1;
  const double rows = static_cast<double>(X.rows() - 1);
  for (Eigen::Index j = 0; j < X.rows(); ++j) {
    const Vec3 u = dense ? control_at(it.U, static_cast<int>(j), per) : Vec3(it.U.row(j).transpose());
    const RowValues v = derived(X.row(j).transpose(), u, out.problem.limits);
    d.t.push_back(j / rows * it.s);
    d.x.push_back(v.r_I.x());
    d.y.push_back(v.r_I.y());
    d.z.push_back(v.r_I.z());
    d.thrust.push_back(u.norm());
    d.gimbal.push_back(v.gimbal_deg);
    d.tilt.push_back(v.tilt_deg);
    d.slant.push_back(v.slant_m);
    d.los.push_back(v.los_deg);
  }
  return d;
}

}  // namespace

const std::vector<std::string>& trajectory_columns() {
  static const std::vector<std::string> cols = {
      "tau",   "t_s",        "m_kg",       "qx",      "qy",      "qz",      "qw",     "rIx",
      "rIy",   "rIz_m",      "wx",         "wy",      "wz_radps", "vBx",    "vBy",    "vBz_mps",
      "ux",    "uy",         "uz_N",       "tilt_deg", "gimbal_deg", "slant_m", "los_deg", "dense"};
  return cols;
}

void write_trajectory_csv(std::ostream& os, const SolveOutcome& out) {
  os << join(trajectory_columns()) << "\n";
  const Iterate& it = out.solution.iterate;
  const int N = it.N();
  for (int i = 0; i < N; ++i) {
    const double tau = static_cast<double>(i) / (N - 1);
    write_row(os, tau, tau * it.s, it.X.row(i).transpose(), it.U.row(i).transpose(), out.problem.limits, 0);
  }
  if (out.dense_per_interval > 0) {
    const auto rows = static_cast<int>(out.dense.rows());
    for (int j = 0; j < rows; ++j) {
      const double tau = static_cast<double>(j) / (rows - 1);
      write_row(os, tau, tau * it.s, out.dense.row(j).transpose(), control_at(it.U, j, out.dense_per_interval),
                out.problem.limits, 1);
    }
  }
}

void write_los_series_csv(std::ostream& os, const SolveOutcome& out) {
  const DenseSeries d = dense_series(out);
  os << "t_s,slant_m,los_deg,in_band\n";
  const ConstraintParams& p = out.problem.limits;
  for (std::size_t j = 0; j < d.t.size(); ++j) {
    const int band = d.slant[j] >= p.rho_min && d.slant[j] <= p.rho_max;
    os << fmt::format("{:.9g},{:.9g},{:.9g},{}\n", d.t[j], d.slant[j], d.los[j], band);
  }
}

void write_history_csv(std::ostream& os, const ConvergedSolution& sol) {
  os << "iteration,final_mass_kg,total_defect,max_defect,eta_l1,nu_l1,dx,max_scaled_state,s,solver_status,"
        "solver_iterations,solve_ms,propagate_ms\n";
  for (const IterationRecord& r : sol.history) {
    os << fmt::format("{},{:.9g},{:.6g},{:.6g},{:.6g},{:.6g},{:.6g},{:.6g},{:.9g},{},{},{:.3f},{:.3f}\n", r.iteration,
                      r.final_mass, r.total_defect, r.max_defect, r.eta_l1, r.nu_l1, r.dx, r.max_scaled_state, r.s,
                      to_string(r.solver_status), r.solver_iterations, r.solve_ms, r.propagate_ms);
  }
}

const std::vector<std::string>& trial_columns() {
  static const std::vector<std::string> cols = {
      "id",     "seed",   "status",   "success", "m0_kg",  "r0x_m",          "r0y_m",              "r0z_m",
      "v0x_mps", "v0y_mps", "v0z_mps", "attempts", "iterations", "position_error_m", "velocity_error_mps",
      "burn_time_s", "final_mass_kg", "mean_step_ms", "total_ms"};
  return cols;
}

void write_trials_csv(std::ostream& os, const std::vector<TrialRecord>& records) {
  os << join(trial_columns()) << "\n";
  for (const TrialRecord& r : records) {
    os << fmt::format("{},{},{},{},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{},{},{:.6g},{:.6g},{:.6g},{:.9g},"
                      "{:.3f},{:.3f}\n",
                      r.id, r.seed, r.status, r.success ? 1 : 0, r.ic.m0, r.ic.r0_I.x(), r.ic.r0_I.y(), r.ic.r0_I.z(),
                      r.ic.v0_I.x(), r.ic.v0_I.y(), r.ic.v0_I.z(), r.ic.attempts, r.iterations, r.position_error_m,
                      r.velocity_error_mps, r.burn_time_s, r.final_mass_kg, r.mean_step_ms, r.total_ms);
  }
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepCell>& cells) {
  os << "nodes,dx_tol,trials,converged,success_rate,mean_iterations,pos_err_geomean_m,vel_err_geomean_mps,ms_mean\n";
  for (const SweepCell& c : cells) {
    const CampaignSummary& s = c.summary;
    os << fmt::format("{},{:.6g},{},{},{:.4f},{:.3f},{:.6g},{:.6g},{:.3f}\n", c.nodes, c.dx_tol, s.trials, s.converged,
                      s.success_rate, s.mean_iterations, s.position.count ? s.position.geometric_mean() : 0.0,
                      s.velocity.count ? s.velocity.geometric_mean() : 0.0, s.ms_mean);
  }
}

std::string solve_summary_json(const SolveOutcome& out) {
  const ConvergedSolution& sol = out.solution;
  const Iterate& it = sol.iterate;
  const ConstraintViolation v = evaluate_violations(it.X, it.U, out.problem.limits);
  json j = {{"status", to_string(sol.status)},
            {"iterations", sol.iterations},
            {"nodes", it.N()},
            {"burn_time_s", it.s},
            {"final_mass_kg", it.X(it.N() - 1, si::kMass)},
            {"fuel_kg", it.X(0, si::kMass) - it.X(it.N() - 1, si::kMass)},
            {"max_defect", it.defects.size() ? it.defects.maxCoeff() : 0.0},
            {"max_violation", v.max()},
            {"stc_enabled", out.problem.limits.stc_enabled},
            {"max_los_in_band_deg", out.max_los_deg},
            {"open_loop_node_gap_scaled", out.node_gap},
            {"open_loop_position_error_m", out.open_loop.position_m},
            {"open_loop_velocity_error_mps", out.open_loop.velocity_mps},
            {"wall_ms", out.wall_ms}};
  return j.dump(2);
}

std::string case_study_json(const CaseStudy& cs) {
  json j;
  j["xi_max_deg"] = cs.xi_max_deg;
  j["baseline"] = json::parse(solve_summary_json(cs.baseline));
  j["constrained"] = json::parse(solve_summary_json(cs.constrained));
  j["baseline_violates_los"] = cs.baseline.max_los_deg > cs.xi_max_deg;
  j["constrained_satisfies_los"] = cs.constrained.max_los_deg <= cs.xi_max_deg + 0.1;
  const double fb = j["baseline"]["fuel_kg"].get<double>();
  const double fc = j["constrained"]["fuel_kg"].get<double>();
  j["extra_fuel_kg"] = fc - fb;
  return j.dump(2);
}

std::string campaign_json(const Campaign& c, std::uint64_t seed) {
  json j = summary_json(c.summary);
  j["seed"] = seed;
  json failures = json::array();
  for (const TrialRecord& r : c.records) {
    if (!r.success) failures.push_back({{"id", r.id}, {"status", r.status}, {"message", r.message}});
  }
  j["unsuccessful"] = failures;
  return j.dump(2);
}

SvgPlot::SvgPlot(std::string title, std::string xlabel, std::string ylabel)
    : title_(std::move(title)), xlabel_(std::move(xlabel)), ylabel_(std::move(ylabel)) {}

void SvgPlot::line(const std::vector<double>& x, const std::vector<double>& y, const std::string& color,
                   const std::string& label) {
  series_.push_back({x, y, color, label, Series::Line});
}

void SvgPlot::scatter(const std::vector<double>& x, const std::vector<double>& y, const std::string& color,
                      const std::string& label) {
  series_.push_back({x, y, color, label, Series::Points});
}

void SvgPlot::hline(double y, const std::string& color, const std::string& label) {
  // Spans the x range of the existing series at render time.
  series_.push_back({{std::numeric_limits<double>::quiet_NaN()}, {y}, color, label, Series::Line});
}

void SvgPlot::histogram(const std::vector<double>& values, int bins, const std::string& color) {
  if (values.empty() || bins < 1) return;
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it;
  const double width = std::max(*hi_it - lo, 1e-12) / bins;
  std::vector<double> x(bins), y(bins, 0.0);
  for (int b = 0; b < bins; ++b) x[b] = lo + b * width;
  for (double v : values) y[std::min(bins - 1, static_cast<int>((v - lo) / width))] += 1.0;
  x.push_back(lo + bins * width);  // right edge
  series_.push_back({x, y, color, {}, Series::Bars});
}

void SvgPlot::error_ellipse(const std::vector<double>& x, const std::vector<double>& y, double k,
                            const std::string& color, const std::string& label) {
  const auto n = static_cast<Eigen::Index>(std::min(x.size(), y.size()));
  if (n < 2) return;
  Eigen::MatrixX2d P(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) P.row(i) << x[i], y[i];
  const Eigen::RowVector2d mean = P.colwise().mean();
  const Eigen::MatrixX2d C = P.rowwise() - mean;
  const Eigen::Matrix2d cov = C.transpose() * C / static_cast<double>(n - 1);
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(cov);
  const Eigen::Vector2d radii = es.eigenvalues().cwiseMax(0.0).cwiseSqrt() * k;
  std::vector<double> ex, ey;
  for (int s = 0; s <= 72; ++s) {
    const double a = 2.0 * M_PI * s / 72.0;
    const Eigen::Vector2d p =
        mean.transpose() + es.eigenvectors() * Eigen::Vector2d(radii(0) * std::cos(a), radii(1) * std::sin(a));
    ex.push_back(p.x());
    ey.push_back(p.y());
  }
  line(ex, ey, color, label);
}

std::string SvgPlot::render(int width, int height) const {
  const double ml = 70, mr = 20, mt = 35, mb = 50;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const Series& s : series_) {
    for (double v : s.x) {
      if (std::isfinite(v)) x0 = std::min(x0, v), x1 = std::max(x1, v);
    }
    for (double v : s.y) {
      if (std::isfinite(v)) y0 = std::min(y0, v), y1 = std::max(y1, v);
    }
    if (s.kind == Series::Bars) y0 = std::min(y0, 0.0);
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1;
  if (!std::isfinite(y0)) y0 = 0, y1 = 1;
  if (x1 - x0 < 1e-12) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 < 1e-12) y0 -= 0.5, y1 += 0.5;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  const double pw = width - ml - mr, ph = height - mt - mb;
  auto X = [&](double v) { return ml + (v - x0) / (x1 - x0) * pw; };
  auto Y = [&](double v) { return mt + (y1 - v) / (y1 - y0) * ph; };

  std::ostringstream os;
  os << fmt::format(
      "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\" "
      "font-family=\"sans-serif\" font-size=\"11\">\n",
      width, height, width, height);
  os << fmt::format("<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"white\"/>\n", width, height);
  os << fmt::format("<text x=\"{:.1f}\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n", width / 2.0,
                    escape(title_));
  os << fmt::format("<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" fill=\"none\" stroke=\"black\"/>\n",
                    ml, mt, pw, ph);
  for (int t = 0; t <= 5; ++t) {
    const double xv = x0 + (x1 - x0) * t / 5.0, yv = y0 + (y1 - y0) * t / 5.0;
    os << fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{:.4g}</text>\n", X(xv), mt + ph + 15, xv);
    os << fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">{:.4g}</text>\n", ml - 5, Y(yv) + 4, yv);
    os << fmt::format("<line x1=\"{:.1f}\" y1=\"{:.1f}\" x2=\"{:.1f}\" y2=\"{:.1f}\" stroke=\"#ddd\"/>\n", ml, Y(yv),
                      ml + pw, Y(yv));
  }
  os << fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{}</text>\n", ml + pw / 2, height - 12.0,
                    escape(xlabel_));
  os << fmt::format("<text x=\"15\" y=\"{:.1f}\" text-anchor=\"middle\" transform=\"rotate(-90 15 {:.1f})\">{}</text>\n",
                    mt + ph / 2, mt + ph / 2, escape(ylabel_));

  int legend = 0;
  for (const Series& s : series_) {
    const std::string color = escape(s.color);
    if (s.kind == Series::Line && s.x.size() == 1 && std::isnan(s.x[0])) {
      os << fmt::format("<line x1=\"{:.1f}\" y1=\"{:.1f}\" x2=\"{:.1f}\" y2=\"{:.1f}\" stroke=\"{}\" "
                        "stroke-dasharray=\"6 4\"/>\n",
                        ml, Y(s.y[0]), ml + pw, Y(s.y[0]), color);
    } else if (s.kind == Series::Line) {
      os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
        os << fmt::format("{}{:.2f},{:.2f}", i ? " " : "", X(s.x[i]), Y(s.y[i]));
      }
      os << "\"/>\n";
    } else if (s.kind == Series::Points) {
      for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
        os << fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"2.5\" fill=\"{}\"/>\n", X(s.x[i]), Y(s.y[i]), color);
      }
    } else {
      for (std::size_t b = 0; b + 1 < s.x.size(); ++b) {
        os << fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"{}\" "
                          "stroke=\"white\"/>\n",
                          X(s.x[b]), Y(s.y[b]), X(s.x[b + 1]) - X(s.x[b]), Y(0.0) - Y(s.y[b]), color);
      }
    }
    if (!s.label.empty()) {
      const double ly = mt + 14 + 14 * legend++;
      os << fmt::format("<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"10\" height=\"10\" fill=\"{}\"/>\n", ml + pw - 150,
                        ly - 9, color);
      os << fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\">{}</text>\n", ml + pw - 135, ly, escape(s.label));
    }
  }
  os << "</svg>\n";
  return os.str();
}

void write_file(const std::string& dir, const std::string& name, const std::string& content) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("", "cannot create directory " + dir + ": " + ec.message());
  const std::string path = (std::filesystem::path(dir) / name).string();
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("", "cannot open " + path + " for writing");
  f << content;
  if (!f) throw ConfigError("", "write failed for " + path);
}

void emit_solve_reports(const std::string& dir, const SolveOutcome& out) {
  std::ostringstream traj, los, hist;
  write_trajectory_csv(traj, out);
  write_los_series_csv(los, out);
  write_history_csv(hist, out.solution);
  write_file(dir, "trajectory.csv", traj.str());
  write_file(dir, "los.csv", los.str());
  write_file(dir, "history.csv", hist.str());
  write_file(dir, "summary.json", solve_summary_json(out));

  const DenseSeries d = dense_series(out);
  const Iterate& it = out.solution.iterate;
  std::vector<double> node_x, node_y, node_z;
  for (int i = 0; i < it.N(); ++i) {
    const RowValues v = derived(it.X.row(i).transpose(), it.U.row(i).transpose(), out.problem.limits);
    node_x.push_back(v.r_I.x());
    node_y.push_back(v.r_I.y());
    node_z.push_back(v.r_I.z());
  }
  SvgPlot alt("Trajectory", "downrange x [m]", "altitude z [m]");
  alt.line(d.x, d.z, "#1f77b4", "propagated");
  alt.scatter(node_x, node_z, "#d62728", "nodes");
  write_file(dir, "altitude.svg", alt.render());

  SvgPlot ground("Ground track", "downrange x [m]", "crossrange y [m]");
  ground.line(d.x, d.y, "#1f77b4", "propagated");
  ground.scatter(node_x, node_y, "#d62728", "nodes");
  write_file(dir, "ground_track.svg", ground.render());

  const ConstraintParams& lim = out.problem.limits;
  SvgPlot thrust("Thrust magnitude", "time [s]", "thrust [N]");
  thrust.line(d.t, d.thrust, "#1f77b4", "|u|");
  thrust.hline(lim.u_max, "#888", "bounds");
  thrust.hline(lim.u_min, "#888");
  write_file(dir, "thrust.svg", thrust.render());

  SvgPlot angles("Gimbal and tilt", "time [s]", "angle [deg]");
  angles.line(d.t, d.gimbal, "#2ca02c", "gimbal");
  angles.line(d.t, d.tilt, "#ff7f0e", "tilt");
  angles.hline(lim.delta_max * kRadToDeg, "#2ca02c");
  write_file(dir, "angles.svg", angles.render());

  // thrust direction in the body x-z plane, for the gimbal polar view
  std::vector<double> ux, uz;
  for (int i = 0; i < it.N(); ++i) {
    ux.push_back(it.U(i, 0));
    uz.push_back(it.U(i, 2));
  }
  SvgPlot polar("Thrust vector (body frame)", "u_x [N]", "u_z [N]");
  polar.scatter(ux, uz, "#9467bd", "nodes");
  write_file(dir, "thrust_polar.svg", polar.render());

  SvgPlot los_plot("Line of sight", "slant range [m]", "LoS angle [deg]");
  los_plot.line(d.slant, d.los, "#1f77b4", "LoS angle");
  los_plot.hline(lim.xi_max * kRadToDeg, "#d62728", "xi_max");
  write_file(dir, "los.svg", los_plot.render());
}

void emit_case_study_reports(const std::string& dir, const CaseStudy& cs) {
  namespace fs = std::filesystem;
  emit_solve_reports((fs::path(dir) / "baseline").string(), cs.baseline);
  emit_solve_reports((fs::path(dir) / "constrained").string(), cs.constrained);
  write_file(dir, "comparison.json", case_study_json(cs));

  const DenseSeries b = dense_series(cs.baseline);
  const DenseSeries c = dense_series(cs.constrained);
  SvgPlot los("Line of sight vs slant range", "slant range [m]", "LoS angle [deg]");
  los.line(b.slant, b.los, "#7f7f7f", "baseline");
  los.line(c.slant, c.los, "#1f77b4", "constrained");
  los.hline(cs.xi_max_deg, "#d62728", "xi_max");
  write_file(dir, "los_comparison.svg", los.render());

  SvgPlot alt("Trajectories", "downrange x [m]", "altitude z [m]");
  alt.line(b.x, b.z, "#7f7f7f", "baseline");
  alt.line(c.x, c.z, "#1f77b4", "constrained");
  write_file(dir, "altitude_comparison.svg", alt.render());
}

void emit_campaign_reports(const std::string& dir, const Campaign& c, std::uint64_t seed) {
  std::ostringstream trials;
  write_trials_csv(trials, c.records);
  write_file(dir, "trials.csv", trials.str());
  write_file(dir, "summary.json", campaign_json(c, seed));

  std::vector<double> r0x, r0y, ok_pos, ok_vel, ms;
  for (const TrialRecord& r : c.records) {
    if (r.status == "sampling_failure") continue;
    r0x.push_back(r.ic.r0_I.x());
    r0y.push_back(r.ic.r0_I.y());
    if (r.status == "converged") {
      ok_pos.push_back(std::log10(std::max(r.position_error_m, 1e-12)));
      ok_vel.push_back(std::log10(std::max(r.velocity_error_mps, 1e-12)));
      ms.push_back(r.total_ms);
    }
  }
  SvgPlot ics("Sampled initial positions", "downrange x [m]", "crossrange y [m]");
  ics.scatter(r0x, r0y, "#1f77b4", "r0");
  ics.error_ellipse(r0x, r0y, 3.0, "#d62728", "3-sigma");
  write_file(dir, "initial_positions.svg", ics.render());

  SvgPlot err("Open-loop final errors", "log10 position error [m]", "log10 velocity error [m/s]");
  err.scatter(ok_pos, ok_vel, "#1f77b4", "trials");
  err.error_ellipse(ok_pos, ok_vel, 3.0, "#d62728", "3-sigma");
  write_file(dir, "errors.svg", err.render());

  SvgPlot hist("Solve time", "time per trial [ms]", "count");
  hist.histogram(ms, 20, "#2ca02c");
  write_file(dir, "solve_time.svg", hist.render());
}

}  // namespace pdg
