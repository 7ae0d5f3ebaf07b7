#pragma once

// CSV, JSON and SVG output for solves, the case study and campaigns.

#include <ostream>
#include <string>
#include <vector>

#include "pdg/campaign.hpp"

namespace pdg {

/// Trajectory columns, in order. The last column flags dense samples.
const std::vector<std::string>& trajectory_columns();

/// One row per node, then (if the outcome carries them) one row per dense
/// propagated sample with dense = 1.
void write_trajectory_csv(std::ostream& os, const SolveOutcome& out);

/// slant range and line-of-sight angle along the dense trajectory.
void write_los_series_csv(std::ostream& os, const SolveOutcome& out);

void write_history_csv(std::ostream& os, const ConvergedSolution& sol);

const std::vector<std::string>& trial_columns();
void write_trials_csv(std::ostream& os, const std::vector<TrialRecord>& records);
void write_sweep_csv(std::ostream& os, const std::vector<SweepCell>& cells);

std::string solve_summary_json(const SolveOutcome& out);
std::string case_study_json(const CaseStudy& cs);
std::string campaign_json(const Campaign& c, std::uint64_t seed);

/// Minimal line/scatter/histogram plot rendered as standalone SVG.
class SvgPlot {
 public:
  SvgPlot(std::string title, std::string xlabel, std::string ylabel);

  void line(const std::vector<double>& x, const std::vector<double>& y, const std::string& color,
            const std::string& label = {});
  void scatter(const std::vector<double>& x, const std::vector<double>& y, const std::string& color,
               const std::string& label = {});
  /// Horizontal reference line.
  void hline(double y, const std::string& color, const std::string& label = {});
  /// Bars of a histogram with `bins` equal-width bins.
  void histogram(const std::vector<double>& values, int bins, const std::string& color);
  /// k-sigma ellipse of the sample covariance of (x, y).
  void error_ellipse(const std::vector<double>& x, const std::vector<double>& y, double k, const std::string& color,
                     const std::string& label = {});

  std::string render(int width = 640, int height = 420) const;

 private:
  struct Series {
    std::vector<double> x, y;
    std::string color, label;
    enum Kind { Line, Points, Bars } kind;
  };
  std::string title_, xlabel_, ylabel_;
  std::vector<Series> series_;
};

/// Writes `content` to `dir/name`, creating `dir`. Throws ConfigError on I/O failure.
void write_file(const std::string& dir, const std::string& name, const std::string& content);

/// trajectory.csv, los.csv, history.csv, summary.json and plots under `dir`.
void emit_solve_reports(const std::string& dir, const SolveOutcome& out);
void emit_case_study_reports(const std::string& dir, const CaseStudy& cs);
void emit_campaign_reports(const std::string& dir, const Campaign& c, std::uint64_t seed);

}  // namespace pdg
