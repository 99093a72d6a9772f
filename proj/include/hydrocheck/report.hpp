#ifndef HYDROCHECK_REPORT_HPP
#define HYDROCHECK_REPORT_HPP

#include <string>
#include <vector>

#include <Eigen/Core>

#include "hydrocheck/sampling.hpp"

namespace hydrocheck {

enum class Verdict { Pass, Fail, Inconclusive };

const char* verdict_name(Verdict v);

// Residual statistics for one named condition over the accepted points.
// A point is "ok" below tol_pass, "bad" above tol_fail and "gray" in
// between; a condition fails on any bad point and turns inconclusive when
// gray points reach 5% of the accepted set.
struct ConditionRecord {
  std::string condition_id;
  double max_residual = 0.0;
  double mean_residual = 0.0;
  Eigen::VectorXd worst_point;
  long points = 0;
  long gray_points = 0;
  long bad_points = 0;
  double tol_pass = 1e-8;
  double tol_fail = 1e-6;
  Verdict verdict = Verdict::Pass;

  void add(const Eigen::VectorXd& point, double residual);
  void finalize();
};

struct CheckReport {
  std::string check_name;
  std::vector<ConditionRecord> conditions;
  std::uint64_t seed = 0;
  long requested_points = 0;
  long accepted_points = 0;
  long rejected_points = 0;
  double tol_pass = 1e-8;
  double tol_fail = 1e-6;
  std::vector<std::string> notes;
  Verdict verdict = Verdict::Pass;

  // Applies per-condition verdicts, then the overall rule: inconclusive when
  // fewer than half the requested points were accepted, fail when any
  // condition fails, inconclusive when any condition is, pass otherwise.
  void finalize();
  void note_samples(const SampleSet& s);
};

// max |lhs - rhs| scaled by 1 + the largest participating entry.
class ResidualScale {
public:
  void observe(double participant) {
    double a = std::abs(participant);
    if (a > peak_) peak_ = a;
  }
  double operator()(double raw) const { return std::abs(raw) / (1.0 + peak_); }

private:
  double peak_ = 0.0;
};

} // namespace hydrocheck

#endif
