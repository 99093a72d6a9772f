#include "hydrocheck/report.hpp"

namespace hydrocheck {

const char* verdict_name(Verdict v) {
  switch (v) {
  case Verdict::Pass: return "pass";
  case Verdict::Fail: return "fail";
  case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

void ConditionRecord::add(const Eigen::VectorXd& point, double residual) {
  ++points;
  mean_residual += (residual - mean_residual) / static_cast<double>(points);
  if (residual > max_residual) {
    max_residual = residual;
    worst_point = point;
  }
  if (residual > tol_fail) ++bad_points;
  else if (residual >= tol_pass) ++gray_points;
}

void ConditionRecord::finalize() {
  if (bad_points > 0) {
    verdict = Verdict::Fail;
  } else if (points > 0 && 20 * gray_points >= points) {
    verdict = Verdict::Inconclusive;
  } else {
    verdict = Verdict::Pass;
  }
}

void CheckReport::finalize() {
  for (auto& c : conditions) c.finalize();
  if (accepted_points * 2 < requested_points) {
    verdict = Verdict::Inconclusive;
    return;
  }
  verdict = Verdict::Pass;
  for (const auto& c : conditions) {
    if (c.verdict == Verdict::Fail) {
      verdict = Verdict::Fail;
      return;
    }
    if (c.verdict == Verdict::Inconclusive) verdict = Verdict::Inconclusive;
  }
}

void CheckReport::note_samples(const SampleSet& s) {
  requested_points = s.requested;
  accepted_points = s.accepted();
  rejected_points = s.rejected_guard + s.rejected_domain;
}

} // namespace hydrocheck
