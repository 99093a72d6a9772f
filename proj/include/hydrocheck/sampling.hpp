#ifndef HYDROCHECK_SAMPLING_HPP
#define HYDROCHECK_SAMPLING_HPP

#include <cstdint>
#include <functional>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "hydrocheck/errors.hpp"

namespace hydrocheck {

// Where and how a check samples its points. `box` has one [lo, hi] interval
// per coordinate; `lambda_samples` are the pencil weights (lambda1, lambda2).
struct SamplingPlan {
  std::uint64_t seed = 0;
  int count = 64;
  std::vector<std::pair<double, double>> box;
  double det_floor = 1e-9;
  double gap_floor = 1e-6;
  std::vector<std::pair<double, double>> lambda_samples = {
      {1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}, {1.0, -1.0}, {2.0, 3.0}};
  double tol_pass = 1e-8;
  double tol_fail = 1e-6;

  static SamplingPlan unit_box(int dimension);
  SamplingPlan with_box(std::vector<std::pair<double, double>> b) const;
  void validate(int dimension) const;
};

// Returns false to reject the point; may throw DomainError, which also
// rejects the point (counted separately).
using PointGuard = std::function<bool(const Eigen::VectorXd&)>;

struct SampleSet {
  std::vector<Eigen::VectorXd> points;
  long requested = 0;
  long tried = 0;
  long rejected_guard = 0;
  long rejected_domain = 0;

  long accepted() const { return static_cast<long>(points.size()); }
};

// Deterministic rejection sampler: uniform in the box, discarding points any
// guard refuses. Draws at most 100x the requested count and throws Exhausted
// when the acceptance rate stays below 1%.
SampleSet sample_points(const SamplingPlan& plan, const std::vector<PointGuard>& guards);

// Uniform double in [0, 1) from the top 53 bits; keeps streams identical
// across standard library implementations.
double uniform_unit(std::mt19937_64& rng);

} // namespace hydrocheck

#endif
