#include "hydrocheck/sampling.hpp"

namespace hydrocheck {

SamplingPlan SamplingPlan::unit_box(int dimension) {
  SamplingPlan p;
  p.box.assign(dimension, {0.0, 1.0});
  return p;
}

SamplingPlan SamplingPlan::with_box(std::vector<std::pair<double, double>> b) const {
  SamplingPlan p = *this;
  p.box = std::move(b);
  return p;
}

void SamplingPlan::validate(int dimension) const {
  if (count < 1) throw SchemaError("plan.count", "must be >= 1");
  if (det_floor <= 0.0) throw SchemaError("plan.det_floor", "must be > 0");
  if (static_cast<int>(box.size()) != dimension)
    throw SchemaError("plan.box", "needs one interval per coordinate");
  for (const auto& [lo, hi] : box)
    if (!(lo < hi)) throw SchemaError("plan.box", "each interval needs lo < hi");
}

double uniform_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

SampleSet sample_points(const SamplingPlan& plan, const std::vector<PointGuard>& guards) {
  plan.validate(static_cast<int>(plan.box.size()));
  std::mt19937_64 rng(plan.seed);
  SampleSet out;
  out.requested = plan.count;
  const long max_tries = 100L * plan.count;
  const int n = static_cast<int>(plan.box.size());

  while (out.accepted() < plan.count && out.tried < max_tries) {
    Eigen::VectorXd p(n);
    for (int i = 0; i < n; ++i) {
      const auto& [lo, hi] = plan.box[i];
      p[i] = lo + uniform_unit(rng) * (hi - lo);
    }
    ++out.tried;
    bool ok = true;
    for (const auto& guard : guards) {
      try {
        if (!guard(p)) {
          ok = false;
          ++out.rejected_guard;
          break;
        }
      } catch (const DomainError&) {
        ok = false;
        ++out.rejected_domain;
        break;
      }
    }
    if (ok) out.points.push_back(std::move(p));
  }

  if (out.accepted() < plan.count && out.accepted() * 100 < out.tried)
    throw Exhausted(out.accepted(), out.tried);
  return out;
}

} // namespace hydrocheck
