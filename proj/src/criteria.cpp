#include "hydrocheck/criteria.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

namespace hydrocheck {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

ConditionRecord record(std::string id, const SamplingPlan& plan) {
  ConditionRecord c;
  c.condition_id = std::move(id);
  c.tol_pass = plan.tol_pass;
  c.tol_fail = plan.tol_fail;
  return c;
}

CheckReport report_for(std::string name, const SamplingPlan& plan) {
  CheckReport r;
  r.check_name = std::move(name);
  r.seed = plan.seed;
  r.tol_pass = plan.tol_pass;
  r.tol_fail = plan.tol_fail;
  return r;
}

PointGuard evaluability_guard(std::vector<ExpressionMatrix> fields) {
  return [fields = std::move(fields)](const Eigen::VectorXd& p) {
    for (const auto& f : fields) f.value(p); // DomainError rejects the point
    return true;
  };
}

PointGuard scalar_guard(std::vector<Expression> scalars) {
  return [scalars = std::move(scalars)](const Eigen::VectorXd& p) {
    for (const auto& e : scalars) e.value(p);
    return true;
  };
}

PointGuard metric_det_guard(MetricField g, double det_floor) {
  return [g = std::move(g), det_floor](const Eigen::VectorXd& p) {
    Eigen::MatrixXd m = g.value(p);
    return std::abs(Eigen::FullPivLU<Eigen::MatrixXd>(m).determinant()) > det_floor;
  };
}

// max |m - m^T| scaled by the participating entries
double symmetry_residual(const Eigen::MatrixXd& m) {
  ResidualScale scale;
  double raw = 0.0;
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) {
      scale.observe(m(i, j));
      raw = std::max(raw, std::abs(m(i, j) - m(j, i)));
    }
  return scale(raw);
}

// Gamma^{ij}_k = g^{is} Gamma^j_{sk}
Tensor3 raised_christoffel(const PointFrame& f) {
  const int n = f.g_up.rows();
  Tensor3 out(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double sum = 0.0;
        for (int s = 0; s < n; ++s) sum += f.g_up(i, s) * f.gamma(j, s, k);
        out(i, j, k) = sum;
      }
  return out;
}

// pencil affinor v = g1_up g2_dn and its first derivatives from two frames
AffinorPointData pencil_point_data(const PointFrame& f1, const PointFrame& f2) {
  const int n = f1.g_up.rows();
  AffinorPointData a;
  a.v = f1.g_up * f2.g_dn;
  a.dv = Tensor3(n);
  for (int k = 0; k < n; ++k) {
    Eigen::MatrixXd d1(n, n), d2(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        d1(i, j) = f1.dg_up(i, j, k);
        d2(i, j) = f2.dg_dn(i, j, k);
      }
    Eigen::MatrixXd dv = d1 * f2.g_dn + f1.g_up * d2;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a.dv(i, j, k) = dv(i, j);
  }
  return a;
}

double nijenhuis_residual(const AffinorPointData& a) {
  Tensor3 nij = nijenhuis_from_data(a);
  double scale = 1.0 + a.v.cwiseAbs().maxCoeff() * a.dv.max_abs();
  return nij.max_abs() / scale;
}

bool eigen_less(const std::complex<double>& a, const std::complex<double>& b) {
  if (a.real() != b.real()) return a.real() < b.real();
  return a.imag() < b.imag();
}

Eigen::VectorXcd sorted_eigenvalues(const Eigen::MatrixXd& m) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(m, /*computeEigenvectors=*/false);
  Eigen::VectorXcd v = es.eigenvalues();
  std::vector<std::complex<double>> vals(v.data(), v.data() + v.size());
  std::stable_sort(vals.begin(), vals.end(), eigen_less);
  for (int i = 0; i < v.size(); ++i) v[i] = vals[i];
  return v;
}

double min_pairwise_gap(const Eigen::VectorXcd& vals) {
  double gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i < vals.size(); ++i)
    for (int j = i + 1; j < vals.size(); ++j)
      gap = std::min(gap, std::abs(vals[i] - vals[j]));
  return gap;
}

} // namespace

Eigen::MatrixXd pencil_affinor(const MetricField& g1, const MetricField& g2,
                               const Eigen::VectorXd& point, double det_floor) {
  PointFrame f2 = metric_point_data(g2, point, det_floor);
  return g1.value(point) * f2.g_dn;
}

PencilEigen pencil_eigenvalues(const MetricField& g1, const MetricField& g2,
                               const Eigen::VectorXd& point, double det_floor) {
  PencilEigen out;
  out.values = sorted_eigenvalues(pencil_affinor(g1, g2, point, det_floor));
  out.min_gap = min_pairwise_gap(out.values);
  return out;
}

BracketCoefficients compute_b(const MetricField& g, const Eigen::VectorXd& point,
                              double det_floor) {
  PointFrame f = metric_point_data(g, point, det_floor);
  const int n = g.dimension();
  BracketCoefficients out;
  out.b = Tensor3(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double sum = 0.0;
        for (int s = 0; s < n; ++s) sum += f.g_up(i, s) * f.gamma(j, s, k);
        out.b(i, j, k) = -sum;
      }

  ResidualScale sc_dg;
  double raw_dg = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double lhs = f.dg_up(i, j, k);
        double rhs = out.b(i, j, k) + out.b(j, i, k);
        sc_dg.observe(lhs);
        sc_dg.observe(rhs);
        raw_dg = std::max(raw_dg, std::abs(lhs - rhs));
      }
  out.residual_dg = sc_dg(raw_dg);

  ResidualScale sc_gb;
  double raw_gb = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double lhs = 0.0, rhs = 0.0;
        for (int s = 0; s < n; ++s) {
          lhs += f.g_up(i, s) * out.b(j, k, s);
          rhs += f.g_up(j, s) * out.b(i, k, s);
        }
        sc_gb.observe(lhs);
        sc_gb.observe(rhs);
        raw_gb = std::max(raw_gb, std::abs(lhs - rhs));
      }
  out.residual_gb = sc_gb(raw_gb);
  return out;
}

Eigen::MatrixXd assemble_hamiltonian_affinor(const NonlocalStructure& s, const Expression& h,
                                             const std::vector<Expression>& f_list,
                                             const Eigen::VectorXd& point, double det_floor) {
  const int n = s.dimension();
  if (static_cast<int>(f_list.size()) != s.tail_count())
    throw ArityMismatch("need one f per affinor: expected " + std::to_string(s.tail_count()) +
                        ", got " + std::to_string(f_list.size()));
  PointFrame fr = metric_point_data(s.g, point, det_floor);
  Jet2 hj = h.jet(point);

  Eigen::MatrixXd v(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double sum = 0.0;
      for (int ss = 0; ss < n; ++ss) {
        sum += fr.g_up(i, ss) * hj.hess(ss, j);
        for (int p = 0; p < n; ++p) sum -= fr.g_up(i, ss) * fr.gamma(p, ss, j) * hj.grad[p];
      }
      v(i, j) = sum;
    }
  for (int m = 0; m < s.tail_count(); ++m) {
    for (int nn = 0; nn < s.tail_count(); ++nn) {
      double mu = s.mu(m, nn);
      if (mu == 0.0) continue;
      double fn = f_list[nn].value(point);
      v += mu * fn * s.affinors[m].value(point);
    }
  }
  return v;
}

// ---------------------------------------------------------------------------
// Pencil checks
// ---------------------------------------------------------------------------

CheckReport check_nonsingular(const MetricField& g1, const MetricField& g2,
                              const SamplingPlan& plan) {
  CheckReport rep = report_for("nonsingular-pencil", plan);
  std::vector<PointGuard> guards{evaluability_guard({g1.m, g2.m}),
                                 metric_det_guard(g2, plan.det_floor)};
  SampleSet s = sample_points(plan, guards);
  rep.note_samples(s);

  ConditionRecord gap = record("eigenvalue-gap", plan);
  double min_gap = std::numeric_limits<double>::infinity();
  for (const auto& p : s.points) {
    PencilEigen pe = pencil_eigenvalues(g1, g2, p, plan.det_floor);
    min_gap = std::min(min_gap, pe.min_gap);
    double residual = pe.min_gap >= plan.gap_floor
                          ? 0.0
                          : (plan.gap_floor - pe.min_gap) / plan.gap_floor;
    gap.add(p, residual);
  }
  if (!s.points.empty()) rep.notes.push_back("min eigenvalue gap " + num(min_gap));
  rep.conditions.push_back(std::move(gap));
  rep.finalize();
  return rep;
}

namespace {

struct LambdaLeg {
  double l1, l2;
  MetricField comb;
  std::string id;
  long skipped = 0;
};

std::vector<LambdaLeg> build_lambda_legs(const MetricField& g1, const MetricField& g2,
                                         const SamplingPlan& plan) {
  std::vector<LambdaLeg> legs;
  for (const auto& [l1, l2] : plan.lambda_samples)
    legs.push_back({l1, l2, combine_metrics(g1, g2, l1, l2),
                    "(" + num(l1) + "," + num(l2) + ")", 0});
  return legs;
}

void note_skipped(CheckReport& rep, const std::vector<LambdaLeg>& legs) {
  for (const auto& leg : legs)
    if (leg.skipped > 0)
      rep.notes.push_back("lambda " + leg.id + ": skipped " + std::to_string(leg.skipped) +
                          " points with singular combination");
}

double tensor3_linearity_residual(const Tensor3& comb, const Tensor3& a, const Tensor3& b,
                                  double l1, double l2) {
  ResidualScale scale;
  double raw = 0.0;
  for (std::size_t i = 0; i < comb.a.size(); ++i) {
    double lhs = comb.a[i];
    double rhs = l1 * a.a[i] + l2 * b.a[i];
    scale.observe(lhs);
    scale.observe(rhs);
    raw = std::max(raw, std::abs(lhs - rhs));
  }
  return scale(raw);
}

double tensor4_linearity_residual(const Tensor4& comb, const Tensor4& a, const Tensor4& b,
                                  double l1, double l2) {
  ResidualScale scale;
  double raw = 0.0;
  for (std::size_t i = 0; i < comb.a.size(); ++i) {
    double lhs = comb.a[i];
    double rhs = l1 * a.a[i] + l2 * b.a[i];
    scale.observe(lhs);
    scale.observe(rhs);
    raw = std::max(raw, std::abs(lhs - rhs));
  }
  return scale(raw);
}

CheckReport pencil_linearity_check(const char* name, const MetricField& g1,
                                   const MetricField& g2, const SamplingPlan& plan,
                                   bool with_nijenhuis, bool with_curvature) {
  CheckReport rep = report_for(name, plan);
  std::vector<PointGuard> guards{evaluability_guard({g1.m, g2.m}),
                                 metric_det_guard(g1, plan.det_floor),
                                 metric_det_guard(g2, plan.det_floor)};
  SampleSet s = sample_points(plan, guards);
  rep.note_samples(s);

  std::vector<LambdaLeg> legs = build_lambda_legs(g1, g2, plan);
  ConditionRecord nij = record("nijenhuis", plan);
  std::vector<ConditionRecord> sv, kr;
  for (const auto& leg : legs) {
    sv.push_back(record("connection-pencil" + leg.id, plan));
    if (with_curvature) kr.push_back(record("curvature-pencil" + leg.id, plan));
  }

  for (const auto& p : s.points) {
    PointFrame f1 = metric_point_data(g1, p, plan.det_floor);
    PointFrame f2 = metric_point_data(g2, p, plan.det_floor);
    if (with_nijenhuis) nij.add(p, nijenhuis_residual(pencil_point_data(f1, f2)));

    Tensor3 gr1 = raised_christoffel(f1);
    Tensor3 gr2 = raised_christoffel(f2);
    for (std::size_t li = 0; li < legs.size(); ++li) {
      PointFrame fc;
      try {
        fc = metric_point_data(legs[li].comb, p, plan.det_floor);
      } catch (const SingularMetric&) {
        ++legs[li].skipped;
        continue;
      }
      sv[li].add(p, tensor3_linearity_residual(raised_christoffel(fc), gr1, gr2, legs[li].l1,
                                               legs[li].l2));
      if (with_curvature)
        kr[li].add(p, tensor4_linearity_residual(fc.riemann_up, f1.riemann_up, f2.riemann_up,
                                                 legs[li].l1, legs[li].l2));
    }
  }

  if (with_nijenhuis) rep.conditions.push_back(std::move(nij));
  for (auto& c : sv) rep.conditions.push_back(std::move(c));
  for (auto& c : kr) rep.conditions.push_back(std::move(c));
  note_skipped(rep, legs);
  rep.finalize();
  return rep;
}

} // namespace

CheckReport check_almost_compatible(const MetricField& g1, const MetricField& g2,
                                    const SamplingPlan& plan) {
  return pencil_linearity_check("almost-compatible-metrics", g1, g2, plan,
                                /*with_nijenhuis=*/true, /*with_curvature=*/false);
}

CheckReport check_compatible(const MetricField& g1, const MetricField& g2,
                             const SamplingPlan& plan) {
  return pencil_linearity_check("compatible-metrics", g1, g2, plan,
                                /*with_nijenhuis=*/false, /*with_curvature=*/true);
}

// ---------------------------------------------------------------------------
// Single-metric checks
// ---------------------------------------------------------------------------

CheckReport check_bracket_coefficients(const MetricField& g, const SamplingPlan& plan) {
  CheckReport rep = report_for("bracket-coefficients", plan);
  std::vector<PointGuard> guards{evaluability_guard({g.m}), metric_det_guard(g, plan.det_floor)};
  SampleSet s = sample_points(plan, guards);
  rep.note_samples(s);

  ConditionRecord dg = record("metric-derivative-split", plan);
  ConditionRecord gb = record("coefficient-symmetry", plan);
  for (const auto& p : s.points) {
    BracketCoefficients bc = compute_b(g, p, plan.det_floor);
    dg.add(p, bc.residual_dg);
    gb.add(p, bc.residual_gb);
  }
  rep.conditions.push_back(std::move(dg));
  rep.conditions.push_back(std::move(gb));
  rep.finalize();
  return rep;
}

CheckReport check_riemann_flat(const MetricField& g, const SamplingPlan& plan) {
  CheckReport rep = report_for("riemann-flat", plan);
  std::vector<PointGuard> guards{evaluability_guard({g.m}), metric_det_guard(g, plan.det_floor)};
  SampleSet s = sample_points(plan, guards);
  rep.note_samples(s);

  ConditionRecord sym = record("metric-symmetry", plan);
  ConditionRecord flat = record("flatness", plan);
  for (const auto& p : s.points) {
    PointFrame f = metric_point_data(g, p, plan.det_floor);
    sym.add(p, symmetry_residual(f.g_up));
    flat.add(p, f.riemann_up.max_abs() / (1.0 + f.riemann_up.max_abs()));
  }
  rep.conditions.push_back(std::move(sym));
  rep.conditions.push_back(std::move(flat));
  rep.finalize();
  return rep;
}

// ---------------------------------------------------------------------------
// Ferapontov bracket conditions
// ---------------------------------------------------------------------------

namespace {

struct FerapontovRecords {
  ConditionRecord metric_symmetry;
  std::vector<ConditionRecord> peter1, peter2, eq04;
  std::vector<ConditionRecord> commute; // (m, n), m < n
  ConditionRecord gauss;

  FerapontovRecords(const std::string& prefix, int l, const SamplingPlan& plan)
      : metric_symmetry(record(prefix + "metric-symmetry", plan)),
        gauss(record(prefix + "gauss", plan)) {
    for (int n = 0; n < l; ++n) {
      std::string tag = "[" + std::to_string(n + 1) + "]";
      peter1.push_back(record(prefix + "metric-affinor-symmetry" + tag, plan));
      peter2.push_back(record(prefix + "covariant-symmetry" + tag, plan));
      eq04.push_back(record(prefix + "raised-affinor-symmetry" + tag, plan));
    }
    for (int m = 0; m < l; ++m)
      for (int n = m + 1; n < l; ++n)
        commute.push_back(record(prefix + "commutator[" + std::to_string(m + 1) + "," +
                                     std::to_string(n + 1) + "]",
                                 plan));
  }

  void move_into(CheckReport& rep) {
    rep.conditions.push_back(std::move(metric_symmetry));
    for (auto& c : peter1) rep.conditions.push_back(std::move(c));
    for (auto& c : peter2) rep.conditions.push_back(std::move(c));
    for (auto& c : eq04) rep.conditions.push_back(std::move(c));
    for (auto& c : commute) rep.conditions.push_back(std::move(c));
    rep.conditions.push_back(std::move(gauss));
  }
};

double covariant_symmetry_residual(const Tensor3& d) {
  const int n = d.n;
  ResidualScale scale;
  double raw = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        scale.observe(d(i, j, k));
        raw = std::max(raw, std::abs(d(i, j, k) - d(i, k, j)));
      }
  return scale(raw);
}

double gauss_residual(const PointFrame& fr, const std::vector<Eigen::MatrixXd>& wv,
                      const Eigen::MatrixXd& mu) {
  const int n = fr.g_up.rows();
  const int l = static_cast<int>(wv.size());
  ResidualScale scale;
  double raw = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int q = 0; q < n; ++q) {
          double lhs = fr.riemann_up(i, j, k, q);
          double rhs = 0.0;
          for (int m = 0; m < l; ++m)
            for (int nn = 0; nn < l; ++nn)
              rhs += mu(m, nn) *
                     (wv[m](i, q) * wv[nn](j, k) - wv[m](j, q) * wv[nn](i, k));
          scale.observe(lhs);
          scale.observe(rhs);
          raw = std::max(raw, std::abs(lhs - rhs));
        }
  return scale(raw);
}

double commutator_residual(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd ab = a * b;
  Eigen::MatrixXd ba = b * a;
  double scale = 1.0 + std::max(ab.cwiseAbs().maxCoeff(), ba.cwiseAbs().maxCoeff());
  return (ab - ba).cwiseAbs().maxCoeff() / scale;
}

// g^{is} w^j_s = g^{js} w^i_s  <=>  g_up w^T symmetric
double raised_affinor_residual(const Eigen::MatrixXd& g_up, const Eigen::MatrixXd& w) {
  return symmetry_residual(g_up * w.transpose());
}

void ferapontov_point(const PointFrame& fr, const std::vector<AffinorField>& ws,
                      const Eigen::MatrixXd& mu, const Eigen::VectorXd& p,
                      FerapontovRecords& rec) {
  const int l = static_cast<int>(ws.size());
  rec.metric_symmetry.add(p, symmetry_residual(fr.g_up));

  std::vector<Eigen::MatrixXd> wv;
  wv.reserve(l);
  for (const auto& w : ws) wv.push_back(w.value(p));

  for (int n = 0; n < l; ++n) {
    rec.peter1[n].add(p, symmetry_residual(fr.g_dn * wv[n]));
    rec.eq04[n].add(p, raised_affinor_residual(fr.g_up, wv[n]));
    rec.peter2[n].add(p, covariant_symmetry_residual(covariant_derivative_affinor(fr, ws[n])));
  }
  int c = 0;
  for (int m = 0; m < l; ++m)
    for (int n = m + 1; n < l; ++n) rec.commute[c++].add(p, commutator_residual(wv[m], wv[n]));

  rec.gauss.add(p, gauss_residual(fr, wv, mu));
}

std::vector<ExpressionMatrix> structure_fields(const NonlocalStructure& s) {
  std::vector<ExpressionMatrix> fields{s.g.m};
  for (const auto& w : s.affinors) fields.push_back(w.m);
  return fields;
}

} // namespace

CheckReport check_ferapontov(const NonlocalStructure& s, const SamplingPlan& plan) {
  s.validate();
  CheckReport rep = report_for("ferapontov", plan);
  std::vector<PointGuard> guards{evaluability_guard(structure_fields(s)),
                                 metric_det_guard(s.g, plan.det_floor)};
  SampleSet samples = sample_points(plan, guards);
  rep.note_samples(samples);

  FerapontovRecords rec("", s.tail_count(), plan);
  for (const auto& p : samples.points) {
    PointFrame fr = metric_point_data(s.g, p, plan.det_floor);
    ferapontov_point(fr, s.affinors, s.mu, p, rec);
  }
  rec.move_into(rep);
  rep.finalize();
  return rep;
}

CheckReport check_bracket_pair_compatibility(const NonlocalStructure& s1,
                                             const NonlocalStructure& s2,
                                             const SamplingPlan& plan) {
  if (s1.dimension() != s2.dimension())
    throw PreconditionFailed("structures have different dimensions");
  s1.validate();
  s2.validate();

  CheckReport rep = report_for("bracket-pencil", plan);

  // precondition run: each structure must be a bracket on its own
  CheckReport fer1 = check_ferapontov(s1, plan);
  CheckReport fer2 = check_ferapontov(s2, plan);
  for (auto& c : fer1.conditions) {
    c.condition_id = "s1:" + c.condition_id;
    rep.conditions.push_back(std::move(c));
  }
  for (auto& c : fer2.conditions) {
    c.condition_id = "s2:" + c.condition_id;
    rep.conditions.push_back(std::move(c));
  }
  bool pre_ok = fer1.verdict != Verdict::Fail && fer2.verdict != Verdict::Fail;
  if (!pre_ok) rep.notes.push_back("precondition failed: a leg is not a bracket on its own");

  std::vector<PointGuard> guards{evaluability_guard(structure_fields(s1)),
                                 evaluability_guard(structure_fields(s2)),
                                 metric_det_guard(s1.g, plan.det_floor),
                                 metric_det_guard(s2.g, plan.det_floor)};
  SampleSet samples = sample_points(plan, guards);
  rep.note_samples(samples);

  const int l1 = s1.tail_count(), l2 = s2.tail_count();

  // cross conditions between the two affinor families
  std::vector<ConditionRecord> k1, k2, xcomm;
  for (int n = 0; n < l2; ++n)
    k1.push_back(record("cross-symmetry-g1-w2[" + std::to_string(n + 1) + "]", plan));
  for (int n = 0; n < l1; ++n)
    k2.push_back(record("cross-symmetry-g2-w1[" + std::to_string(n + 1) + "]", plan));
  for (int m = 0; m < l1; ++m)
    for (int n = 0; n < l2; ++n)
      xcomm.push_back(record("cross-commutator[" + std::to_string(m + 1) + "," +
                                 std::to_string(n + 1) + "]",
                             plan));

  // lambda legs: combined metric, concatenated affinors, block-diagonal mu
  std::vector<AffinorField> all_w = s1.affinors;
  all_w.insert(all_w.end(), s2.affinors.begin(), s2.affinors.end());
  struct PencilLeg {
    double l1, l2;
    MetricField comb;
    Eigen::MatrixXd mu;
    FerapontovRecords rec;
    long skipped = 0;
  };
  std::vector<PencilLeg> legs;
  if (pre_ok) {
    for (const auto& [a, b] : plan.lambda_samples) {
      Eigen::MatrixXd mu = Eigen::MatrixXd::Zero(l1 + l2, l1 + l2);
      mu.topLeftCorner(l1, l1) = a * s1.mu;
      mu.bottomRightCorner(l2, l2) = b * s2.mu;
      legs.push_back({a, b, combine_metrics(s1.g, s2.g, a, b), mu,
                      FerapontovRecords("pencil(" + num(a) + "," + num(b) + "):", l1 + l2, plan),
                      0});
    }
  }

  for (const auto& p : samples.points) {
    Eigen::MatrixXd g1v = s1.g.value(p);
    Eigen::MatrixXd g2v = s2.g.value(p);
    for (int n = 0; n < l2; ++n)
      k1[n].add(p, raised_affinor_residual(g1v, s2.affinors[n].value(p)));
    for (int n = 0; n < l1; ++n)
      k2[n].add(p, raised_affinor_residual(g2v, s1.affinors[n].value(p)));
    int c = 0;
    for (int m = 0; m < l1; ++m)
      for (int n = 0; n < l2; ++n)
        xcomm[c++].add(p, commutator_residual(s1.affinors[m].value(p), s2.affinors[n].value(p)));

    for (auto& leg : legs) {
      PointFrame fr;
      try {
        fr = metric_point_data(leg.comb, p, plan.det_floor);
      } catch (const SingularMetric&) {
        ++leg.skipped;
        continue;
      }
      ferapontov_point(fr, all_w, leg.mu, p, leg.rec);
    }
  }

  for (auto& c : k1) rep.conditions.push_back(std::move(c));
  for (auto& c : k2) rep.conditions.push_back(std::move(c));
  for (auto& c : xcomm) rep.conditions.push_back(std::move(c));
  for (auto& leg : legs) {
    leg.rec.move_into(rep);
    if (leg.skipped > 0)
      rep.notes.push_back("lambda (" + num(leg.l1) + "," + num(leg.l2) + "): skipped " +
                          std::to_string(leg.skipped) + " points with singular combination");
  }
  rep.finalize();
  if (!pre_ok) rep.verdict = Verdict::Fail;
  return rep;
}

// ---------------------------------------------------------------------------
// Hamiltonian affinors and flows
// ---------------------------------------------------------------------------

CheckReport check_hamiltonian_affinor(const AffinorField& v, const MetricField& g,
                                      const SamplingPlan& plan) {
  CheckReport rep = report_for("hamiltonian-affinor", plan);
  std::vector<PointGuard> guards{evaluability_guard({v.m, g.m}),
                                 metric_det_guard(g, plan.det_floor)};
  SampleSet s = sample_points(plan, guards);
  rep.note_samples(s);

  ConditionRecord jj1 = record("metric-symmetry-of-affinor", plan);
  ConditionRecord jj2 = record("covariant-symmetry-of-affinor", plan);
  for (const auto& p : s.points) {
    PointFrame fr = metric_point_data(g, p, plan.det_floor);
    jj1.add(p, symmetry_residual(fr.g_dn * v.value(p)));
    jj2.add(p, covariant_symmetry_residual(covariant_derivative_affinor(fr, v)));
  }
  rep.conditions.push_back(std::move(jj1));
  rep.conditions.push_back(std::move(jj2));
  rep.finalize();
  return rep;
}

CheckReport check_structural_flow_integrability(const Expression& h, const AffinorField& w,
                                                const SamplingPlan& plan) {
  CheckReport rep = report_for("structural-flow", plan);
  std::vector<PointGuard> guards{evaluability_guard({w.m}), scalar_guard({h})};
  SampleSet s = sample_points(plan, guards);
  rep.note_samples(s);
  const int n = w.dimension();

  ConditionRecord closed = record("flow-form-closedness", plan);
  for (const auto& p : s.points) {
    Jet2 hj = h.jet(p);
    AffinorPointData wd = affinor_point_data(w, p);
    // omega_s = (d_j h) w^j_s ; d_r omega_s = (d_r d_j h) w^j_s + (d_j h) d_r w^j_s
    Eigen::MatrixXd domega(n, n);
    for (int r = 0; r < n; ++r)
      for (int ss = 0; ss < n; ++ss) {
        double sum = 0.0;
        for (int j = 0; j < n; ++j)
          sum += hj.hess(r, j) * wd.v(j, ss) + hj.grad[j] * wd.dv(j, ss, r);
        domega(r, ss) = sum;
      }
    closed.add(p, symmetry_residual(domega));
  }
  rep.conditions.push_back(std::move(closed));
  rep.finalize();
  return rep;
}

CheckReport check_hamiltonian_assembly(const NonlocalStructure& s, const HydroSystem& sys,
                                       const SamplingPlan& plan) {
  if (!sys.hamiltonian)
    throw PreconditionFailed("system carries no hamiltonian data (h, f_n)");
  s.validate();
  const auto& ham = *sys.hamiltonian;
  const int l = s.tail_count();
  if (static_cast<int>(ham.f_list.size()) != l)
    throw ArityMismatch("need one f per affinor: expected " + std::to_string(l) + ", got " +
                        std::to_string(ham.f_list.size()));

  CheckReport rep = report_for("hamiltonian-assembly", plan);
  std::vector<ExpressionMatrix> fields = structure_fields(s);
  fields.push_back(sys.v.m);
  std::vector<Expression> scalars{ham.h};
  for (const auto& f : ham.f_list) scalars.push_back(f);
  std::vector<PointGuard> guards{evaluability_guard(fields), scalar_guard(scalars),
                                 metric_det_guard(s.g, plan.det_floor)};
  SampleSet samples = sample_points(plan, guards);
  rep.note_samples(samples);
  const int n = s.dimension();

  std::vector<ConditionRecord> flow;
  for (int m = 0; m < l; ++m)
    flow.push_back(record("flow-exactness[" + std::to_string(m + 1) + "]", plan));
  ConditionRecord match = record("assembly-matches-affinor", plan);
  ConditionRecord jj1 = record("assembled-metric-symmetry", plan);

  for (const auto& p : samples.points) {
    Jet2 hj = ham.h.jet(p);
    for (int m = 0; m < l; ++m) {
      Eigen::MatrixXd wv = s.affinors[m].value(p);
      Jet2 fj = ham.f_list[m].jet(p);
      ResidualScale scale;
      double raw = 0.0;
      for (int ss = 0; ss < n; ++ss) {
        double lhs = 0.0;
        for (int j = 0; j < n; ++j) lhs += hj.grad[j] * wv(j, ss);
        double rhs = fj.grad[ss];
        scale.observe(lhs);
        scale.observe(rhs);
        raw = std::max(raw, std::abs(lhs - rhs));
      }
      flow[m].add(p, scale(raw));
    }

    Eigen::MatrixXd v_asm = assemble_hamiltonian_affinor(s, ham.h, ham.f_list, p, plan.det_floor);
    Eigen::MatrixXd v_sys = sys.v.value(p);
    double scale = 1.0 + std::max(v_asm.cwiseAbs().maxCoeff(), v_sys.cwiseAbs().maxCoeff());
    match.add(p, (v_asm - v_sys).cwiseAbs().maxCoeff() / scale);

    PointFrame fr = metric_point_data(s.g, p, plan.det_floor);
    jj1.add(p, symmetry_residual(fr.g_dn * v_asm));
  }
  for (auto& c : flow) rep.conditions.push_back(std::move(c));
  rep.conditions.push_back(std::move(match));
  rep.conditions.push_back(std::move(jj1));
  rep.finalize();
  return rep;
}

// ---------------------------------------------------------------------------
// Diagonal systems
// ---------------------------------------------------------------------------

CheckReport check_tsarev_relation(const std::vector<Expression>& v_diag,
                                  const std::vector<Expression>& g_diag_covariant,
                                  const SamplingPlan& plan) {
  const int n = static_cast<int>(v_diag.size());
  if (static_cast<int>(g_diag_covariant.size()) != n)
    throw ArityMismatch("v_diag and g_diag must have the same length");

  CheckReport rep = report_for("tsarev-relation", plan);
  std::vector<Expression> scalars = v_diag;
  scalars.insert(scalars.end(), g_diag_covariant.begin(), g_diag_covariant.end());
  PointGuard nonzero_g = [g_diag_covariant, floor = plan.det_floor](const Eigen::VectorXd& p) {
    for (const auto& g : g_diag_covariant)
      if (std::abs(g.value(p)) <= floor) return false;
    return true;
  };
  std::vector<PointGuard> guards{scalar_guard(scalars), nonzero_g};
  SampleSet s = sample_points(plan, guards);
  rep.note_samples(s);

  ConditionRecord rel = record("tsarev-diagonal-relation", plan);
  for (const auto& p : s.points) {
    std::vector<Jet2> vj, gj;
    for (int i = 0; i < n; ++i) vj.push_back(v_diag[i].jet(p));
    for (int i = 0; i < n; ++i) gj.push_back(g_diag_covariant[i].jet(p));
    ResidualScale scale;
    double raw = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        double lhs = vj[i].grad[j];
        double rhs = 0.5 * gj[i].grad[j] / gj[i].value * (vj[j].value - vj[i].value);
        scale.observe(lhs);
        scale.observe(rhs);
        raw = std::max(raw, std::abs(lhs - rhs));
      }
    rel.add(p, scale(raw));
  }
  rep.conditions.push_back(std::move(rel));
  rep.finalize();
  return rep;
}

CheckReport check_semihamiltonian(const std::vector<Expression>& v_diag,
                                  const SamplingPlan& plan) {
  const int n = static_cast<int>(v_diag.size());
  CheckReport rep = report_for("semi-hamiltonian", plan);
  PointGuard hyperbolic = [v_diag, floor = plan.gap_floor](const Eigen::VectorXd& p) {
    for (std::size_t i = 0; i < v_diag.size(); ++i)
      for (std::size_t j = i + 1; j < v_diag.size(); ++j)
        if (std::abs(v_diag[i].value(p) - v_diag[j].value(p)) <= floor) return false;
    return true;
  };
  std::vector<PointGuard> guards{scalar_guard(v_diag), hyperbolic};
  SampleSet s = sample_points(plan, guards);
  rep.note_samples(s);

  ConditionRecord rel = record("semi-hamiltonian-relation", plan);
  if (n < 3) {
    rep.notes.push_back("no pairwise-distinct index triples below N=3; condition is vacuous");
    for (const auto& p : s.points) rel.add(p, 0.0);
  } else {
    for (const auto& p : s.points) {
      std::vector<Jet2> vj;
      for (int i = 0; i < n; ++i) vj.push_back(v_diag[i].jet(p));
      ResidualScale scale;
      double raw = 0.0;
      auto bracket_derivative = [&](int i, int j, int k) {
        // d_k [ (V^j - V^i)^{-1} d_j V^i ]
        double d = vj[j].value - vj[i].value;
        double a = vj[i].grad[j];
        double da = vj[i].hess(j, k);
        double dd = vj[j].grad[k] - vj[i].grad[k];
        return (da * d - a * dd) / (d * d);
      };
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k) {
            if (i == j || i == k || j == k) continue;
            double lhs = bracket_derivative(i, j, k);
            double rhs = bracket_derivative(i, k, j);
            scale.observe(lhs);
            scale.observe(rhs);
            raw = std::max(raw, std::abs(lhs - rhs));
          }
      rel.add(p, scale(raw));
    }
  }
  rep.conditions.push_back(std::move(rel));
  rep.finalize();
  return rep;
}

CheckReport check_holonomic_diagonal_structure(const NonlocalStructure& s,
                                               const SamplingPlan& plan) {
  s.validate();
  const int n = s.dimension();
  const int l = s.tail_count();

  CheckReport rep = report_for("holonomic-diagonal", plan);
  std::vector<PointGuard> guards{evaluability_guard(structure_fields(s)),
                                 metric_det_guard(s.g, plan.det_floor)};
  SampleSet samples = sample_points(plan, guards);
  rep.note_samples(samples);

  // off-diagonal entries must be the zero expression at the samples
  auto assert_diagonal = [&](const ExpressionMatrix& m, const std::string& what) {
    if (m.is_diagonal_ast()) return;
    for (const auto& p : samples.points) {
      double diag_peak = 0.0;
      for (int i = 0; i < n; ++i) diag_peak = std::max(diag_peak, std::abs(m.at(i, i).value(p)));
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          if (i != j && std::abs(m.at(i, j).value(p)) > 1e-10 * (1.0 + diag_peak))
            throw NotDiagonal(what + " has a nonzero off-diagonal component (" +
                              std::to_string(i + 1) + "," + std::to_string(j + 1) + ")");
    }
  };
  assert_diagonal(s.g.m, "metric");
  for (int m = 0; m < l; ++m)
    assert_diagonal(s.affinors[m].m, "affinor " + std::to_string(m + 1));

  std::vector<ConditionRecord> hol1;
  for (int m = 0; m < l; ++m)
    hol1.push_back(record("diagonal-covariant-symmetry[" + std::to_string(m + 1) + "]", plan));
  ConditionRecord hol2 = record("diagonal-curvature", plan);
  ConditionRecord offblock = record("offblock-curvature", plan);

  for (const auto& p : samples.points) {
    std::vector<Jet2> gj;
    for (int i = 0; i < n; ++i) gj.push_back(s.g.m.at(i, i).jet(p));

    for (int m = 0; m < l; ++m) {
      std::vector<Jet2> wj;
      for (int i = 0; i < n; ++i) wj.push_back(s.affinors[m].m.at(i, i).jet(p));
      ResidualScale scale;
      double raw = 0.0;
      for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
          if (i == k) continue;
          double lhs = 2.0 * gj[i].value * wj[i].grad[k];
          double rhs = (wj[i].value - wj[k].value) * gj[i].grad[k];
          scale.observe(lhs);
          scale.observe(rhs);
          raw = std::max(raw, std::abs(lhs - rhs));
        }
      hol1[m].add(p, scale(raw));
    }

    PointFrame fr = metric_point_data(s.g, p, plan.det_floor);
    {
      ResidualScale scale;
      double raw = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          if (i == j) continue;
          double lhs = fr.riemann_up(i, j, j, i);
          double rhs = 0.0;
          for (int m = 0; m < l; ++m)
            for (int nn = 0; nn < l; ++nn)
              rhs += s.mu(m, nn) * s.affinors[m].m.at(i, i).value(p) *
                     s.affinors[nn].m.at(j, j).value(p);
          scale.observe(lhs);
          scale.observe(rhs);
          raw = std::max(raw, std::abs(lhs - rhs));
        }
      hol2.add(p, scale(raw));
    }
    {
      ResidualScale scale;
      double raw = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k)
            for (int q = 0; q < n; ++q) {
              scale.observe(fr.riemann_up(i, j, k, q));
              bool off = (i != k && i != q) || (j != k && j != q);
              if (off) raw = std::max(raw, std::abs(fr.riemann_up(i, j, k, q)));
            }
      offblock.add(p, scale(raw));
    }
  }
  for (auto& c : hol1) rep.conditions.push_back(std::move(c));
  rep.conditions.push_back(std::move(hol2));
  rep.conditions.push_back(std::move(offblock));
  rep.finalize();
  return rep;
}

} // namespace hydrocheck
