#include "hydrocheck/diag.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace hydrocheck {

namespace {

bool eigen_less(const std::complex<double>& a, const std::complex<double>& b) {
  if (a.real() != b.real()) return a.real() < b.real();
  return a.imag() < b.imag();
}

bool exactly_diagonal(const Eigen::MatrixXd& m) {
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j)
      if (i != j && m(i, j) != 0.0) return false;
  return true;
}

std::string spectrum_string(const Eigen::VectorXcd& vals) {
  std::ostringstream os;
  for (int i = 0; i < vals.size(); ++i) {
    if (i) os << ", ";
    os << vals[i].real();
    if (vals[i].imag() != 0.0) os << (vals[i].imag() > 0 ? "+" : "") << vals[i].imag() << "i";
  }
  return os.str();
}

void canonicalize_columns(Eigen::MatrixXcd& v) {
  for (int c = 0; c < v.cols(); ++c) {
    for (int r = 0; r < v.rows(); ++r) {
      std::complex<double> z = v(r, c);
      if (std::abs(z) > 1e-9) {
        v.col(c) *= std::conj(z) / std::abs(z);
        break;
      }
    }
  }
}

} // namespace

EigenFrame eigen_frame(const Eigen::MatrixXd& m) {
  const int n = static_cast<int>(m.rows());
  EigenFrame out;

  if (exactly_diagonal(m)) {
    // exact frame: permutation of the identity, kept bit-clean
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return m(a, a) < m(b, b); });
    out.eigenvalues.resize(n);
    out.right_vectors = Eigen::MatrixXcd::Zero(n, n);
    out.left_covectors = Eigen::MatrixXcd::Zero(n, n);
    for (int c = 0; c < n; ++c) {
      out.eigenvalues[c] = m(idx[c], idx[c]);
      out.right_vectors(idx[c], c) = 1.0;
      out.left_covectors(c, idx[c]) = 1.0;
    }
    out.condition_estimate = 1.0;
    return out;
  }

  Eigen::EigenSolver<Eigen::MatrixXd> es(m, /*computeEigenvectors=*/true);
  if (es.info() != Eigen::Success) throw NonSemisimple("eigen decomposition did not converge");

  Eigen::VectorXcd vals = es.eigenvalues();
  Eigen::MatrixXcd vecs = es.eigenvectors();

  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int a, int b) { return eigen_less(vals[a], vals[b]); });

  out.eigenvalues.resize(n);
  out.right_vectors.resize(n, n);
  for (int c = 0; c < n; ++c) {
    out.eigenvalues[c] = vals[idx[c]];
    out.right_vectors.col(c) = vecs.col(idx[c]).normalized();
  }
  canonicalize_columns(out.right_vectors);

  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(out.right_vectors);
  double smin = svd.singularValues()(n - 1);
  double smax = svd.singularValues()(0);
  out.condition_estimate = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
  if (out.condition_estimate > kSemisimpleConditionLimit) {
    double gap = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        gap = std::min(gap, std::abs(out.eigenvalues[i] - out.eigenvalues[j]));
    std::ostringstream os;
    os << "eigenvector matrix condition " << out.condition_estimate << " exceeds "
       << kSemisimpleConditionLimit << "; spectrum {" << spectrum_string(out.eigenvalues)
       << "} with min gap " << gap;
    throw NonSemisimple(os.str());
  }
  out.left_covectors = out.right_vectors.inverse();
  return out;
}

// ---------------------------------------------------------------------------
// Diagonalizability
// ---------------------------------------------------------------------------

namespace {

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

PointGuard field_guard(ExpressionMatrix m) {
  return [m = std::move(m)](const Eigen::VectorXd& p) {
    m.value(p);
    return true;
  };
}

double haantjes_residual(const AffinorPointData& a) {
  Tensor3 nij = nijenhuis_from_data(a);
  Tensor3 h = haantjes_from_data(a);
  double vmax = a.v.cwiseAbs().maxCoeff();
  return h.max_abs() / (1.0 + vmax * vmax * nij.max_abs());
}

double offdiagonal_mass(const Eigen::MatrixXcd& m) {
  double off = 0.0, total = 0.0;
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) {
      double a2 = std::norm(m(i, j));
      total += a2;
      if (i != j) off += a2;
    }
  return total > 0.0 ? std::sqrt(off / total) : 0.0;
}

} // namespace

CheckReport check_diagonalizable(const AffinorField& v, const SamplingPlan& plan) {
  CheckReport rep = report_for("diagonalizable", plan);
  std::vector<PointGuard> guards{field_guard(v.m)};
  SampleSet s = sample_points(plan, guards);
  rep.note_samples(s);

  ConditionRecord semisimple = record("pointwise-semisimple", plan);
  ConditionRecord haantjes_rec = record("haantjes", plan);
  long defective = 0;
  for (const auto& p : s.points) {
    AffinorPointData a = affinor_point_data(v, p);
    try {
      eigen_frame(a.v);
      semisimple.add(p, 0.0);
    } catch (const NonSemisimple&) {
      semisimple.add(p, 1.0);
      ++defective;
    }
    haantjes_rec.add(p, haantjes_residual(a));
  }
  if (defective > 0)
    rep.notes.push_back(std::to_string(defective) + " points defective within tolerance");
  rep.conditions.push_back(std::move(semisimple));
  rep.conditions.push_back(std::move(haantjes_rec));
  rep.finalize();
  return rep;
}

CheckReport check_simultaneous_diagonalization(const MetricField& g1, const MetricField& g2,
                                               const std::vector<AffinorField>& affinors,
                                               const SamplingPlan& plan) {
  CheckReport rep = report_for("simultaneous-diagonal", plan);
  const double det_floor = plan.det_floor;

  auto det_guard = [det_floor](const MetricField& g) {
    return [g, det_floor](const Eigen::VectorXd& p) {
      return std::abs(Eigen::FullPivLU<Eigen::MatrixXd>(g.value(p)).determinant()) > det_floor;
    };
  };
  PointGuard gap_guard = [&g1, &g2, det_floor, gap = plan.gap_floor](const Eigen::VectorXd& p) {
    return pencil_eigenvalues(g1, g2, p, det_floor).min_gap > gap;
  };
  std::vector<PointGuard> guards{field_guard(g1.m), field_guard(g2.m)};
  for (const auto& w : affinors) guards.push_back(field_guard(w.m));
  guards.push_back(det_guard(g1));
  guards.push_back(det_guard(g2));
  guards.push_back(gap_guard);

  SampleSet s = sample_points(plan, guards);
  rep.note_samples(s);

  ConditionRecord c_g1 = record("g1-offdiagonal", plan);
  ConditionRecord c_g2 = record("g2-offdiagonal", plan);
  std::vector<ConditionRecord> c_w;
  for (std::size_t k = 0; k < affinors.size(); ++k)
    c_w.push_back(record("affinor[" + std::to_string(k + 1) + "]-offdiagonal", plan));

  long defective = 0;
  for (const auto& p : s.points) {
    Eigen::MatrixXd g1_up = g1.value(p);
    Eigen::MatrixXd g2_up = g2.value(p);
    Eigen::MatrixXd g1_dn = g1_up.inverse();
    Eigen::MatrixXd g2_dn = g2_up.inverse();
    EigenFrame frame;
    try {
      frame = eigen_frame(g1_up * g2_dn);
    } catch (const NonSemisimple&) {
      ++defective;
      c_g1.add(p, 1.0);
      c_g2.add(p, 1.0);
      for (auto& c : c_w) c.add(p, 1.0);
      continue;
    }
    const Eigen::MatrixXcd& pm = frame.right_vectors;
    c_g1.add(p, offdiagonal_mass(pm.transpose() * g1_dn.cast<std::complex<double>>() * pm));
    c_g2.add(p, offdiagonal_mass(pm.transpose() * g2_dn.cast<std::complex<double>>() * pm));
    for (std::size_t k = 0; k < affinors.size(); ++k) {
      Eigen::MatrixXcd w = affinors[k].value(p).cast<std::complex<double>>();
      c_w[k].add(p, offdiagonal_mass(frame.left_covectors * w * pm));
    }
  }
  if (defective > 0)
    rep.notes.push_back(std::to_string(defective) + " points with defective pencil affinor");
  rep.conditions.push_back(std::move(c_g1));
  rep.conditions.push_back(std::move(c_g2));
  for (auto& c : c_w) rep.conditions.push_back(std::move(c));
  rep.finalize();
  return rep;
}

// ---------------------------------------------------------------------------
// Frobenius integrability of eigencovector fields
// ---------------------------------------------------------------------------

namespace {

bool spectrum_real_distinct(const Eigen::VectorXcd& vals, double gap_floor) {
  double scale = 1.0;
  for (int i = 0; i < vals.size(); ++i) scale = std::max(scale, std::abs(vals[i]));
  for (int i = 0; i < vals.size(); ++i)
    if (std::abs(vals[i].imag()) > 1e-9 * scale) return false;
  for (int i = 0; i < vals.size(); ++i)
    for (int j = i + 1; j < vals.size(); ++j)
      if (std::abs(vals[i] - vals[j]) <= gap_floor) return false;
  return true;
}

// left covector of the eigenvalue closest to lambda_ref, rescaled so that
// l . r_ref = 1 (a smooth section through the reference frame)
Eigen::VectorXd matched_left_covector(const EigenFrame& f, double lambda_ref,
                                      const Eigen::VectorXcd& r_ref) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int i = 0; i < f.eigenvalues.size(); ++i) {
    double d = std::abs(f.eigenvalues[i] - lambda_ref);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  Eigen::VectorXcd l = f.left_covectors.row(best);
  std::complex<double> align = l.transpose() * r_ref;
  if (std::abs(align) < 1e-12) throw NonSemisimple("eigenframe matching lost the family");
  l /= align;
  return l.real();
}

} // namespace

CheckReport frobenius_integrability_check(const AffinorField& v, const SamplingPlan& plan,
                                          double fd_step) {
  const int n = v.dimension();
  if (n != 3) throw PreconditionFailed("frobenius-integrability is defined for N = 3");

  CheckReport rep = report_for("frobenius-integrability", plan);
  PointGuard spectrum_guard = [&v, h = fd_step, gap = plan.gap_floor](const Eigen::VectorXd& p) {
    // the whole finite-difference stencil must stay real and separated
    Eigen::EigenSolver<Eigen::MatrixXd> es(v.value(p), false);
    if (!spectrum_real_distinct(es.eigenvalues(), gap)) return false;
    for (int r = 0; r < p.size(); ++r)
      for (double sgn : {-1.0, 1.0}) {
        Eigen::VectorXd q = p;
        q[r] += sgn * h;
        Eigen::EigenSolver<Eigen::MatrixXd> e2(v.value(q), false);
        if (!spectrum_real_distinct(e2.eigenvalues(), gap)) return false;
      }
    return true;
  };
  std::vector<PointGuard> guards{field_guard(v.m), spectrum_guard};
  SampleSet s = sample_points(plan, guards);
  rep.note_samples(s);

  std::vector<ConditionRecord> wedge;
  for (int i = 0; i < n; ++i)
    wedge.push_back(record("covector-wedge[" + std::to_string(i + 1) + "]", plan));

  for (const auto& p : s.points) {
    EigenFrame f0 = eigen_frame(v.value(p));
    std::vector<EigenFrame> plus(n), minus(n);
    for (int r = 0; r < n; ++r) {
      Eigen::VectorXd q = p;
      q[r] = p[r] + fd_step;
      plus[r] = eigen_frame(v.value(q));
      q[r] = p[r] - fd_step;
      minus[r] = eigen_frame(v.value(q));
    }
    for (int fam = 0; fam < n; ++fam) {
      double lambda = f0.eigenvalues[fam].real();
      Eigen::VectorXcd r_ref = f0.right_vectors.col(fam);
      Eigen::VectorXd l0 = f0.left_covectors.row(fam).real();
      Eigen::MatrixXd dl(n, n); // dl(r, t) = d_r l_t
      for (int r = 0; r < n; ++r) {
        Eigen::VectorXd lp = matched_left_covector(plus[r], lambda, r_ref);
        Eigen::VectorXd lm = matched_left_covector(minus[r], lambda, r_ref);
        dl.row(r) = (lp - lm) / (2.0 * fd_step);
      }
      double w = l0[0] * (dl(1, 2) - dl(2, 1)) + l0[1] * (dl(2, 0) - dl(0, 2)) +
                 l0[2] * (dl(0, 1) - dl(1, 0));
      double scale = 1.0 + l0.cwiseAbs().maxCoeff() * dl.cwiseAbs().maxCoeff();
      wedge[fam].add(p, std::abs(w) / scale);
    }
  }
  for (auto& c : wedge) rep.conditions.push_back(std::move(c));
  rep.finalize();
  return rep;
}

// ---------------------------------------------------------------------------
// Riemann invariants for two-component systems
// ---------------------------------------------------------------------------

namespace {

struct CharacteristicField {
  const AffinorField& v;
  double gap_floor;

  // left covector of the family whose eigenvalue is closest to lambda_ref;
  // updates lambda_ref to the local eigenvalue (continuity tracking)
  Eigen::Vector2d covector(const Eigen::Vector2d& p, double& lambda_ref) const {
    EigenFrame f;
    try {
      f = eigen_frame(v.value(p));
    } catch (const NonSemisimple& e) {
      throw IntegrationBlowup(std::string("eigenframe failed off the lattice: ") + e.what());
    }
    double scale = std::max(std::abs(f.eigenvalues[0]), std::abs(f.eigenvalues[1]));
    if (std::abs(f.eigenvalues[0].imag()) > 1e-9 * (1.0 + scale))
      throw ComplexCharacteristics("complex eigenvalues at an integration point");
    int best = std::abs(f.eigenvalues[0].real() - lambda_ref) <=
                       std::abs(f.eigenvalues[1].real() - lambda_ref)
                   ? 0
                   : 1;
    lambda_ref = f.eigenvalues[best].real();
    return f.left_covectors.row(best).real();
  }
};

} // namespace

RiemannChart riemann_invariants_2d(const AffinorField& v, const GridSpec& grid) {
  if (v.dimension() != 2) throw PreconditionFailed("riemann-invariants-2d needs N = 2");
  if (grid.box.size() != 2) throw SchemaError("grid.box", "needs two intervals");
  if (grid.n1 < 3 || grid.n2 < 3) throw SchemaError("grid", "needs at least 3x3 nodes");

  const auto [lo1, hi1] = grid.box[0];
  const auto [lo2, hi2] = grid.box[1];
  RiemannChart chart;
  chart.u1.setLinSpaced(grid.n1, lo1, hi1);
  chart.u2.setLinSpaced(grid.n2, lo2, hi2);
  chart.r1.resize(grid.n1, grid.n2);
  chart.r2.resize(grid.n1, grid.n2);
  chart.alignment1 = Eigen::MatrixXd::Zero(grid.n1, grid.n2);
  chart.alignment2 = Eigen::MatrixXd::Zero(grid.n1, grid.n2);

  // pre-scan: the whole lattice must carry a real, separated spectrum
  std::vector<Eigen::Vector2d> node_lambda(grid.n1 * grid.n2);
  for (int i = 0; i < grid.n1; ++i)
    for (int j = 0; j < grid.n2; ++j) {
      Eigen::Vector2d p(chart.u1[i], chart.u2[j]);
      Eigen::EigenSolver<Eigen::MatrixXd> es(v.value(p), false);
      Eigen::VectorXcd vals = es.eigenvalues();
      double scale = std::max({1.0, std::abs(vals[0]), std::abs(vals[1])});
      if (std::abs(vals[0].imag()) > 1e-9 * scale)
        throw ComplexCharacteristics("complex characteristic speeds on the lattice");
      if (std::abs(vals[0] - vals[1]) <= grid.gap_floor)
        throw EigenvalueCollision("characteristic speeds collide on the lattice");
      double a = vals[0].real(), b = vals[1].real();
      node_lambda[i * grid.n2 + j] = Eigen::Vector2d(std::min(a, b), std::max(a, b));
    }

  CharacteristicField field{v, grid.gap_floor};
  Eigen::Vector2d center(0.5 * (lo1 + hi1), 0.5 * (lo2 + hi2));

  for (int fam = 0; fam < 2; ++fam) {
    double lambda_c = eigen_frame(v.value(center)).eigenvalues[fam].real();
    Eigen::Vector2d l_c = field.covector(center, lambda_c);

    // sweep along the axis the characteristics cross transversally
    int sweep = std::abs(l_c[1]) >= std::abs(l_c[0]) ? 0 : 1;
    int other = 1 - sweep;
    double ref = sweep == 0 ? 0.5 * (lo1 + hi1) : 0.5 * (lo2 + hi2);
    double width = sweep == 0 ? hi1 - lo1 : hi2 - lo2;
    double excursion = 3.0 * (sweep == 0 ? hi2 - lo2 : hi1 - lo1);
    double mid_other = sweep == 0 ? 0.5 * (lo2 + hi2) : 0.5 * (lo1 + hi1);
    double h0 = width / 128.0;

    auto slope = [&](double x, double y, double& lambda_ref) {
      Eigen::Vector2d p;
      p[sweep] = x;
      p[other] = y;
      Eigen::Vector2d l;
      try {
        l = field.covector(p, lambda_ref);
      } catch (const DomainError& e) {
        throw IntegrationBlowup(std::string("expression left its domain: ") + e.what());
      }
      // tangent annihilated by l: dy/dx = -l_sweep / l_other
      if (std::abs(l[other]) < 1e-12 * l.norm())
        throw IntegrationBlowup("characteristic turned parallel to the sweep axis");
      return -l[sweep] / l[other];
    };

    Eigen::MatrixXd& r = fam == 0 ? chart.r1 : chart.r2;
    for (int i = 0; i < grid.n1; ++i)
      for (int j = 0; j < grid.n2; ++j) {
        Eigen::Vector2d p(chart.u1[i], chart.u2[j]);
        double x = p[sweep], y = p[other];
        double lambda_run = node_lambda[i * grid.n2 + j][fam];
        long steps = std::max(1L, std::lround(std::ceil(std::abs(ref - x) / h0)));
        double h = (ref - x) / static_cast<double>(steps);
        if (x != ref) {
          for (long st = 0; st < steps; ++st) {
            double lr = lambda_run;
            double k1 = slope(x, y, lr);
            double lr2 = lambda_run;
            double k2 = slope(x + 0.5 * h, y + 0.5 * h * k1, lr2);
            double lr3 = lambda_run;
            double k3 = slope(x + 0.5 * h, y + 0.5 * h * k2, lr3);
            double lr4 = lambda_run;
            double k4 = slope(x + h, y + h * k3, lr4);
            y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            x += h;
            if (std::abs(y - mid_other) > excursion)
              throw IntegrationBlowup("characteristic left the extended box");
            slope(x, y, lambda_run); // refresh the tracked eigenvalue
          }
        }
        r(i, j) = y;
      }
  }

  // gradient alignment at interior nodes
  double d1 = chart.u1[1] - chart.u1[0];
  double d2 = chart.u2[1] - chart.u2[0];
  for (int fam = 0; fam < 2; ++fam) {
    const Eigen::MatrixXd& r = fam == 0 ? chart.r1 : chart.r2;
    Eigen::MatrixXd& align = fam == 0 ? chart.alignment1 : chart.alignment2;
    for (int i = 1; i + 1 < grid.n1; ++i)
      for (int j = 1; j + 1 < grid.n2; ++j) {
        Eigen::Vector2d grad((r(i + 1, j) - r(i - 1, j)) / (2.0 * d1),
                             (r(i, j + 1) - r(i, j - 1)) / (2.0 * d2));
        Eigen::Vector2d p(chart.u1[i], chart.u2[j]);
        double lambda = node_lambda[i * grid.n2 + j][fam];
        Eigen::Vector2d l = field.covector(p, lambda);
        double denom = grad.norm() * l.norm();
        double angle = denom > 0.0
                           ? std::acos(std::min(1.0, std::abs(grad.dot(l)) / denom))
                           : 0.5 * M_PI;
        align(i, j) = angle;
        chart.max_alignment = std::max(chart.max_alignment, angle);
      }
  }
  return chart;
}

} // namespace hydrocheck
