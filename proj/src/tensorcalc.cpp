#include "hydrocheck/tensorcalc.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Dense>

namespace hydrocheck {

double Tensor3::max_abs() const {
  double m = 0.0;
  for (double x : a) m = std::max(m, std::abs(x));
  return m;
}

double Tensor4::max_abs() const {
  double m = 0.0;
  for (double x : a) m = std::max(m, std::abs(x));
  return m;
}

namespace {

std::string point_string(const Eigen::VectorXd& p) {
  std::ostringstream os;
  os << "(";
  for (int i = 0; i < p.size(); ++i) os << (i ? ", " : "") << p[i];
  os << ")";
  return os.str();
}

} // namespace

PointFrame metric_point_data(const MetricField& g, const Eigen::VectorXd& point,
                             double det_floor) {
  const int n = g.dimension();
  PointFrame f;
  f.point = point;
  f.g_up.resize(n, n);
  f.dg_up = Tensor3(n);
  f.d2g_up = Tensor4(n);

  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Jet2 jet = g.m.at(i, j).jet(point);
      f.g_up(i, j) = jet.value;
      for (int k = 0; k < n; ++k) {
        f.dg_up(i, j, k) = jet.grad[k];
        for (int l = 0; l < n; ++l) f.d2g_up(i, j, k, l) = jet.hess(k, l);
      }
    }

  Eigen::FullPivLU<Eigen::MatrixXd> lu(f.g_up);
  double det = lu.determinant();
  if (std::abs(det) <= det_floor) throw SingularMetric(std::abs(det), point_string(point));
  f.g_dn = lu.inverse();

  // d_k g_dn = -g_dn (d_k g_up) g_dn
  f.dg_dn = Tensor3(n);
  std::vector<Eigen::MatrixXd> dup(n), ddn(n);
  for (int k = 0; k < n; ++k) {
    Eigen::MatrixXd d(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) d(i, j) = f.dg_up(i, j, k);
    dup[k] = d;
    ddn[k] = -f.g_dn * d * f.g_dn;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) f.dg_dn(i, j, k) = ddn[k](i, j);
  }

  // d_l d_k g_dn = -(d_l g_dn)(d_k g_up) g_dn - g_dn (d_l d_k g_up) g_dn
  //               - g_dn (d_k g_up)(d_l g_dn)
  Tensor4 d2dn(n);
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < n; ++l) {
      Eigen::MatrixXd d2up(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) d2up(i, j) = f.d2g_up(i, j, k, l);
      Eigen::MatrixXd m =
          -ddn[l] * dup[k] * f.g_dn - f.g_dn * d2up * f.g_dn - f.g_dn * dup[k] * ddn[l];
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) d2dn(i, j, k, l) = m(i, j);
    }

  f.gamma = Tensor3(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = j; k < n; ++k) {
        double sum = 0.0;
        for (int s = 0; s < n; ++s)
          sum += f.g_up(i, s) * (f.dg_dn(s, k, j) + f.dg_dn(j, s, k) - f.dg_dn(j, k, s));
        f.gamma(i, j, k) = 0.5 * sum;
        f.gamma(i, k, j) = 0.5 * sum;
      }

  // d_l Gamma^i_{jk} = 1/2 (d_l g^{is})(d_j g_{sk} + d_k g_{js} - d_s g_{jk})
  //                   + 1/2 g^{is}(d_l d_j g_{sk} + d_l d_k g_{js} - d_l d_s g_{jk})
  Tensor4 dgamma(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          double sum = 0.0;
          for (int s = 0; s < n; ++s) {
            sum += f.dg_up(i, s, l) * (f.dg_dn(s, k, j) + f.dg_dn(j, s, k) - f.dg_dn(j, k, s));
            sum += f.g_up(i, s) * (d2dn(s, k, j, l) + d2dn(j, s, k, l) - d2dn(j, k, s, l));
          }
          dgamma(i, j, k, l) = 0.5 * sum;
        }

  f.riemann_mixed = Tensor4(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          double r = dgamma(i, j, l, k) - dgamma(i, j, k, l);
          for (int p = 0; p < n; ++p)
            r += f.gamma(i, p, k) * f.gamma(p, j, l) - f.gamma(i, p, l) * f.gamma(p, j, k);
          f.riemann_mixed(i, j, k, l) = r;
        }

  f.riemann_up = Tensor4(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          double r = 0.0;
          for (int s = 0; s < n; ++s) r += f.g_up(i, s) * f.riemann_mixed(j, s, k, l);
          f.riemann_up(i, j, k, l) = r;
        }

  return f;
}

AffinorPointData affinor_point_data(const AffinorField& w, const Eigen::VectorXd& point) {
  const int n = w.dimension();
  AffinorPointData a;
  a.v.resize(n, n);
  a.dv = Tensor3(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Jet2 jet = w.m.at(i, j).jet(point);
      a.v(i, j) = jet.value;
      for (int k = 0; k < n; ++k) a.dv(i, j, k) = jet.grad[k];
    }
  return a;
}

Tensor3 nijenhuis_from_data(const AffinorPointData& a) {
  const int n = a.v.rows();
  Tensor3 nij(n);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        double sum = 0.0;
        for (int s = 0; s < n; ++s) {
          sum += a.v(s, i) * a.dv(k, j, s) - a.v(s, j) * a.dv(k, i, s);
          sum += a.v(k, s) * (a.dv(s, i, j) - a.dv(s, j, i));
        }
        nij(k, i, j) = sum;
        nij(k, j, i) = -sum;
      }
  return nij;
}

Tensor3 nijenhuis(const AffinorField& v, const Eigen::VectorXd& point) {
  return nijenhuis_from_data(affinor_point_data(v, point));
}

Tensor3 haantjes_from_data(const AffinorPointData& a) {
  Tensor3 nij = nijenhuis_from_data(a);
  const int n = a.v.rows();
  Tensor3 h(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = j + 1; k < n; ++k) {
        double sum = 0.0;
        for (int s = 0; s < n; ++s)
          for (int r = 0; r < n; ++r) {
            sum += a.v(i, s) * a.v(s, r) * nij(r, j, k);
            sum -= a.v(i, s) * nij(s, r, k) * a.v(r, j);
            sum -= a.v(i, s) * nij(s, j, r) * a.v(r, k);
            sum += nij(i, s, r) * a.v(s, j) * a.v(r, k);
          }
        h(i, j, k) = sum;
        h(i, k, j) = -sum;
      }
  return h;
}

Tensor3 haantjes(const AffinorField& v, const Eigen::VectorXd& point) {
  return haantjes_from_data(affinor_point_data(v, point));
}

Tensor3 covariant_derivative_affinor(const PointFrame& frame, const AffinorField& w) {
  AffinorPointData a = affinor_point_data(w, frame.point);
  const int n = a.v.rows();
  Tensor3 out(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double sum = a.dv(i, j, k);
        for (int s = 0; s < n; ++s)
          sum += frame.gamma(i, s, k) * a.v(s, j) - frame.gamma(s, j, k) * a.v(i, s);
        out(i, j, k) = sum;
      }
  return out;
}

Tensor3 covariant_derivative_affinor(const MetricField& g, const AffinorField& w,
                                     const Eigen::VectorXd& point, double det_floor) {
  return covariant_derivative_affinor(metric_point_data(g, point, det_floor), w);
}

} // namespace hydrocheck
