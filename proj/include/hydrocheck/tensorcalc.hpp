#ifndef HYDROCHECK_TENSORCALC_HPP
#define HYDROCHECK_TENSORCALC_HPP

#include <vector>

#include <Eigen/Core>

#include "hydrocheck/fields.hpp"

namespace hydrocheck {

struct Tensor3 {
  int n = 0;
  std::vector<double> a;

  Tensor3() = default;
  explicit Tensor3(int n) : n(n), a(static_cast<std::size_t>(n) * n * n, 0.0) {}
  double& operator()(int i, int j, int k) { return a[(i * n + j) * n + k]; }
  double operator()(int i, int j, int k) const { return a[(i * n + j) * n + k]; }
  double max_abs() const;
};

struct Tensor4 {
  int n = 0;
  std::vector<double> a;

  Tensor4() = default;
  explicit Tensor4(int n) : n(n), a(static_cast<std::size_t>(n) * n * n * n, 0.0) {}
  double& operator()(int i, int j, int k, int l) { return a[((i * n + j) * n + k) * n + l]; }
  double operator()(int i, int j, int k, int l) const { return a[((i * n + j) * n + k) * n + l]; }
  double max_abs() const;
};

// Everything the checks need about one metric at one point:
//   g_up          g^{ij}
//   g_dn          g_{ij}            (inverse of g_up)
//   dg_up(i,j,k)  dg^{ij}/du^k
//   d2g_up        d^2 g^{ij}/du^k du^l
//   gamma(i,j,k)  Gamma^i_{jk} = 1/2 g^{is}(d_j g_{sk} + d_k g_{js} - d_s g_{jk})
//   riemann_mixed R^i_{jkl} = d_k Gamma^i_{jl} - d_l Gamma^i_{jk}
//                              + Gamma^i_{pk} Gamma^p_{jl} - Gamma^i_{pl} Gamma^p_{jk}
//   riemann_up    R^{ij}_{kl} = g^{is} R^j_{skl}
struct PointFrame {
  Eigen::VectorXd point;
  Eigen::MatrixXd g_up, g_dn;
  Tensor3 dg_up;
  Tensor4 d2g_up;
  Tensor3 dg_dn;
  Tensor3 gamma;
  Tensor4 riemann_mixed;
  Tensor4 riemann_up;
};

inline constexpr double kDefaultDetFloor = 1e-9;

// Throws SingularMetric when |det g^{ij}(point)| <= det_floor.
PointFrame metric_point_data(const MetricField& g, const Eigen::VectorXd& point,
                             double det_floor = kDefaultDetFloor);

// Values and first derivatives of a matrix field at one point;
// dv(i,j,k) = d_k v^i_j. Also assembled numerically for derived affinors
// (e.g. the pencil affinor g1^{is} g_{2,sj}) that have no expression form.
struct AffinorPointData {
  Eigen::MatrixXd v;
  Tensor3 dv;
};

AffinorPointData affinor_point_data(const AffinorField& w, const Eigen::VectorXd& point);

// Nijenhuis tensor N^k_{ij}, stored as (k, i, j):
// N^k_{ij} = v^s_i d_s v^k_j - v^s_j d_s v^k_i + v^k_s d_j v^s_i - v^k_s d_i v^s_j
Tensor3 nijenhuis_from_data(const AffinorPointData& a);
Tensor3 nijenhuis(const AffinorField& v, const Eigen::VectorXd& point);

// Haantjes tensor H^i_{jk}, stored as (i, j, k):
// H^i_{jk} = v^i_s v^s_r N^r_{jk} - v^i_s N^s_{rk} v^r_j - v^i_s N^s_{jr} v^r_k
//            + N^i_{sr} v^s_j v^r_k
Tensor3 haantjes_from_data(const AffinorPointData& a);
Tensor3 haantjes(const AffinorField& v, const Eigen::VectorXd& point);

// nabla_k w^i_j = d_k w^i_j + Gamma^i_{sk} w^s_j - Gamma^s_{jk} w^i_s,
// stored as (i, j, k).
Tensor3 covariant_derivative_affinor(const MetricField& g, const AffinorField& w,
                                     const Eigen::VectorXd& point,
                                     double det_floor = kDefaultDetFloor);
Tensor3 covariant_derivative_affinor(const PointFrame& frame, const AffinorField& w);

} // namespace hydrocheck

#endif
