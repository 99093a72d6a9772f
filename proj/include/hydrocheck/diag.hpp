#ifndef HYDROCHECK_DIAG_HPP
#define HYDROCHECK_DIAG_HPP

#include <complex>

#include <Eigen/Core>

#include "hydrocheck/criteria.hpp"

namespace hydrocheck {

// Canonical eigen-decomposition of a real matrix:
//  - eigenvalues sorted by (re, im);
//  - right eigenvectors in columns, unit norm, first nonzero entry rotated to
//    the positive real axis;
//  - left covectors in rows with left * right = identity.
// Identical input bits produce identical output bits.
struct EigenFrame {
  Eigen::VectorXcd eigenvalues;
  Eigen::MatrixXcd right_vectors;
  Eigen::MatrixXcd left_covectors;
  double condition_estimate = 1.0;
};

inline constexpr double kSemisimpleConditionLimit = 1e8;

// Throws NonSemisimple when the eigenvector matrix condition number exceeds
// kSemisimpleConditionLimit (defective within double precision).
EigenFrame eigen_frame(const Eigen::MatrixXd& m);

// Pointwise semisimplicity plus vanishing of the Haantjes tensor: the
// two-part criterion for diagonalizability in a domain.
CheckReport check_diagonalizable(const AffinorField& v, const SamplingPlan& plan);

// Transforms both covariant metrics (P^T g P) and every supplied affinor
// (P^{-1} w P) into the pencil eigenframe P and records the off-diagonal
// Frobenius mass ratios.
CheckReport check_simultaneous_diagonalization(const MetricField& g1, const MetricField& g2,
                                               const std::vector<AffinorField>& affinors,
                                               const SamplingPlan& plan);

// Frobenius integrability of each left eigencovector field of a 3-component
// affinor with real distinct spectrum: records |l ^ dl| with dl from central
// finite differences of the eigenframe.
CheckReport frobenius_integrability_check(const AffinorField& v, const SamplingPlan& plan,
                                          double fd_step = 1e-5);

// Rectangular lattice for the two-component Riemann-invariant construction.
struct GridSpec {
  int n1 = 17, n2 = 17;
  std::vector<std::pair<double, double>> box; // two [lo, hi] intervals
  double gap_floor = 1e-6;
};

// Numerically constructed Riemann invariants of a 2x2 affinor field: r1, r2
// label the two characteristic families through each lattice node, and
// alignment holds the angle (radians) between the finite-difference gradient
// of each invariant and the matching left eigencovector at interior nodes.
struct RiemannChart {
  Eigen::VectorXd u1, u2;  // lattice coordinates
  Eigen::MatrixXd r1, r2;  // invariants, indexed (i1, i2)
  Eigen::MatrixXd alignment1, alignment2;
  double max_alignment = 0.0;
};

// Integrates the characteristic ODE of each eigencovector family with a
// fixed-step RK4 sweep to a mid-box reference section; the invariant at a
// node is the section coordinate where its characteristic lands.
RiemannChart riemann_invariants_2d(const AffinorField& v, const GridSpec& grid);

} // namespace hydrocheck

#endif
