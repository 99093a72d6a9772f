#ifndef HYDROCHECK_CRITERIA_HPP
#define HYDROCHECK_CRITERIA_HPP

#include <Eigen/Core>

#include "hydrocheck/report.hpp"
#include "hydrocheck/tensorcalc.hpp"

namespace hydrocheck {

// Affinor v^i_j = g1^{is} g_{2,sj} of a metric pair. Throws SingularMetric
// when g2 cannot be inverted at the point.
Eigen::MatrixXd pencil_affinor(const MetricField& g1, const MetricField& g2,
                               const Eigen::VectorXd& point,
                               double det_floor = kDefaultDetFloor);

struct PencilEigen {
  Eigen::VectorXcd values; // sorted by (re, im)
  double min_gap = 0.0;    // min pairwise modulus of difference
};

// Roots of det(g1 - lambda g2) = 0, i.e. the spectrum of the pencil affinor.
PencilEigen pencil_eigenvalues(const MetricField& g1, const MetricField& g2,
                               const Eigen::VectorXd& point,
                               double det_floor = kDefaultDetFloor);

// Levi-Civita bracket coefficients b^{ij}_k = -g^{is} Gamma^j_{sk} together
// with the scaled residuals of the identities
//   dg^{ij}/du^k = b^{ij}_k + b^{ji}_k and g^{is} b^{jk}_s = g^{js} b^{ik}_s,
// which vanish identically for a Levi-Civita-derived b.
struct BracketCoefficients {
  Tensor3 b; // (i, j, k)
  double residual_dg = 0.0;
  double residual_gb = 0.0;
};

BracketCoefficients compute_b(const MetricField& g, const Eigen::VectorXd& point,
                              double det_floor = kDefaultDetFloor);

// V^i_j = g^{is} d2h/du^s du^j - g^{is} Gamma^p_{sj} dh/du^p
//         + sum mu^{mn} (w_m)^i_j f_n at one point.
Eigen::MatrixXd assemble_hamiltonian_affinor(const NonlocalStructure& s, const Expression& h,
                                             const std::vector<Expression>& f_list,
                                             const Eigen::VectorXd& point,
                                             double det_floor = kDefaultDetFloor);

// --- sampled checks -------------------------------------------------------

// Pencil eigenvalue gap stays above plan.gap_floor at every accepted point.
CheckReport check_nonsingular(const MetricField& g1, const MetricField& g2,
                              const SamplingPlan& plan);

// (a) Nijenhuis tensor of the pencil affinor vanishes; (b) raised Christoffel
// symbols of every sampled linear combination split linearly.
CheckReport check_almost_compatible(const MetricField& g1, const MetricField& g2,
                                    const SamplingPlan& plan);

// Linearity of both the raised Christoffel symbols and the raised curvature
// tensor across the sampled lambda combinations.
CheckReport check_compatible(const MetricField& g1, const MetricField& g2,
                             const SamplingPlan& plan);

// compute_b self-consistency residuals over samples.
CheckReport check_bracket_coefficients(const MetricField& g, const SamplingPlan& plan);

// R^{ij}_{kl} = 0 over samples.
CheckReport check_riemann_flat(const MetricField& g, const SamplingPlan& plan);

// Ferapontov conditions: g_{ik} w^k_j symmetric, nabla_k w^i_j = nabla_j w^i_k,
// the curvature representation through mu and the w_n, pairwise commutators,
// and g^{is} w^j_s = g^{js} w^i_s. For L = 0 the curvature condition is
// flatness.
CheckReport check_ferapontov(const NonlocalStructure& s, const SamplingPlan& plan);

// Runs the Ferapontov conditions on both structures, on every sampled lambda
// combination (metric lambda1 g1 + lambda2 g2, concatenated affinors,
// block-diagonal lambda-weighted mu), and the cross symmetry/commutativity
// conditions between the two affinor families.
CheckReport check_bracket_pair_compatibility(const NonlocalStructure& s1,
                                             const NonlocalStructure& s2,
                                             const SamplingPlan& plan);

// g_{is} V^s_j = g_{js} V^s_i and nabla_j V^i_k = nabla_k V^i_j.
CheckReport check_hamiltonian_affinor(const AffinorField& v, const MetricField& g,
                                      const SamplingPlan& plan);

// Closedness of omega_s = (dh/du^j) w^j_s, the local integrability condition
// for the existence of f with dh . w = df.
CheckReport check_structural_flow_integrability(const Expression& h, const AffinorField& w,
                                                const SamplingPlan& plan);

// Coherence of a system's affinor with its Hamiltonian data against a
// structure: dh . w_n = df_n holds exactly, the assembled affinor matches the
// declared one, and the assembled affinor satisfies the metric symmetry.
CheckReport check_hamiltonian_assembly(const NonlocalStructure& s, const HydroSystem& sys,
                                       const SamplingPlan& plan);

// dV^i/du^j = (1/2 dg_i/du^j / g_i)(V^j - V^i) for i != j, with g_i the
// covariant diagonal entries. The log-derivative is formed as the quotient,
// so indefinite signatures are fine.
CheckReport check_tsarev_relation(const std::vector<Expression>& v_diag,
                                  const std::vector<Expression>& g_diag_covariant,
                                  const SamplingPlan& plan);

// Tsarev's semi-Hamiltonian property for diagonal strictly hyperbolic
// systems: symmetry in (j,k) of d_k((V^j - V^i)^{-1} d_j V^i) over all
// pairwise-distinct triples. Vacuous for N < 3.
CheckReport check_semihamiltonian(const std::vector<Expression>& v_diag,
                                  const SamplingPlan& plan);

// Diagonal-structure conditions: 2 g^i d(w_n)^i/du^k = ((w_n)^i - (w_n)^k)
// dg^i/du^k for i != k, the diagonal curvature representation
// R^{ij}_{ji} = sum mu^{mn} (w_m)^i (w_n)^j, and vanishing off-block
// curvature. Throws NotDiagonal when a supplied field is not diagonal.
CheckReport check_holonomic_diagonal_structure(const NonlocalStructure& s,
                                               const SamplingPlan& plan);

} // namespace hydrocheck

#endif
