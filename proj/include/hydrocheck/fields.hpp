#ifndef HYDROCHECK_FIELDS_HPP
#define HYDROCHECK_FIELDS_HPP

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hydrocheck/expr.hpp"

namespace hydrocheck {

// N x N matrix of expressions, row-major. Base for metric and affinor fields.
class ExpressionMatrix {
public:
  ExpressionMatrix() = default;
  ExpressionMatrix(int dimension, std::vector<Expression> components);

  static ExpressionMatrix identity(int dimension, NamesPtr names);
  static ExpressionMatrix zero(int dimension, NamesPtr names);
  static ExpressionMatrix diagonal(std::vector<Expression> entries);
  static ExpressionMatrix from_strings(const std::vector<std::vector<std::string>>& rows,
                                       NamesPtr names);

  int dimension() const { return dim_; }
  const Expression& at(int i, int j) const { return components_[i * dim_ + j]; }
  Expression& at(int i, int j) { return components_[i * dim_ + j]; }
  const std::vector<Expression>& components() const { return components_; }
  const NamesPtr& names() const;

  Eigen::MatrixXd value(const Eigen::VectorXd& point) const;
  bool is_diagonal_ast() const; // off-diagonal entries are literal zero trees

private:
  int dim_ = 0;
  std::vector<Expression> components_;
};

// Contravariant metric g^{ij}(u). Symmetry is a property of the component
// expressions and is validated at evaluation points by the checks.
struct MetricField {
  ExpressionMatrix m;

  int dimension() const { return m.dimension(); }
  static MetricField identity(int dimension, NamesPtr names = nullptr);
  static MetricField from_strings(const std::vector<std::vector<std::string>>& rows,
                                  NamesPtr names);

  Eigen::MatrixXd value(const Eigen::VectorXd& point) const { return m.value(point); }

  // Pushforward under the constant change of coordinates u = A v:
  // g~(v) = A^{-1} g(A v) A^{-T}. When the exact inverse is known, pass it.
  MetricField transformed(const Eigen::MatrixXd& a) const;
  MetricField transformed(const Eigen::MatrixXd& a, const Eigen::MatrixXd& a_inv) const;
};

// (1,1)-tensor field w^i_j(u); row = upper index, column = lower index.
struct AffinorField {
  ExpressionMatrix m;

  int dimension() const { return m.dimension(); }
  static AffinorField identity(int dimension, NamesPtr names = nullptr);
  static AffinorField from_strings(const std::vector<std::vector<std::string>>& rows,
                                   NamesPtr names);

  Eigen::MatrixXd value(const Eigen::VectorXd& point) const { return m.value(point); }

  // w~(v) = A^{-1} w(A v) A under u = A v.
  AffinorField transformed(const Eigen::MatrixXd& a) const;
  AffinorField transformed(const Eigen::MatrixXd& a, const Eigen::MatrixXd& a_inv) const;
};

// Candidate non-local Hamiltonian structure: metric, L affinors w_n and the
// constant symmetric L x L matrix mu. L = 0 is the local case.
struct NonlocalStructure {
  MetricField g;
  std::vector<AffinorField> affinors;
  Eigen::MatrixXd mu;

  int dimension() const { return g.dimension(); }
  int tail_count() const { return static_cast<int>(affinors.size()); }

  // Throws BadMu / ArityMismatch when mu is not symmetric L x L or, for L > 0,
  // is singular.
  void validate() const;

  NonlocalStructure transformed(const Eigen::MatrixXd& a, const Eigen::MatrixXd& a_inv) const;
};

struct HamiltonianData {
  Expression h;
  std::vector<Expression> f_list;
};

// Hydrodynamic-type system u_t = V(u) u_x with optional Hamiltonian data.
struct HydroSystem {
  AffinorField v;
  std::optional<HamiltonianData> hamiltonian;

  int dimension() const { return v.dimension(); }
};

struct MetricPair {
  MetricField g1, g2;
};

struct StructurePair {
  NonlocalStructure s1, s2;
};

// Expression-level linear combination sum_i coeff_i * term_i.
Expression linear_combination(const std::vector<std::pair<double, Expression>>& terms);

// lambda1*g1 + lambda2*g2 as an expression matrix field.
MetricField combine_metrics(const MetricField& g1, const MetricField& g2, double lambda1,
                            double lambda2);

// Scalar pushforward h~(v) = h(A v).
Expression transformed_scalar(const Expression& h, const Eigen::MatrixXd& a);

} // namespace hydrocheck

#endif
