#include "hydrocheck/fields.hpp"

#include <Eigen/Dense>

namespace hydrocheck {

ExpressionMatrix::ExpressionMatrix(int dimension, std::vector<Expression> components)
    : dim_(dimension), components_(std::move(components)) {
  if (static_cast<int>(components_.size()) != dimension * dimension)
    throw ArityMismatch("expression matrix needs " + std::to_string(dimension * dimension) +
                        " components, got " + std::to_string(components_.size()));
}

const NamesPtr& ExpressionMatrix::names() const { return components_.front().names(); }

ExpressionMatrix ExpressionMatrix::identity(int dimension, NamesPtr names) {
  std::vector<Expression> c;
  c.reserve(dimension * dimension);
  for (int i = 0; i < dimension; ++i)
    for (int j = 0; j < dimension; ++j)
      c.push_back(Expression::constant(i == j ? 1.0 : 0.0, names));
  return ExpressionMatrix(dimension, std::move(c));
}

ExpressionMatrix ExpressionMatrix::zero(int dimension, NamesPtr names) {
  std::vector<Expression> c;
  c.reserve(dimension * dimension);
  for (int i = 0; i < dimension * dimension; ++i) c.push_back(Expression::constant(0.0, names));
  return ExpressionMatrix(dimension, std::move(c));
}

ExpressionMatrix ExpressionMatrix::diagonal(std::vector<Expression> entries) {
  int n = static_cast<int>(entries.size());
  NamesPtr names = entries.front().names();
  std::vector<Expression> c;
  c.reserve(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      c.push_back(i == j ? entries[i] : Expression::constant(0.0, names));
  return ExpressionMatrix(n, std::move(c));
}

ExpressionMatrix ExpressionMatrix::from_strings(const std::vector<std::vector<std::string>>& rows,
                                                NamesPtr names) {
  int n = static_cast<int>(rows.size());
  std::vector<Expression> c;
  c.reserve(n * n);
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != n)
      throw ArityMismatch("expression matrix rows must be square");
    for (const auto& s : row) c.push_back(parse_expression(s, names));
  }
  return ExpressionMatrix(n, std::move(c));
}

Eigen::MatrixXd ExpressionMatrix::value(const Eigen::VectorXd& point) const {
  Eigen::MatrixXd out(dim_, dim_);
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j) out(i, j) = at(i, j).value(point);
  return out;
}

namespace {

bool is_zero_tree(const ExprPtr& n) {
  if (!n) return true;
  if (n->kind == ExprNode::Kind::Constant) return n->constant == 0.0;
  if (n->kind == ExprNode::Kind::Negate) return is_zero_tree(n->left);
  return false;
}

// sum_k coeff_k * entries_k as one expression
Expression weighted_sum(const std::vector<std::pair<double, Expression>>& terms) {
  NamesPtr names;
  ExprPtr sum;
  for (const auto& [c, e] : terms) {
    if (!names) names = e.names();
    if (c == 0.0 || is_zero_tree(e.root())) continue;
    ExprPtr term;
    if (c == 1.0) term = e.root();
    else if (c == -1.0) term = make_negate(e.root());
    else if (c < 0.0) term = make_negate(make_binary(BinaryOp::Mul, make_constant(-c), e.root()));
    else term = make_binary(BinaryOp::Mul, make_constant(c), e.root());
    sum = sum ? make_binary(BinaryOp::Add, sum, term) : term;
  }
  if (!sum) sum = make_constant(0.0);
  return Expression(sum, names);
}

// out = L * m(A v) * R with constant matrices L, R applied entrywise.
ExpressionMatrix sandwich(const ExpressionMatrix& m, const Eigen::MatrixXd& left,
                          const Eigen::MatrixXd& a, const Eigen::MatrixXd& right) {
  int n = m.dimension();
  std::vector<Expression> sub;
  sub.reserve(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) sub.push_back(m.at(i, j).substitute_linear(a));
  std::vector<Expression> out;
  out.reserve(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      std::vector<std::pair<double, Expression>> terms;
      for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q) {
          double c = left(i, p) * right(q, j);
          if (c != 0.0) terms.push_back({c, sub[p * n + q]});
        }
      if (terms.empty()) terms.push_back({1.0, Expression::constant(0.0, m.names())});
      out.push_back(weighted_sum(terms));
    }
  return ExpressionMatrix(n, std::move(out));
}

} // namespace

bool ExpressionMatrix::is_diagonal_ast() const {
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j)
      if (i != j && !is_zero_tree(at(i, j).root())) return false;
  return true;
}

MetricField MetricField::identity(int dimension, NamesPtr names) {
  if (!names) names = default_names(dimension);
  return MetricField{ExpressionMatrix::identity(dimension, std::move(names))};
}

MetricField MetricField::from_strings(const std::vector<std::vector<std::string>>& rows,
                                      NamesPtr names) {
  return MetricField{ExpressionMatrix::from_strings(rows, std::move(names))};
}

MetricField MetricField::transformed(const Eigen::MatrixXd& a) const {
  return transformed(a, a.inverse());
}

MetricField MetricField::transformed(const Eigen::MatrixXd& a,
                                     const Eigen::MatrixXd& a_inv) const {
  // contravariant 2-tensor: g~ = A^{-1} g(Av) A^{-T}
  return MetricField{sandwich(m, a_inv, a, a_inv.transpose())};
}

AffinorField AffinorField::identity(int dimension, NamesPtr names) {
  if (!names) names = default_names(dimension);
  return AffinorField{ExpressionMatrix::identity(dimension, std::move(names))};
}

AffinorField AffinorField::from_strings(const std::vector<std::vector<std::string>>& rows,
                                        NamesPtr names) {
  return AffinorField{ExpressionMatrix::from_strings(rows, std::move(names))};
}

AffinorField AffinorField::transformed(const Eigen::MatrixXd& a) const {
  return transformed(a, a.inverse());
}

AffinorField AffinorField::transformed(const Eigen::MatrixXd& a,
                                       const Eigen::MatrixXd& a_inv) const {
  // mixed (1,1) tensor: w~ = A^{-1} w(Av) A
  return AffinorField{sandwich(m, a_inv, a, a)};
}

void NonlocalStructure::validate() const {
  int l = tail_count();
  if (mu.rows() != l || mu.cols() != l)
    throw BadMu("mu must be " + std::to_string(l) + "x" + std::to_string(l));
  for (const auto& w : affinors)
    if (w.dimension() != dimension())
      throw ArityMismatch("affinor dimension does not match the metric");
  if (l == 0) return;
  if (!mu.isApprox(mu.transpose(), 1e-12)) throw BadMu("mu is not symmetric");
  if (std::abs(Eigen::FullPivLU<Eigen::MatrixXd>(mu).determinant()) < 1e-12)
    throw BadMu("mu is singular");
}

NonlocalStructure NonlocalStructure::transformed(const Eigen::MatrixXd& a,
                                                 const Eigen::MatrixXd& a_inv) const {
  NonlocalStructure out;
  out.g = g.transformed(a, a_inv);
  out.affinors.reserve(affinors.size());
  for (const auto& w : affinors) out.affinors.push_back(w.transformed(a, a_inv));
  out.mu = mu;
  return out;
}

Expression linear_combination(const std::vector<std::pair<double, Expression>>& terms) {
  return weighted_sum(terms);
}

MetricField combine_metrics(const MetricField& g1, const MetricField& g2, double lambda1,
                            double lambda2) {
  int n = g1.dimension();
  std::vector<Expression> c;
  c.reserve(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      c.push_back(weighted_sum({{lambda1, g1.m.at(i, j)}, {lambda2, g2.m.at(i, j)}}));
  return MetricField{ExpressionMatrix(n, std::move(c))};
}

Expression transformed_scalar(const Expression& h, const Eigen::MatrixXd& a) {
  return h.substitute_linear(a);
}

} // namespace hydrocheck
