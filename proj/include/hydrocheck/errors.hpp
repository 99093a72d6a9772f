#ifndef HYDROCHECK_ERRORS_HPP
#define HYDROCHECK_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hydrocheck {

// Expression text could not be parsed. `position` is a 0-based byte offset
// into the input; `expected` describes the tokens that would have been valid.
class SyntaxError : public std::runtime_error {
public:
  SyntaxError(std::size_t position, std::string expected)
      : std::runtime_error("syntax error at position " + std::to_string(position) +
                           ": expected " + expected),
        position(position), expected(std::move(expected)) {}
  std::size_t position;
  std::string expected;
};

// Identifier is neither a declared coordinate nor a known function.
class UnknownSymbol : public std::runtime_error {
public:
  UnknownSymbol(std::size_t position, std::string symbol)
      : std::runtime_error("unknown symbol '" + symbol + "' at position " +
                           std::to_string(position)),
        position(position), symbol(std::move(symbol)) {}
  std::size_t position;
  std::string symbol;
};

// Evaluation left the real domain (ln/sqrt of a non-positive value, division
// by zero, fractional power of a negative base). `node_text` is the offending
// subexpression in canonical form.
class DomainError : public std::runtime_error {
public:
  DomainError(std::string what, std::string node_text)
      : std::runtime_error(what + " in '" + node_text + "'"),
        node_text(std::move(node_text)) {}
  std::string node_text;
};

class SingularMetric : public std::runtime_error {
public:
  SingularMetric(double det, std::string where)
      : std::runtime_error("metric is singular (|det| = " + std::to_string(det) +
                           ") at " + where),
        det(det) {}
  double det;
};

class BadMu : public std::runtime_error {
public:
  explicit BadMu(const std::string& what) : std::runtime_error("bad mu matrix: " + what) {}
};

class ArityMismatch : public std::runtime_error {
public:
  explicit ArityMismatch(const std::string& what) : std::runtime_error(what) {}
};

class NotDiagonal : public std::runtime_error {
public:
  explicit NotDiagonal(const std::string& what) : std::runtime_error(what) {}
};

// Rejection sampling could not reach the requested acceptance rate.
class Exhausted : public std::runtime_error {
public:
  Exhausted(long accepted, long tried)
      : std::runtime_error("sampling exhausted: accepted " + std::to_string(accepted) +
                           " of " + std::to_string(tried) + " candidates"),
        accepted(accepted), tried(tried) {}
  long accepted;
  long tried;
};

// Matrix is defective (or too close to defective) at the requested tolerance.
class NonSemisimple : public std::runtime_error {
public:
  explicit NonSemisimple(const std::string& what) : std::runtime_error(what) {}
};

class EigenvalueCollision : public std::runtime_error {
public:
  explicit EigenvalueCollision(const std::string& what) : std::runtime_error(what) {}
};

class ComplexCharacteristics : public std::runtime_error {
public:
  explicit ComplexCharacteristics(const std::string& what) : std::runtime_error(what) {}
};

class IntegrationBlowup : public std::runtime_error {
public:
  explicit IntegrationBlowup(const std::string& what) : std::runtime_error(what) {}
};

class PreconditionFailed : public std::runtime_error {
public:
  explicit PreconditionFailed(const std::string& what) : std::runtime_error(what) {}
};

class GenerationFailed : public std::runtime_error {
public:
  explicit GenerationFailed(const std::string& what) : std::runtime_error(what) {}
};

class UnknownExample : public std::runtime_error {
public:
  explicit UnknownExample(const std::string& id)
      : std::runtime_error("unknown corpus example '" + id + "'") {}
};

class SchemaError : public std::runtime_error {
public:
  SchemaError(std::string path, const std::string& what)
      : std::runtime_error("schema error at " + path + ": " + what), path(std::move(path)) {}
  std::string path;
};

} // namespace hydrocheck

#endif
