#pragma once

#include <Eigen/Dense>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace lpr {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Index conventions used throughout: a matrix stores the upper (output)
// index as the row and the lower (input) index as the column, so chains of
// contractions read as ordinary matrix products.  Rank-3 coefficient arrays
// T[i](j,k) keep the leading upper index as the vector slot.
using Tensor3 = std::vector<MatrixXd>;

inline Tensor3 make_tensor3(int n, int rows, int cols) {
  return Tensor3(static_cast<std::size_t>(n), MatrixXd::Zero(rows, cols));
}

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad configuration or schema violation (CLI exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Group coordinates outside the valid chart range.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Singular Faddeev-Popov matrix or degenerate orbit metric.
class DegeneracyError : public Error {
 public:
  using Error::Error;
};

// Newton iteration failed to converge.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// Any other numerical failure (singular mass block, residual blow-up).
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Deterministic RNG used by verification batches and tests.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo, double hi) {
    std::uniform_real_distribution<double> dist(lo, hi);
    return dist(engine_);
  }

  VectorXd uniform_vector(int n, double lo, double hi) {
    VectorXd out(n);
    for (int i = 0; i < n; ++i) out[i] = uniform(lo, hi);
    return out;
  }

  std::uint64_t integer() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

// Central difference of a vector-valued map, one coordinate at a time.
inline MatrixXd central_jacobian(const std::function<VectorXd(const VectorXd&)>& f,
                                 const VectorXd& x, double h) {
  const VectorXd f0 = f(x);
  MatrixXd jac(f0.size(), x.size());
  VectorXd xp = x, xm = x;
  for (int j = 0; j < x.size(); ++j) {
    xp[j] += h;
    xm[j] -= h;
    jac.col(j) = (f(xp) - f(xm)) / (2.0 * h);
    xp[j] = x[j];
    xm[j] = x[j];
  }
  return jac;
}

inline double central_derivative(const std::function<double(double)>& f, double x,
                                 double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline std::string format_point(const VectorXd& v) {
  std::string s = "(";
  for (int i = 0; i < v.size(); ++i) {
    s += std::to_string(v[i]);
    if (i + 1 < v.size()) s += ", ";
  }
  return s + ")";
}

// Inverse with an explicit conditioning guard; the context string names the
// offending object in the thrown diagnostic.
inline MatrixXd guarded_inverse(const MatrixXd& m, const std::string& context,
                                double rel_tol = 1e-12) {
  Eigen::FullPivLU<MatrixXd> lu(m);
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  lu.setThreshold(rel_tol * scale);
  if (!lu.isInvertible()) {
    throw DegeneracyError(context + ": matrix numerically singular (|det| below " +
                          std::to_string(rel_tol) + " * scale)");
  }
  return lu.inverse();
}

}  // namespace lpr
