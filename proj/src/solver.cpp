#include "csflood/solver.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "csflood/errors.hpp"
#include "csflood/linalg.hpp"

namespace csflood {

namespace {

void check_finite(const Eigen::VectorXd& v, const char* what) {
  if (!v.allFinite()) {
    throw NumericError(std::string(what) + " contains non-finite values");
  }
}

void check_shapes(const Eigen::VectorXd& y, const Eigen::MatrixXd& a) {
  if (y.size() != a.rows()) {
    throw ShapeError("y has length " + std::to_string(y.size()) + " but A has " +
                     std::to_string(a.rows()) + " rows");
  }
}

}  // namespace

void IstaConfig::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ParameterError("lambda must be a finite nonnegative number");
  }
  if (max_iters < 1) {
    throw ParameterError("max_iters must be at least 1");
  }
  if (!(tol >= 0.0)) {
    throw ParameterError("tol must be nonnegative");
  }
  if (step && !(*step > 0.0 && std::isfinite(*step))) {
    throw ParameterError("step must be positive");
  }
}

double soft_threshold(double v, double theta) {
  const double mag = std::abs(v) - theta;
  if (mag <= 0.0) {
    return 0.0;
  }
  return v > 0.0 ? mag : -mag;
}

double objective(const Eigen::VectorXd& y, const Eigen::MatrixXd& a, const Eigen::VectorXd& x,
                 double lambda) {
  check_shapes(y, a);
  if (x.size() != a.cols()) {
    throw ShapeError("x has length " + std::to_string(x.size()) + " but A has " +
                     std::to_string(a.cols()) + " columns");
  }
  return lambda * x.lpNorm<1>() + 0.5 * (y - a * x).squaredNorm();
}

Eigen::VectorXd smooth_gradient(const Eigen::VectorXd& y, const Eigen::MatrixXd& a,
                                const Eigen::VectorXd& x) {
  check_shapes(y, a);
  return a.transpose() * (a * x - y);
}

Eigen::VectorXd ista_step(const Eigen::VectorXd& y, const Eigen::MatrixXd& a,
                          const Eigen::VectorXd& x, double step, double lambda) {
  Eigen::VectorXd v = x + step * (a.transpose() * (y - a * x));
  const double theta = step * lambda;
  return v.unaryExpr([theta](double e) { return soft_threshold(e, theta); });
}

namespace {

// Shared iteration. `gradient(x, active, g)` writes Aᵀ(y − Ax) into g given
// the indices of the nonzeros of x.
template <typename Gradient>
Eigen::VectorXd run_ista(const Eigen::VectorXd& y, const Eigen::MatrixXd& a, double lipschitz,
                         const IstaConfig& config, IstaTrace* trace, Gradient&& gradient) {
  config.validate();
  check_shapes(y, a);
  check_finite(y, "y");

  double step = 0.0;
  if (config.step) {
    step = *config.step;
  } else {
    if (!(lipschitz > 0.0)) {
      // A = 0: every x has the same residual, so x = 0 is optimal.
      return Eigen::VectorXd::Zero(a.cols());
    }
    step = 1.0 / lipschitz;
  }
  const double theta = step * config.lambda;
  const Eigen::Index q = a.cols();

  Eigen::VectorXd x = Eigen::VectorXd::Zero(q);
  Eigen::VectorXd g(q);
  std::vector<Eigen::Index> active;
  std::vector<Eigen::Index> next_active;
  if (trace != nullptr) {
    trace->objective.assign(1, 0.5 * y.squaredNorm());
    trace->converged = false;
    trace->iterations = 0;
  }

  for (int it = 0; it < config.max_iters; ++it) {
    gradient(x, active, g);
    double change_sq = 0.0;
    double norm_sq = 0.0;
    next_active.clear();
    for (Eigen::Index i = 0; i < q; ++i) {
      const double old = x[i];
      const double updated = soft_threshold(old + step * g[i], theta);
      change_sq += (updated - old) * (updated - old);
      norm_sq += old * old;
      x[i] = updated;
      if (updated != 0.0) {
        next_active.push_back(i);
      }
    }
    active.swap(next_active);

    if (trace != nullptr) {
      trace->objective.push_back(config.lambda * x.lpNorm<1>() + 0.5 * (y - a * x).squaredNorm());
      trace->iterations = it + 1;
    }
    if (!std::isfinite(change_sq)) {
      throw NumericError("ISTA diverged; step size too large for this matrix");
    }
    if (std::sqrt(change_sq) <= config.tol * std::max(1.0, std::sqrt(norm_sq))) {
      if (trace != nullptr) {
        trace->converged = true;
      }
      break;
    }
  }
  return x;
}

}  // namespace

IstaSolver::IstaSolver(Eigen::MatrixXd a, std::optional<double> lipschitz)
    : a_(std::move(a)), gram_(a_.transpose() * a_) {
  if (!a_.allFinite()) {
    throw NumericError("A contains non-finite values");
  }
  lipschitz_ = lipschitz ? *lipschitz : spectral_norm_sq(a_);
}

Eigen::VectorXd IstaSolver::solve(const Eigen::VectorXd& y, const IstaConfig& config,
                                  IstaTrace* trace) const {
  check_shapes(y, a_);
  const Eigen::VectorXd correlation = a_.transpose() * y;
  const Eigen::Index m = a_.rows();
  Eigen::VectorXd residual(m);
  // g = Aᵀy − (AᵀA)x touches only the active columns of the Gram matrix; once
  // x has more than M nonzeros the direct Aᵀ(y − Ax) product is cheaper.
  auto gradient = [&](const Eigen::VectorXd& x, const std::vector<Eigen::Index>& active,
                      Eigen::VectorXd& g) {
    if (static_cast<Eigen::Index>(active.size()) <= m) {
      g = correlation;
      for (Eigen::Index i : active) {
        g.noalias() -= x[i] * gram_.col(i);
      }
    } else {
      residual = y;
      for (Eigen::Index i : active) {
        residual.noalias() -= x[i] * a_.col(i);
      }
      g.noalias() = a_.transpose() * residual;
    }
  };
  return run_ista(y, a_, lipschitz_, config, trace, gradient);
}

Eigen::VectorXd ista_solve(const Eigen::VectorXd& y, const Eigen::MatrixXd& a,
                           const IstaConfig& config, std::optional<double> lipschitz,
                           IstaTrace* trace) {
  check_shapes(y, a);
  if (!a.allFinite()) {
    throw NumericError("A contains non-finite values");
  }
  const double l = config.step ? 0.0 : (lipschitz ? *lipschitz : spectral_norm_sq(a));
  auto gradient = [&](const Eigen::VectorXd& x, const std::vector<Eigen::Index>&,
                      Eigen::VectorXd& g) { g.noalias() = a.transpose() * (y - a * x); };
  return run_ista(y, a, l, config, trace, gradient);
}

Eigen::VectorXd ista_solve(const Eigen::VectorXd& y, const SignatureMatrix& a,
                           const IstaConfig& config, IstaTrace* trace) {
  return ista_solve(y, a.entries(), config, a.lipschitz(), trace);
}

std::vector<DecodedMeasurement> quantize_support(const Eigen::VectorXd& x,
                                                 const SensingParams& params, double tau) {
  if (x.size() != params.columns()) {
    throw ShapeError("x has length " + std::to_string(x.size()) + ", expected " +
                     std::to_string(params.columns()));
  }
  std::vector<DecodedMeasurement> out;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (std::abs(x[i]) > tau) {
      const OriginHop oh = column_origin_hop(params, static_cast<int>(i));
      out.push_back({oh.origin, oh.hop, x[i] > 0.0 ? 1 : -1});
    }
  }
  return out;
}

namespace {

double binomial(int n, int k) {
  if (k < 0 || k > n) {
    return 0.0;
  }
  double c = 1.0;
  for (int i = 1; i <= k; ++i) {
    c = c * (n - k + i) / i;
  }
  return c;
}

struct P0Search {
  P0Search(const Eigen::MatrixXd& matrix, double tol_sq) : a(matrix), fit_tol_sq(tol_sq) {}

  const Eigen::MatrixXd& a;
  double fit_tol_sq;
  int size = 0;
  std::vector<int> support;
  std::vector<int> signs;
  double best_residual = std::numeric_limits<double>::infinity();
  std::vector<int> best_support;
  std::vector<int> best_signs;

  // Supports are visited in lexicographic order, so a strict comparison keeps
  // the lexicographically smallest support among equal residuals.
  void visit(const Eigen::VectorXd& residual, int first) {
    if (static_cast<int>(support.size()) == size) {
      const double r = residual.squaredNorm();
      if (r <= fit_tol_sq && r < best_residual) {
        best_residual = r;
        best_support = support;
        best_signs = signs;
      }
      return;
    }
    const int remaining = size - static_cast<int>(support.size());
    for (int col = first; col <= a.cols() - remaining; ++col) {
      support.push_back(col);
      for (int s : {1, -1}) {
        signs.push_back(s);
        visit(residual - s * a.col(col), col + 1);
        signs.pop_back();
      }
      support.pop_back();
    }
  }
};

}  // namespace

std::optional<Eigen::VectorXd> brute_force_p0(const Eigen::VectorXd& y, const Eigen::MatrixXd& a,
                                              int k_max, double fit_tol) {
  check_shapes(y, a);
  if (k_max < 0) {
    throw ParameterError("k_max must be nonnegative");
  }
  const int q = static_cast<int>(a.cols());
  k_max = std::min(k_max, q);
  if (binomial(q, k_max) > 1e7) {
    throw CapacityError("C(" + std::to_string(q) + ", " + std::to_string(k_max) +
                        ") exceeds the 10^7 enumeration guard");
  }
  P0Search search(a, fit_tol * fit_tol);
  for (int k = 0; k <= k_max; ++k) {
    search.size = k;
    search.visit(y, 0);
    if (!search.best_support.empty() || search.best_residual <= search.fit_tol_sq) {
      Eigen::VectorXd x = Eigen::VectorXd::Zero(q);
      for (std::size_t i = 0; i < search.best_support.size(); ++i) {
        x[search.best_support[i]] = search.best_signs[i];
      }
      return x;
    }
  }
  return std::nullopt;
}

}  // namespace csflood
