#include "csflood/linalg.hpp"

#include <cmath>

namespace csflood {

double spectral_norm_sq(const Eigen::MatrixXd& a, int max_iters, double tol) {
  if (a.size() == 0) {
    return 0.0;
  }
  Eigen::VectorXd v = Eigen::VectorXd::Ones(a.cols()).normalized();
  double estimate = 0.0;
  for (int it = 0; it < max_iters; ++it) {
    Eigen::VectorXd w = a.transpose() * (a * v);
    const double norm = w.norm();
    if (norm == 0.0) {
      return 0.0;
    }
    const double next = v.dot(w);
    v = w / norm;
    if (std::abs(next - estimate) <= tol * std::abs(next)) {
      estimate = next;
      break;
    }
    estimate = next;
  }
  // Rayleigh quotient never exceeds the true value; one last product tightens it.
  return std::max(estimate, (a * v).squaredNorm());
}

}  // namespace csflood
