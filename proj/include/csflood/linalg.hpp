#pragma once

#include <Eigen/Dense>

namespace csflood {

/// Largest eigenvalue of AᵀA (σ_max(A)²) by power iteration from the all-ones
/// vector. Stops after `max_iters` or when the estimate moves by less than
/// `tol` relative.
double spectral_norm_sq(const Eigen::MatrixXd& a, int max_iters = 50, double tol = 1e-8);

}  // namespace csflood
