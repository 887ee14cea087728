#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "csflood/sensing.hpp"

namespace csflood {

struct IstaConfig {
  double lambda = 0.5;
  int max_iters = 2000;
  /// Stop once ‖x_{t+1} − x_t‖₂ ≤ tol · max(1, ‖x_t‖₂).
  double tol = 1e-5;
  /// Gradient step. Empty means 1/σ_max(A)².
  std::optional<double> step;

  void validate() const;
};

/// Decoded (origin, hop, ±1) triple.
struct DecodedMeasurement {
  NodeId origin;
  int hop = 0;
  int value = 0;

  OriginHop key() const noexcept { return {origin, hop}; }
  friend constexpr bool operator==(const DecodedMeasurement&, const DecodedMeasurement&) = default;
};

/// Per-iteration record filled by ista_solve when requested.
struct IstaTrace {
  std::vector<double> objective;
  int iterations = 0;
  bool converged = false;
};

/// sign(v) · max(|v| − theta, 0).
double soft_threshold(double v, double theta);

/// λ‖x‖₁ + ½‖y − Ax‖₂². Throws ShapeError on dimension mismatch.
double objective(const Eigen::VectorXd& y, const Eigen::MatrixXd& a, const Eigen::VectorXd& x,
                 double lambda);

/// Gradient of the smooth part ½‖y − Ax‖₂², i.e. Aᵀ(Ax − y).
Eigen::VectorXd smooth_gradient(const Eigen::VectorXd& y, const Eigen::MatrixXd& a,
                                const Eigen::VectorXd& x);

/// One proximal-gradient step: soft_threshold(x + step·Aᵀ(y − Ax), step·λ).
Eigen::VectorXd ista_step(const Eigen::VectorXd& y, const Eigen::MatrixXd& a,
                          const Eigen::VectorXd& x, double step, double lambda);

/// ISTA bound to one matrix. Precomputes AᵀA and σ_max(A)² so repeated solves
/// against the same matrix cost O(Q·nnz(x)) per iteration instead of O(M·Q).
/// Iterates are the same as the plain formulation up to rounding.
class IstaSolver {
 public:
  explicit IstaSolver(Eigen::MatrixXd a, std::optional<double> lipschitz = std::nullopt);

  const Eigen::MatrixXd& matrix() const noexcept { return a_; }
  double lipschitz() const noexcept { return lipschitz_; }

  /// Throws ShapeError, NumericError or ParameterError like ista_solve.
  Eigen::VectorXd solve(const Eigen::VectorXd& y, const IstaConfig& config,
                        IstaTrace* trace = nullptr) const;

 private:
  Eigen::MatrixXd a_;
  Eigen::MatrixXd gram_;
  double lipschitz_ = 0.0;
};

/// ISTA from x = 0. `lipschitz` (σ_max(A)²) is used for the auto step when
/// given, otherwise computed by power iteration.
Eigen::VectorXd ista_solve(const Eigen::VectorXd& y, const Eigen::MatrixXd& a,
                           const IstaConfig& config, std::optional<double> lipschitz = {},
                           IstaTrace* trace = nullptr);

/// Convenience overload using the cached σ_max² of a signature matrix.
Eigen::VectorXd ista_solve(const Eigen::VectorXd& y, const SignatureMatrix& a,
                           const IstaConfig& config, IstaTrace* trace = nullptr);

/// Hard decision with dead zone: components with |x_i| > tau become
/// (origin, hop, sign(x_i)); the rest are dropped. Output is in column order.
std::vector<DecodedMeasurement> quantize_support(const Eigen::VectorXd& x,
                                                 const SensingParams& params, double tau);

/// Exhaustive ℓ0 search over supports of size 0..k_max with ±1 coefficients.
/// Returns the sparsest x with ‖y − Ax‖₂ ≤ fit_tol (ties: smaller residual,
/// then lexicographically smaller support), or nullopt if none fits.
/// Throws CapacityError when C(Q, k_max) > 10⁷.
std::optional<Eigen::VectorXd> brute_force_p0(const Eigen::VectorXd& y, const Eigen::MatrixXd& a,
                                              int k_max, double fit_tol);

}  // namespace csflood
