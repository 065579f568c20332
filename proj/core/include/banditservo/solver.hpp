#pragma once

#include <Eigen/Dense>

namespace banditservo
{
// min ||J qdot - target||^2_W  s.t.  ||qdot|| <= max_norm
// where each entry of weights applies to one point's 3 coordinates.
struct WeightedLeastSquaresProblem
{
  Eigen::MatrixXd J;
  Eigen::VectorXd target;
  Eigen::VectorXd weights;
  double max_norm = 1.0;
};

// Spectral form of J^T diag(W3) J, reusable across solves against the same
// (J, weights) pair. solve_ball_constrained_wls is exactly prefactor + solve,
// so cached and one-shot calls return identical results.
class BallConstrainedWlsFactorization
{
public:
  BallConstrainedWlsFactorization(const Eigen::MatrixXd& J, const Eigen::VectorXd& weights);

  Eigen::VectorXd solve(const Eigen::VectorXd& target, double max_norm) const;

  const Eigen::MatrixXd& jacobian() const { return J_; }
  const Eigen::VectorXd& rowWeights() const { return w3_; }

private:
  Eigen::MatrixXd J_;
  Eigen::VectorXd w3_;
  Eigen::MatrixXd eigvecs_;
  Eigen::VectorXd eigvals_;
  double lambda_min_;
};

// Interior solutions use a baseline Tikhonov term lambda_min (handles rank
// deficiency); boundary solutions bisect the secular equation
// ||qdot(lambda)|| = max_norm. Throws std::invalid_argument on non-finite or
// dimensionally inconsistent inputs.
Eigen::VectorXd solve_ball_constrained_wls(const WeightedLeastSquaresProblem& p);

// max of stationarity residual (inf norm, with the multiplier recovered by
// least squares), primal feasibility violation, and complementary slackness.
double kkt_residual(const WeightedLeastSquaresProblem& p, const Eigen::VectorXd& qdot);

// ||J qdot - target||^2_W
double wls_objective(const WeightedLeastSquaresProblem& p, const Eigen::VectorXd& qdot);

// Number of ball-constrained solves performed by the calling thread.
// Diagnostics hook used to pin the per-step solve-count contract in tests.
long& solve_call_count();
}
