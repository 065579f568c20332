#include "banditservo/solver.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace banditservo
{
namespace
{
Eigen::VectorXd expandWeights(const Eigen::VectorXd& weights)
{
  Eigen::VectorXd w3(3 * weights.size());
  for (Eigen::Index i = 0; i < weights.size(); i++)
  {
    w3.segment<3>(3 * i).setConstant(weights(i));
  }
  return w3;
}

void validateProblemShape(const Eigen::MatrixXd& J, const Eigen::VectorXd& weights)
{
  if (!J.allFinite() || !weights.allFinite())
  {
    throw std::invalid_argument("ball-constrained WLS: non-finite J or weights");
  }
  if (weights.size() == 0 || J.rows() != 3 * weights.size())
  {
    throw std::invalid_argument("ball-constrained WLS: rows of J must equal 3 * len(weights)");
  }
  if ((weights.array() < 0.0).any())
  {
    throw std::invalid_argument("ball-constrained WLS: negative weight");
  }
}
}

long& solve_call_count()
{
  thread_local long count = 0;
  return count;
}

BallConstrainedWlsFactorization::BallConstrainedWlsFactorization(const Eigen::MatrixXd& J,
                                                                 const Eigen::VectorXd& weights)
  : J_(J), w3_(expandWeights(weights))
{
  validateProblemShape(J_, weights);

  const Eigen::MatrixXd normal = J_.transpose() * w3_.asDiagonal() * J_;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigs(normal);
  if (eigs.info() != Eigen::Success)
  {
    throw std::runtime_error("ball-constrained WLS: eigendecomposition failed");
  }
  eigvecs_ = eigs.eigenvectors();
  eigvals_ = eigs.eigenvalues().cwiseMax(0.0);
  lambda_min_ = 1e-10 * normal.trace() / static_cast<double>(J_.cols());
}

Eigen::VectorXd BallConstrainedWlsFactorization::solve(const Eigen::VectorXd& target,
                                                       double max_norm) const
{
  if (!target.allFinite() || target.size() != J_.rows())
  {
    throw std::invalid_argument("ball-constrained WLS: bad target");
  }
  if (!(max_norm > 0.0) || !std::isfinite(max_norm))
  {
    throw std::invalid_argument("ball-constrained WLS: max_norm must be positive and finite");
  }
  solve_call_count()++;

  const Eigen::VectorXd b = J_.transpose() * w3_.cwiseProduct(target).eval();
  const double b_norm = b.norm();
  if (b_norm == 0.0)
  {
    return Eigen::VectorXd::Zero(J_.cols());
  }

  // Coordinates of b in the eigenbasis; ||qdot(lambda)||^2 = sum (c_i / (eig_i + lambda))^2
  const Eigen::VectorXd c = eigvecs_.transpose() * b;
  const auto solution_at = [&](double lambda) -> Eigen::VectorXd {
    return eigvecs_ * (c.array() / (eigvals_.array() + lambda)).matrix();
  };
  const auto norm_at = [&](double lambda) -> double {
    return std::sqrt((c.array() / (eigvals_.array() + lambda)).square().sum());
  };

  // lambda_min_ is zero only for a zero normal matrix (caught above via
  // b = 0); the max() guards underflow for absurdly small weight scales.
  const double lambda_floor = std::max(lambda_min_, std::numeric_limits<double>::min());
  if (norm_at(lambda_floor) <= max_norm)
  {
    return solution_at(lambda_floor);
  }

  // Boundary case: ||qdot(lambda)|| <= ||b|| / lambda, so b_norm / max_norm
  // is always on the feasible side of the bracket.
  double lo = lambda_floor;
  double hi = std::max(b_norm / max_norm, 2.0 * lambda_floor);
  double lambda = hi;
  for (int iter = 0; iter < 200; iter++)
  {
    const double mid = 0.5 * (lo + hi);
    const double norm = norm_at(mid);
    lambda = mid;
    if (std::abs(norm - max_norm) < 1e-10 * max_norm)
    {
      break;
    }
    if (norm > max_norm)
    {
      lo = mid;
    }
    else
    {
      hi = mid;
    }
  }
  return solution_at(lambda);
}

Eigen::VectorXd solve_ball_constrained_wls(const WeightedLeastSquaresProblem& p)
{
  const BallConstrainedWlsFactorization factorization(p.J, p.weights);
  return factorization.solve(p.target, p.max_norm);
}

double kkt_residual(const WeightedLeastSquaresProblem& p, const Eigen::VectorXd& qdot)
{
  const Eigen::VectorXd w3 = expandWeights(p.weights);
  const Eigen::VectorXd gradient = p.J.transpose() * w3.cwiseProduct(p.J * qdot - p.target).eval();

  const double qdot_sq = qdot.squaredNorm();
  const double lambda = qdot_sq > 0.0 ? -qdot.dot(gradient) / qdot_sq : 0.0;

  const double stationarity = (gradient + lambda * qdot).cwiseAbs().maxCoeff();
  const double norm_gap = qdot.norm() - p.max_norm;
  const double feasibility = std::max(0.0, norm_gap);
  const double complementarity = std::abs(lambda * norm_gap);
  return std::max({stationarity, feasibility, complementarity});
}

double wls_objective(const WeightedLeastSquaresProblem& p, const Eigen::VectorXd& qdot)
{
  const Eigen::VectorXd residual = p.J * qdot - p.target;
  return expandWeights(p.weights).cwiseProduct(residual).dot(residual);
}
}
