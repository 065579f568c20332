#include "banditservo/selftest.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <random>
#include <set>

#include "banditservo/bandits.hpp"
#include "banditservo/models.hpp"
#include "banditservo/rng.hpp"
#include "banditservo/solver.hpp"

namespace banditservo
{
namespace
{
constexpr uint64_t kSelftestSeed = 0x5eb7e57ULL;

std::string formatValue(double value)
{
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.3g", value);
  return buffer;
}

struct CheckResult
{
  bool ok = false;
  std::string detail;
};

Eigen::MatrixXd randomMatrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng)
{
  std::uniform_real_distribution<double> entry(-1.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index c = 0; c < cols; c++)
  {
    for (Eigen::Index r = 0; r < rows; r++)
    {
      m(r, c) = entry(rng);
    }
  }
  return m;
}

CheckResult checkSolverKkt(bool inject)
{
  auto rng = make_stream(kSelftestSeed, "solver-kkt");
  std::uniform_int_distribution<int> points_dist(1, 20);
  std::uniform_int_distribution<int> cols_dist(1, 12);
  std::uniform_real_distribution<double> weight(0.0, 2.0);
  std::uniform_real_distribution<double> norm_dist(0.01, 1.0);

  double worst = 0.0;
  for (int trial = 0; trial < 200; trial++)
  {
    WeightedLeastSquaresProblem p;
    const int points = points_dist(rng);
    p.J = randomMatrix(3 * points, cols_dist(rng), rng);
    p.target = randomMatrix(3 * points, 1, rng);
    p.weights.resize(points);
    for (int i = 0; i < points; i++)
    {
      p.weights(i) = weight(rng);
    }
    p.max_norm = norm_dist(rng);

    Eigen::VectorXd qdot = solve_ball_constrained_wls(p);
    if (inject)
    {
      qdot.array() += 1e-3;
    }
    worst = std::max(worst, kkt_residual(p, qdot));
  }
  return {worst < 1e-6, "max KKT residual " + formatValue(worst)};
}

CheckResult checkKfReduction()
{
  auto rng = make_stream(kSelftestSeed, "kf-reduction");
  std::uniform_int_distribution<int> arms_dist(2, 8);
  std::uniform_real_distribution<double> noise(0.05, 2.0);
  std::uniform_real_distribution<double> prior_dist(0.5, 100.0);
  std::normal_distribution<double> reward(0.0, 1.0);

  double worst = 0.0;
  for (int seq = 0; seq < 200; seq++)
  {
    const int arms = arms_dist(rng);
    const double sigma_tr2 = noise(rng);
    const double sigma_ob2 = noise(rng);
    const double prior = prior_dist(rng);

    KFMANBState manb(arms, prior, sigma_tr2, sigma_ob2);
    KFMANDBState mandb = kfmandb_init(arms, sigma_tr2, sigma_ob2, 0.0);
    mandb.covariance = prior * Eigen::MatrixXd::Identity(arms, arms);
    const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(arms, arms);

    std::uniform_int_distribution<int> arm_dist(0, arms - 1);
    for (int step = 0; step < 50; step++)
    {
      const RewardObservation obs{arm_dist(rng), reward(rng)};
      manb = kfmanb_update(manb, obs);
      mandb = kfmandb_predict(mandb, identity);
      mandb = kfmandb_correct(mandb, obs);

      worst = std::max(worst, (mandb.mean - manb.mean).cwiseAbs().maxCoeff());
      worst = std::max(worst,
                       (mandb.covariance.diagonal() - manb.variance).cwiseAbs().maxCoeff());
      Eigen::MatrixXd off = mandb.covariance;
      off.diagonal().setZero();
      worst = std::max(worst, off.cwiseAbs().maxCoeff());
    }
  }
  return {worst < 1e-9, "max deviation from the per-arm filter " + formatValue(worst)};
}

CheckResult checkKfSymmetry(bool inject)
{
  auto rng = make_stream(kSelftestSeed, "kf-symmetry");
  std::uniform_int_distribution<int> arms_dist(2, 10);
  std::uniform_real_distribution<double> noise(0.05, 2.0);
  std::uniform_real_distribution<double> xi_dist(0.0, 1.0);
  std::uniform_real_distribution<double> eta_dist(0.1, 2.0);
  std::normal_distribution<double> reward(0.0, 1.0);

  double worst_asymmetry = 0.0;
  double min_eigenvalue = std::numeric_limits<double>::infinity();
  for (int seq = 0; seq < 100; seq++)
  {
    const int arms = arms_dist(rng);
    KFMANDBState state = kfmandb_init(arms, noise(rng), noise(rng), xi_dist(rng));
    std::uniform_int_distribution<int> arm_dist(0, arms - 1);

    for (int step = 0; step < 30; step++)
    {
      std::vector<Eigen::VectorXd> commands(arms);
      for (int m = 0; m < arms; m++)
      {
        commands[m] = randomMatrix(6, 1, rng);
      }
      state.eta = eta_dist(rng);
      state = kfmandb_predict(state, vector_similarity_matrix(commands));
      state = kfmandb_correct(state, {arm_dist(rng), reward(rng)});
      if (inject && step == 15)
      {
        state.covariance(0, arms - 1) += 1e-6;
      }
      worst_asymmetry = std::max(
          worst_asymmetry,
          (state.covariance - state.covariance.transpose()).cwiseAbs().maxCoeff());
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigs(state.covariance);
    min_eigenvalue = std::min(min_eigenvalue, eigs.eigenvalues().minCoeff());
  }
  const bool ok = worst_asymmetry < 1e-12 && min_eigenvalue > 0.0;
  return {ok, "max asymmetry " + formatValue(worst_asymmetry) + ", min eigenvalue " +
                  formatValue(min_eigenvalue)};
}

CheckResult checkSimilarityPsd()
{
  auto rng = make_stream(kSelftestSeed, "similarity-psd");
  std::uniform_int_distribution<int> count_dist(2, 12);
  std::uniform_int_distribution<int> dim_dist(2, 18);
  std::uniform_int_distribution<int> zero_dist(0, 9);

  double worst_asymmetry = 0.0;
  double worst_diagonal = 0.0;
  double min_eigenvalue = std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < 200; trial++)
  {
    const int count = count_dist(rng);
    const int dim = dim_dist(rng);
    std::vector<Eigen::VectorXd> commands(count);
    for (int i = 0; i < count; i++)
    {
      commands[i] = zero_dist(rng) == 0 ? Eigen::VectorXd::Zero(dim).eval()
                                        : Eigen::VectorXd(randomMatrix(dim, 1, rng));
    }
    const Eigen::MatrixXd S = vector_similarity_matrix(commands);
    worst_asymmetry = std::max(worst_asymmetry, (S - S.transpose()).cwiseAbs().maxCoeff());
    worst_diagonal =
        std::max(worst_diagonal, (S.diagonal().array() - 1.0).abs().maxCoeff());
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigs(S);
    min_eigenvalue = std::min(min_eigenvalue, eigs.eigenvalues().minCoeff());
  }
  const bool ok = worst_asymmetry == 0.0 && worst_diagonal == 0.0 && min_eigenvalue >= -1e-10;
  return {ok, "min eigenvalue " + formatValue(min_eigenvalue)};
}

CheckResult checkBroydenSecant(bool inject)
{
  auto rng = make_stream(kSelftestSeed, "broyden-secant");
  std::uniform_int_distribution<int> points_dist(1, 10);
  std::uniform_int_distribution<int> cols_dist(1, 12);

  double worst = 0.0;
  bool noop_ok = true;
  for (int trial = 0; trial < 200; trial++)
  {
    const int rows = 3 * points_dist(rng);
    const int cols = cols_dist(rng);
    const AdaptiveJacobianState state{randomMatrix(rows, cols, rng), inject ? 0.999 : 1.0};
    const Eigen::VectorXd qdot = randomMatrix(cols, 1, rng);
    const Eigen::VectorXd pdot = randomMatrix(rows, 1, rng);

    // Unit learning rate satisfies the secant equation exactly.
    const BroydenUpdateResult fit = broyden_update(state, qdot, pdot);
    worst = std::max(worst, (fit.state.J_tilde * qdot - pdot).cwiseAbs().maxCoeff());

    // A command the model already explains perfectly changes nothing.
    const BroydenUpdateResult noop = broyden_update(state, qdot, state.J_tilde * qdot);
    noop_ok = noop_ok && (noop.state.J_tilde - state.J_tilde).cwiseAbs().maxCoeff() == 0.0;

    // A zero command is skipped outright.
    const BroydenUpdateResult skipped =
        broyden_update(state, Eigen::VectorXd::Zero(cols), pdot);
    noop_ok = noop_ok && !skipped.updated &&
              (skipped.state.J_tilde - state.J_tilde).cwiseAbs().maxCoeff() == 0.0;
  }
  const bool ok = worst < 1e-10 && noop_ok;
  return {ok, "max secant residual " + formatValue(worst) +
                  (noop_ok ? "" : ", no-op case mutated the state")};
}
}

std::vector<std::string> selftest_invariant_names()
{
  return {"solver-kkt", "kf-reduction", "kf-symmetry", "similarity-psd", "broyden-secant"};
}

int selftest(const SelftestOptions& options, std::ostream& out)
{
  if (options.list)
  {
    for (const std::string& name : selftest_invariant_names())
    {
      out << name << '\n';
    }
    return 0;
  }

  const std::set<std::string> known_injects = {"solver-bias", "kf-asymmetry", "broyden-drift"};
  const std::set<std::string> inject(options.inject.begin(), options.inject.end());
  for (const std::string& name : inject)
  {
    if (known_injects.count(name) == 0)
    {
      out << "unknown inject hook: " << name << '\n';
      return 2;
    }
  }

  bool all_ok = true;
  const auto report = [&](const std::string& name, const CheckResult& result)
  {
    all_ok = all_ok && result.ok;
    out << (result.ok ? "ok   " : "FAIL ") << name << " (" << result.detail << ")\n";
  };

  report("solver-kkt", checkSolverKkt(inject.count("solver-bias") > 0));
  report("kf-reduction", checkKfReduction());
  report("kf-symmetry", checkKfSymmetry(inject.count("kf-asymmetry") > 0));
  report("similarity-psd", checkSimilarityPsd());
  report("broyden-secant", checkBroydenSecant(inject.count("broyden-drift") > 0));

  out << (all_ok ? "all invariants hold\n" : "invariant failure\n");
  return all_ok ? 0 : 1;
}
}
