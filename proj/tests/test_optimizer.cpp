#include <cmath>
#include <limits>

#include <doctest.h>

#include "rbfvmc/errors.hpp"
#include "rbfvmc/optimizer.hpp"
#include "rbfvmc/oracle.hpp"

using namespace rbfvmc;

TEST_CASE("optimizer configuration validation") {
  SrConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  SrConfig bad = cfg;
  bad.alpha = 0.0;
  CHECK_THROWS_AS(bad.validate(), ContractError);
  bad = cfg;
  bad.max_iter = 0;
  CHECK_THROWS_AS(bad.validate(), ContractError);
  bad = cfg;
  bad.reg_init = 0.0;
  CHECK_THROWS_AS(bad.validate(), ContractError);
  bad = cfg;
  bad.reg_decay = 1.5;
  CHECK_THROWS_AS(bad.validate(), ContractError);
  bad = cfg;
  bad.reg_floor = 0.0;
  CHECK_THROWS_AS(bad.validate(), ContractError);
  bad = cfg;
  bad.pivot_tol = 0.0;
  CHECK_THROWS_AS(bad.validate(), ContractError);
  bad = cfg;
  bad.convergence_window = 0;
  CHECK_THROWS_AS(bad.validate(), ContractError);
  bad = cfg;
  bad.convergence_tol = -1.0;
  CHECK_THROWS_AS(bad.validate(), ContractError);
}

TEST_CASE("regularization follows the decaying schedule with a floor") {
  SrConfig cfg;
  cfg.reg_init = 100.0;
  cfg.reg_decay = 0.9;
  cfg.reg_floor = 1e-4;
  CHECK(regularization(0, cfg) == doctest::Approx(100.0));
  CHECK(regularization(1, cfg) == doctest::Approx(90.0));
  CHECK(regularization(10, cfg) == doctest::Approx(100.0 * std::pow(0.9, 10)));
  // 100 * 0.9^k crosses 1e-4 near k = 131.
  CHECK(regularization(200, cfg) == doctest::Approx(1e-4));
  CHECK(regularization(100000, cfg) == doctest::Approx(1e-4));
  CHECK_THROWS_AS(regularization(-1, cfg), ContractError);
}

TEST_CASE("SR system is the covariance pair of the sampled moments") {
  SampleEstimates est;
  est.e_mean = 2.0;
  est.o_mean.resize(2);
  est.o_mean << 1.0, -1.0;
  est.eo_mean.resize(2);
  est.eo_mean << 3.0, 0.5;
  est.oo_mean.resize(2, 2);
  est.oo_mean << 2.0, -0.5, -0.5, 3.0;

  const SrSystem sys = build_sr(est);
  CHECK(sys.s(0, 0) == doctest::Approx(1.0));    // 2 - 1*1
  CHECK(sys.s(0, 1) == doctest::Approx(0.5));    // -0.5 - 1*(-1)
  CHECK(sys.s(1, 0) == doctest::Approx(0.5));
  CHECK(sys.s(1, 1) == doctest::Approx(2.0));    // 3 - 1
  CHECK(sys.f[0] == doctest::Approx(1.0));       // 3 - 2*1
  CHECK(sys.f[1] == doctest::Approx(2.5));       // 0.5 - 2*(-1)

  CHECK_THROWS_AS(build_sr(SampleEstimates{}), ContractError);
}

TEST_CASE("identity system solves to a plain scaled gradient step") {
  SrSystem sys;
  sys.s = Eigen::MatrixXd::Identity(3, 3);
  sys.f.resize(3);
  sys.f << 1.0, -2.0, 0.5;
  const SrSolution sol = solve_update(sys, 0.0, 0.1, 1e-12);
  CHECK_FALSE(sol.fallback);
  CHECK(sol.residual <= 1e-12);
  CHECK((sol.delta - 0.1 * sys.f).norm() <= 1e-12);
  CHECK(sol.step == doctest::Approx(0.1 * sys.f.norm()));
}

TEST_CASE("regularization scales the diagonal of the solved system") {
  SrSystem sys;
  sys.s = Eigen::MatrixXd::Identity(2, 2);
  sys.f.resize(2);
  sys.f << 1.0, 1.0;
  // (1 + r) x = f with r = 3 gives x = f / 4.
  const SrSolution sol = solve_update(sys, 3.0, 1.0, 1e-12);
  CHECK((sol.delta - sys.f / 4.0).norm() <= 1e-12);
  CHECK(sol.residual <= 1e-12);
}

TEST_CASE("a random positive definite system is solved to tight residual") {
  std::srand(7);
  const Eigen::MatrixXd a = Eigen::MatrixXd::Random(6, 6);
  SrSystem sys;
  sys.s = a * a.transpose() + 0.1 * Eigen::MatrixXd::Identity(6, 6);
  sys.f = Eigen::VectorXd::Random(6);

  const double r = 0.01;
  const SrSolution sol = solve_update(sys, r, 0.05, 1e-12);
  CHECK_FALSE(sol.fallback);
  CHECK(sol.residual <= 1e-8 * std::max(1.0, sys.f.norm()));

  Eigen::MatrixXd s_reg = sys.s;
  s_reg.diagonal() *= 1.0 + r;
  const Eigen::VectorXd x = sol.delta / 0.05;
  CHECK((s_reg * x - sys.f).norm() <= 1e-8);
  CHECK(sol.step == doctest::Approx(0.05 * std::sqrt(x.dot(s_reg * x))));
}

TEST_CASE("parameters with no sampled variation are held fixed") {
  SrSystem sys;
  sys.s = Eigen::MatrixXd::Zero(3, 3);
  sys.s(0, 0) = 2.0;
  sys.s(2, 2) = 1.0;
  sys.s(0, 2) = 0.5;
  sys.s(2, 0) = 0.5;
  sys.f.resize(3);
  sys.f << 1.0, 0.0, -1.0;

  const SrSolution sol = solve_update(sys, 0.0, 1.0, 1e-12);
  CHECK(sol.delta[1] == 0.0);
  CHECK(sol.residual <= 1e-12);
  // The live 2x2 block is solved exactly.
  Eigen::Matrix2d live;
  live << 2.0, 0.5, 0.5, 1.0;
  Eigen::Vector2d rhs(1.0, -1.0);
  const Eigen::Vector2d x = live.lu().solve(rhs);
  CHECK(sol.delta[0] == doctest::Approx(x[0]));
  CHECK(sol.delta[2] == doctest::Approx(x[1]));

  // A force on a dead coordinate cannot be satisfied and shows up in the
  // residual instead of being silently dropped.
  sys.f[1] = 0.7;
  const SrSolution stuck = solve_update(sys, 0.0, 1.0, 1e-12);
  CHECK(stuck.delta[1] == 0.0);
  CHECK(stuck.residual == doctest::Approx(0.7));
}

TEST_CASE("an all-zero system reports its force as residual") {
  SrSystem sys;
  sys.s = Eigen::MatrixXd::Zero(2, 2);
  sys.f.resize(2);
  sys.f << 0.0, 0.0;
  const SrSolution none = solve_update(sys, 1.0, 1.0, 1e-12);
  CHECK(none.delta.norm() == 0.0);
  CHECK(none.residual == 0.0);
  CHECK_FALSE(none.fallback);

  sys.f << 3.0, 4.0;
  const SrSolution stuck = solve_update(sys, 1.0, 1.0, 1e-12);
  CHECK(stuck.delta.norm() == 0.0);
  CHECK(stuck.residual == doctest::Approx(5.0));
  CHECK(stuck.fallback);
}

TEST_CASE("solve_update rejects malformed systems") {
  SrSystem sys;
  sys.s = Eigen::MatrixXd::Identity(2, 2);
  sys.f = Eigen::VectorXd::Ones(3);
  CHECK_THROWS_AS(solve_update(sys, 0.0, 1.0, 1e-12), ContractError);
  sys.f = Eigen::VectorXd::Ones(2);
  CHECK_THROWS_AS(solve_update(sys, -1.0, 1.0, 1e-12), ContractError);
}

TEST_CASE("optimization finds the ground state of the 2x2 generator matrix") {
  const ModelSpec model{HermitianMatrix{2, nullptr}};
  const OracleResult oracle = dense_lowest_eig(model);
  // Closed form: eigenvalues 1.5 +- sqrt(2.5).
  CHECK(oracle.energy == doctest::Approx(1.5 - std::sqrt(2.5)).epsilon(1e-12));

  const RbfNetwork start = init_random(4, 1, 2, 11, 0.5);
  SamplerConfig sampler;
  sampler.n_samples = 4000;
  sampler.n_therm = 100;
  sampler.seed = 21;
  SrConfig sr;
  sr.alpha = 0.05;
  sr.max_iter = 120;

  const RunRecord rec = optimize(start, model, sampler, sr);
  REQUIRE_FALSE(rec.aborted);
  REQUIRE(rec.rows.size() == 120);
  CHECK(std::abs(rec.final_energy - oracle.energy) <=
        3.0 * rec.final_error + 0.01);
  // The variational bound holds for the reported tail mean.
  CHECK(rec.final_energy >= oracle.energy - 3.0 * rec.final_error - 1e-9);

  // The best snapshot never scores worse than any recorded iteration.
  double min_score = std::numeric_limits<double>::infinity();
  for (const IterationRow& row : rec.rows) {
    min_score = std::min(min_score, row.energy + row.error);
  }
  CHECK(rec.best_energy + rec.best_error <= min_score + 1e-12);
}

TEST_CASE("optimization recovers the free oscillator ground state") {
  const ModelSpec model{Ho1d{0.0, 8}};
  const RbfNetwork start = init_random(4, 1, 8, 3);
  SamplerConfig sampler;
  sampler.n_samples = 4000;
  sampler.n_therm = 100;
  sampler.seed = 33;
  SrConfig sr;
  sr.alpha = 0.1;
  sr.max_iter = 150;

  const RunRecord rec = optimize(start, model, sampler, sr);
  REQUIRE_FALSE(rec.aborted);
  CHECK(std::abs(rec.final_energy - 0.5) <= 3.0 * rec.final_error + 0.005);
  CHECK(rec.final_energy >= 0.5 - 3.0 * rec.final_error - 1e-9);
}

TEST_CASE("optimization is deterministic in its seeds") {
  const ModelSpec model{HermitianMatrix{3, nullptr}};
  const RbfNetwork start = init_random(3, 1, 3, 5);
  SamplerConfig sampler;
  sampler.n_samples = 600;
  sampler.n_therm = 50;
  sampler.seed = 13;
  SrConfig sr;
  sr.alpha = 0.05;
  sr.max_iter = 25;

  const RunRecord a = optimize(start, model, sampler, sr);
  const RunRecord b = optimize(start, model, sampler, sr);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].energy == b.rows[i].energy);
    CHECK(a.rows[i].error == b.rows[i].error);
  }
  CHECK(a.final_energy == b.final_energy);
  CHECK(a.last_net.flatten() == b.last_net.flatten());
}

TEST_CASE("a loose tolerance stops the run at the first full window pair") {
  const ModelSpec model{HermitianMatrix{3, nullptr}};
  const RbfNetwork start = init_random(3, 1, 3, 5);
  SamplerConfig sampler;
  sampler.n_samples = 600;
  sampler.n_therm = 50;
  sampler.seed = 13;
  SrConfig sr;
  sr.alpha = 0.05;
  sr.max_iter = 200;
  sr.convergence_window = 5;
  sr.convergence_tol = 1e6;

  const RunRecord rec = optimize(start, model, sampler, sr);
  CHECK(rec.converged);
  CHECK(rec.rows.size() == 10);
}

TEST_CASE("a wavefunction that is zero everywhere aborts cleanly") {
  RbfNetwork dead;
  dead.hidden_count = 1;
  dead.input_dim = 1;
  dead.activation = ActivationKind::Gaussian;
  dead.weights = Eigen::VectorXd::Zero(1);
  dead.spreads = Eigen::VectorXd::Constant(1, 1.0);
  dead.centers = Eigen::MatrixXd::Zero(1, 1);

  const ModelSpec model{Ho1d{1.0, 5}};
  SamplerConfig sampler;
  sampler.n_samples = 100;
  SrConfig sr;
  sr.max_iter = 10;
  const RunRecord rec = optimize(dead, model, sampler, sr);
  CHECK(rec.aborted);
  CHECK(rec.rows.empty());
  CHECK(rec.abort_reason.find("iteration 0") != std::string::npos);
}

TEST_CASE("optimize refuses an evaluation-only activation") {
  RbfNetwork net = init_random(2, 1, 5, 1);
  net.activation = ActivationKind::Multiquadric;
  const ModelSpec model{Ho1d{1.0, 5}};
  CHECK_THROWS_AS(optimize(net, model, SamplerConfig{}, SrConfig{}), ContractError);
}
