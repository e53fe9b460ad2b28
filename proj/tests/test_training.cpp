#include "doctest.h"

#include <cmath>
#include <limits>

#include "netflow/error.hpp"
#include "netflow/optim.hpp"
#include "netflow/training.hpp"

using namespace netflow;

TEST_CASE("warm-up weights") {
  CHECK(warmup_weight(0.0, 0.5) == 1.0);
  CHECK(warmup_weight(1.0, 0.5) == doctest::Approx(std::exp(-2.0)));
  CHECK(warmup_weight(4.0, std::numeric_limits<double>::infinity()) == 1.0);
}

TEST_CASE("schedule stages and tail") {
  WarmupSchedule s;
  s.taus = {0.5, 2.0};
  s.epochs_per_stage = 3;
  CHECK(s.tau_for_epoch(0) == 0.5);
  CHECK(s.tau_for_epoch(2) == 0.5);
  CHECK(s.tau_for_epoch(3) == 2.0);
  CHECK(s.tau_for_epoch(100) == 2.0);
  CHECK(std::isinf(WarmupSchedule::disabled().tau_for_epoch(0)));
  s.taus = {};
  CHECK_THROWS_AS(s.validate(), InvalidArgument);
  s.taus = {-1.0};
  CHECK_THROWS_AS(s.validate(), InvalidArgument);
}

TEST_CASE("weighted loss by hand") {
  TimeSeries obs, pred;
  obs.times = pred.times = {0.0, 1.0};
  obs.states = (Eigen::MatrixXd(2, 2) << 0, 0, 0, 0).finished();
  pred.states = (Eigen::MatrixXd(2, 2) << 1, -3, 2, 1).finished();
  Eigen::MatrixXd bar;
  const double tau = 1.0;
  const double mae = weighted_loss(pred, obs, tau, LossKind::MAE, &bar);
  CHECK(mae == doctest::Approx(1.5 + std::exp(-1.0) * 2.0));
  CHECK(bar(0, 1) == doctest::Approx(-std::exp(-1.0) / 2));
  const double mse = weighted_loss(pred, obs, tau, LossKind::MSE, &bar);
  CHECK(mse == doctest::Approx(2.5 + std::exp(-1.0) * 5.0));
  CHECK(bar(1, 0) == doctest::Approx(2.0));
  pred.times = {0.0, 2.0};
  CHECK_THROWS_AS(weighted_loss(pred, obs, tau, LossKind::MAE), InvalidArgument);
}

TEST_CASE("adam first step moves each coordinate by the learning rate") {
  AdamConfig cfg;
  cfg.learning_rate = 0.1;
  Adam adam(3, cfg);
  std::vector<double> p{1.0, 2.0, 3.0};
  const std::vector<double> g{0.5, -2.0, 0.0};
  adam.step(p, g);
  CHECK(p[0] == doctest::Approx(0.9).epsilon(1e-6));
  CHECK(p[1] == doctest::Approx(2.1).epsilon(1e-6));
  CHECK(p[2] == 3.0);
}

TEST_CASE("adam minimises a quadratic") {
  Adam adam(2, AdamConfig{.learning_rate = 0.01});
  std::vector<double> p{3.0, -2.0};
  for (int i = 0; i < 3000; ++i) {
    const std::vector<double> g{2 * (p[0] - 1.0), 8 * (p[1] + 0.5)};
    adam.step(p, g);
  }
  CHECK(std::abs(p[0] - 1.0) < 1e-2);
  CHECK(std::abs(p[1] + 0.5) < 1e-2);
}

TEST_CASE("generic driver reports every epoch and applies the result") {
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.adam.learning_rate = 0.5;
  std::vector<double> applied;
  const auto loss = [](double, std::span<double> g) {
    g[0] = 1.0;
    return std::pair{2.0, 1.0};
  };
  const auto apply = [&](std::span<const double> p) { applied.assign(p.begin(), p.end()); };
  const TrainReport r = run_adam_training(Eigen::VectorXd::Zero(1), {{"w", 0, 1, true}}, WarmupSchedule{}, cfg,
                                          loss, apply);
  CHECK(r.weighted_loss.size() == 5);
  CHECK(r.final_params[0] == doctest::Approx(-2.5).epsilon(1e-6));
  CHECK(applied[0] == r.final_params[0]);
  const std::string log = format_loss_log(r, {"prov"});
  CHECK(log.rfind("# prov\nepoch,tau,weighted_loss,unweighted_loss\n0,0.5,2,1\n", 0) == 0);

  const auto bad = [](double, std::span<double>) { return std::pair{std::nan(""), 0.0}; };
  CHECK_THROWS_AS(run_adam_training(Eigen::VectorXd::Zero(1), {}, WarmupSchedule{}, cfg, bad, apply),
                  NumericalError);
  cfg.epochs = -1;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
}

TEST_CASE("enum names round trip") {
  CHECK(parse_loss_kind(to_string(LossKind::MSE)) == LossKind::MSE);
  CHECK(parse_penalty(to_string(Penalty::L1)) == Penalty::L1);
  CHECK_THROWS(parse_loss_kind("huber"));
}
