#include "doctest.h"

#include <memory>

#include "netflow/dnnd.hpp"
#include "netflow/dynamics.hpp"
#include "netflow/error.hpp"
#include "support/gradcheck.hpp"

using namespace netflow;

namespace {

std::shared_ptr<const Network> small_net() { return std::make_shared<const Network>(generate_er(12, 0.3, 5)); }

Vec random_state(int n, std::uint64_t seed) {
  Rng rng(seed);
  Vec x(n);
  for (int i = 0; i < n; ++i) x[i] = rng.uniform(0, 5);
  return x;
}

// Heat coupling written as G(xi, xj) = -alpha xi + alpha xj with silent networks.
DnndModel linear_heat_model(std::shared_ptr<const Network> net, double alpha) {
  DnndModel m = DnndModel::create(std::move(net), DnndArchitecture{}, 1);
  Vec p = Vec::Zero(static_cast<Eigen::Index>(m.parameter_count()));
  const auto g0 = static_cast<Eigen::Index>(m.self_fn().parameter_count());
  p[g0 + 1] = -alpha;
  p[g0 + 2] = alpha;
  m.set_parameters({p.data(), static_cast<std::size_t>(p.size())});
  return m;
}

}  // namespace

TEST_CASE("velocity is self term plus neighbour sum") {
  auto net = small_net();
  DnndModel m = DnndModel::create(net, {{5}, {6, 3}, Activation::Tanh}, 3);
  m.self_fn().c0 = 0.2;
  m.coupling_fn().c12 = -0.4;
  const Vec x = random_state(12, 1);
  const Vec dx = m.velocity(x);
  for (int i = 0; i < 12; ++i) {
    double expected = m.self_fn().value(x[i]);
    for (int j : net->neighbors(i)) expected += m.coupling_fn().value(x[i], x[j]);
    CHECK(dx[i] == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("affine coupling alone reproduces heat diffusion") {
  auto net = small_net();
  const DnndModel m = linear_heat_model(net, 0.1);
  const Vec x = random_state(12, 2);
  CHECK((m.velocity(x) - heat_field(net)->velocity(x)).lpNorm<Eigen::Infinity>() < 1e-14);
}

TEST_CASE("parameters round trip and layout covers them") {
  DnndModel m = DnndModel::create(small_net(), DnndArchitecture{}, 8);
  const Vec p = m.parameters();
  CHECK(static_cast<std::size_t>(p.size()) == m.parameter_count());
  CHECK(m.parameter_count() == m.self_fn().parameter_count() + m.coupling_fn().parameter_count());
  std::size_t covered = 0;
  for (const auto& seg : m.layout()) {
    CHECK(seg.offset == covered);
    covered += seg.size;
  }
  CHECK(covered == m.parameter_count());
  CHECK_FALSE(m.layout().front().regularized);

  Vec q = p;
  q[5] += 1.0;
  m.set_parameters({q.data(), static_cast<std::size_t>(q.size())});
  CHECK(m.parameters() == q);
  CHECK_THROWS_AS(m.set_parameters(std::vector<double>(3)), InvalidArgument);
}

TEST_CASE("vjp agrees with central differences") {
  auto net = small_net();
  DnndModel m = DnndModel::create(net, {{4}, {4}, Activation::Tanh}, 2);
  const Vec x = random_state(12, 3);
  const Vec w = random_state(12, 4) - Vec::Constant(12, 2.5);
  Vec x_bar = Vec::Zero(12);
  Vec g = Vec::Zero(static_cast<Eigen::Index>(m.parameter_count()));
  m.vjp(x, w, x_bar, {g.data(), static_cast<std::size_t>(g.size())});
  const auto by_state = [&](const Vec& v) { return m.velocity(v).dot(w); };
  CHECK(gradcheck::relative_error(x_bar, gradcheck::central_difference(by_state, x)) < 1e-7);
  const auto by_params = [&](const Vec& p) {
    DnndModel c = m;
    c.set_parameters({p.data(), static_cast<std::size_t>(p.size())});
    return c.velocity(x).dot(w);
  };
  CHECK(gradcheck::relative_error(g, gradcheck::central_difference(by_params, m.parameters())) < 1e-7);
}

TEST_CASE("trajectory loss gradient agrees with central differences") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) CHECK(gradcheck::dnnd_gradient_error(seed) < 1e-4);
}

TEST_CASE("a model that is already exact has zero loss") {
  auto net = small_net();
  const DnndModel m = linear_heat_model(net, 0.1);
  const std::vector<double> times{0.5, 1.0, 1.5};
  TrainConfig cfg;
  cfg.substeps_per_obs = 2;
  const TimeSeries obs = solve_rk4_grid(*heat_field(net), random_state(12, 6), times, 2, 0.5);
  std::vector<double> g(m.parameter_count(), 0.0);
  const auto [weighted, plain] = dnnd_loss_and_gradient(m, obs, 1.0, cfg, g);
  CHECK(plain < 1e-13);
  CHECK(weighted <= plain);
}

TEST_CASE("training lowers the loss on a small heat problem") {
  auto net = small_net();
  auto truth = heat_field(net);
  const TimeSeries obs = solve_rkf45(*truth, random_state(12, 7), sample_times(15, 3.0, 1));
  DnndModel m = DnndModel::create(net, {{8}, {8}, Activation::Tanh}, 4);
  TrainConfig cfg;
  cfg.epochs = 60;
  cfg.adam.learning_rate = 1e-2;
  WarmupSchedule schedule;
  schedule.epochs_per_stage = 12;
  const TrainReport report = train_dnnd(m, obs, schedule, cfg);
  REQUIRE(report.unweighted_loss.size() == 60);
  CHECK(report.unweighted_loss.back() < 0.5 * report.unweighted_loss.front());
  CHECK(report.final_params == m.parameters());
  CHECK(report.tau.front() == 0.5);
  CHECK(std::isinf(report.tau.back()));

  DnndModel again = DnndModel::create(net, {{8}, {8}, Activation::Tanh}, 4);
  CHECK(train_dnnd(again, obs, schedule, cfg).unweighted_loss == report.unweighted_loss);
}

TEST_CASE("divergent rollout aborts training with context") {
  auto net = small_net();
  const TimeSeries obs = solve_rkf45(*heat_field(net), random_state(12, 8), sample_times(40, 5.0, 3));
  DnndModel m = DnndModel::create(net, DnndArchitecture{}, 1);
  m.self_fn().c1 = 1e6;
  TrainConfig cfg;
  cfg.epochs = 3;
  try {
    train_dnnd(m, obs, WarmupSchedule{}, cfg);
    FAIL("expected divergence");
  } catch (const NumericalError& e) {
    CHECK(e.reason() == NumericalError::Reason::Training);
    CHECK(std::string(e.what()).find("epoch 0") != std::string::npos);
  }
}

TEST_CASE("model transfers to another network") {
  auto net = small_net();
  const DnndModel m = DnndModel::create(net, DnndArchitecture{}, 2);
  auto other = std::make_shared<const Network>(generate_grid(3));
  const DnndModel moved = m.with_network(other);
  CHECK(moved.parameters() == m.parameters());
  CHECK(moved.dimension() == 9);
}
