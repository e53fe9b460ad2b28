#include "doctest.h"

#include <memory>

#include "netflow/dynamics.hpp"
#include "netflow/error.hpp"
#include "netflow/ndcn.hpp"
#include "support/gradcheck.hpp"

using namespace netflow;

namespace {

std::shared_ptr<const Network> small_net() { return std::make_shared<const Network>(generate_ba(8, 2, 3)); }

NdcnArchitecture small_arch() {
  NdcnArchitecture a;
  a.embed_dim = 3;
  a.encoder_hidden = {4};
  a.latent_hidden = {5};
  a.decoder_hidden = {4};
  return a;
}

Vec random_vec(Eigen::Index n, std::uint64_t seed, double lo, double hi) {
  Rng rng(seed);
  Vec x(n);
  for (Eigen::Index i = 0; i < n; ++i) x[i] = rng.uniform(lo, hi);
  return x;
}

}  // namespace

TEST_CASE("encoder and decoder act node by node") {
  const NdcnModel m = NdcnModel::create(small_net(), small_arch(), 1);
  const Vec x = random_vec(8, 2, 0, 3);
  const Vec h = m.encode(x);
  REQUIRE(h.size() == 24);
  for (int i = 0; i < 8; ++i) {
    const Vec hi = m.encoder().forward_one(Vec::Constant(1, x[i]));
    CHECK((h.segment(3 * i, 3) - hi).norm() < 1e-14);
  }
  const Vec y = m.decode(h);
  for (int i = 0; i < 8; ++i)
    CHECK(y[i] == doctest::Approx(m.decoder().forward_one(h.segment(3 * i, 3))(0)).epsilon(1e-14));
}

TEST_CASE("latent velocity applies the network to rows of L H") {
  const NdcnModel m = NdcnModel::create(small_net(), small_arch(), 3);
  const Vec h = random_vec(24, 4, -1, 1);
  Eigen::MatrixXd H(8, 3);
  for (int i = 0; i < 8; ++i) H.row(i) = h.segment(3 * i, 3).transpose();
  const Eigen::MatrixXd LH = Eigen::MatrixXd(laplacian(m.network())) * H;
  const Vec dh = m.latent_field().velocity(h);
  for (int i = 0; i < 8; ++i) {
    const Vec expected = m.latent().forward_one(LH.row(i).transpose());
    CHECK((dh.segment(3 * i, 3) - expected).norm() < 1e-13);
  }
}

TEST_CASE("latent vjp agrees with central differences") {
  const NdcnModel m = NdcnModel::create(small_net(), small_arch(), 5);
  const NdcnLatentField& f = m.latent_field();
  const Vec h = random_vec(24, 6, -1, 1);
  const Vec w = random_vec(24, 7, -1, 1);
  Vec h_bar = Vec::Zero(24);
  Vec g = Vec::Zero(static_cast<Eigen::Index>(f.parameter_count()));
  f.vjp(h, w, h_bar, {g.data(), static_cast<std::size_t>(g.size())});
  const auto by_state = [&](const Vec& v) { return f.velocity(v).dot(w); };
  CHECK(gradcheck::relative_error(h_bar, gradcheck::central_difference(by_state, h)) < 1e-7);
  const auto by_params = [&](const Vec& p) {
    NdcnModel c = m;
    c.latent().unpack({p.data(), static_cast<std::size_t>(p.size())});
    return c.latent_field().velocity(h).dot(w);
  };
  CHECK(gradcheck::relative_error(g, gradcheck::central_difference(by_params, gradcheck::params_of(m.latent()))) <
        1e-7);
}

TEST_CASE("trajectory loss gradient agrees with central differences") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) CHECK(gradcheck::ndcn_gradient_error(seed) < 1e-4);
}

TEST_CASE("copies own their latent field") {
  NdcnModel a = NdcnModel::create(small_net(), small_arch(), 8);
  const Vec h = random_vec(24, 9, -1, 1);
  const Vec before = a.latent_field().velocity(h);
  NdcnModel b = a;
  b.latent().bias(0).array() += 1.0;
  CHECK(a.latent_field().velocity(h) == before);
  CHECK(b.latent_field().velocity(h) != before);
  a = b;
  CHECK(a.latent_field().velocity(h) == b.latent_field().velocity(h));
}

TEST_CASE("prediction decodes the integrated latent state") {
  const NdcnModel m = NdcnModel::create(small_net(), small_arch(), 10);
  const Vec x0 = random_vec(8, 11, 0, 2);
  const std::vector<double> times{0.0, 0.4, 1.3};
  const TimeSeries pred = ndcn_predict(m, x0, times);
  const TimeSeries latent = solve_rkf45(m.latent_field(), m.encode(x0), times);
  for (std::size_t k = 0; k < times.size(); ++k)
    CHECK((pred.state(k) - m.decode(latent.state(k))).norm() < 1e-12);
}

TEST_CASE("restarting through the decoder branches the flow") {
  const NdcnModel m = NdcnModel::create(small_net(), small_arch(), 12);
  const Vec x0 = random_vec(8, 13, 0, 2);
  const std::vector<double> times{1.0, 1.5, 2.0};
  const auto [a0, b0] = ndcn_flow_branch(m, x0, 0.0, 2.0, times);
  CHECK(a0.states == b0.states);
  const auto [a, b] = ndcn_flow_branch(m, x0, 1.0, 2.0, times);
  CHECK((a.states - b.states).cwiseAbs().maxCoeff() > 1e-4);
  CHECK_THROWS_AS(ndcn_flow_branch(m, x0, 1.5, 2.0, times), InvalidArgument);
}

TEST_CASE("training lowers the loss and caches the initial state") {
  auto net = small_net();
  const Vec x0 = random_vec(8, 14, 0, 5);
  const TimeSeries obs = solve_rkf45(*heat_field(net), x0, sample_times(12, 3.0, 2));
  NdcnModel m = NdcnModel::create(net, small_arch(), 15);
  TrainConfig cfg;
  cfg.epochs = 80;
  cfg.adam.learning_rate = 1e-2;
  const TrainReport r = train_ndcn(m, obs, WarmupSchedule::disabled(), cfg);
  CHECK(r.unweighted_loss.back() < 0.5 * r.unweighted_loss.front());
  CHECK(m.x0_cache() == obs.state(0));
  CHECK(m.t0_cache() == obs.times.front());
  CHECK(m.parameters() == r.final_params);
}

TEST_CASE("invalid shapes are rejected") {
  auto net = small_net();
  CHECK_THROWS_AS(NdcnModel(net, Mlp({2, 3}, Activation::Tanh), Mlp({3, 3}, Activation::Tanh),
                            Mlp({3, 1}, Activation::Tanh)),
                  InvalidArgument);
  CHECK_THROWS_AS(NdcnModel(net, Mlp({1, 3}, Activation::Tanh), Mlp({3, 2}, Activation::Tanh),
                            Mlp({3, 1}, Activation::Tanh)),
                  InvalidArgument);
  NdcnArchitecture a = small_arch();
  a.embed_dim = 0;
  CHECK_THROWS_AS(NdcnModel::create(net, a, 0), InvalidArgument);
  const NdcnModel m = NdcnModel::create(net, small_arch(), 0);
  CHECK_THROWS_AS(m.encode(Vec::Zero(3)), InvalidArgument);
}
