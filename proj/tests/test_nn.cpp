#include "doctest.h"

#include <cmath>
#include <numeric>
#include <vector>

#include "netflow/error.hpp"
#include "netflow/nn.hpp"
#include "netflow/rng.hpp"

using namespace netflow;

namespace {

Mat random_matrix(int rows, int cols, std::uint64_t seed, double scale = 1.0) {
  Rng rng(seed);
  Mat m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = rng.uniform(-scale, scale);
  return m;
}

// Textbook forward pass with std::tanh, one layer at a time.
Mat reference_forward(const Mlp& net, const Mat& x) {
  Mat a = x;
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    Mat z = net.weights(l) * a;
    z.colwise() += net.bias(l);
    if (l + 1 < net.layer_count())
      z = net.activation() == Activation::Tanh ? Mat(z.array().tanh()) : Mat(z.cwiseMax(0.0));
    a = z;
  }
  return a;
}

void check_backward_by_differences(Activation act) {
  Mlp net = Mlp::glorot({2, 5, 4, 3}, act, 17);
  std::vector<double> params(net.parameter_count());
  net.pack(params);
  const Mat x = random_matrix(2, 6, 3, 2.0);
  const Mat w = random_matrix(3, 6, 4);
  auto objective = [&](const std::vector<double>& p, const Mat& in) {
    Mlp m = net;
    m.unpack(p);
    return m.forward(in).cwiseProduct(w).sum();
  };

  Mlp::Tape tape;
  net.forward(x, tape);
  std::vector<double> grad(params.size(), 0.0);
  Mat x_bar;
  net.backward(tape, w, &x_bar, grad);

  const double h = 1e-6;
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto pp = params, pm = params;
    pp[k] += h;
    pm[k] -= h;
    const double fd = (objective(pp, x) - objective(pm, x)) / (2 * h);
    CHECK(grad[k] == doctest::Approx(fd).epsilon(1e-6));
  }
  for (int i = 0; i < x.rows(); ++i)
    for (int j = 0; j < x.cols(); ++j) {
      Mat xp = x, xm = x;
      xp(i, j) += h;
      xm(i, j) -= h;
      CHECK(x_bar(i, j) == doctest::Approx((objective(params, xp) - objective(params, xm)) / (2 * h)).epsilon(1e-6));
    }
}

}  // namespace

TEST_CASE("tanh kernel matches std::tanh") {
  std::vector<double> xs{0.0, -0.0, 1e-300, -1e-12, 0.5, -0.5, 1.0, 3.0, 19.9, 20.0, 25.0, -40.0, 710.0, -1e300};
  for (int k = -4000; k <= 4000; ++k) xs.push_back(k * 0.00731);
  Mat z = Eigen::Map<Mat>(xs.data(), 1, static_cast<Eigen::Index>(xs.size()));
  tanh_inplace(z);
  double worst = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) worst = std::max(worst, std::abs(z(0, k) - std::tanh(xs[k])));
  CHECK(worst < 1e-15);
  CHECK(std::signbit(z(0, 1)));
  Mat one = Mat::Constant(3, 3, 0.25);
  tanh_inplace(one);
  CHECK(std::abs(one(2, 2) - std::tanh(0.25)) < 1e-15);
}

TEST_CASE("forward pass matches a textbook implementation") {
  for (auto act : {Activation::Tanh, Activation::Relu}) {
    const Mlp net = Mlp::glorot({2, 7, 7, 1}, act, 5);
    const Mat x = random_matrix(2, 11, 6, 3.0);
    CHECK((net.forward(x) - reference_forward(net, x)).cwiseAbs().maxCoeff() < 1e-13);
    CHECK((net.forward_one(x.col(3)) - reference_forward(net, x.col(3))).cwiseAbs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("parameter layout is row-major weights then bias per layer") {
  Mlp net({2, 3, 1}, Activation::Tanh);
  CHECK(net.parameter_count() == 2 * 3 + 3 + 3 * 1 + 1);
  std::vector<double> p(net.parameter_count());
  std::iota(p.begin(), p.end(), 0.0);
  net.unpack(p);
  CHECK(net.weights(0)(0, 1) == 1.0);
  CHECK(net.weights(0)(1, 0) == 2.0);
  CHECK(net.bias(0)(2) == 8.0);
  CHECK(net.weights(1)(0, 2) == 11.0);
  CHECK(net.bias(1)(0) == 12.0);
  std::vector<double> q(p.size());
  net.pack(q);
  CHECK(q == p);
  CHECK_THROWS_AS(net.unpack(std::vector<double>(3)), InvalidArgument);
}

TEST_CASE("glorot initialisation bounds and determinism") {
  const Mlp a = Mlp::glorot({1, 16, 16, 1}, Activation::Tanh, 9);
  const Mlp b = Mlp::glorot({1, 16, 16, 1}, Activation::Tanh, 9);
  const Mlp c = Mlp::glorot({1, 16, 16, 1}, Activation::Tanh, 10);
  for (std::size_t l = 0; l < a.layer_count(); ++l) {
    const double bound = std::sqrt(6.0 / (a.weights(l).rows() + a.weights(l).cols()));
    CHECK(a.weights(l).cwiseAbs().maxCoeff() <= bound);
    CHECK(a.bias(l).isZero());
    CHECK(a.weights(l) == b.weights(l));
  }
  CHECK(a.weights(1) != c.weights(1));
}

TEST_CASE("mlp backward agrees with central differences") {
  check_backward_by_differences(Activation::Tanh);
  check_backward_by_differences(Activation::Relu);
}

TEST_CASE("affine wrappers add their linear terms") {
  AffineScalarFn f(Mlp::glorot({1, 4, 1}, Activation::Tanh, 1));
  f.c0 = 0.5;
  f.c1 = -2.0;
  const double x = 1.7;
  const double mlp = f.mlp.forward_one(Eigen::VectorXd::Constant(1, x))(0);
  CHECK(f.value(x) == doctest::Approx(0.5 - 2.0 * x + mlp));

  AffinePairFn g(Mlp::glorot({2, 4, 1}, Activation::Tanh, 2));
  g.c0 = 1.0;
  g.c11 = 0.25;
  g.c12 = -0.75;
  const double pair = g.mlp.forward_one((Eigen::VectorXd(2) << 2.0, 3.0).finished())(0);
  CHECK(g.value(2.0, 3.0) == doctest::Approx(1.0 + 0.5 - 2.25 + pair));

  std::vector<double> p(g.parameter_count());
  g.pack(p);
  CHECK(p[0] == 1.0);
  CHECK(p[1] == 0.25);
  CHECK(p[2] == -0.75);
}

TEST_CASE("affine scalar backward agrees with central differences") {
  AffineScalarFn f(Mlp::glorot({1, 5, 1}, Activation::Tanh, 8));
  f.c0 = 0.1;
  f.c1 = 0.3;
  std::vector<double> p(f.parameter_count());
  f.pack(p);
  const Mat x = random_matrix(1, 4, 2, 3.0);
  const Mat w = random_matrix(1, 4, 5);
  Mlp::Tape tape;
  f.forward(x, tape);
  std::vector<double> grad(p.size(), 0.0);
  f.backward(tape, w, nullptr, grad);
  const double h = 1e-6;
  for (std::size_t k = 0; k < p.size(); ++k) {
    auto pp = p, pm = p;
    pp[k] += h;
    pm[k] -= h;
    AffineScalarFn fp = f, fm = f;
    fp.unpack(pp);
    fm.unpack(pm);
    const double fd = (fp.forward(x).cwiseProduct(w).sum() - fm.forward(x).cwiseProduct(w).sum()) / (2 * h);
    CHECK(grad[k] == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("penalty skips unregularized segments") {
  const std::vector<double> p{3.0, -1.0, 2.0, -4.0};
  const std::vector<ParamSegment> layout{{"affine", 0, 2, false}, {"mlp", 2, 2, true}};
  std::vector<double> g(4, 0.0);
  CHECK(add_penalty(p, layout, Penalty::L2, 0.5, g) == doctest::Approx(0.5 * (4.0 + 16.0)));
  CHECK(g == std::vector<double>{0.0, 0.0, 2.0, -4.0});
  std::fill(g.begin(), g.end(), 0.0);
  CHECK(add_penalty(p, layout, Penalty::L1, 0.5, g) == doctest::Approx(0.5 * 6.0));
  CHECK(g == std::vector<double>{0.0, 0.0, 0.5, -0.5});
}

TEST_CASE("invalid networks are rejected") {
  CHECK_THROWS_AS(Mlp({3}, Activation::Tanh), InvalidArgument);
  CHECK_THROWS_AS(Mlp({3, 0, 1}, Activation::Tanh), InvalidArgument);
  CHECK_THROWS_AS(Mlp({2, 1}, Activation::Tanh).forward(Mat::Zero(3, 1)), InvalidArgument);
  CHECK(parse_activation(to_string(Activation::Relu)) == Activation::Relu);
  CHECK_THROWS_AS(parse_activation("sigmoid"), InvalidArgument);
}
