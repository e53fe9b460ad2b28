#include "netflow/nn.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>

#include "netflow/error.hpp"
#include "netflow/rng.hpp"

namespace netflow {

using RowMajorMap = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using ConstRowMajorMap =
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

std::string to_string(Activation act) { return act == Activation::Tanh ? "tanh" : "relu"; }

Activation parse_activation(const std::string& name) {
  if (name == "tanh") return Activation::Tanh;
  if (name == "relu") return Activation::Relu;
  throw InvalidArgument("unknown activation '" + name + "'");
}

void tanh_inplace(Mat& z) {
  // tanh|x| = (1 - e) / (1 + e) with e = exp(-2|x|) <= 1, so nothing
  // overflows. exp is evaluated by range reduction against ln 2 and a
  // degree-12 Taylor polynomial (abs. error ~3e-16); the loop is branch-free
  // so it vectorises.
  constexpr double log2e = 1.4426950408889634;
  constexpr double ln2_hi = 6.93147180369123816490e-01;
  constexpr double ln2_lo = 1.90821492927058770002e-10;
  constexpr double shifter = 6755399441055744.0;  // 1.5 * 2^52, rounds to integer
  constexpr std::uint64_t sign_mask = 0x8000000000000000ULL;
  double* data = z.data();
  const Eigen::Index size = z.size();
  for (Eigen::Index i = 0; i < size; ++i) {
    const double x = data[i];
    const double t = -2.0 * std::min(std::fabs(x), 20.0);
    const double shifted = t * log2e + shifter;
    const double k = shifted - shifter;
    const double r = (t - k * ln2_hi) - k * ln2_lo;
    double p = 1.0 / 479001600.0;
    p = p * r + 1.0 / 39916800.0;
    p = p * r + 1.0 / 3628800.0;
    p = p * r + 1.0 / 362880.0;
    p = p * r + 1.0 / 40320.0;
    p = p * r + 1.0 / 5040.0;
    p = p * r + 1.0 / 720.0;
    p = p * r + 1.0 / 120.0;
    p = p * r + 1.0 / 24.0;
    p = p * r + 1.0 / 6.0;
    p = p * r + 0.5;
    p = p * r + 1.0;
    p = p * r + 1.0;
    // 2^k from the integer sitting in the low mantissa bits of `shifted`.
    const double scale = std::bit_cast<double>((std::bit_cast<std::int64_t>(shifted) + 1023) << 52);
    const double e = p * scale;
    const double v = (1.0 - e) / (1.0 + e);
    data[i] = std::bit_cast<double>(std::bit_cast<std::uint64_t>(v) |
                                    (std::bit_cast<std::uint64_t>(x) & sign_mask));
  }
}

Mlp::Mlp(std::vector<int> dims, Activation activation)
    : dims_(std::move(dims)), activation_(activation) {
  if (dims_.size() < 2) throw InvalidArgument("mlp needs at least input and output dims");
  for (int d : dims_)
    if (d < 1) throw InvalidArgument("mlp layer dims must be positive");
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    weights_.push_back(Mat::Zero(dims_[l + 1], dims_[l]));
    biases_.push_back(Eigen::VectorXd::Zero(dims_[l + 1]));
  }
}

Mlp Mlp::glorot(std::vector<int> dims, Activation activation, std::uint64_t seed) {
  Mlp net(std::move(dims), activation);
  Rng rng(seed);
  for (auto& w : net.weights_) {
    const double limit = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = rng.uniform(-limit, limit);
  }
  return net;
}

std::size_t Mlp::parameter_count() const {
  std::size_t count = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l)
    count += static_cast<std::size_t>(weights_[l].size() + biases_[l].size());
  return count;
}

void Mlp::pack(std::span<double> out) const {
  if (out.size() != parameter_count()) throw InvalidArgument("mlp pack: size mismatch");
  std::size_t pos = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    const auto& w = weights_[l];
    RowMajorMap(out.data() + pos, w.rows(), w.cols()) = w;
    pos += w.size();
    Eigen::Map<Eigen::VectorXd>(out.data() + pos, biases_[l].size()) = biases_[l];
    pos += biases_[l].size();
  }
}

void Mlp::unpack(std::span<const double> in) {
  if (in.size() != parameter_count()) throw InvalidArgument("mlp unpack: size mismatch");
  std::size_t pos = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    auto& w = weights_[l];
    w = ConstRowMajorMap(in.data() + pos, w.rows(), w.cols());
    pos += w.size();
    biases_[l] = Eigen::Map<const Eigen::VectorXd>(in.data() + pos, biases_[l].size());
    pos += biases_[l].size();
  }
}

void Mlp::apply_activation(Mat& z) const {
  if (activation_ == Activation::Tanh)
    tanh_inplace(z);
  else
    z = z.cwiseMax(0.0);
}

Mat Mlp::forward(const Mat& inputs) const {
  if (inputs.rows() != input_dim()) throw InvalidArgument("mlp forward: input dimension mismatch");
  Mat a = inputs;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    Mat z = weights_[l] * a;
    z.colwise() += biases_[l];
    if (l + 1 < weights_.size()) apply_activation(z);
    a = std::move(z);
  }
  return a;
}

Mat Mlp::forward(const Mat& inputs, Tape& tape) const {
  if (inputs.rows() != input_dim()) throw InvalidArgument("mlp forward: input dimension mismatch");
  tape.activations.resize(weights_.size() + 1);
  tape.activations[0] = inputs;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    Mat& z = tape.activations[l + 1];
    z.noalias() = weights_[l] * tape.activations[l];
    z.colwise() += biases_[l];
    if (l + 1 < weights_.size()) apply_activation(z);
  }
  return tape.activations.back();
}

Eigen::VectorXd Mlp::forward_one(const Eigen::VectorXd& input) const {
  return forward(Mat(input)).col(0);
}

void Mlp::backward(const Tape& tape, const Mat& output_bar, Mat* input_bar,
                   std::span<double> grad) const {
  if (grad.size() != parameter_count()) throw InvalidArgument("mlp backward: gradient size mismatch");
  if (tape.activations.size() != weights_.size() + 1)
    throw InvalidArgument("mlp backward: tape does not match network");
  if (output_bar.rows() != output_dim() || output_bar.cols() != tape.activations[0].cols())
    throw InvalidArgument("mlp backward: cotangent shape mismatch");

  // Parameter offsets per layer.
  std::vector<std::size_t> offset(weights_.size());
  std::size_t pos = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    offset[l] = pos;
    pos += static_cast<std::size_t>(weights_[l].size() + biases_[l].size());
  }

  Mat delta = output_bar;
  for (std::size_t l = weights_.size(); l-- > 0;) {
    const Mat& a_prev = tape.activations[l];
    const auto& w = weights_[l];
    RowMajorMap gw(grad.data() + offset[l], w.rows(), w.cols());
    gw.noalias() += delta * a_prev.transpose();
    Eigen::Map<Eigen::VectorXd>(grad.data() + offset[l] + w.size(), w.rows()) += delta.rowwise().sum();
    if (l == 0) {
      if (input_bar) input_bar->noalias() = w.transpose() * delta;
      break;
    }
    Mat prev = w.transpose() * delta;
    if (activation_ == Activation::Tanh)
      prev.array() *= 1.0 - a_prev.array().square();
    else
      prev.array() *= (a_prev.array() > 0.0).cast<double>();
    delta = std::move(prev);
  }
}

AffineScalarFn::AffineScalarFn(Mlp net) : mlp(std::move(net)) {
  if (mlp.input_dim() != 1 || mlp.output_dim() != 1)
    throw InvalidArgument("affine scalar function needs a 1 -> 1 mlp");
}

void AffineScalarFn::pack(std::span<double> out) const {
  if (out.size() != parameter_count()) throw InvalidArgument("pack: size mismatch");
  out[0] = c0;
  out[1] = c1;
  mlp.pack(out.subspan(2));
}

void AffineScalarFn::unpack(std::span<const double> in) {
  if (in.size() != parameter_count()) throw InvalidArgument("unpack: size mismatch");
  c0 = in[0];
  c1 = in[1];
  mlp.unpack(in.subspan(2));
}

Mat AffineScalarFn::forward(const Mat& x) const {
  Mat out = mlp.forward(x);
  out.array() += c0 + c1 * x.array();
  return out;
}

Mat AffineScalarFn::forward(const Mat& x, Mlp::Tape& tape) const {
  Mat out = mlp.forward(x, tape);
  out.array() += c0 + c1 * x.array();
  return out;
}

double AffineScalarFn::value(double x) const { return forward(Mat::Constant(1, 1, x))(0, 0); }

void AffineScalarFn::backward(const Mlp::Tape& tape, const Mat& output_bar, Mat* input_bar,
                              std::span<double> grad) const {
  if (grad.size() != parameter_count()) throw InvalidArgument("backward: gradient size mismatch");
  const Mat& x = tape.activations.at(0);
  grad[0] += output_bar.sum();
  grad[1] += (output_bar.array() * x.array()).sum();
  mlp.backward(tape, output_bar, input_bar, grad.subspan(2));
  if (input_bar) *input_bar += c1 * output_bar;
}

AffinePairFn::AffinePairFn(Mlp net) : mlp(std::move(net)) {
  if (mlp.input_dim() != 2 || mlp.output_dim() != 1)
    throw InvalidArgument("affine pair function needs a 2 -> 1 mlp");
}

void AffinePairFn::pack(std::span<double> out) const {
  if (out.size() != parameter_count()) throw InvalidArgument("pack: size mismatch");
  out[0] = c0;
  out[1] = c11;
  out[2] = c12;
  mlp.pack(out.subspan(3));
}

void AffinePairFn::unpack(std::span<const double> in) {
  if (in.size() != parameter_count()) throw InvalidArgument("unpack: size mismatch");
  c0 = in[0];
  c11 = in[1];
  c12 = in[2];
  mlp.unpack(in.subspan(3));
}

Mat AffinePairFn::forward(const Mat& x) const {
  Mat out = mlp.forward(x);
  out.array() += c0 + c11 * x.row(0).array() + c12 * x.row(1).array();
  return out;
}

Mat AffinePairFn::forward(const Mat& x, Mlp::Tape& tape) const {
  Mat out = mlp.forward(x, tape);
  out.array() += c0 + c11 * x.row(0).array() + c12 * x.row(1).array();
  return out;
}

double AffinePairFn::value(double x1, double x2) const {
  Mat x(2, 1);
  x << x1, x2;
  return forward(x)(0, 0);
}

void AffinePairFn::backward(const Mlp::Tape& tape, const Mat& output_bar, Mat* input_bar,
                            std::span<double> grad) const {
  if (grad.size() != parameter_count()) throw InvalidArgument("backward: gradient size mismatch");
  const Mat& x = tape.activations.at(0);
  grad[0] += output_bar.sum();
  grad[1] += (output_bar.array() * x.row(0).array()).sum();
  grad[2] += (output_bar.array() * x.row(1).array()).sum();
  mlp.backward(tape, output_bar, input_bar, grad.subspan(3));
  if (input_bar) {
    input_bar->row(0) += c11 * output_bar;
    input_bar->row(1) += c12 * output_bar;
  }
}

double add_penalty(std::span<const double> params, const std::vector<ParamSegment>& layout,
                   Penalty kind, double weight, std::span<double> grad) {
  if (weight == 0.0) return 0.0;
  double value = 0.0;
  for (const auto& seg : layout) {
    if (!seg.regularized) continue;
    for (std::size_t i = seg.offset; i < seg.offset + seg.size; ++i) {
      const double p = params[i];
      if (kind == Penalty::L2) {
        value += weight * p * p;
        grad[i] += 2.0 * weight * p;
      } else {
        value += weight * std::abs(p);
        grad[i] += weight * ((p > 0.0) - (p < 0.0));
      }
    }
  }
  return value;
}

}  // namespace netflow
