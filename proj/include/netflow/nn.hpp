#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace netflow {

using Mat = Eigen::MatrixXd;

enum class Activation { Tanh, Relu };

std::string to_string(Activation act);
Activation parse_activation(const std::string& name);

/// Element-wise tanh by a branch-free polynomial kernel, absolute error below
/// 1e-15. std::tanh on doubles is scalar code and dominates training time.
void tanh_inplace(Mat& z);

/// Contiguous named slice of a model's flat parameter vector.
struct ParamSegment {
  std::string name;
  std::size_t offset;
  std::size_t size;
  bool regularized;  // true for neural-network weights, false for affine scalars
};

/// Fully connected network; hidden layers use `activation`, the output layer
/// is linear. Inputs are batched column-wise: an input matrix is d_in x B.
///
/// Flat parameter order: for each layer, the weight matrix (d_out x d_in) in
/// row-major order, then its bias vector.
class Mlp {
public:
  /// Intermediate activations of a batched forward pass, kept for backward().
  struct Tape {
    std::vector<Mat> activations;  // [0] is the input, [l] the output of layer l-1
  };

  Mlp() = default;
  /// All parameters zero. dims = {d_in, hidden..., d_out}, at least two entries.
  Mlp(std::vector<int> dims, Activation activation);

  /// Glorot-uniform weights, zero biases; deterministic in `seed`.
  static Mlp glorot(std::vector<int> dims, Activation activation, std::uint64_t seed);

  const std::vector<int>& dims() const noexcept { return dims_; }
  int input_dim() const { return dims_.front(); }
  int output_dim() const { return dims_.back(); }
  std::size_t layer_count() const noexcept { return weights_.size(); }
  Activation activation() const noexcept { return activation_; }
  std::size_t parameter_count() const;

  Mat& weights(std::size_t layer) { return weights_.at(layer); }
  const Mat& weights(std::size_t layer) const { return weights_.at(layer); }
  Eigen::VectorXd& bias(std::size_t layer) { return biases_.at(layer); }
  const Eigen::VectorXd& bias(std::size_t layer) const { return biases_.at(layer); }

  void pack(std::span<double> out) const;
  void unpack(std::span<const double> in);

  Mat forward(const Mat& inputs) const;
  Mat forward(const Mat& inputs, Tape& tape) const;
  Eigen::VectorXd forward_one(const Eigen::VectorXd& input) const;

  /// Reverse pass for the batch recorded in `tape`. Parameter cotangents are
  /// added into `grad` (size parameter_count()); the input cotangent is
  /// written to `input_bar` when non-null.
  void backward(const Tape& tape, const Mat& output_bar, Mat* input_bar,
                std::span<double> grad) const;

private:
  void apply_activation(Mat& z) const;

  std::vector<int> dims_;
  Activation activation_ = Activation::Tanh;
  std::vector<Mat> weights_;
  std::vector<Eigen::VectorXd> biases_;
};

/// F(x) = c0 + c1 x + mlp(x) on scalars. Parameters: c0, c1, then the mlp.
struct AffineScalarFn {
  double c0 = 0.0;
  double c1 = 0.0;
  Mlp mlp;

  AffineScalarFn() = default;
  explicit AffineScalarFn(Mlp net);

  std::size_t parameter_count() const { return 2 + mlp.parameter_count(); }
  void pack(std::span<double> out) const;
  void unpack(std::span<const double> in);

  /// x is 1 x B.
  Mat forward(const Mat& x) const;
  Mat forward(const Mat& x, Mlp::Tape& tape) const;
  double value(double x) const;
  void backward(const Mlp::Tape& tape, const Mat& output_bar, Mat* input_bar,
                std::span<double> grad) const;
};

/// G(x1, x2) = c0 + c11 x1 + c12 x2 + mlp(x1, x2). Parameters: c0, c11, c12,
/// then the mlp.
struct AffinePairFn {
  double c0 = 0.0;
  double c11 = 0.0;
  double c12 = 0.0;
  Mlp mlp;

  AffinePairFn() = default;
  explicit AffinePairFn(Mlp net);

  std::size_t parameter_count() const { return 3 + mlp.parameter_count(); }
  void pack(std::span<double> out) const;
  void unpack(std::span<const double> in);

  /// x is 2 x B.
  Mat forward(const Mat& x) const;
  Mat forward(const Mat& x, Mlp::Tape& tape) const;
  double value(double x1, double x2) const;
  void backward(const Mlp::Tape& tape, const Mat& output_bar, Mat* input_bar,
                std::span<double> grad) const;
};

/// Penalty over the regularized segments of `params`: weight * sum theta^2
/// (l2) or weight * sum |theta| (l1). Adds its gradient into `grad`.
enum class Penalty { L2, L1 };
double add_penalty(std::span<const double> params, const std::vector<ParamSegment>& layout,
                   Penalty kind, double weight, std::span<double> grad);

}  // namespace netflow
