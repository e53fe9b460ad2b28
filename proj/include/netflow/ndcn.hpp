#pragma once

#include <memory>
#include <utility>
#include <vector>

#include <Eigen/SparseCore>

#include "netflow/graph.hpp"
#include "netflow/integrate.hpp"
#include "netflow/nn.hpp"
#include "netflow/training.hpp"
#include "netflow/vector_field.hpp"

namespace netflow {

/// Layer widths between the fixed ends: encoder 1 -> ... -> d, latent
/// d -> ... -> d, decoder d -> ... -> 1.
struct NdcnArchitecture {
  int embed_dim = 20;
  std::vector<int> encoder_hidden{20};
  std::vector<int> latent_hidden{20};
  std::vector<int> decoder_hidden{20};
  Activation activation = Activation::Tanh;
};

/// Latent system dH/dt = f(L H) with f applied to each node's row of L H.
/// The state stacks the d-dimensional embeddings node by node (entry
/// i * d + k is coordinate k of node i).
class NdcnLatentField final : public DifferentiableField {
public:
  NdcnLatentField(const Eigen::SparseMatrix<double>& laplacian, const Mlp& f);

  std::size_t dimension() const override;
  void velocity(const Vec& h, Vec& dh) const override;
  using VectorField::velocity;
  std::size_t parameter_count() const override { return f_->parameter_count(); }
  void vjp(const Vec& h, const Vec& dh_bar, Vec& h_bar, std::span<double> param_grad) const override;

private:
  const Eigen::SparseMatrix<double>* laplacian_;
  const Mlp* f_;
};

/// Encoder / latent Laplacian dynamics / decoder baseline. Encoder and
/// decoder are independent networks applied to each node separately.
///
/// Flat parameter order: encoder, latent network, decoder.
class NdcnModel {
public:
  NdcnModel(std::shared_ptr<const Network> net, Mlp encoder, Mlp latent, Mlp decoder);

  static NdcnModel create(std::shared_ptr<const Network> net, const NdcnArchitecture& arch,
                          std::uint64_t seed);

  NdcnModel(const NdcnModel& other);
  NdcnModel& operator=(const NdcnModel& other);
  NdcnModel(NdcnModel&& other);
  NdcnModel& operator=(NdcnModel&& other);

  int embed_dim() const { return encoder_.output_dim(); }
  std::size_t node_count() const { return static_cast<std::size_t>(net_->node_count()); }
  const Network& network() const noexcept { return *net_; }
  std::shared_ptr<const Network> network_ptr() const noexcept { return net_; }

  const Mlp& encoder() const noexcept { return encoder_; }
  const Mlp& latent() const noexcept { return latent_; }
  const Mlp& decoder() const noexcept { return decoder_; }
  Mlp& encoder() noexcept { return encoder_; }
  Mlp& latent() noexcept { return latent_; }
  Mlp& decoder() noexcept { return decoder_; }

  /// Initial state of the training data; empty before training.
  const Vec& x0_cache() const noexcept { return x0_cache_; }
  double t0_cache() const noexcept { return t0_cache_; }
  void set_x0_cache(Vec x0, double t0);

  std::size_t parameter_count() const;
  Eigen::VectorXd parameters() const;
  void set_parameters(std::span<const double> params);
  std::vector<ParamSegment> layout() const;

  /// Node states -> stacked latent state (size n * d).
  Vec encode(const Vec& x) const;
  /// Stacked latent state -> node states.
  Vec decode(const Vec& h) const;

  const NdcnLatentField& latent_field() const noexcept { return *field_; }
  const Eigen::SparseMatrix<double>& laplacian_matrix() const noexcept { return *laplacian_; }

private:
  std::shared_ptr<const Network> net_;
  Mlp encoder_;
  Mlp latent_;
  Mlp decoder_;
  std::shared_ptr<const Eigen::SparseMatrix<double>> laplacian_;
  std::unique_ptr<NdcnLatentField> field_;
  Vec x0_cache_;
  double t0_cache_ = 0.0;
};

/// Encode x0, integrate the latent system with RKF45 from t0, decode at each
/// evaluation time.
TimeSeries ndcn_predict(const NdcnModel& model, const Vec& x0, std::span<const double> eval_times,
                        const SolverConfig& cfg = {}, double t0 = 0.0);

/// Series A runs straight from (0, x0); series B restarts at t_split from the
/// decoded state of A, re-encoded. Both are reported at `eval_times`, which
/// must lie in [t_split, t_end]. t_split = 0 gives identical series.
std::pair<TimeSeries, TimeSeries> ndcn_flow_branch(const NdcnModel& model, const Vec& x0,
                                                   double t_split, double t_end,
                                                   std::span<const double> eval_times,
                                                   const SolverConfig& cfg = {});

/// Loss of one rollout (encode the first observation, RK4 in latent space,
/// decode every observation time) and its gradient. Returns {weighted,
/// unweighted}.
std::pair<double, double> ndcn_loss_and_gradient(const NdcnModel& model, const TimeSeries& obs,
                                                 double tau, const TrainConfig& cfg,
                                                 std::span<double> grad);

/// Full-batch Adam as train_dnnd. Pass WarmupSchedule::disabled() for the
/// plain loss. Stores the first observation as the model's x0 cache.
TrainReport train_ndcn(NdcnModel& model, const TimeSeries& obs, const WarmupSchedule& schedule,
                       const TrainConfig& cfg);

}  // namespace netflow
