#pragma once

#include <memory>
#include <vector>

#include "netflow/graph.hpp"
#include "netflow/nn.hpp"
#include "netflow/training.hpp"
#include "netflow/vector_field.hpp"

namespace netflow {

struct DnndArchitecture {
  std::vector<int> self_hidden{16, 16};
  std::vector<int> coupling_hidden{16, 16};
  Activation activation = Activation::Tanh;
};

/// Embedding-free network vector field
///   dx_i = F(x_i) + sum_j A_ij G(x_i, x_j)
/// with F an AffineScalarFn and G an AffinePairFn shared by all nodes and
/// edges. F and G never see the adjacency matrix; the network only decides
/// which pairs are summed.
///
/// Flat parameter order: F (c0, c1, mlp) followed by G (c0, c11, c12, mlp).
class DnndModel final : public DifferentiableField {
public:
  DnndModel(std::shared_ptr<const Network> net, AffineScalarFn self_fn, AffinePairFn coupling_fn);

  /// Glorot-initialised networks, zero affine scalars.
  static DnndModel create(std::shared_ptr<const Network> net, const DnndArchitecture& arch,
                          std::uint64_t seed);

  std::size_t dimension() const override { return static_cast<std::size_t>(net_->node_count()); }
  void velocity(const Vec& x, Vec& dx) const override;
  using VectorField::velocity;
  std::size_t parameter_count() const override;
  void vjp(const Vec& x, const Vec& dx_bar, Vec& x_bar, std::span<double> param_grad) const override;

  Eigen::VectorXd parameters() const;
  void set_parameters(std::span<const double> params);
  std::vector<ParamSegment> layout() const;

  const AffineScalarFn& self_fn() const noexcept { return self_; }
  const AffinePairFn& coupling_fn() const noexcept { return coupling_; }
  AffineScalarFn& self_fn() noexcept { return self_; }
  AffinePairFn& coupling_fn() noexcept { return coupling_; }

  const Network& network() const noexcept { return *net_; }
  std::shared_ptr<const Network> network_ptr() const noexcept { return net_; }

  /// Same F and G applied on another adjacency structure.
  DnndModel with_network(std::shared_ptr<const Network> net) const;

private:
  std::shared_ptr<const Network> net_;
  AffineScalarFn self_;
  AffinePairFn coupling_;
  // Directed pairs (i, j), j in N(i), grouped by i in CSR order.
  std::vector<int> src_;
  std::vector<int> dst_;
};

/// Loss of one rollout from the first observation plus its gradient with
/// respect to the model parameters (regularisation excluded). Returns
/// {weighted, unweighted}.
std::pair<double, double> dnnd_loss_and_gradient(const DnndModel& model, const TimeSeries& obs,
                                                 double tau, const TrainConfig& cfg,
                                                 std::span<double> grad);

/// Full-batch Adam on the warm-up weighted trajectory loss. The rollout
/// starts at the first observation (t_1, x(t_1)) and gradients are exact
/// derivatives of the RK4 computation. Throws NumericalError (Training) on a
/// non-finite loss or rollout.
TrainReport train_dnnd(DnndModel& model, const TimeSeries& obs, const WarmupSchedule& schedule,
                       const TrainConfig& cfg);

}  // namespace netflow
