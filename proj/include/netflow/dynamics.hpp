#pragma once

#include <memory>
#include <string>

#include "netflow/graph.hpp"
#include "netflow/vector_field.hpp"

namespace netflow {

enum class DynamicsKind { Heat, Biochemical, BirthDeath };

std::string to_string(DynamicsKind kind);
DynamicsKind parse_dynamics_kind(const std::string& name);

/// Rate constants of the ground-truth systems. Defaults reproduce the
/// reference parameterisation:
///   heat         dx_i = -alpha * sum_j A_ij (x_i - x_j)
///   biochemical  dx_i = source - decay * x_i - coupling * sum_j A_ij x_i x_j
///   birth-death  dx_i = -decay * x_i^2 + coupling * sum_j A_ij x_j
struct DynamicsSpec {
  DynamicsKind kind = DynamicsKind::Heat;
  double alpha = 0.1;
  double bio_source = 1.0;
  double bio_decay = 0.1;
  double bio_coupling = 0.01;
  double bd_decay = 0.1;
  double bd_coupling = 0.2;

  static DynamicsSpec defaults(DynamicsKind kind) {
    DynamicsSpec s;
    s.kind = kind;
    return s;
  }

  /// Self term Psi_N(x) of the additive split dx_i = Psi_N(x_i) + sum_j A_ij Psi_e(x_i, x_j).
  double self_term(double x) const;
  /// Pairwise coupling term Psi_e(x_i, x_j).
  double coupling_term(double xi, double xj) const;

  void validate() const;

  bool operator==(const DynamicsSpec&) const = default;
};

/// Ground-truth field on a fixed network; evaluation walks neighbor lists.
class NetworkField final : public VectorField {
public:
  NetworkField(std::shared_ptr<const Network> net, DynamicsSpec spec);

  std::size_t dimension() const override { return net_->node_count(); }
  void velocity(const Vec& x, Vec& dx) const override;
  using VectorField::velocity;

  const DynamicsSpec& spec() const noexcept { return spec_; }
  const Network& network() const noexcept { return *net_; }

private:
  std::shared_ptr<const Network> net_;
  DynamicsSpec spec_;
};

std::unique_ptr<NetworkField> heat_field(std::shared_ptr<const Network> net, double alpha = 0.1);
std::unique_ptr<NetworkField> biochemical_field(std::shared_ptr<const Network> net);
std::unique_ptr<NetworkField> birthdeath_field(std::shared_ptr<const Network> net);

}  // namespace netflow
