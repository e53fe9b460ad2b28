#include "netflow/dynamics.hpp"

#include <cmath>

#include "netflow/error.hpp"

namespace netflow {

std::string to_string(DynamicsKind kind) {
  switch (kind) {
    case DynamicsKind::Heat: return "heat";
    case DynamicsKind::Biochemical: return "biochemical";
    case DynamicsKind::BirthDeath: return "birthdeath";
  }
  return "unknown";
}

DynamicsKind parse_dynamics_kind(const std::string& name) {
  if (name == "heat") return DynamicsKind::Heat;
  if (name == "biochemical") return DynamicsKind::Biochemical;
  if (name == "birthdeath") return DynamicsKind::BirthDeath;
  throw InvalidArgument("unknown dynamics '" + name + "' (expected heat|biochemical|birthdeath)");
}

double DynamicsSpec::self_term(double x) const {
  switch (kind) {
    case DynamicsKind::Heat: return 0.0;
    case DynamicsKind::Biochemical: return bio_source - bio_decay * x;
    case DynamicsKind::BirthDeath: return -bd_decay * x * x;
  }
  return 0.0;
}

double DynamicsSpec::coupling_term(double xi, double xj) const {
  switch (kind) {
    case DynamicsKind::Heat: return -alpha * xi + alpha * xj;
    case DynamicsKind::Biochemical: return -bio_coupling * xi * xj;
    case DynamicsKind::BirthDeath: return bd_coupling * xj;
  }
  return 0.0;
}

void DynamicsSpec::validate() const {
  for (double c : {alpha, bio_source, bio_decay, bio_coupling, bd_decay, bd_coupling})
    if (!std::isfinite(c)) throw InvalidArgument("dynamics rate constants must be finite");
}

NetworkField::NetworkField(std::shared_ptr<const Network> net, DynamicsSpec spec)
    : net_(std::move(net)), spec_(spec) {
  if (!net_) throw InvalidArgument("null network");
  spec_.validate();
}

void NetworkField::velocity(const Vec& x, Vec& dx) const {
  const int n = net_->node_count();
  if (x.size() != n) throw InvalidArgument("state dimension does not match network");
  dx.resize(n);
  const auto& off = net_->csr_offsets();
  const auto& idx = net_->csr_indices();
  for (int i = 0; i < n; ++i) {
    const double xi = x[i];
    if (spec_.kind == DynamicsKind::Heat) {
      // Summing differences keeps the velocity exactly zero on a uniform state.
      double diff = 0.0;
      for (int k = off[i]; k < off[i + 1]; ++k) diff += x[idx[k]] - xi;
      dx[i] = spec_.alpha * diff;
      continue;
    }
    double nb_sum = 0.0;
    for (int k = off[i]; k < off[i + 1]; ++k) nb_sum += x[idx[k]];
    switch (spec_.kind) {
      case DynamicsKind::Heat:
        break;
      case DynamicsKind::Biochemical:
        dx[i] = spec_.bio_source - spec_.bio_decay * xi - spec_.bio_coupling * xi * nb_sum;
        break;
      case DynamicsKind::BirthDeath:
        dx[i] = -spec_.bd_decay * xi * xi + spec_.bd_coupling * nb_sum;
        break;
    }
  }
}

std::unique_ptr<NetworkField> heat_field(std::shared_ptr<const Network> net, double alpha) {
  DynamicsSpec s = DynamicsSpec::defaults(DynamicsKind::Heat);
  s.alpha = alpha;
  return std::make_unique<NetworkField>(std::move(net), s);
}

std::unique_ptr<NetworkField> biochemical_field(std::shared_ptr<const Network> net) {
  return std::make_unique<NetworkField>(std::move(net), DynamicsSpec::defaults(DynamicsKind::Biochemical));
}

std::unique_ptr<NetworkField> birthdeath_field(std::shared_ptr<const Network> net) {
  return std::make_unique<NetworkField>(std::move(net), DynamicsSpec::defaults(DynamicsKind::BirthDeath));
}

}  // namespace netflow
