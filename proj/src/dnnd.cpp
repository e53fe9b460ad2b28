#include "netflow/dnnd.hpp"

#include <cmath>

#include "netflow/error.hpp"
#include "netflow/io.hpp"

namespace netflow {

namespace {

std::vector<int> with_io(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> dims{in};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(out);
  return dims;
}

}  // namespace

DnndModel::DnndModel(std::shared_ptr<const Network> net, AffineScalarFn self_fn,
                     AffinePairFn coupling_fn)
    : net_(std::move(net)), self_(std::move(self_fn)), coupling_(std::move(coupling_fn)) {
  if (!net_) throw InvalidArgument("dnnd: null network");
  if (self_.mlp.input_dim() != 1 || self_.mlp.output_dim() != 1)
    throw InvalidArgument("dnnd: self term must be a 1 -> 1 network");
  if (coupling_.mlp.input_dim() != 2 || coupling_.mlp.output_dim() != 1)
    throw InvalidArgument("dnnd: coupling term must be a 2 -> 1 network");
  const auto& off = net_->csr_offsets();
  const auto& idx = net_->csr_indices();
  src_.reserve(idx.size());
  dst_.reserve(idx.size());
  for (int i = 0; i < net_->node_count(); ++i)
    for (int k = off[i]; k < off[i + 1]; ++k) {
      src_.push_back(i);
      dst_.push_back(idx[k]);
    }
}

DnndModel DnndModel::create(std::shared_ptr<const Network> net, const DnndArchitecture& arch,
                            std::uint64_t seed) {
  AffineScalarFn f(Mlp::glorot(with_io(1, arch.self_hidden, 1), arch.activation, seed));
  // Distinct stream for G so F and G are not initialised identically.
  AffinePairFn g(Mlp::glorot(with_io(2, arch.coupling_hidden, 1), arch.activation,
                             seed ^ 0x9e3779b97f4a7c15ULL));
  return DnndModel(std::move(net), std::move(f), std::move(g));
}

std::size_t DnndModel::parameter_count() const {
  return self_.parameter_count() + coupling_.parameter_count();
}

Eigen::VectorXd DnndModel::parameters() const {
  Eigen::VectorXd p(static_cast<Eigen::Index>(parameter_count()));
  std::span<double> all(p.data(), parameter_count());
  self_.pack(all.first(self_.parameter_count()));
  coupling_.pack(all.subspan(self_.parameter_count()));
  return p;
}

void DnndModel::set_parameters(std::span<const double> params) {
  if (params.size() != parameter_count()) throw InvalidArgument("dnnd: parameter size mismatch");
  self_.unpack(params.first(self_.parameter_count()));
  coupling_.unpack(params.subspan(self_.parameter_count()));
}

std::vector<ParamSegment> DnndModel::layout() const {
  const std::size_t nf = self_.parameter_count();
  const std::size_t ng = coupling_.parameter_count();
  return {
      {"F.affine", 0, 2, false},
      {"F.mlp", 2, nf - 2, true},
      {"G.affine", nf, 3, false},
      {"G.mlp", nf + 3, ng - 3, true},
  };
}

DnndModel DnndModel::with_network(std::shared_ptr<const Network> net) const {
  return DnndModel(std::move(net), self_, coupling_);
}

void DnndModel::velocity(const Vec& x, Vec& dx) const {
  const int n = net_->node_count();
  if (x.size() != n) throw InvalidArgument("dnnd: state dimension mismatch");
  const Mat self_out = self_.forward(x.transpose());
  const auto m = static_cast<Eigen::Index>(src_.size());
  Mat pairs(2, m);
  for (Eigen::Index e = 0; e < m; ++e) {
    pairs(0, e) = x[src_[e]];
    pairs(1, e) = x[dst_[e]];
  }
  const Mat pair_out = coupling_.forward(pairs);
  dx.resize(n);
  const auto& off = net_->csr_offsets();
  for (int i = 0; i < n; ++i) {
    double s = self_out(0, i);
    for (int e = off[i]; e < off[i + 1]; ++e) s += pair_out(0, e);
    dx[i] = s;
  }
}

void DnndModel::vjp(const Vec& x, const Vec& dx_bar, Vec& x_bar, std::span<double> param_grad) const {
  const int n = net_->node_count();
  if (x.size() != n || dx_bar.size() != n || x_bar.size() != n)
    throw InvalidArgument("dnnd vjp: dimension mismatch");
  if (param_grad.size() != parameter_count()) throw InvalidArgument("dnnd vjp: gradient size mismatch");
  const std::size_t nf = self_.parameter_count();

  Mlp::Tape tape;
  self_.forward(x.transpose(), tape);
  Mat in_bar;
  self_.backward(tape, dx_bar.transpose(), &in_bar, param_grad.first(nf));
  x_bar += in_bar.transpose();

  const auto m = static_cast<Eigen::Index>(src_.size());
  if (m == 0) return;
  Mat pairs(2, m);
  Mat out_bar(1, m);
  for (Eigen::Index e = 0; e < m; ++e) {
    pairs(0, e) = x[src_[e]];
    pairs(1, e) = x[dst_[e]];
    out_bar(0, e) = dx_bar[src_[e]];
  }
  coupling_.forward(pairs, tape);
  coupling_.backward(tape, out_bar, &in_bar, param_grad.subspan(nf));
  for (Eigen::Index e = 0; e < m; ++e) {
    x_bar[src_[e]] += in_bar(0, e);
    x_bar[dst_[e]] += in_bar(1, e);
  }
}

std::pair<double, double> dnnd_loss_and_gradient(const DnndModel& model, const TimeSeries& obs,
                                                 double tau, const TrainConfig& cfg,
                                                 std::span<double> grad) {
  if (obs.dimension() != static_cast<Eigen::Index>(model.dimension()))
    throw InvalidArgument("dnnd: observation dimension does not match the network");
  if (obs.length() == 0) throw InvalidArgument("dnnd: empty observation series");
  Rk4Tape tape;
  const TimeSeries pred =
      rk4_rollout(model, obs.state(0), obs.times, cfg.substeps_per_obs, obs.times.front(), tape);
  Eigen::MatrixXd pred_bar;
  const double weighted = weighted_loss(pred, obs, tau, cfg.loss, &pred_bar);
  const double unweighted =
      std::isinf(tau) ? weighted : weighted_loss(pred, obs, std::numeric_limits<double>::infinity(), cfg.loss);
  Vec x0_bar = Vec::Zero(static_cast<Eigen::Index>(model.dimension()));
  rk4_backward(model, tape, pred_bar, x0_bar, grad);
  return {weighted, unweighted};
}

TrainReport train_dnnd(DnndModel& model, const TimeSeries& obs, const WarmupSchedule& schedule,
                       const TrainConfig& cfg) {
  cfg.validate();
  schedule.validate();
  obs.validate();
  if (obs.dimension() != static_cast<Eigen::Index>(model.dimension()))
    throw InvalidArgument("dnnd: observation dimension does not match the network");
  if (obs.length() == 0 || obs.times.front() < 0.0)
    throw InvalidArgument("dnnd: observations must start at t >= 0");

  return run_adam_training(
      model.parameters(), model.layout(), schedule, cfg,
      [&](double tau, std::span<double> grad) { return dnnd_loss_and_gradient(model, obs, tau, cfg, grad); },
      [&](std::span<const double> p) { model.set_parameters(p); });
}

}  // namespace netflow
