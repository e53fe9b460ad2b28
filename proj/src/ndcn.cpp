#include "netflow/ndcn.hpp"

#include <cmath>
#include <limits>

#include "netflow/error.hpp"

namespace netflow {

namespace {

std::vector<int> with_io(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> dims{in};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(out);
  return dims;
}

// Views a stacked latent vector as the d x n matrix whose column i is node i.
Eigen::Map<const Mat> as_embedding(const Vec& h, Eigen::Index d) {
  return {h.data(), d, h.size() / d};
}

}  // namespace

NdcnLatentField::NdcnLatentField(const Eigen::SparseMatrix<double>& laplacian, const Mlp& f)
    : laplacian_(&laplacian), f_(&f) {}

std::size_t NdcnLatentField::dimension() const {
  return static_cast<std::size_t>(laplacian_->rows()) * static_cast<std::size_t>(f_->input_dim());
}

void NdcnLatentField::velocity(const Vec& h, Vec& dh) const {
  if (static_cast<std::size_t>(h.size()) != dimension())
    throw InvalidArgument("ndcn: latent dimension mismatch");
  // Columns are nodes, so (L H)^T = H^T L for the symmetric Laplacian.
  const Mat z = as_embedding(h, f_->input_dim()) * (*laplacian_);
  const Mat out = f_->forward(z);
  dh = Eigen::Map<const Vec>(out.data(), out.size());
}

void NdcnLatentField::vjp(const Vec& h, const Vec& dh_bar, Vec& h_bar,
                          std::span<double> param_grad) const {
  const auto d = static_cast<Eigen::Index>(f_->input_dim());
  if (static_cast<std::size_t>(h.size()) != dimension() || dh_bar.size() != h.size() ||
      h_bar.size() != h.size())
    throw InvalidArgument("ndcn vjp: dimension mismatch");
  if (param_grad.size() != parameter_count()) throw InvalidArgument("ndcn vjp: gradient size mismatch");
  Mlp::Tape tape;
  f_->forward(as_embedding(h, d) * (*laplacian_), tape);
  Mat z_bar;
  f_->backward(tape, as_embedding(dh_bar, d), &z_bar, param_grad);
  const Mat back = z_bar * (*laplacian_);
  h_bar += Eigen::Map<const Vec>(back.data(), back.size());
}

NdcnModel::NdcnModel(std::shared_ptr<const Network> net, Mlp encoder, Mlp latent, Mlp decoder)
    : net_(std::move(net)),
      encoder_(std::move(encoder)),
      latent_(std::move(latent)),
      decoder_(std::move(decoder)) {
  if (!net_) throw InvalidArgument("ndcn: null network");
  const int d = encoder_.output_dim();
  if (encoder_.input_dim() != 1) throw InvalidArgument("ndcn: encoder must take one input per node");
  if (latent_.input_dim() != d || latent_.output_dim() != d)
    throw InvalidArgument("ndcn: latent network must map the embedding dimension to itself");
  if (decoder_.input_dim() != d || decoder_.output_dim() != 1)
    throw InvalidArgument("ndcn: decoder must map the embedding to one output");
  laplacian_ = std::make_shared<const Eigen::SparseMatrix<double>>(laplacian(*net_));
  field_ = std::make_unique<NdcnLatentField>(*laplacian_, latent_);
}

NdcnModel NdcnModel::create(std::shared_ptr<const Network> net, const NdcnArchitecture& arch,
                            std::uint64_t seed) {
  if (arch.embed_dim < 1) throw InvalidArgument("ndcn: embedding dimension must be positive");
  const int d = arch.embed_dim;
  return NdcnModel(std::move(net), Mlp::glorot(with_io(1, arch.encoder_hidden, d), arch.activation, seed),
                   Mlp::glorot(with_io(d, arch.latent_hidden, d), arch.activation,
                               seed ^ 0x9e3779b97f4a7c15ULL),
                   Mlp::glorot(with_io(d, arch.decoder_hidden, 1), arch.activation,
                               seed ^ 0xc2b2ae3d27d4eb4fULL));
}

NdcnModel::NdcnModel(const NdcnModel& other)
    : net_(other.net_),
      encoder_(other.encoder_),
      latent_(other.latent_),
      decoder_(other.decoder_),
      laplacian_(other.laplacian_),
      field_(std::make_unique<NdcnLatentField>(*laplacian_, latent_)),
      x0_cache_(other.x0_cache_),
      t0_cache_(other.t0_cache_) {}

NdcnModel::NdcnModel(NdcnModel&& other)
    : net_(std::move(other.net_)),
      encoder_(std::move(other.encoder_)),
      latent_(std::move(other.latent_)),
      decoder_(std::move(other.decoder_)),
      laplacian_(std::move(other.laplacian_)),
      field_(std::make_unique<NdcnLatentField>(*laplacian_, latent_)),
      x0_cache_(std::move(other.x0_cache_)),
      t0_cache_(other.t0_cache_) {}

NdcnModel& NdcnModel::operator=(const NdcnModel& other) {
  if (this != &other) *this = NdcnModel(other);
  return *this;
}

// The latent field points into latent_, so it is rebuilt after every move.
NdcnModel& NdcnModel::operator=(NdcnModel&& other) {
  if (this != &other) {
    net_ = std::move(other.net_);
    encoder_ = std::move(other.encoder_);
    latent_ = std::move(other.latent_);
    decoder_ = std::move(other.decoder_);
    laplacian_ = std::move(other.laplacian_);
    field_ = std::make_unique<NdcnLatentField>(*laplacian_, latent_);
    x0_cache_ = std::move(other.x0_cache_);
    t0_cache_ = other.t0_cache_;
  }
  return *this;
}

void NdcnModel::set_x0_cache(Vec x0, double t0) {
  if (x0.size() != net_->node_count()) throw InvalidArgument("ndcn: x0 dimension mismatch");
  x0_cache_ = std::move(x0);
  t0_cache_ = t0;
}

std::size_t NdcnModel::parameter_count() const {
  return encoder_.parameter_count() + latent_.parameter_count() + decoder_.parameter_count();
}

Eigen::VectorXd NdcnModel::parameters() const {
  Eigen::VectorXd p(static_cast<Eigen::Index>(parameter_count()));
  std::span<double> all(p.data(), parameter_count());
  const std::size_t ne = encoder_.parameter_count();
  const std::size_t nl = latent_.parameter_count();
  encoder_.pack(all.first(ne));
  latent_.pack(all.subspan(ne, nl));
  decoder_.pack(all.subspan(ne + nl));
  return p;
}

void NdcnModel::set_parameters(std::span<const double> params) {
  if (params.size() != parameter_count()) throw InvalidArgument("ndcn: parameter size mismatch");
  const std::size_t ne = encoder_.parameter_count();
  const std::size_t nl = latent_.parameter_count();
  encoder_.unpack(params.first(ne));
  latent_.unpack(params.subspan(ne, nl));
  decoder_.unpack(params.subspan(ne + nl));
}

std::vector<ParamSegment> NdcnModel::layout() const {
  const std::size_t ne = encoder_.parameter_count();
  const std::size_t nl = latent_.parameter_count();
  return {{"encoder", 0, ne, true},
          {"latent", ne, nl, true},
          {"decoder", ne + nl, decoder_.parameter_count(), true}};
}

Vec NdcnModel::encode(const Vec& x) const {
  if (x.size() != net_->node_count()) throw InvalidArgument("ndcn: state dimension mismatch");
  const Mat h = encoder_.forward(x.transpose());
  return Eigen::Map<const Vec>(h.data(), h.size());
}

Vec NdcnModel::decode(const Vec& h) const {
  if (static_cast<std::size_t>(h.size()) != node_count() * static_cast<std::size_t>(embed_dim()))
    throw InvalidArgument("ndcn: latent dimension mismatch");
  return decoder_.forward(as_embedding(h, embed_dim())).transpose();
}

TimeSeries ndcn_predict(const NdcnModel& model, const Vec& x0, std::span<const double> eval_times,
                        const SolverConfig& cfg, double t0) {
  const TimeSeries latent = solve_rkf45(model.latent_field(), model.encode(x0), eval_times, cfg, t0);
  const auto d = static_cast<Eigen::Index>(model.embed_dim());
  const auto n = static_cast<Eigen::Index>(model.node_count());
  const auto k = static_cast<Eigen::Index>(latent.length());
  // All (node, time) embeddings side by side: column t * n + i.
  const Eigen::Map<const Mat> batch(latent.states.data(), d, n * k);
  const Mat out = model.decoder().forward(batch);
  TimeSeries ts;
  ts.times = latent.times;
  ts.states = Eigen::Map<const Mat>(out.data(), n, k);
  return ts;
}

std::pair<TimeSeries, TimeSeries> ndcn_flow_branch(const NdcnModel& model, const Vec& x0,
                                                   double t_split, double t_end,
                                                   std::span<const double> eval_times,
                                                   const SolverConfig& cfg) {
  if (!(t_split >= 0.0) || !(t_end > t_split))
    throw InvalidArgument("ndcn flow branch: need 0 <= t_split < t_end");
  for (double t : eval_times)
    if (t < t_split || t > t_end)
      throw InvalidArgument("ndcn flow branch: evaluation times must lie in [t_split, t_end]");
  TimeSeries a = ndcn_predict(model, x0, eval_times, cfg);
  if (t_split == 0.0) return {a, a};
  const double split[] = {t_split};
  const Vec x_split = ndcn_predict(model, x0, split, cfg).state(0);
  TimeSeries b = ndcn_predict(model, x_split, eval_times, cfg, t_split);
  return {std::move(a), std::move(b)};
}

std::pair<double, double> ndcn_loss_and_gradient(const NdcnModel& model, const TimeSeries& obs,
                                                 double tau, const TrainConfig& cfg,
                                                 std::span<double> grad) {
  const auto n = static_cast<Eigen::Index>(model.node_count());
  const auto d = static_cast<Eigen::Index>(model.embed_dim());
  if (obs.dimension() != n) throw InvalidArgument("ndcn: observation dimension does not match the network");
  if (obs.length() == 0) throw InvalidArgument("ndcn: empty observation series");
  if (grad.size() != model.parameter_count()) throw InvalidArgument("ndcn: gradient size mismatch");
  const std::size_t ne = model.encoder().parameter_count();
  const std::size_t nl = model.latent().parameter_count();
  const auto k = static_cast<Eigen::Index>(obs.length());

  Mlp::Tape enc_tape;
  const Mat h0 = model.encoder().forward(obs.state(0).transpose(), enc_tape);
  Rk4Tape rk_tape;
  const TimeSeries latent =
      rk4_rollout(model.latent_field(), Eigen::Map<const Vec>(h0.data(), h0.size()), obs.times,
                  cfg.substeps_per_obs, obs.times.front(), rk_tape);
  Mlp::Tape dec_tape;
  const Mat out = model.decoder().forward(Eigen::Map<const Mat>(latent.states.data(), d, n * k), dec_tape);
  TimeSeries pred;
  pred.times = obs.times;
  pred.states = Eigen::Map<const Mat>(out.data(), n, k);

  Mat pred_bar;
  const double weighted = weighted_loss(pred, obs, tau, cfg.loss, &pred_bar);
  const double unweighted =
      std::isinf(tau) ? weighted : weighted_loss(pred, obs, std::numeric_limits<double>::infinity(), cfg.loss);

  Mat latent_bar;
  model.decoder().backward(dec_tape, Eigen::Map<const Mat>(pred_bar.data(), 1, n * k), &latent_bar,
                           grad.subspan(ne + nl));
  Vec h0_bar = Vec::Zero(n * d);
  rk4_backward(model.latent_field(), rk_tape, Eigen::Map<const Mat>(latent_bar.data(), n * d, k), h0_bar,
               grad.subspan(ne, nl));
  model.encoder().backward(enc_tape, Eigen::Map<const Mat>(h0_bar.data(), d, n), nullptr, grad.first(ne));
  return {weighted, unweighted};
}

TrainReport train_ndcn(NdcnModel& model, const TimeSeries& obs, const WarmupSchedule& schedule,
                       const TrainConfig& cfg) {
  obs.validate();
  if (obs.dimension() != static_cast<Eigen::Index>(model.node_count()))
    throw InvalidArgument("ndcn: observation dimension does not match the network");
  if (obs.length() == 0 || obs.times.front() < 0.0)
    throw InvalidArgument("ndcn: observations must start at t >= 0");
  model.set_x0_cache(obs.state(0), obs.times.front());
  return run_adam_training(
      model.parameters(), model.layout(), schedule, cfg,
      [&](double tau, std::span<double> grad) { return ndcn_loss_and_gradient(model, obs, tau, cfg, grad); },
      [&](std::span<const double> p) { model.set_parameters(p); });
}

}  // namespace netflow
