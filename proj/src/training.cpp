#include "netflow/training.hpp"

#include <chrono>
#include <cmath>

#include "netflow/error.hpp"
#include "netflow/io.hpp"

namespace netflow {

std::string to_string(LossKind kind) { return kind == LossKind::MAE ? "mae" : "mse"; }

LossKind parse_loss_kind(const std::string& name) {
  if (name == "mae") return LossKind::MAE;
  if (name == "mse") return LossKind::MSE;
  throw InvalidArgument("unknown loss '" + name + "' (expected mae|mse)");
}

std::string to_string(Penalty kind) { return kind == Penalty::L2 ? "l2" : "l1"; }

Penalty parse_penalty(const std::string& name) {
  if (name == "l2") return Penalty::L2;
  if (name == "l1") return Penalty::L1;
  throw InvalidArgument("unknown penalty '" + name + "' (expected l2|l1)");
}

double WarmupSchedule::tau_for_epoch(int epoch) const {
  if (taus.empty()) return std::numeric_limits<double>::infinity();
  const std::size_t stage = epoch < 0 ? 0 : static_cast<std::size_t>(epoch / epochs_per_stage);
  return taus[std::min(stage, taus.size() - 1)];
}

void WarmupSchedule::validate() const {
  if (taus.empty()) throw InvalidArgument("warm-up schedule needs at least one temperature");
  if (epochs_per_stage < 1) throw InvalidArgument("warm-up epochs_per_stage must be >= 1");
  for (std::size_t s = 0; s < taus.size(); ++s) {
    if (!(taus[s] > 0.0)) throw InvalidArgument("warm-up temperatures must be > 0");
    if (s > 0 && !(taus[s] > taus[s - 1]))
      throw InvalidArgument("warm-up temperatures must be strictly increasing");
  }
}

WarmupSchedule WarmupSchedule::disabled() {
  WarmupSchedule s;
  s.taus = {std::numeric_limits<double>::infinity()};
  return s;
}

double warmup_weight(double t, double tau) {
  if (std::isinf(tau)) return 1.0;
  return std::exp(-t / tau);
}

void TrainConfig::validate() const {
  if (epochs < 0) throw InvalidArgument("epochs must be >= 0");
  if (!(adam.learning_rate > 0.0)) throw InvalidArgument("learning_rate must be > 0");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0) || !(adam.beta2 >= 0.0 && adam.beta2 < 1.0))
    throw InvalidArgument("adam betas must lie in [0, 1)");
  if (!(adam.epsilon > 0.0)) throw InvalidArgument("adam epsilon must be > 0");
  if (substeps_per_obs < 1) throw InvalidArgument("substeps_per_obs must be >= 1");
  if (!(reg_weight >= 0.0)) throw InvalidArgument("regularisation weight must be >= 0");
}

double weighted_loss(const TimeSeries& pred, const TimeSeries& obs, double tau, LossKind kind,
                     Eigen::MatrixXd* pred_bar) {
  if (pred.times != obs.times) throw InvalidArgument("weighted_loss: time grids differ");
  if (pred.states.rows() != obs.states.rows() || pred.states.cols() != obs.states.cols())
    throw InvalidArgument("weighted_loss: state shapes differ");
  const Eigen::Index n = obs.states.rows();
  if (pred_bar) pred_bar->setZero(n, obs.states.cols());
  double total = 0.0;
  for (std::size_t k = 0; k < obs.times.size(); ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    const double w = warmup_weight(obs.times[k], tau);
    const Eigen::ArrayXd r = pred.states.col(kk).array() - obs.states.col(kk).array();
    if (kind == LossKind::MAE) {
      total += w * r.abs().mean();
      if (pred_bar) pred_bar->col(kk) = (w / static_cast<double>(n)) * r.sign().matrix();
    } else {
      total += w * r.square().mean();
      if (pred_bar) pred_bar->col(kk) = (2.0 * w / static_cast<double>(n)) * r.matrix();
    }
  }
  return total;
}

std::string format_loss_log(const TrainReport& report, const std::vector<std::string>& comments) {
  std::string out;
  for (const auto& c : comments) out += "# " + c + "\n";
  out += "epoch,tau,weighted_loss,unweighted_loss\n";
  for (std::size_t e = 0; e < report.weighted_loss.size(); ++e) {
    out += std::to_string(e) + "," + format_double(report.tau[e]) + "," +
           format_double(report.weighted_loss[e]) + "," + format_double(report.unweighted_loss[e]) + "\n";
  }
  return out;
}

TrainReport run_adam_training(Eigen::VectorXd params, const std::vector<ParamSegment>& layout,
                              const WarmupSchedule& schedule, const TrainConfig& cfg,
                              const EpochLossFn& loss,
                              const std::function<void(std::span<const double>)>& apply) {
  cfg.validate();
  schedule.validate();
  const auto start = std::chrono::steady_clock::now();
  const auto size = static_cast<std::size_t>(params.size());
  TrainReport report;
  Eigen::VectorXd grad(params.size());
  Adam adam(size, cfg.adam);
  const auto context = [&](int epoch, double tau) {
    return "epoch " + std::to_string(epoch) + " (tau=" + format_double(tau) +
           ", rk4 substeps=" + std::to_string(cfg.substeps_per_obs) + ")";
  };
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double tau = schedule.tau_for_epoch(epoch);
    apply({params.data(), size});
    grad.setZero();
    std::span<double> g(grad.data(), size);
    std::pair<double, double> losses;
    try {
      losses = loss(tau, g);
    } catch (const NumericalError& e) {
      throw NumericalError(NumericalError::Reason::Training,
                           "training diverged at " + context(epoch, tau) + ": " + e.what());
    }
    const double penalty = add_penalty({params.data(), size}, layout, cfg.reg_kind, cfg.reg_weight, g);
    const double total = losses.first + penalty;
    if (!std::isfinite(total) || !grad.allFinite())
      throw NumericalError(NumericalError::Reason::Training,
                           "non-finite loss at " + context(epoch, tau));
    report.weighted_loss.push_back(total);
    report.unweighted_loss.push_back(losses.second);
    report.tau.push_back(tau);
    adam.step({params.data(), size}, g);
  }
  apply({params.data(), size});
  report.final_params = std::move(params);
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace netflow
