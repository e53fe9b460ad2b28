#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "netflow/integrate.hpp"
#include "netflow/nn.hpp"
#include "netflow/optim.hpp"

namespace netflow {

enum class LossKind { MAE, MSE };

std::string to_string(LossKind kind);
LossKind parse_loss_kind(const std::string& name);
std::string to_string(Penalty kind);
Penalty parse_penalty(const std::string& name);

/// Stepwise-constant temperature: stage s covers epochs
/// [s * epochs_per_stage, (s + 1) * epochs_per_stage); epochs past the last
/// stage keep the last temperature. An infinite temperature means unit weights.
struct WarmupSchedule {
  std::vector<double> taus{0.5, 1.0, 2.5, 5.0, std::numeric_limits<double>::infinity()};
  int epochs_per_stage = 100;

  double tau_for_epoch(int epoch) const;
  void validate() const;

  /// Single infinite stage: plain unweighted loss.
  static WarmupSchedule disabled();
};

/// exp(-t / tau); 1 when tau is infinite.
double warmup_weight(double t, double tau);

struct TrainConfig {
  int epochs = 500;
  AdamConfig adam{.learning_rate = 3e-3};
  int substeps_per_obs = 1;
  LossKind loss = LossKind::MAE;
  double reg_weight = 0.0;
  Penalty reg_kind = Penalty::L2;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TrainReport {
  std::vector<double> weighted_loss;    // per epoch, including regularisation
  std::vector<double> unweighted_loss;  // per epoch, plain trajectory loss
  std::vector<double> tau;              // per epoch
  Eigen::VectorXd final_params;
  double wall_seconds = 0.0;
};

/// sum_k R(pred_k, obs_k) * warmup_weight(t_k, tau), with R the per-time mean
/// absolute (MAE) or squared (MSE) residual over nodes. When `pred_bar` is
/// non-null it receives d loss / d pred (same shape as pred.states).
double weighted_loss(const TimeSeries& pred, const TimeSeries& obs, double tau, LossKind kind,
                     Eigen::MatrixXd* pred_bar = nullptr);

/// Loss evaluation for one epoch: given the temperature, adds the
/// parameter gradient into `grad` and returns {weighted, unweighted}.
using EpochLossFn = std::function<std::pair<double, double>(double tau, std::span<double> grad)>;

/// Full-batch Adam loop shared by the trainers. `params` holds the initial
/// parameters; `apply` installs a parameter vector in the model before each
/// loss evaluation and once more at the end. A regularisation penalty over
/// `layout` is added per cfg. Throws NumericalError (Training) naming the
/// epoch, temperature and RK4 substeps on a non-finite loss or a divergent
/// rollout.
TrainReport run_adam_training(Eigen::VectorXd params, const std::vector<ParamSegment>& layout,
                              const WarmupSchedule& schedule, const TrainConfig& cfg,
                              const EpochLossFn& loss,
                              const std::function<void(std::span<const double>)>& apply);

/// Per-epoch losses as CSV: epoch,tau,weighted_loss,unweighted_loss.
std::string format_loss_log(const TrainReport& report, const std::vector<std::string>& comments = {});

}  // namespace netflow
