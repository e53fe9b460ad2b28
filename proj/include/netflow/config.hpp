#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "netflow/checkpoint.hpp"
#include "netflow/dynamics.hpp"
#include "netflow/eval.hpp"
#include "netflow/graph.hpp"
#include "netflow/integrate.hpp"
#include "netflow/training.hpp"

namespace netflow {

/// Network source. `kind` is grid | er | ba | ws | file; only the fields of
/// the chosen kind are read. Random kinds require a seed.
struct NetworkConfig {
  std::string kind = "grid";
  int side = 20;          // grid
  int n = 50;             // er, ba, ws
  double p = 0.1;         // er
  int m = 2;              // ba
  int k = 4;              // ws
  double beta = 0.1;      // ws
  std::string path;       // file
  std::uint64_t seed = 0;

  bool operator==(const NetworkConfig&) const = default;
};

struct SamplingConfig {
  int count = 80;
  double t_max = 5.0;
  std::uint64_t seed = 0;

  bool operator==(const SamplingConfig&) const = default;
};

/// Initial state drawn node-wise from U[lo, hi).
struct InitialStateConfig {
  double lo = 0.0;
  double hi = 25.0;
  std::uint64_t seed = 0;

  bool operator==(const InitialStateConfig&) const = default;
};

struct ModelConfig {
  ModelKind kind = ModelKind::Dnnd;
  std::vector<int> self_hidden = DnndArchitecture{}.self_hidden;          // dnnd
  std::vector<int> coupling_hidden = DnndArchitecture{}.coupling_hidden;  // dnnd
  int embed_dim = 20;                // ndcn
  std::vector<int> encoder_hidden{20};
  std::vector<int> latent_hidden{20};
  std::vector<int> decoder_hidden{20};
  Activation activation = Activation::Tanh;
  std::uint64_t seed = 0;

  bool operator==(const ModelConfig&) const = default;
};

/// Field defaults are the DNND defaults; see default_training for NDCN.
struct TrainingConfig {
  int epochs = TrainConfig{}.epochs;
  double learning_rate = AdamConfig{}.learning_rate;
  double beta1 = AdamConfig{}.beta1;
  double beta2 = AdamConfig{}.beta2;
  double epsilon = AdamConfig{}.epsilon;
  int substeps_per_obs = TrainConfig{}.substeps_per_obs;
  LossKind loss = LossKind::MAE;
  double reg_weight = 0.0;
  Penalty reg_kind = Penalty::L2;
  bool warmup = true;
  std::vector<double> warmup_taus = WarmupSchedule{}.taus;
  int epochs_per_stage = WarmupSchedule{}.epochs_per_stage;

  bool operator==(const TrainingConfig&) const = default;
};

struct EvalConfig {
  std::vector<EvalWindow> windows = default_windows();
  int repeats = 5;
  std::uint64_t seed = 0;
  bool lyapunov = true;
  double lyapunov_delta0 = 1e-6;
  double lyapunov_renorm_interval = 0.1;
  double lyapunov_horizon = 50.0;
  double lyapunov_transient = 5.0;
  bool flow_check = true;
  double flow_t1 = 5.0;
  double flow_t2 = 5.0;

  bool operator==(const EvalConfig&) const = default;
};

struct ExperimentConfig {
  NetworkConfig network;
  DynamicsSpec dynamics;
  SamplingConfig sampling;
  InitialStateConfig x0;
  ModelConfig model;
  TrainingConfig training;
  EvalConfig eval;
  SolverConfig solver;

  bool operator==(const ExperimentConfig&) const = default;

  /// Library objects derived from the config.
  TrainConfig train_config() const;
  WarmupSchedule warmup_schedule() const;
  DnndArchitecture dnnd_architecture() const;
  NdcnArchitecture ndcn_architecture() const;
  LyapunovConfig lyapunov_config() const;
};

/// Training defaults for a model kind: the NDCN baseline trains on the plain
/// loss without warm-up.
TrainingConfig default_training(ModelKind kind);

/// JSON with // and /* */ comments allowed. Unknown keys and missing seeds
/// are rejected; a ConfigError lists every violated field.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical JSON with every field written; parse_config(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& cfg);

/// FNV-1a of the canonical serialisation, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

/// Builds the configured network (reads the edge list for kind file).
Network build_network(const NetworkConfig& cfg);

/// Node-wise uniform initial state.
Vec draw_initial_state(int n, const InitialStateConfig& cfg);

}  // namespace netflow
