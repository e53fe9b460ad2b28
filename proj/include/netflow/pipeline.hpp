#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "netflow/checkpoint.hpp"
#include "netflow/config.hpp"
#include "netflow/dnnd.hpp"
#include "netflow/dynamics.hpp"
#include "netflow/eval.hpp"
#include "netflow/ndcn.hpp"

namespace netflow {

/// Ground-truth observations of an experiment: irregular samples of the
/// trajectory from (0, x0), integrated at reference tolerance.
TimeSeries simulate_observations(const VectorField& truth, const Vec& x0, const SamplingConfig& sampling);

/// Windowed MAPE, Lyapunov exponents (model and truth) and flow deviation as
/// enabled in `cfg`; for heat also the residual at the uniform mean state.
/// The NDCN exponent is that of its latent system started from encode(x0).
EvalReport evaluate(const DnndModel& model, const NetworkField& truth, const Vec& x0, const EvalConfig& cfg,
                    const LyapunovConfig& lyap, const SolverConfig& solver);
EvalReport evaluate(const NdcnModel& model, const NetworkField& truth, const Vec& x0, const EvalConfig& cfg,
                    const LyapunovConfig& lyap, const SolverConfig& solver);

struct PipelineResult {
  std::string config_hash;
  std::shared_ptr<const Network> network;
  Vec x0;
  TimeSeries observations;
  TrainReport training;
  EvalReport report;
};

/// generate network -> simulate -> sample -> train -> evaluate, writing into
/// `out_dir`: config.json, network.edges, x0.csv, observations.csv,
/// model.ckpt, losses.csv, mape.csv, report.json. Every file carries the
/// config hash. Outputs depend only on the config. A failing stage rethrows
/// with the stage name prefixed; files of completed stages remain.
PipelineResult run_pipeline(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

}  // namespace netflow
