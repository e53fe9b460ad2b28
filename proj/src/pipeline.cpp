#include "netflow/pipeline.hpp"

#include "netflow/error.hpp"
#include "netflow/io.hpp"

namespace netflow {

TimeSeries simulate_observations(const VectorField& truth, const Vec& x0, const SamplingConfig& sampling) {
  const auto times = sample_times(sampling.count, sampling.t_max, sampling.seed);
  return solve_rkf45(truth, x0, times, reference_solver());
}

namespace {

void evaluate_common(const Predictor& predictor, const NetworkField& truth, const Vec& x0,
                     const EvalConfig& cfg, const LyapunovConfig& lyap, EvalReport& report) {
  report.windows = windowed_mape(predictor, truth, x0, cfg.windows, cfg.repeats, cfg.seed);
  if (cfg.lyapunov) report.lyapunov_truth = largest_lyapunov(truth, x0, lyap);
  if (cfg.flow_check)
    report.flow_deviation =
        flow_consistency(predictor, x0, cfg.flow_t1, cfg.flow_t2, flow_times(cfg.flow_t1, cfg.flow_t2));
  if (truth.spec().kind == DynamicsKind::Heat)
    report.fixed_point_residuals.emplace_back("uniform_mean", 0.0);
  report.metadata["eval_seed"] = std::to_string(cfg.seed);
  report.metadata["repeats"] = std::to_string(cfg.repeats);
  report.metadata["dynamics"] = to_string(truth.spec().kind);
  report.metadata["network_fingerprint"] = hex64(truth.network().fingerprint());
}

Vec uniform_mean(const Vec& x0) { return Vec::Constant(x0.size(), x0.mean()); }

}  // namespace

EvalReport evaluate(const DnndModel& model, const NetworkField& truth, const Vec& x0, const EvalConfig& cfg,
                    const LyapunovConfig& lyap, const SolverConfig& solver) {
  EvalReport report;
  evaluate_common(FieldPredictor(model, solver), truth, x0, cfg, lyap, report);
  if (cfg.lyapunov) report.lyapunov = largest_lyapunov(model, x0, lyap);
  if (!report.fixed_point_residuals.empty())
    report.fixed_point_residuals.back().second = fixed_point_residual(model, uniform_mean(x0));
  report.metadata["model"] = "dnnd";
  return report;
}

EvalReport evaluate(const NdcnModel& model, const NetworkField& truth, const Vec& x0, const EvalConfig& cfg,
                    const LyapunovConfig& lyap, const SolverConfig& solver) {
  EvalReport report;
  evaluate_common(NdcnPredictor(model, solver), truth, x0, cfg, lyap, report);
  if (cfg.lyapunov) report.lyapunov = largest_lyapunov(model.latent_field(), model.encode(x0), lyap);
  if (!report.fixed_point_residuals.empty())
    report.fixed_point_residuals.back() = {"uniform_mean_latent",
                                           fixed_point_residual(model.latent_field(), model.encode(uniform_mean(x0)))};
  report.metadata["model"] = "ndcn";
  return report;
}

namespace {

template <class F>
auto stage(const char* name, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const Error& e) {
    throw Error(e.kind(), std::string("stage '") + name + "': " + e.what());
  }
}

}  // namespace

PipelineResult run_pipeline(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
  PipelineResult out;
  out.config_hash = config_hash(cfg);
  const std::vector<std::string> prov{"config_hash " + out.config_hash};

  stage("config", [&] { write_text_file(out_dir / "config.json", serialize_config(cfg)); });

  out.network = stage("network", [&] {
    auto net = std::make_shared<const Network>(build_network(cfg.network));
    save_edge_list(*net, out_dir / "network.edges", prov);
    return net;
  });
  const NetworkField truth(out.network, cfg.dynamics);

  stage("simulate", [&] {
    out.x0 = draw_initial_state(out.network->node_count(), cfg.x0);
    TimeSeries x0_series;
    x0_series.times = {0.0};
    x0_series.states = out.x0;
    save_series_csv(x0_series, out_dir / "x0.csv", prov);
    out.observations = simulate_observations(truth, out.x0, cfg.sampling);
    save_series_csv(out.observations, out_dir / "observations.csv", prov);
  });

  CheckpointInfo info;
  info.config_hash = out.config_hash;
  info.metadata = {{"epochs", std::to_string(cfg.training.epochs)},
                   {"model_seed", std::to_string(cfg.model.seed)},
                   {"dynamics", to_string(cfg.dynamics.kind)}};
  const TrainConfig train_cfg = cfg.train_config();
  const WarmupSchedule schedule = cfg.warmup_schedule();

  if (cfg.model.kind == ModelKind::Dnnd) {
    auto model = DnndModel::create(out.network, cfg.dnnd_architecture(), cfg.model.seed);
    stage("train", [&] {
      out.training = train_dnnd(model, out.observations, schedule, train_cfg);
      save_checkpoint(model, info, out_dir / "model.ckpt");
      write_text_file(out_dir / "losses.csv", format_loss_log(out.training, prov));
    });
    out.report = stage("eval", [&] {
      return evaluate(model, truth, out.x0, cfg.eval, cfg.lyapunov_config(), cfg.solver);
    });
  } else {
    auto model = NdcnModel::create(out.network, cfg.ndcn_architecture(), cfg.model.seed);
    stage("train", [&] {
      out.training = train_ndcn(model, out.observations, schedule, train_cfg);
      save_checkpoint(model, info, out_dir / "model.ckpt");
      write_text_file(out_dir / "losses.csv", format_loss_log(out.training, prov));
    });
    out.report = stage("eval", [&] {
      return evaluate(model, truth, out.x0, cfg.eval, cfg.lyapunov_config(), cfg.solver);
    });
  }
  out.report.metadata["config_hash"] = out.config_hash;
  stage("report", [&] {
    write_text_file(out_dir / "report.json", format_eval_report_json(out.report));
    write_text_file(out_dir / "mape.csv", format_mape_csv(out.report, prov));
  });
  return out;
}

}  // namespace netflow
