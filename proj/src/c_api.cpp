#include "netflow/netflow.h"

#include <cmath>
#include <cstring>
#include <functional>
#include <optional>
#include <new>
#include <string>

#include "netflow/checkpoint.hpp"
#include "netflow/config.hpp"
#include "netflow/dnnd.hpp"
#include "netflow/dynamics.hpp"
#include "netflow/error.hpp"
#include "netflow/eval.hpp"
#include "netflow/graph.hpp"
#include "netflow/io.hpp"
#include "netflow/ndcn.hpp"
#include "netflow/pipeline.hpp"
#include "netflow/rng.hpp"

using namespace netflow;

struct nf_network {
  std::shared_ptr<const Network> net;
};

struct nf_series {
  TimeSeries ts;
};

struct nf_model {
  std::optional<DnndModel> dnnd;
  std::optional<NdcnModel> ndcn;
};

struct nf_config {
  ExperimentConfig cfg;
};

namespace {

thread_local std::string last_error;

nf_status status_of(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return NF_ERR_INVALID_ARGUMENT;
    case ErrorKind::Format: return NF_ERR_FORMAT;
    case ErrorKind::Config: return NF_ERR_CONFIG;
    case ErrorKind::Numerical: return NF_ERR_NUMERICAL;
    case ErrorKind::Io: return NF_ERR_IO;
  }
  return NF_ERR_INTERNAL;
}

template <class F>
nf_status guard(F&& body) {
  try {
    body();
    return NF_OK;
  } catch (const Error& e) {
    last_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return NF_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return NF_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown error";
    return NF_ERR_INTERNAL;
  }
}

template <class T>
T& deref(T* p, const char* what) {
  if (!p) throw InvalidArgument(std::string("null ") + what);
  return *p;
}

const char* str(const char* s, const char* what) {
  if (!s) throw InvalidArgument(std::string("null ") + what);
  return s;
}

template <class T>
void need(const T* p, const char* what) {
  if (!p) throw InvalidArgument(std::string("null ") + what);
}

std::vector<std::string> comments(const char* comment) {
  if (!comment || !*comment) return {};
  return {comment};
}

Vec state(const double* x, int n) {
  need(x, "state");
  return Eigen::Map<const Vec>(x, n);
}

std::span<const double> times_span(const double* times, size_t count) {
  if (count > 0) need(times, "times");
  return {times, count};
}

SolverConfig solver_of(const nf_solver_options* s, const SolverConfig& fallback) {
  if (!s) return fallback;
  SolverConfig c;
  c.rtol = s->rtol;
  c.atol = s->atol;
  c.h_init = s->h_init;
  c.h_min = s->h_min;
  c.h_max = s->h_max;
  c.max_steps = s->max_steps;
  c.validate();
  return c;
}

DynamicsSpec spec_of(const nf_dynamics* d) {
  need(d, "dynamics");
  DynamicsSpec s;
  switch (d->kind) {
    case NF_HEAT: s.kind = DynamicsKind::Heat; break;
    case NF_BIOCHEMICAL: s.kind = DynamicsKind::Biochemical; break;
    case NF_BIRTHDEATH: s.kind = DynamicsKind::BirthDeath; break;
    default: throw InvalidArgument("unknown dynamics kind");
  }
  s.alpha = d->alpha;
  s.bio_source = d->bio_source;
  s.bio_decay = d->bio_decay;
  s.bio_coupling = d->bio_coupling;
  s.bd_decay = d->bd_decay;
  s.bd_coupling = d->bd_coupling;
  s.validate();
  return s;
}

LyapunovConfig lyapunov_of(const nf_lyapunov_options* o, const SolverConfig& solver) {
  LyapunovConfig c;
  if (o) {
    c.delta0 = o->delta0;
    c.renorm_interval = o->renorm_interval;
    c.horizon = o->horizon;
    c.transient = o->transient;
    c.seed = o->seed;
  }
  c.solver = solver;
  c.validate();
  return c;
}

std::vector<int> widths(const int* w, size_t len) {
  if (len > 0) need(w, "hidden widths");
  return std::vector<int>(w, w + len);
}

Activation activation_of(nf_activation a) {
  if (a == NF_TANH) return Activation::Tanh;
  if (a == NF_RELU) return Activation::Relu;
  throw InvalidArgument("unknown activation");
}

void copy_hash(const std::string& hex, char out[17]) {
  need(out, "output buffer");
  std::memcpy(out, hex.c_str(), 17);
}

}  // namespace

extern "C" {

const char* nf_last_error(void) { return last_error.c_str(); }

const char* nf_version(void) { return "0.1.0"; }

const char* nf_status_name(nf_status status) {
  switch (status) {
    case NF_OK: return "ok";
    case NF_ERR_INVALID_ARGUMENT: return "invalid argument";
    case NF_ERR_FORMAT: return "format error";
    case NF_ERR_CONFIG: return "config error";
    case NF_ERR_NUMERICAL: return "numerical error";
    case NF_ERR_IO: return "i/o error";
    case NF_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

nf_status nf_hash_string(const char* text, char out[17]) {
  return guard([&] { copy_hash(hex64(fnv1a64(str(text, "text"))), out); });
}

/* networks */

static nf_status make_network(nf_network** out, const std::function<Network()>& build) {
  return guard([&] {
    need(out, "output handle");
    auto h = std::make_unique<nf_network>();
    h->net = std::make_shared<const Network>(build());
    *out = h.release();
  });
}

nf_status nf_network_grid(int side, nf_network** out) {
  return make_network(out, [&] { return generate_grid(side); });
}

nf_status nf_network_er(int n, double p, uint64_t seed, nf_network** out) {
  return make_network(out, [&] { return generate_er(n, p, seed); });
}

nf_status nf_network_ba(int n, int m, uint64_t seed, nf_network** out) {
  return make_network(out, [&] { return generate_ba(n, m, seed); });
}

nf_status nf_network_ws(int n, int k, double beta, uint64_t seed, nf_network** out) {
  return make_network(out, [&] { return generate_ws(n, k, beta, seed); });
}

nf_status nf_network_load(const char* path, nf_network** out) {
  return make_network(out, [&] { return load_edge_list(str(path, "path")); });
}

nf_status nf_network_save(const nf_network* net, const char* path, const char* comment) {
  return guard([&] { save_edge_list(*deref(net, "network").net, str(path, "path"), comments(comment)); });
}

int nf_network_node_count(const nf_network* net) { return net ? net->net->node_count() : 0; }

size_t nf_network_edge_count(const nf_network* net) { return net ? net->net->edge_count() : 0; }

nf_status nf_network_fingerprint(const nf_network* net, char out[17]) {
  return guard([&] { copy_hash(hex64(deref(net, "network").net->fingerprint()), out); });
}

void nf_network_free(nf_network* net) { delete net; }

/* series */

nf_status nf_series_create(size_t dimension, size_t length, const double* times, const double* states,
                           nf_series** out) {
  return guard([&] {
    need(out, "output handle");
    auto h = std::make_unique<nf_series>();
    h->ts.times.assign(times_span(times, length).begin(), times_span(times, length).end());
    if (dimension * length > 0) need(states, "states");
    h->ts.states = Eigen::Map<const Mat>(states, static_cast<Eigen::Index>(dimension),
                                         static_cast<Eigen::Index>(length));
    h->ts.validate();
    *out = h.release();
  });
}

nf_status nf_series_load(const char* path, nf_series** out) {
  return guard([&] {
    need(out, "output handle");
    auto h = std::make_unique<nf_series>();
    h->ts = load_series_csv(str(path, "path"));
    *out = h.release();
  });
}

nf_status nf_series_save(const nf_series* series, const char* path, const char* comment) {
  return guard([&] { save_series_csv(deref(series, "series").ts, str(path, "path"), comments(comment)); });
}

size_t nf_series_length(const nf_series* series) { return series ? series->ts.length() : 0; }

size_t nf_series_dimension(const nf_series* series) {
  return series ? static_cast<size_t>(series->ts.dimension()) : 0;
}

nf_status nf_series_times(const nf_series* series, double* out) {
  return guard([&] {
    const auto& ts = deref(series, "series").ts;
    need(out, "output buffer");
    std::copy(ts.times.begin(), ts.times.end(), out);
  });
}

nf_status nf_series_states(const nf_series* series, double* out) {
  return guard([&] {
    const auto& ts = deref(series, "series").ts;
    need(out, "output buffer");
    std::copy(ts.states.data(), ts.states.data() + ts.states.size(), out);
  });
}

void nf_series_free(nf_series* series) { delete series; }

/* dynamics and simulation */

void nf_dynamics_defaults(nf_dynamics_kind kind, nf_dynamics* out) {
  if (!out) return;
  const DynamicsSpec s;
  *out = {kind, s.alpha, s.bio_source, s.bio_decay, s.bio_coupling, s.bd_decay, s.bd_coupling};
}

nf_status nf_dynamics_parse(const char* name, nf_dynamics* out) {
  return guard([&] {
    need(out, "output");
    const DynamicsKind kind = parse_dynamics_kind(str(name, "name"));
    nf_dynamics_defaults(kind == DynamicsKind::Heat          ? NF_HEAT
                         : kind == DynamicsKind::Biochemical ? NF_BIOCHEMICAL
                                                             : NF_BIRTHDEATH,
                         out);
  });
}

void nf_solver_defaults(nf_solver_options* out) {
  if (!out) return;
  const SolverConfig s;
  *out = {s.rtol, s.atol, s.h_init, s.h_min, s.h_max, s.max_steps};
}

nf_status nf_simulate(const nf_network* net, const nf_dynamics* dynamics, const double* x0, const double* times,
                      size_t count, const nf_solver_options* solver, nf_series** out) {
  return guard([&] {
    need(out, "output handle");
    const auto& n = deref(net, "network").net;
    const NetworkField field(n, spec_of(dynamics));
    auto h = std::make_unique<nf_series>();
    h->ts = solve_rkf45(field, state(x0, n->node_count()), times_span(times, count),
                        solver_of(solver, reference_solver()));
    *out = h.release();
  });
}

nf_status nf_sample_times(int count, double t_max, uint64_t seed, double* out) {
  return guard([&] {
    need(out, "output buffer");
    const auto t = sample_times(count, t_max, seed);
    std::copy(t.begin(), t.end(), out);
  });
}

nf_status nf_initial_state(int n, double lo, double hi, uint64_t seed, double* out) {
  return guard([&] {
    need(out, "output buffer");
    const Vec x = draw_initial_state(n, {lo, hi, seed});
    std::copy(x.data(), x.data() + x.size(), out);
  });
}

/* models */

nf_status nf_model_create_dnnd(const nf_network* net, const int* self_hidden, size_t self_len,
                               const int* coupling_hidden, size_t coupling_len, nf_activation activation,
                               uint64_t seed, nf_model** out) {
  return guard([&] {
    need(out, "output handle");
    DnndArchitecture arch{widths(self_hidden, self_len), widths(coupling_hidden, coupling_len),
                          activation_of(activation)};
    auto h = std::make_unique<nf_model>();
    h->dnnd.emplace(DnndModel::create(deref(net, "network").net, arch, seed));
    *out = h.release();
  });
}

nf_status nf_model_create_ndcn(const nf_network* net, int embed_dim, const int* encoder_hidden,
                               size_t encoder_len, const int* latent_hidden, size_t latent_len,
                               const int* decoder_hidden, size_t decoder_len, nf_activation activation,
                               uint64_t seed, nf_model** out) {
  return guard([&] {
    need(out, "output handle");
    NdcnArchitecture arch{embed_dim, widths(encoder_hidden, encoder_len), widths(latent_hidden, latent_len),
                          widths(decoder_hidden, decoder_len), activation_of(activation)};
    auto h = std::make_unique<nf_model>();
    h->ndcn.emplace(NdcnModel::create(deref(net, "network").net, arch, seed));
    *out = h.release();
  });
}

nf_status nf_model_create_default(const nf_network* net, nf_model_kind kind, uint64_t seed, nf_model** out) {
  return guard([&] {
    need(out, "output handle");
    auto h = std::make_unique<nf_model>();
    if (kind == NF_MODEL_DNND)
      h->dnnd.emplace(DnndModel::create(deref(net, "network").net, DnndArchitecture{}, seed));
    else if (kind == NF_MODEL_NDCN)
      h->ndcn.emplace(NdcnModel::create(deref(net, "network").net, NdcnArchitecture{}, seed));
    else
      throw InvalidArgument("unknown model kind");
    *out = h.release();
  });
}

nf_model_kind nf_model_get_kind(const nf_model* model) {
  return model && model->ndcn ? NF_MODEL_NDCN : NF_MODEL_DNND;
}

size_t nf_model_parameter_count(const nf_model* model) {
  if (!model) return 0;
  return model->dnnd ? model->dnnd->parameter_count() : model->ndcn->parameter_count();
}

void nf_model_free(nf_model* model) { delete model; }

namespace {

void fill_train_options(const TrainingConfig& t, nf_train_options* out) {
  if (t.warmup_taus.size() > NF_MAX_WARMUP_STAGES) throw ConfigError("training: at most 16 warm-up temperatures");
  *out = {};
  out->epochs = t.epochs;
  out->learning_rate = t.learning_rate;
  out->beta1 = t.beta1;
  out->beta2 = t.beta2;
  out->epsilon = t.epsilon;
  out->substeps_per_obs = t.substeps_per_obs;
  out->loss_mse = t.loss == LossKind::MSE;
  out->reg_weight = t.reg_weight;
  out->reg_l1 = t.reg_kind == Penalty::L1;
  out->warmup = t.warmup;
  out->warmup_stages = t.warmup_taus.size();
  for (size_t i = 0; i < out->warmup_stages; ++i) out->warmup_taus[i] = t.warmup_taus[i];
  out->epochs_per_stage = t.epochs_per_stage;
}

}  // namespace

void nf_train_defaults(nf_model_kind kind, nf_train_options* out) {
  if (!out) return;
  fill_train_options(default_training(kind == NF_MODEL_NDCN ? ModelKind::Ndcn : ModelKind::Dnnd), out);
}

nf_status nf_model_train(nf_model* model, const nf_series* observations, const nf_train_options* options,
                         const char* loss_log_path, const char* comment, double* final_loss) {
  return guard([&] {
    nf_model& m = deref(model, "model");
    const TimeSeries& obs = deref(observations, "observations").ts;
    nf_train_options o;
    if (options)
      o = *options;
    else
      nf_train_defaults(nf_model_get_kind(model), &o);
    TrainConfig cfg;
    cfg.epochs = o.epochs;
    cfg.adam = {o.learning_rate, o.beta1, o.beta2, o.epsilon};
    cfg.substeps_per_obs = o.substeps_per_obs;
    cfg.loss = o.loss_mse ? LossKind::MSE : LossKind::MAE;
    cfg.reg_weight = o.reg_weight;
    cfg.reg_kind = o.reg_l1 ? Penalty::L1 : Penalty::L2;
    WarmupSchedule schedule = WarmupSchedule::disabled();
    if (o.warmup) {
      if (o.warmup_stages == 0 || o.warmup_stages > NF_MAX_WARMUP_STAGES)
        throw InvalidArgument("train: warmup_stages must lie in [1, 16]");
      schedule.taus.assign(o.warmup_taus, o.warmup_taus + o.warmup_stages);
      schedule.epochs_per_stage = o.epochs_per_stage;
    }
    const TrainReport report =
        m.dnnd ? train_dnnd(*m.dnnd, obs, schedule, cfg) : train_ndcn(*m.ndcn, obs, schedule, cfg);
    if (loss_log_path) write_text_file(loss_log_path, format_loss_log(report, comments(comment)));
    if (final_loss)
      *final_loss =
          report.unweighted_loss.empty() ? std::nan("") : report.unweighted_loss.back();
  });
}

nf_status nf_model_save(const nf_model* model, const char* path, const char* config_hash) {
  return guard([&] {
    const nf_model& m = deref(model, "model");
    CheckpointInfo info;
    if (config_hash) info.config_hash = config_hash;
    if (m.dnnd)
      save_checkpoint(*m.dnnd, info, str(path, "path"));
    else
      save_checkpoint(*m.ndcn, info, str(path, "path"));
  });
}

nf_status nf_model_load(const char* path, const nf_network* net, nf_model** out) {
  return guard([&] {
    need(out, "output handle");
    LoadedModel loaded = load_checkpoint(str(path, "path"), deref(net, "network").net);
    auto h = std::make_unique<nf_model>();
    h->dnnd = std::move(loaded.dnnd);
    h->ndcn = std::move(loaded.ndcn);
    *out = h.release();
  });
}

nf_status nf_model_predict(const nf_model* model, const double* x0, const double* times, size_t count,
                           const nf_solver_options* solver, nf_series** out) {
  return guard([&] {
    need(out, "output handle");
    const nf_model& m = deref(model, "model");
    const SolverConfig cfg = solver_of(solver, SolverConfig{});
    const int n = static_cast<int>(m.dnnd ? m.dnnd->dimension() : m.ndcn->node_count());
    auto h = std::make_unique<nf_series>();
    h->ts = m.dnnd ? solve_rkf45(*m.dnnd, state(x0, n), times_span(times, count), cfg)
                   : ndcn_predict(*m.ndcn, state(x0, n), times_span(times, count), cfg);
    *out = h.release();
  });
}

/* evaluation */

void nf_lyapunov_defaults(nf_lyapunov_options* out) {
  if (!out) return;
  const LyapunovConfig c;
  *out = {c.delta0, c.renorm_interval, c.horizon, c.transient, c.seed};
}

nf_status nf_lyapunov_model(const nf_model* model, const double* x0, const nf_lyapunov_options* options,
                            const nf_solver_options* solver, double* exponent, int* diverged) {
  return guard([&] {
    const nf_model& m = deref(model, "model");
    need(exponent, "output");
    const LyapunovConfig cfg = lyapunov_of(options, solver_of(solver, SolverConfig{}));
    const LyapunovResult r =
        m.dnnd ? largest_lyapunov(*m.dnnd, state(x0, static_cast<int>(m.dnnd->dimension())), cfg)
               : largest_lyapunov(m.ndcn->latent_field(),
                                  m.ndcn->encode(state(x0, static_cast<int>(m.ndcn->node_count()))), cfg);
    *exponent = r.exponent;
    if (diverged) *diverged = r.diverged;
  });
}

nf_status nf_lyapunov_truth(const nf_network* net, const nf_dynamics* dynamics, const double* x0,
                            const nf_lyapunov_options* options, const nf_solver_options* solver, double* exponent,
                            int* diverged) {
  return guard([&] {
    need(exponent, "output");
    const auto& n = deref(net, "network").net;
    const NetworkField field(n, spec_of(dynamics));
    const LyapunovResult r =
        largest_lyapunov(field, state(x0, n->node_count()), lyapunov_of(options, solver_of(solver, SolverConfig{})));
    *exponent = r.exponent;
    if (diverged) *diverged = r.diverged;
  });
}

nf_status nf_flowcheck_model(const nf_model* model, const double* x0, double t1, double t2, int count,
                             const nf_solver_options* solver, double* deviation) {
  return guard([&] {
    const nf_model& m = deref(model, "model");
    need(deviation, "output");
    const SolverConfig cfg = solver_of(solver, SolverConfig{});
    const auto times = flow_times(t1, t2, count);
    if (m.dnnd)
      *deviation = flow_consistency(FieldPredictor(*m.dnnd, cfg), state(x0, static_cast<int>(m.dnnd->dimension())),
                                    t1, t2, times);
    else
      *deviation = flow_consistency(NdcnPredictor(*m.ndcn, cfg),
                                    state(x0, static_cast<int>(m.ndcn->node_count())), t1, t2, times);
  });
}

nf_status nf_flowcheck_truth(const nf_network* net, const nf_dynamics* dynamics, const double* x0, double t1,
                             double t2, int count, const nf_solver_options* solver, double* deviation) {
  return guard([&] {
    need(deviation, "output");
    const auto& n = deref(net, "network").net;
    const NetworkField field(n, spec_of(dynamics));
    *deviation = flow_consistency(FieldPredictor(field, solver_of(solver, SolverConfig{})),
                                  state(x0, n->node_count()), t1, t2, flow_times(t1, t2, count));
  });
}

void nf_eval_defaults(nf_eval_options* out) {
  if (!out) return;
  const EvalConfig e;
  *out = {};
  out->windows = nullptr;
  out->repeats = e.repeats;
  out->seed = e.seed;
  out->lyapunov = e.lyapunov;
  nf_lyapunov_defaults(&out->lyapunov_options);
  out->flow_check = e.flow_check;
  out->flow_t1 = e.flow_t1;
  out->flow_t2 = e.flow_t2;
  nf_solver_defaults(&out->solver);
}

nf_status nf_eval(const nf_model* model, const nf_dynamics* truth, const double* x0,
                  const nf_eval_options* options, const char* report_path, const char* mape_path,
                  const char* comment, double* mean_out, size_t capacity, size_t* window_count) {
  return guard([&] {
    const nf_model& m = deref(model, "model");
    nf_eval_options o;
    if (options)
      o = *options;
    else
      nf_eval_defaults(&o);
    EvalConfig cfg;
    cfg.windows = parse_windows(o.windows ? o.windows : "default");
    cfg.repeats = o.repeats;
    cfg.seed = o.seed;
    cfg.lyapunov = o.lyapunov != 0;
    cfg.flow_check = o.flow_check != 0;
    cfg.flow_t1 = o.flow_t1;
    cfg.flow_t2 = o.flow_t2;
    const SolverConfig solver = solver_of(&o.solver, SolverConfig{});
    const LyapunovConfig lyap = lyapunov_of(&o.lyapunov_options, solver);
    const auto net = m.dnnd ? m.dnnd->network_ptr() : m.ndcn->network_ptr();
    const NetworkField field(net, spec_of(truth));
    const Vec x = state(x0, net->node_count());
    EvalReport report = m.dnnd ? evaluate(*m.dnnd, field, x, cfg, lyap, solver)
                               : evaluate(*m.ndcn, field, x, cfg, lyap, solver);
    if (comment && *comment) report.metadata["provenance"] = comment;
    if (report_path) write_text_file(report_path, format_eval_report_json(report));
    if (mape_path) write_text_file(mape_path, format_mape_csv(report, comments(comment)));
    if (mean_out)
      for (size_t i = 0; i < std::min(capacity, report.windows.size()); ++i) mean_out[i] = report.windows[i].mean;
    if (window_count) *window_count = report.windows.size();
  });
}

nf_status nf_export_field(const nf_model* model, double lo, double hi, int resolution, const char* self_path,
                          const char* coupling_path, const char* comment) {
  return guard([&] {
    const nf_model& m = deref(model, "model");
    if (!m.dnnd) throw InvalidArgument("export field: only DNND models have F and G");
    const FieldTables tables = export_field(*m.dnnd, lo, hi, resolution);
    if (self_path) write_text_file(self_path, format_self_table_csv(tables, comments(comment)));
    if (coupling_path) write_text_file(coupling_path, format_coupling_table_csv(tables, comments(comment)));
  });
}

/* configs */

nf_status nf_config_load(const char* path, nf_config** out) {
  return guard([&] {
    need(out, "output handle");
    auto h = std::make_unique<nf_config>();
    h->cfg = load_config(str(path, "path"));
    *out = h.release();
  });
}

nf_status nf_config_parse(const char* text, nf_config** out) {
  return guard([&] {
    need(out, "output handle");
    auto h = std::make_unique<nf_config>();
    h->cfg = parse_config(str(text, "text"));
    *out = h.release();
  });
}

nf_status nf_config_hash(const nf_config* cfg, char out[17]) {
  return guard([&] { copy_hash(config_hash(deref(cfg, "config").cfg), out); });
}

size_t nf_config_serialize(const nf_config* cfg, char* buffer, size_t size) {
  if (!cfg) return 0;
  const std::string text = serialize_config(cfg->cfg);
  if (buffer && size > 0) {
    const size_t n = std::min(size - 1, text.size());
    std::memcpy(buffer, text.data(), n);
    buffer[n] = '\0';
  }
  return text.size();
}

nf_status nf_config_model_kind(const nf_config* cfg, nf_model_kind* out) {
  return guard([&] {
    need(out, "output");
    *out = deref(cfg, "config").cfg.model.kind == ModelKind::Ndcn ? NF_MODEL_NDCN : NF_MODEL_DNND;
  });
}

nf_status nf_config_train_options(const nf_config* cfg, nf_train_options* out) {
  return guard([&] {
    need(out, "output");
    fill_train_options(deref(cfg, "config").cfg.training, out);
  });
}

nf_status nf_model_create_from_config(const nf_network* net, const nf_config* cfg, nf_model** out) {
  return guard([&] {
    need(out, "output handle");
    const ExperimentConfig& c = deref(cfg, "config").cfg;
    auto h = std::make_unique<nf_model>();
    if (c.model.kind == ModelKind::Dnnd)
      h->dnnd.emplace(DnndModel::create(deref(net, "network").net, c.dnnd_architecture(), c.model.seed));
    else
      h->ndcn.emplace(NdcnModel::create(deref(net, "network").net, c.ndcn_architecture(), c.model.seed));
    *out = h.release();
  });
}

void nf_config_free(nf_config* cfg) { delete cfg; }

nf_status nf_pipeline_run(const nf_config* cfg, const char* out_dir) {
  return guard([&] { run_pipeline(deref(cfg, "config").cfg, str(out_dir, "output directory")); });
}

}  // extern "C"
