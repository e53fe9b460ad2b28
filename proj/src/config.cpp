#include "netflow/config.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "json.hpp"

#include "netflow/error.hpp"
#include "netflow/io.hpp"
#include "netflow/rng.hpp"

namespace netflow {

using Json = nlohmann::ordered_json;

namespace {

struct Errors {
  std::vector<std::string> list;
  void add(const std::string& field, const std::string& msg) { list.push_back(field + ": " + msg); }
};

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

void check_keys(const Json& obj, const std::string& path, std::initializer_list<const char*> allowed, Errors& err) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      err.add(join(path, key), "unknown key");
  }
}

const Json* section(const Json& root, const std::string& key, bool required, Errors& err) {
  auto it = root.find(key);
  if (it == root.end()) {
    if (required) err.add(key, "required section missing");
    return nullptr;
  }
  if (!it->is_object()) {
    err.add(key, "expected an object");
    return nullptr;
  }
  return &*it;
}

bool read_int(const Json& j, int& out) {
  if (!j.is_number_integer()) return false;
  const auto v = j.get<std::int64_t>();
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) return false;
  out = static_cast<int>(v);
  return true;
}

bool read_value(const Json& j, int& out) { return read_int(j, out); }

bool read_value(const Json& j, std::int64_t& out) {
  if (!j.is_number_integer()) return false;
  out = j.get<std::int64_t>();
  return true;
}

bool read_value(const Json& j, std::uint64_t& out) {
  if (!j.is_number_unsigned()) return false;
  out = j.get<std::uint64_t>();
  return true;
}

bool read_value(const Json& j, double& out) {
  if (j.is_number()) {
    out = j.get<double>();
    return true;
  }
  if (j.is_string() && (j.get<std::string>() == "inf" || j.get<std::string>() == "infinity")) {
    out = std::numeric_limits<double>::infinity();
    return true;
  }
  return false;
}

bool read_value(const Json& j, bool& out) {
  if (!j.is_boolean()) return false;
  out = j.get<bool>();
  return true;
}

bool read_value(const Json& j, std::string& out) {
  if (!j.is_string()) return false;
  out = j.get<std::string>();
  return true;
}

template <class T>
bool read_value(const Json& j, std::vector<T>& out) {
  if (!j.is_array()) return false;
  std::vector<T> v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i)
    if (!read_value(j[i], v[i])) return false;
  out = std::move(v);
  return true;
}

template <class T>
const char* type_name() {
  if constexpr (std::is_same_v<T, int> || std::is_same_v<T, std::int64_t>) return "an integer";
  else if constexpr (std::is_same_v<T, std::uint64_t>) return "a non-negative integer";
  else if constexpr (std::is_same_v<T, double>) return "a number";
  else if constexpr (std::is_same_v<T, bool>) return "true or false";
  else if constexpr (std::is_same_v<T, std::string>) return "a string";
  else if constexpr (std::is_same_v<T, std::vector<int>>) return "an array of integers";
  else return "an array of numbers";
}

template <class T>
void field(const Json& obj, const std::string& path, const char* key, T& out, Errors& err,
           bool required = false) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    if (required) err.add(join(path, key), "required");
    return;
  }
  if (!read_value(*it, out)) err.add(join(path, key), std::string("expected ") + type_name<T>());
}

template <class E, class Parse>
void enum_field(const Json& obj, const std::string& path, const char* key, E& out, Parse parse, Errors& err) {
  std::string name;
  auto it = obj.find(key);
  if (it == obj.end()) return;
  if (!read_value(*it, name)) {
    err.add(join(path, key), "expected a string");
    return;
  }
  try {
    out = parse(name);
  } catch (const Error& e) {
    err.add(join(path, key), e.what());
  }
}

void require(bool ok, const std::string& field, const std::string& msg, Errors& err) {
  if (!ok) err.add(field, msg);
}

void validate_widths(const std::vector<int>& widths, const std::string& field, Errors& err) {
  for (int w : widths)
    if (w < 1) {
      err.add(field, "layer widths must be >= 1");
      return;
    }
}

bool is_random_network(const std::string& kind) { return kind == "er" || kind == "ba" || kind == "ws"; }

void validate(const ExperimentConfig& c, Errors& err) {
  const auto& n = c.network;
  if (n.kind == "grid") {
    require(n.side >= 2, "network.side", "must be >= 2", err);
  } else if (n.kind == "er") {
    require(n.n >= 1, "network.n", "must be >= 1", err);
    require(n.p >= 0.0 && n.p <= 1.0, "network.p", "must lie in [0, 1]", err);
  } else if (n.kind == "ba") {
    require(n.m >= 1, "network.m", "must be >= 1", err);
    require(n.n > n.m, "network.n", "must exceed network.m", err);
  } else if (n.kind == "ws") {
    require(n.k >= 2 && n.k % 2 == 0, "network.k", "must be even and >= 2", err);
    require(n.n > n.k, "network.n", "must exceed network.k", err);
    require(n.beta >= 0.0 && n.beta <= 1.0, "network.beta", "must lie in [0, 1]", err);
  } else if (n.kind == "file") {
    require(!n.path.empty(), "network.path", "required for kind file", err);
  } else {
    err.add("network.kind", "unknown network kind '" + n.kind + "' (expected grid, er, ba, ws or file)");
  }
  try {
    c.dynamics.validate();
  } catch (const Error& e) {
    err.add("dynamics", e.what());
  }
  require(c.sampling.count >= 1, "sampling.count", "must be >= 1", err);
  require(c.sampling.t_max > 0.0 && std::isfinite(c.sampling.t_max), "sampling.t_max", "must be positive", err);
  require(c.x0.lo < c.x0.hi && std::isfinite(c.x0.lo) && std::isfinite(c.x0.hi), "x0", "need lo < hi", err);

  const auto& m = c.model;
  validate_widths(m.self_hidden, "model.self_hidden", err);
  validate_widths(m.coupling_hidden, "model.coupling_hidden", err);
  validate_widths(m.encoder_hidden, "model.encoder_hidden", err);
  validate_widths(m.latent_hidden, "model.latent_hidden", err);
  validate_widths(m.decoder_hidden, "model.decoder_hidden", err);
  require(m.embed_dim >= 1, "model.embed_dim", "must be >= 1", err);

  const auto& t = c.training;
  require(t.epochs >= 0, "training.epochs", "must be >= 0", err);
  require(t.learning_rate > 0.0 && std::isfinite(t.learning_rate), "training.learning_rate", "must be positive", err);
  require(t.beta1 >= 0.0 && t.beta1 < 1.0, "training.beta1", "must lie in [0, 1)", err);
  require(t.beta2 >= 0.0 && t.beta2 < 1.0, "training.beta2", "must lie in [0, 1)", err);
  require(t.epsilon > 0.0, "training.epsilon", "must be positive", err);
  require(t.substeps_per_obs >= 1, "training.substeps_per_obs", "must be >= 1", err);
  require(t.reg_weight >= 0.0 && std::isfinite(t.reg_weight), "training.reg_weight", "must be >= 0", err);
  require(!t.warmup_taus.empty(), "training.warmup_taus", "must not be empty", err);
  for (double tau : t.warmup_taus)
    if (!(tau > 0.0)) {
      err.add("training.warmup_taus", "temperatures must be positive");
      break;
    }
  require(t.epochs_per_stage >= 1, "training.epochs_per_stage", "must be >= 1", err);

  const auto& e = c.eval;
  try {
    validate_windows(e.windows);
  } catch (const Error& ex) {
    err.add("eval.windows", ex.what());
  }
  require(e.repeats >= 1, "eval.repeats", "must be >= 1", err);
  try {
    c.lyapunov_config().validate();
  } catch (const Error& ex) {
    err.add("eval.lyapunov", ex.what());
  }
  require(e.flow_t1 > 0.0 && e.flow_t2 > 0.0, "eval.flow", "t1 and t2 must be positive", err);
  try {
    c.solver.validate();
  } catch (const Error& ex) {
    err.add("solver", ex.what());
  }
}

Json number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

}  // namespace

TrainingConfig default_training(ModelKind kind) {
  TrainingConfig t;
  if (kind == ModelKind::Ndcn) {
    t.warmup = false;
    t.learning_rate = 1e-2;
  }
  return t;
}

TrainConfig ExperimentConfig::train_config() const {
  TrainConfig t;
  t.epochs = training.epochs;
  t.adam = {training.learning_rate, training.beta1, training.beta2, training.epsilon};
  t.substeps_per_obs = training.substeps_per_obs;
  t.loss = training.loss;
  t.reg_weight = training.reg_weight;
  t.reg_kind = training.reg_kind;
  t.seed = model.seed;
  return t;
}

WarmupSchedule ExperimentConfig::warmup_schedule() const {
  if (!training.warmup) return WarmupSchedule::disabled();
  WarmupSchedule s;
  s.taus = training.warmup_taus;
  s.epochs_per_stage = training.epochs_per_stage;
  return s;
}

DnndArchitecture ExperimentConfig::dnnd_architecture() const {
  return {model.self_hidden, model.coupling_hidden, model.activation};
}

NdcnArchitecture ExperimentConfig::ndcn_architecture() const {
  return {model.embed_dim, model.encoder_hidden, model.latent_hidden, model.decoder_hidden, model.activation};
}

LyapunovConfig ExperimentConfig::lyapunov_config() const {
  LyapunovConfig l;
  l.delta0 = eval.lyapunov_delta0;
  l.renorm_interval = eval.lyapunov_renorm_interval;
  l.horizon = eval.lyapunov_horizon;
  l.transient = eval.lyapunov_transient;
  l.seed = mix_seed(eval.seed, 0x4c59);
  l.solver = solver;
  return l;
}

ExperimentConfig parse_config(const std::string& text) {
  Json root;
  try {
    root = Json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: invalid syntax: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config: top level must be an object");

  Errors err;
  ExperimentConfig c;
  check_keys(root, "", {"network", "dynamics", "sampling", "x0", "model", "training", "eval", "solver"}, err);

  if (const Json* s = section(root, "network", true, err)) {
    check_keys(*s, "network", {"kind", "side", "n", "p", "m", "k", "beta", "path", "seed"}, err);
    field(*s, "network", "kind", c.network.kind, err, true);
    field(*s, "network", "side", c.network.side, err);
    field(*s, "network", "n", c.network.n, err);
    field(*s, "network", "p", c.network.p, err);
    field(*s, "network", "m", c.network.m, err);
    field(*s, "network", "k", c.network.k, err);
    field(*s, "network", "beta", c.network.beta, err);
    field(*s, "network", "path", c.network.path, err);
    field(*s, "network", "seed", c.network.seed, err, is_random_network(c.network.kind));
  }
  if (const Json* s = section(root, "dynamics", true, err)) {
    check_keys(*s, "dynamics",
               {"kind", "alpha", "bio_source", "bio_decay", "bio_coupling", "bd_decay", "bd_coupling"}, err);
    if (!s->contains("kind")) err.add("dynamics.kind", "required");
    enum_field(*s, "dynamics", "kind", c.dynamics.kind, parse_dynamics_kind, err);
    field(*s, "dynamics", "alpha", c.dynamics.alpha, err);
    field(*s, "dynamics", "bio_source", c.dynamics.bio_source, err);
    field(*s, "dynamics", "bio_decay", c.dynamics.bio_decay, err);
    field(*s, "dynamics", "bio_coupling", c.dynamics.bio_coupling, err);
    field(*s, "dynamics", "bd_decay", c.dynamics.bd_decay, err);
    field(*s, "dynamics", "bd_coupling", c.dynamics.bd_coupling, err);
  }
  if (const Json* s = section(root, "sampling", true, err)) {
    check_keys(*s, "sampling", {"count", "t_max", "seed"}, err);
    field(*s, "sampling", "count", c.sampling.count, err);
    field(*s, "sampling", "t_max", c.sampling.t_max, err);
    field(*s, "sampling", "seed", c.sampling.seed, err, true);
  }
  if (const Json* s = section(root, "x0", true, err)) {
    check_keys(*s, "x0", {"lo", "hi", "seed"}, err);
    field(*s, "x0", "lo", c.x0.lo, err);
    field(*s, "x0", "hi", c.x0.hi, err);
    field(*s, "x0", "seed", c.x0.seed, err, true);
  }
  if (const Json* s = section(root, "model", true, err)) {
    check_keys(*s, "model",
               {"kind", "self_hidden", "coupling_hidden", "embed_dim", "encoder_hidden", "latent_hidden",
                "decoder_hidden", "activation", "seed"},
               err);
    enum_field(*s, "model", "kind", c.model.kind, parse_model_kind, err);
    field(*s, "model", "self_hidden", c.model.self_hidden, err);
    field(*s, "model", "coupling_hidden", c.model.coupling_hidden, err);
    field(*s, "model", "embed_dim", c.model.embed_dim, err);
    field(*s, "model", "encoder_hidden", c.model.encoder_hidden, err);
    field(*s, "model", "latent_hidden", c.model.latent_hidden, err);
    field(*s, "model", "decoder_hidden", c.model.decoder_hidden, err);
    enum_field(*s, "model", "activation", c.model.activation, parse_activation, err);
    field(*s, "model", "seed", c.model.seed, err, true);
  }
  c.training = default_training(c.model.kind);
  if (const Json* s = section(root, "training", false, err)) {
    check_keys(*s, "training",
               {"epochs", "learning_rate", "beta1", "beta2", "epsilon", "substeps_per_obs", "loss", "reg_weight",
                "reg_kind", "warmup", "warmup_taus", "epochs_per_stage"},
               err);
    field(*s, "training", "epochs", c.training.epochs, err);
    field(*s, "training", "learning_rate", c.training.learning_rate, err);
    field(*s, "training", "beta1", c.training.beta1, err);
    field(*s, "training", "beta2", c.training.beta2, err);
    field(*s, "training", "epsilon", c.training.epsilon, err);
    field(*s, "training", "substeps_per_obs", c.training.substeps_per_obs, err);
    enum_field(*s, "training", "loss", c.training.loss, parse_loss_kind, err);
    field(*s, "training", "reg_weight", c.training.reg_weight, err);
    enum_field(*s, "training", "reg_kind", c.training.reg_kind, parse_penalty, err);
    field(*s, "training", "warmup", c.training.warmup, err);
    field(*s, "training", "warmup_taus", c.training.warmup_taus, err);
    field(*s, "training", "epochs_per_stage", c.training.epochs_per_stage, err);
  }
  if (const Json* s = section(root, "eval", true, err)) {
    check_keys(*s, "eval", {"windows", "repeats", "seed", "lyapunov", "flow"}, err);
    if (auto it = s->find("windows"); it != s->end()) {
      if (!it->is_array()) {
        err.add("eval.windows", "expected an array");
      } else {
        c.eval.windows.clear();
        for (std::size_t i = 0; i < it->size(); ++i) {
          const Json& w = (*it)[i];
          const std::string path = "eval.windows[" + std::to_string(i) + "]";
          if (!w.is_object()) {
            err.add(path, "expected an object");
            continue;
          }
          check_keys(w, path, {"label", "t_lo", "t_hi", "samples"}, err);
          EvalWindow win;
          field(w, path, "label", win.label, err, true);
          field(w, path, "t_lo", win.t_lo, err, true);
          field(w, path, "t_hi", win.t_hi, err, true);
          field(w, path, "samples", win.samples, err);
          c.eval.windows.push_back(win);
        }
      }
    }
    field(*s, "eval", "repeats", c.eval.repeats, err);
    field(*s, "eval", "seed", c.eval.seed, err, true);
    if (auto it = s->find("lyapunov"); it != s->end()) {
      if (!it->is_object()) {
        err.add("eval.lyapunov", "expected an object");
      } else {
        check_keys(*it, "eval.lyapunov", {"enabled", "delta0", "renorm_interval", "horizon", "transient"}, err);
        field(*it, "eval.lyapunov", "enabled", c.eval.lyapunov, err);
        field(*it, "eval.lyapunov", "delta0", c.eval.lyapunov_delta0, err);
        field(*it, "eval.lyapunov", "renorm_interval", c.eval.lyapunov_renorm_interval, err);
        field(*it, "eval.lyapunov", "horizon", c.eval.lyapunov_horizon, err);
        field(*it, "eval.lyapunov", "transient", c.eval.lyapunov_transient, err);
      }
    }
    if (auto it = s->find("flow"); it != s->end()) {
      if (!it->is_object()) {
        err.add("eval.flow", "expected an object");
      } else {
        check_keys(*it, "eval.flow", {"enabled", "t1", "t2"}, err);
        field(*it, "eval.flow", "enabled", c.eval.flow_check, err);
        field(*it, "eval.flow", "t1", c.eval.flow_t1, err);
        field(*it, "eval.flow", "t2", c.eval.flow_t2, err);
      }
    }
  }
  if (const Json* s = section(root, "solver", false, err)) {
    check_keys(*s, "solver", {"rtol", "atol", "h_init", "h_min", "h_max", "max_steps"}, err);
    field(*s, "solver", "rtol", c.solver.rtol, err);
    field(*s, "solver", "atol", c.solver.atol, err);
    field(*s, "solver", "h_init", c.solver.h_init, err);
    field(*s, "solver", "h_min", c.solver.h_min, err);
    field(*s, "solver", "h_max", c.solver.h_max, err);
    field(*s, "solver", "max_steps", c.solver.max_steps, err);
  }

  if (err.list.empty()) validate(c, err);
  if (!err.list.empty()) {
    std::string msg = "invalid config:";
    for (const auto& e : err.list) msg += "\n  " + e;
    throw ConfigError(msg);
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) { return parse_config(read_text_file(path)); }

std::string serialize_config(const ExperimentConfig& c) {
  Json j;
  const auto& n = c.network;
  Json net = {{"kind", n.kind}};
  if (n.kind == "grid") net["side"] = n.side;
  if (n.kind == "er") net["n"] = n.n, net["p"] = n.p;
  if (n.kind == "ba") net["n"] = n.n, net["m"] = n.m;
  if (n.kind == "ws") net["n"] = n.n, net["k"] = n.k, net["beta"] = n.beta;
  if (n.kind == "file") net["path"] = n.path;
  net["seed"] = n.seed;
  j["network"] = net;
  const auto& d = c.dynamics;
  j["dynamics"] = {{"kind", to_string(d.kind)},   {"alpha", d.alpha},       {"bio_source", d.bio_source},
                   {"bio_decay", d.bio_decay},    {"bio_coupling", d.bio_coupling},
                   {"bd_decay", d.bd_decay},      {"bd_coupling", d.bd_coupling}};
  j["sampling"] = {{"count", c.sampling.count}, {"t_max", c.sampling.t_max}, {"seed", c.sampling.seed}};
  j["x0"] = {{"lo", c.x0.lo}, {"hi", c.x0.hi}, {"seed", c.x0.seed}};
  const auto& m = c.model;
  j["model"] = {{"kind", to_string(m.kind)},
                {"self_hidden", m.self_hidden},
                {"coupling_hidden", m.coupling_hidden},
                {"embed_dim", m.embed_dim},
                {"encoder_hidden", m.encoder_hidden},
                {"latent_hidden", m.latent_hidden},
                {"decoder_hidden", m.decoder_hidden},
                {"activation", to_string(m.activation)},
                {"seed", m.seed}};
  const auto& t = c.training;
  Json taus = Json::array();
  for (double tau : t.warmup_taus) taus.push_back(number(tau));
  j["training"] = {{"epochs", t.epochs},
                   {"learning_rate", t.learning_rate},
                   {"beta1", t.beta1},
                   {"beta2", t.beta2},
                   {"epsilon", t.epsilon},
                   {"substeps_per_obs", t.substeps_per_obs},
                   {"loss", to_string(t.loss)},
                   {"reg_weight", t.reg_weight},
                   {"reg_kind", to_string(t.reg_kind)},
                   {"warmup", t.warmup},
                   {"warmup_taus", taus},
                   {"epochs_per_stage", t.epochs_per_stage}};
  const auto& e = c.eval;
  Json windows = Json::array();
  for (const auto& w : e.windows)
    windows.push_back({{"label", w.label}, {"t_lo", w.t_lo}, {"t_hi", w.t_hi}, {"samples", w.samples}});
  j["eval"] = {{"windows", windows},
               {"repeats", e.repeats},
               {"seed", e.seed},
               {"lyapunov",
                {{"enabled", e.lyapunov},
                 {"delta0", e.lyapunov_delta0},
                 {"renorm_interval", e.lyapunov_renorm_interval},
                 {"horizon", e.lyapunov_horizon},
                 {"transient", e.lyapunov_transient}}},
               {"flow", {{"enabled", e.flow_check}, {"t1", e.flow_t1}, {"t2", e.flow_t2}}}};
  const auto& s = c.solver;
  j["solver"] = {{"rtol", s.rtol},   {"atol", s.atol},   {"h_init", s.h_init},
                 {"h_min", s.h_min}, {"h_max", s.h_max}, {"max_steps", s.max_steps}};
  return j.dump(2) + "\n";
}

std::string config_hash(const ExperimentConfig& cfg) { return hex64(fnv1a64(serialize_config(cfg))); }

Network build_network(const NetworkConfig& cfg) {
  if (cfg.kind == "grid") return generate_grid(cfg.side);
  if (cfg.kind == "er") return generate_er(cfg.n, cfg.p, cfg.seed);
  if (cfg.kind == "ba") return generate_ba(cfg.n, cfg.m, cfg.seed);
  if (cfg.kind == "ws") return generate_ws(cfg.n, cfg.k, cfg.beta, cfg.seed);
  if (cfg.kind == "file") return load_edge_list(cfg.path);
  throw ConfigError("unknown network kind '" + cfg.kind + "'");
}

Vec draw_initial_state(int n, const InitialStateConfig& cfg) {
  if (n < 0) throw InvalidArgument("initial state: negative size");
  if (!(cfg.lo < cfg.hi)) throw InvalidArgument("initial state: need lo < hi");
  Rng rng(cfg.seed);
  Vec x(n);
  for (int i = 0; i < n; ++i) x[i] = rng.uniform(cfg.lo, cfg.hi);
  return x;
}

}  // namespace netflow
