// netflow-id: command-line front end over the netflow C API.
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "netflow/netflow.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;
constexpr int kExitInternal = 1;

int exit_code(nf_status s) {
  switch (s) {
    case NF_OK: return kExitOk;
    case NF_ERR_INVALID_ARGUMENT:
    case NF_ERR_CONFIG: return kExitConfig;
    case NF_ERR_NUMERICAL: return kExitNumerical;
    case NF_ERR_FORMAT:
    case NF_ERR_IO: return kExitIo;
    case NF_ERR_INTERNAL: break;
  }
  return kExitInternal;
}

// Thrown out of subcommand bodies; carries the process exit code.
struct Failure {
  int code;
};

void check(nf_status s, const std::string& context) {
  if (s == NF_OK) return;
  std::fprintf(stderr, "netflow-id: %s: %s (%s)\n", context.c_str(), nf_last_error(), nf_status_name(s));
  throw Failure{exit_code(s)};
}

[[noreturn]] void usage_error(const std::string& msg) {
  std::fprintf(stderr, "netflow-id: %s\n", msg.c_str());
  throw Failure{kExitConfig};
}

template <class T, void (*Free)(T*)>
struct Handle {
  T* p = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() { Free(p); }
  T** out() { return &p; }
  T* get() const { return p; }
};

using Network = Handle<nf_network, nf_network_free>;
using Series = Handle<nf_series, nf_series_free>;
using Model = Handle<nf_model, nf_model_free>;
using Config = Handle<nf_config, nf_config_free>;

std::string provenance;  // "<subcommand> args <hash>", written into outputs

void set_provenance(int argc, char** argv) {
  std::string joined;
  for (int i = 1; i < argc; ++i) joined += std::string(argv[i]) + '\n';
  char hash[17];
  check(nf_hash_string(joined.c_str(), hash), "hash");
  provenance = std::string("netflow-id ") + (argc > 1 ? argv[1] : "") + " args_hash " + hash;
}

void load_network(const std::string& path, Network& net) { check(nf_network_load(path.c_str(), net.out()), "load " + path); }

std::vector<double> load_state(const std::string& path, int n) {
  Series s;
  check(nf_series_load(path.c_str(), s.out()), "load " + path);
  if (nf_series_dimension(s.get()) != static_cast<size_t>(n) || nf_series_length(s.get()) < 1)
    usage_error(path + ": expected a state of " + std::to_string(n) + " nodes");
  std::vector<double> all(nf_series_dimension(s.get()) * nf_series_length(s.get()));
  check(nf_series_states(s.get(), all.data()), "read " + path);
  return {all.begin(), all.begin() + n};
}

nf_dynamics parse_dynamics(const std::string& name) {
  nf_dynamics d;
  check(nf_dynamics_parse(name.c_str(), &d), "dynamics");
  return d;
}

std::vector<double> parse_taus(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "inf" || item == "infinity") {
      out.push_back(std::numeric_limits<double>::infinity());
      continue;
    }
    try {
      size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      usage_error("--taus: '" + item + "' is not a number");
    }
  }
  return out;
}

void print_number(const char* label, double v) { std::printf("%s %.17g\n", label, v); }

struct SolverArgs {
  nf_solver_options opts{};
  SolverArgs() { nf_solver_defaults(&opts); }
  void add(CLI::App* app) {
    app->add_option("--rtol", opts.rtol, "relative tolerance")->capture_default_str();
    app->add_option("--atol", opts.atol, "absolute tolerance")->capture_default_str();
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Identify network dynamics from trajectories; evaluate and compare models."};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(nf_version()));

  // graph
  auto* graph = app.add_subcommand("graph", "generate a network and write it as an edge list");
  std::string g_kind = "grid", g_out;
  int g_side = 20, g_n = 50, g_m = 2, g_k = 4;
  double g_p = 0.1, g_beta = 0.1;
  uint64_t g_seed = 0;
  graph->add_option("--kind", g_kind, "grid | er | ba | ws")->check(CLI::IsMember({"grid", "er", "ba", "ws"}))
      ->capture_default_str();
  graph->add_option("--side", g_side, "grid side length")->capture_default_str();
  graph->add_option("--n", g_n, "node count (er, ba, ws)")->capture_default_str();
  graph->add_option("--p", g_p, "edge probability (er)")->capture_default_str();
  graph->add_option("--m", g_m, "edges per new node (ba)")->capture_default_str();
  graph->add_option("--k", g_k, "ring degree (ws)")->capture_default_str();
  graph->add_option("--beta", g_beta, "rewiring probability (ws)")->capture_default_str();
  graph->add_option("--seed", g_seed, "generator seed")->capture_default_str();
  graph->add_option("--out", g_out, "edge list path")->required();

  // simulate
  auto* simulate = app.add_subcommand("simulate", "integrate ground-truth dynamics and sample observations");
  std::string s_net, s_dyn = "heat", s_out, s_x0_in, s_x0_out;
  int s_count = 80;
  double s_tmax = 5.0, s_lo = 0.0, s_hi = 25.0, s_alpha = std::nan("");
  uint64_t s_sample_seed = 0, s_x0_seed = 0;
  simulate->add_option("--net", s_net, "edge list")->required();
  simulate->add_option("--dyn", s_dyn, "heat | biochemical | birthdeath")->capture_default_str();
  simulate->add_option("--alpha", s_alpha, "heat diffusion constant");
  simulate->add_option("--count", s_count, "number of observation times")->capture_default_str();
  simulate->add_option("--t-max", s_tmax, "observation horizon")->capture_default_str();
  simulate->add_option("--sample-seed", s_sample_seed, "seed of the observation times")->capture_default_str();
  auto* x0_in = simulate->add_option("--x0", s_x0_in, "initial state CSV (otherwise drawn uniformly)");
  simulate->add_option("--x0-lo", s_lo, "lower bound of the drawn initial state")->capture_default_str();
  simulate->add_option("--x0-hi", s_hi, "upper bound of the drawn initial state")->capture_default_str();
  simulate->add_option("--x0-seed", s_x0_seed, "seed of the drawn initial state")->excludes(x0_in)->capture_default_str();
  simulate->add_option("--x0-out", s_x0_out, "write the initial state here");
  simulate->add_option("--out", s_out, "observation CSV")->required();
  SolverArgs s_solver;
  s_solver.opts.rtol = 1e-10;
  s_solver.opts.atol = 1e-12;
  s_solver.add(simulate);

  // train
  auto* train = app.add_subcommand("train", "fit a model to observations");
  std::string t_model = "dnnd", t_net, t_obs, t_out, t_losses, t_loss = "mae", t_reg_kind = "l2", t_taus, t_act = "tanh";
  std::vector<int> t_self, t_coupling, t_enc, t_lat, t_dec;
  int t_embed = 20;
  bool t_no_warmup = false;
  uint64_t t_seed = 0;
  nf_train_options topt{};
  std::string t_config;
  auto* o_model =
      train->add_option("--model", t_model, "dnnd | ndcn")->check(CLI::IsMember({"dnnd", "ndcn"}))->capture_default_str();
  train->add_option("--net", t_net, "edge list")->required();
  train->add_option("--obs,--data", t_obs, "observation CSV")->required();
  train->add_option("--out", t_out, "checkpoint path")->required();
  train->add_option("--losses,--log", t_losses, "per-epoch loss CSV");
  auto* o_config = train->add_option("--config", t_config, "experiment config supplying model and training settings");
  auto* o_seed = train->add_option("--seed", t_seed, "initialisation seed")->capture_default_str();
  auto* o_epochs = train->add_option("--epochs", topt.epochs, "epochs");
  auto* o_lr = train->add_option("--lr", topt.learning_rate, "Adam learning rate");
  auto* o_sub = train->add_option("--substeps", topt.substeps_per_obs, "RK4 steps per observation gap");
  train->add_option("--loss", t_loss, "mae | mse")->check(CLI::IsMember({"mae", "mse"}))->capture_default_str();
  auto* o_reg = train->add_option("--reg-weight", topt.reg_weight, "weight penalty");
  train->add_option("--reg-kind", t_reg_kind, "l2 | l1")->check(CLI::IsMember({"l2", "l1"}))->capture_default_str();
  train->add_flag("--no-warmup", t_no_warmup, "train on the plain loss");
  train->add_option("--taus", t_taus, "comma-separated warm-up temperatures, inf allowed");
  auto* o_eps = train->add_option("--epochs-per-stage", topt.epochs_per_stage, "epochs per temperature");
  for (auto* arch : {train->add_option("--hidden", t_self, "DNND self-term hidden widths")->delimiter(','),
                     train->add_option("--coupling-hidden", t_coupling, "DNND coupling-term hidden widths")->delimiter(','),
                     train->add_option("--embed-dim", t_embed, "NDCN embedding dimension")->capture_default_str(),
                     train->add_option("--encoder-hidden", t_enc, "NDCN encoder hidden widths")->delimiter(','),
                     train->add_option("--latent-hidden", t_lat, "NDCN latent hidden widths")->delimiter(','),
                     train->add_option("--decoder-hidden", t_dec, "NDCN decoder hidden widths")->delimiter(','),
                     train->add_option("--activation", t_act, "tanh | relu")
                         ->check(CLI::IsMember({"tanh", "relu"}))
                         ->capture_default_str(),
                     o_seed})
    arch->excludes(o_config);

  // shared by eval / flowcheck / lyapunov / export-field
  std::string e_model, e_net, e_x0, e_dyn;

  auto* eval = app.add_subcommand("eval", "windowed MAPE and stability checks of a trained model");
  std::string e_windows = "default", e_out, e_mape;
  nf_eval_options eopt;
  nf_eval_defaults(&eopt);
  bool e_no_lyap = false, e_no_flow = false;
  eval->add_option("--model", e_model, "checkpoint")->required();
  eval->add_option("--net", e_net, "edge list the model was trained on")->required();
  eval->add_option("--x0", e_x0, "initial state CSV")->required();
  eval->add_option("--truth-dyn", e_dyn, "heat | biochemical | birthdeath")->required();
  eval->add_option("--windows", e_windows, "default, or label:t_lo:t_hi:samples,...")->capture_default_str();
  eval->add_option("--repeats", eopt.repeats, "repeats with fresh evaluation times")->capture_default_str();
  eval->add_option("--seed", eopt.seed, "evaluation seed")->capture_default_str();
  eval->add_flag("--no-lyapunov", e_no_lyap, "skip the Lyapunov estimates");
  eval->add_flag("--no-flow", e_no_flow, "skip the flow-consistency check");
  eval->add_option("--out", e_out, "JSON report");
  eval->add_option("--mape-out", e_mape, "MAPE table CSV");

  auto* flow = app.add_subcommand("flowcheck", "restart-at-t1 deviation of a model or of the true dynamics");
  double f_t1 = 5.0, f_t2 = 5.0;
  int f_count = 10;
  SolverArgs f_solver;
  auto* f_model = flow->add_option("--model", e_model, "checkpoint");
  auto* f_dyn = flow->add_option("--truth-dyn", e_dyn, "check the ground truth instead");
  f_model->excludes(f_dyn);
  flow->add_option("--net", e_net, "edge list")->required();
  flow->add_option("--x0", e_x0, "initial state CSV")->required();
  flow->add_option("--t1", f_t1, "restart time")->capture_default_str();
  flow->add_option("--t2", f_t2, "time after the restart")->capture_default_str();
  flow->add_option("--count", f_count, "comparison times")->capture_default_str();
  f_solver.add(flow);

  auto* lyap = app.add_subcommand("lyapunov", "largest Lyapunov exponent of a model or of the true dynamics");
  nf_lyapunov_options lopt;
  nf_lyapunov_defaults(&lopt);
  SolverArgs l_solver;
  auto* l_model = lyap->add_option("--model", e_model, "checkpoint");
  auto* l_dyn = lyap->add_option("--truth-dyn", e_dyn, "estimate for the ground truth instead");
  l_model->excludes(l_dyn);
  lyap->add_option("--net", e_net, "edge list")->required();
  lyap->add_option("--x0", e_x0, "initial state CSV")->required();
  lyap->add_option("--delta0", lopt.delta0, "perturbation size")->capture_default_str();
  lyap->add_option("--renorm-interval", lopt.renorm_interval, "time between renormalisations")->capture_default_str();
  lyap->add_option("--horizon", lopt.horizon, "total time")->capture_default_str();
  lyap->add_option("--transient", lopt.transient, "discarded initial time")->capture_default_str();
  lyap->add_option("--seed", lopt.seed, "perturbation direction seed")->capture_default_str();
  l_solver.add(lyap);

  auto* exportf = app.add_subcommand("export-field", "tabulate learned F and G of a DNND model");
  double x_lo = 0.0, x_hi = 25.0;
  int x_res = 51;
  std::string x_self, x_coupling;
  exportf->add_option("--model", e_model, "DNND checkpoint")->required();
  exportf->add_option("--net", e_net, "edge list")->required();
  exportf->add_option("--lo", x_lo, "range start")->capture_default_str();
  exportf->add_option("--hi", x_hi, "range end")->capture_default_str();
  exportf->add_option("--resolution", x_res, "grid points per axis")->capture_default_str();
  exportf->add_option("--out-self", x_self, "F table CSV")->required();
  exportf->add_option("--out-coupling", x_coupling, "G table CSV")->required();

  auto* run = app.add_subcommand("run", "full experiment from a config file");
  std::string r_config, r_out;
  bool r_check = false;
  run->add_option("--config", r_config, "experiment config")->required();
  run->add_option("--out", r_out, "output directory");
  run->add_flag("--check", r_check, "validate the config and print its canonical form");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    set_provenance(argc, argv);

    if (*graph) {
      Network net;
      if (g_kind == "grid") check(nf_network_grid(g_side, net.out()), "graph");
      if (g_kind == "er") check(nf_network_er(g_n, g_p, g_seed, net.out()), "graph");
      if (g_kind == "ba") check(nf_network_ba(g_n, g_m, g_seed, net.out()), "graph");
      if (g_kind == "ws") check(nf_network_ws(g_n, g_k, g_beta, g_seed, net.out()), "graph");
      check(nf_network_save(net.get(), g_out.c_str(), provenance.c_str()), "write " + g_out);
      char fp[17];
      check(nf_network_fingerprint(net.get(), fp), "fingerprint");
      std::printf("nodes %d edges %zu fingerprint %s\n", nf_network_node_count(net.get()),
                  nf_network_edge_count(net.get()), fp);
    } else if (*simulate) {
      Network net;
      load_network(s_net, net);
      const int n = nf_network_node_count(net.get());
      nf_dynamics dyn = parse_dynamics(s_dyn);
      if (!std::isnan(s_alpha)) dyn.alpha = s_alpha;
      std::vector<double> x0(n);
      if (!s_x0_in.empty())
        x0 = load_state(s_x0_in, n);
      else
        check(nf_initial_state(n, s_lo, s_hi, s_x0_seed, x0.data()), "initial state");
      if (s_count < 1) usage_error("--count must be >= 1");
      std::vector<double> times(s_count);
      check(nf_sample_times(s_count, s_tmax, s_sample_seed, times.data()), "sample times");
      Series obs;
      check(nf_simulate(net.get(), &dyn, x0.data(), times.data(), times.size(), &s_solver.opts, obs.out()), "simulate");
      check(nf_series_save(obs.get(), s_out.c_str(), provenance.c_str()), "write " + s_out);
      if (!s_x0_out.empty()) {
        const double t0 = 0.0;
        Series xs;
        check(nf_series_create(n, 1, &t0, x0.data(), xs.out()), "initial state");
        check(nf_series_save(xs.get(), s_x0_out.c_str(), provenance.c_str()), "write " + s_x0_out);
      }
    } else if (*train) {
      Network net;
      load_network(t_net, net);
      Series obs;
      check(nf_series_load(t_obs.c_str(), obs.out()), "load " + t_obs);
      nf_model_kind kind = t_model == "ndcn" ? NF_MODEL_NDCN : NF_MODEL_DNND;
      const nf_activation act = t_act == "relu" ? NF_RELU : NF_TANH;
      Model model;
      nf_train_options o;
      if (!t_config.empty()) {
        Config cfg;
        check(nf_config_load(t_config.c_str(), cfg.out()), "load " + t_config);
        nf_model_kind cfg_kind;
        check(nf_config_model_kind(cfg.get(), &cfg_kind), "config");
        if (*o_model && cfg_kind != kind) usage_error("--model disagrees with the config's model kind");
        kind = cfg_kind;
        check(nf_model_create_from_config(net.get(), cfg.get(), model.out()), "create model");
        check(nf_config_train_options(cfg.get(), &o), "config");
      } else if (kind == NF_MODEL_DNND) {
        if (t_self.empty() != t_coupling.empty())
          usage_error("--hidden and --coupling-hidden must be given together");
        if (t_self.empty() && act == NF_TANH)
          check(nf_model_create_default(net.get(), kind, t_seed, model.out()), "create model");
        else {
          if (t_self.empty()) usage_error("--activation needs --hidden and --coupling-hidden");
          check(nf_model_create_dnnd(net.get(), t_self.data(), t_self.size(), t_coupling.data(), t_coupling.size(),
                                     act, t_seed, model.out()),
                "create model");
        }
        nf_train_defaults(kind, &o);
      } else {
        if (t_enc.empty()) t_enc = {20};
        if (t_lat.empty()) t_lat = {20};
        if (t_dec.empty()) t_dec = {20};
        check(nf_model_create_ndcn(net.get(), t_embed, t_enc.data(), t_enc.size(), t_lat.data(), t_lat.size(),
                                   t_dec.data(), t_dec.size(), act, t_seed, model.out()),
              "create model");
        nf_train_defaults(kind, &o);
      }
      if (*o_epochs) o.epochs = topt.epochs;
      if (*o_lr) o.learning_rate = topt.learning_rate;
      if (*o_sub) o.substeps_per_obs = topt.substeps_per_obs;
      if (*o_reg) o.reg_weight = topt.reg_weight;
      if (*o_eps) o.epochs_per_stage = topt.epochs_per_stage;
      if (*train->get_option("--loss") || t_config.empty()) o.loss_mse = t_loss == "mse";
      if (*train->get_option("--reg-kind") || t_config.empty()) o.reg_l1 = t_reg_kind == "l1";
      if (t_no_warmup) o.warmup = 0;
      if (!t_taus.empty()) {
        const auto taus = parse_taus(t_taus);
        if (taus.empty() || taus.size() > NF_MAX_WARMUP_STAGES) usage_error("--taus: 1 to 16 temperatures");
        o.warmup = 1;
        o.warmup_stages = taus.size();
        for (size_t i = 0; i < taus.size(); ++i) o.warmup_taus[i] = taus[i];
      }
      double final_loss = 0.0;
      check(nf_model_train(model.get(), obs.get(), &o, t_losses.empty() ? nullptr : t_losses.c_str(),
                           provenance.c_str(), &final_loss),
            "train");
      check(nf_model_save(model.get(), t_out.c_str(), provenance.c_str()), "write " + t_out);
      print_number("final_loss", final_loss);
    } else if (*eval) {
      Network net;
      load_network(e_net, net);
      Model model;
      check(nf_model_load(e_model.c_str(), net.get(), model.out()), "load " + e_model);
      const auto x0 = load_state(e_x0, nf_network_node_count(net.get()));
      const nf_dynamics dyn = parse_dynamics(e_dyn);
      eopt.windows = e_windows.c_str();
      eopt.lyapunov = !e_no_lyap;
      eopt.flow_check = !e_no_flow;
      double means[64];
      size_t count = 0;
      check(nf_eval(model.get(), &dyn, x0.data(), &eopt, e_out.empty() ? nullptr : e_out.c_str(),
                    e_mape.empty() ? nullptr : e_mape.c_str(), provenance.c_str(), means, 64, &count),
            "eval");
      for (size_t i = 0; i < std::min<size_t>(count, 64); ++i) std::printf("window %zu mape %.6g\n", i, means[i]);
    } else if (*flow || *lyap) {
      if (e_model.empty() == e_dyn.empty()) usage_error("give exactly one of --model and --truth-dyn");
      Network net;
      load_network(e_net, net);
      const auto x0 = load_state(e_x0, nf_network_node_count(net.get()));
      Model model;
      if (!e_model.empty()) check(nf_model_load(e_model.c_str(), net.get(), model.out()), "load " + e_model);
      if (*flow) {
        double dev = 0.0;
        if (model.get())
          check(nf_flowcheck_model(model.get(), x0.data(), f_t1, f_t2, f_count, &f_solver.opts, &dev), "flowcheck");
        else {
          const nf_dynamics dyn = parse_dynamics(e_dyn);
          check(nf_flowcheck_truth(net.get(), &dyn, x0.data(), f_t1, f_t2, f_count, &f_solver.opts, &dev),
                "flowcheck");
        }
        print_number("flow_deviation", dev);
        print_number("solver_rtol", f_solver.opts.rtol);
      } else {
        double exponent = 0.0;
        int diverged = 0;
        if (model.get())
          check(nf_lyapunov_model(model.get(), x0.data(), &lopt, &l_solver.opts, &exponent, &diverged), "lyapunov");
        else {
          const nf_dynamics dyn = parse_dynamics(e_dyn);
          check(nf_lyapunov_truth(net.get(), &dyn, x0.data(), &lopt, &l_solver.opts, &exponent, &diverged),
                "lyapunov");
        }
        print_number("lyapunov", exponent);
        std::printf("diverged %d\n", diverged);
      }
    } else if (*exportf) {
      Network net;
      load_network(e_net, net);
      Model model;
      check(nf_model_load(e_model.c_str(), net.get(), model.out()), "load " + e_model);
      check(nf_export_field(model.get(), x_lo, x_hi, x_res, x_self.c_str(), x_coupling.c_str(), provenance.c_str()),
            "export-field");
    } else if (*run) {
      Config cfg;
      check(nf_config_load(r_config.c_str(), cfg.out()), "config " + r_config);
      char hash[17];
      check(nf_config_hash(cfg.get(), hash), "config hash");
      if (r_check) {
        std::string text(nf_config_serialize(cfg.get(), nullptr, 0) + 1, '\0');
        nf_config_serialize(cfg.get(), text.data(), text.size());
        text.pop_back();
        std::fputs(text.c_str(), stdout);
        std::printf("config_hash %s\n", hash);
      } else {
        if (r_out.empty()) usage_error("run: --out is required unless --check is given");
        check(nf_pipeline_run(cfg.get(), r_out.c_str()), "run");
        std::printf("config_hash %s\noutputs %s\n", hash, r_out.c_str());
      }
    }
  } catch (const Failure& f) {
    return f.code;
  }
  return kExitOk;
}
