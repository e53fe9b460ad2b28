// End-to-end acceptance criteria. argv[1] is the directory holding the
// bundled configs, argv[2] a scratch directory, optional argv[3] a comma list
// of criterion numbers to run. Prints one PASS/FAIL line per
// criterion and exits non-zero when any criterion fails.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "netflow/checkpoint.hpp"
#include "netflow/config.hpp"
#include "netflow/dynamics.hpp"
#include "netflow/error.hpp"
#include "netflow/eval.hpp"
#include "netflow/graph.hpp"
#include "netflow/integrate.hpp"
#include "netflow/io.hpp"
#include "netflow/pipeline.hpp"
#include "netflow/rng.hpp"
#include "support/gradcheck.hpp"

namespace fs = std::filesystem;
using namespace netflow;

namespace {

fs::path g_configs;
fs::path g_scratch;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    detail << (ok ? "" : "[x] ") << what << "; ";
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

// Pipeline runs are shared between criteria and run at most once.
struct Run {
  PipelineResult result;
  fs::path dir;
};

std::map<std::string, Run> g_runs;

const Run& run(const std::string& config_name, const std::string& tag = "") {
  const std::string key = config_name + tag;
  auto it = g_runs.find(key);
  if (it != g_runs.end()) return it->second;
  Run r;
  r.dir = g_scratch / (config_name + tag);
  fs::remove_all(r.dir);
  std::fprintf(stderr, "running %s.cfg into %s\n", config_name.c_str(), r.dir.c_str());
  r.result = run_pipeline(load_config(g_configs / (config_name + ".cfg")), r.dir);
  return g_runs.emplace(key, std::move(r)).first->second;
}

double window_mape(const EvalReport& report, const std::string& label) {
  for (const auto& w : report.windows)
    if (w.window.label == label) return w.mean;
  throw InvalidArgument("no window " + label);
}

DnndModel load_dnnd(const Run& r) {
  auto loaded = load_checkpoint(r.dir / "model.ckpt", r.result.network);
  return std::move(*loaded.dnnd);
}

NdcnModel load_ndcn(const Run& r) {
  auto loaded = load_checkpoint(r.dir / "model.ckpt", r.result.network);
  return std::move(*loaded.ndcn);
}

void heat_grid_reproduction(Outcome& o) {
  const auto& rep = run("heat_grid").result.report;
  const double interp = window_mape(rep, "interp");
  const double shrt = window_mape(rep, "short");
  const double lng = window_mape(rep, "long");
  o.require(interp < 3.0, "interp " + fmt(interp) + "% < 3%");
  o.require(shrt < 5.0, "short " + fmt(shrt) + "% < 5%");
  o.require(lng < 30.0, "long " + fmt(lng) + "% < 30%");
}

void baseline_failure(Outcome& o) {
  const auto& rep = run("heat_grid_ndcn").result.report;
  const double interp = window_mape(rep, "interp");
  const double lng = window_mape(rep, "long");
  o.require(lng > 100.0, "NDCN long " + fmt(lng) + "% > 100%");
  o.require(interp < 10.0, "NDCN interp " + fmt(interp) + "% < 10%");
}

void lyapunov_signs(Outcome& o) {
  for (const char* name : {"heat_grid", "biochemical_grid", "birthdeath_grid"}) {
    const auto& rep = run(name).result.report;
    const double truth = rep.lyapunov_truth->exponent;
    const double model = rep.lyapunov->exponent;
    const double rel = std::abs(model - truth) / std::abs(truth);
    o.require(truth < 0.0 && !rep.lyapunov_truth->diverged, std::string(name) + " truth " + fmt(truth) + " < 0");
    o.require(model < 0.0 && !rep.lyapunov->diverged, std::string(name) + " DNND " + fmt(model) + " < 0");
    o.require(rel < 0.5, std::string(name) + " relative gap " + fmt(rel) + " < 0.5");
  }
  const auto& nd = run("heat_grid_ndcn").result.report;
  o.require(nd.lyapunov->exponent > 0.0, "heat NDCN " + fmt(nd.lyapunov->exponent) + " > 0");
}

struct Draw {
  Vec x0;
  double t1;
  double t2;
};

std::vector<Draw> flow_draws(int n, std::uint64_t seed, std::optional<double> fixed_t1) {
  Rng rng(seed);
  std::vector<Draw> out;
  for (int k = 0; k < 20; ++k) {
    Draw d;
    d.x0 = Vec(n);
    for (int i = 0; i < n; ++i) d.x0[i] = rng.uniform(0.0, 25.0);
    d.t1 = fixed_t1 ? *fixed_t1 : rng.uniform(0.5, 10.0);
    d.t2 = rng.uniform(0.5, 10.0);
    out.push_back(std::move(d));
  }
  return out;
}

double worst_deviation(const Predictor& p, const std::vector<Draw>& draws, bool worst_is_max) {
  double worst = worst_is_max ? 0.0 : INFINITY;
  for (const auto& d : draws) {
    const double dev = flow_consistency(p, d.x0, d.t1, d.t2, flow_times(d.t1, d.t2));
    worst = worst_is_max ? std::max(worst, dev) : std::min(worst, dev);
  }
  return worst;
}

void flow_legality(Outcome& o) {
  const SolverConfig solver;
  const double tol = solver.rtol;
  const auto grid = std::make_shared<const Network>(generate_grid(20));
  const auto draws = flow_draws(grid->node_count(), 11, std::nullopt);
  for (const auto& [name, kind] : {std::pair{"heat", DynamicsKind::Heat},
                                   std::pair{"biochemical", DynamicsKind::Biochemical},
                                   std::pair{"birthdeath", DynamicsKind::BirthDeath}}) {
    DynamicsSpec spec;
    spec.kind = kind;
    const NetworkField field(grid, spec);
    const double dev = worst_deviation(FieldPredictor(field, solver), draws, true);
    o.require(dev <= 10 * tol, std::string("truth ") + name + " " + fmt(dev) + " <= " + fmt(10 * tol));
  }
  for (const char* name : {"heat_grid", "biochemical_grid", "birthdeath_grid"}) {
    const DnndModel model = load_dnnd(run(name));
    const double dev = worst_deviation(FieldPredictor(model, solver), draws, true);
    o.require(dev <= 10 * tol, std::string("DNND ") + name + " " + fmt(dev) + " <= " + fmt(10 * tol));
  }
  const DnndModel untrained = DnndModel::create(grid, DnndArchitecture{}, 21);
  const double dev = worst_deviation(FieldPredictor(untrained, solver), draws, true);
  o.require(dev <= 10 * tol, "DNND untrained " + fmt(dev) + " <= " + fmt(10 * tol));

  const NdcnModel ndcn = load_ndcn(run("heat_grid_ndcn"));
  const double nd = worst_deviation(NdcnPredictor(ndcn, solver), flow_draws(grid->node_count(), 12, 5.0), false);
  o.require(nd >= 100 * tol, "NDCN t1=5 min " + fmt(nd) + " >= " + fmt(100 * tol));
}

void heat_conservation(Outcome& o) {
  const auto grid = std::make_shared<const Network>(generate_grid(20));
  const auto field = heat_field(grid);
  InitialStateConfig x0cfg;
  x0cfg.seed = 3;
  const Vec x0 = draw_initial_state(grid->node_count(), x0cfg);
  std::vector<double> times;
  for (int k = 1; k <= 500; ++k) times.push_back(0.1 * k);
  const TimeSeries ts = solve_rkf45(*field, x0, times, reference_solver());
  const double s0 = x0.sum();
  double worst_sum = 0.0;
  double prev_spread = x0.maxCoeff() - x0.minCoeff();
  int increases = 0;
  for (std::size_t k = 0; k < ts.length(); ++k) {
    const Vec x = ts.state(k);
    worst_sum = std::max(worst_sum, std::abs(x.sum() - s0) / std::abs(s0));
    const double spread = x.maxCoeff() - x.minCoeff();
    if (spread > prev_spread) ++increases;
    prev_spread = spread;
  }
  o.require(worst_sum <= 1e-6, "relative sum drift " + fmt(worst_sum) + " <= 1e-6");
  o.require(increases == 0, "spread increases at " + std::to_string(increases) + " of 500 times");
  const double res = fixed_point_residual(*field, Vec::Constant(x0.size(), x0.mean()));
  o.require(res == 0.0, "uniform-mean residual " + fmt(res) + " == 0");
}

void gradient_exactness(Outcome& o) {
  const std::vector<std::pair<const char*, double (*)(std::uint64_t)>> kinds{
      {"mlp", gradcheck::mlp_gradient_error},
      {"affine", gradcheck::affine_gradient_error},
      {"dnnd", gradcheck::dnnd_gradient_error},
      {"ndcn", gradcheck::ndcn_gradient_error}};
  for (const auto& [name, check] : kinds) {
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) worst = std::max(worst, check(seed));
    o.require(worst < 1e-4, std::string(name) + " worst " + fmt(worst) + " < 1e-4");
  }
}

double max_abs_diff(const TimeSeries& a, const TimeSeries& b) { return (a.states - b.states).cwiseAbs().maxCoeff(); }

void integrator_order(Outcome& o) {
  const auto net = std::make_shared<const Network>(generate_er(10, 0.4, 1));
  const auto field = heat_field(net);
  InitialStateConfig x0cfg;
  x0cfg.seed = 5;
  const Vec x0 = draw_initial_state(10, x0cfg);
  const std::vector<double> times{1.0, 2.0, 3.0, 4.0, 5.0};
  SolverConfig tight;
  tight.rtol = 1e-13;
  tight.atol = 1e-15;
  const TimeSeries exact = solve_rkf45(*field, x0, times, tight);
  double prev = 0.0;
  for (int sub : {4, 8, 16, 32}) {
    const double err = max_abs_diff(solve_rk4_grid(*field, x0, times, sub), exact);
    if (prev > 0.0) {
      const double ratio = prev / err;
      o.require(ratio >= 14.0 && ratio <= 18.0, "RK4 ratio at " + std::to_string(sub) + " substeps " + fmt(ratio));
    }
    prev = err;
  }
  for (double tol : {1e-4, 1e-6, 1e-8}) {
    SolverConfig cfg;
    cfg.rtol = tol;
    cfg.atol = tol * 1e-2;
    SolverConfig half = cfg;
    half.rtol /= 2;
    half.atol /= 2;
    const TimeSeries a = solve_rkf45(*field, x0, times, cfg);
    const TimeSeries b = solve_rkf45(*field, x0, times, half);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < a.states.size(); ++i) {
      const double scale = cfg.atol + cfg.rtol * std::abs(b.states(i));
      worst = std::max(worst, std::abs(a.states(i) - b.states(i)) / scale);
    }
    o.require(worst <= 10.0, "RKF45 rtol " + fmt(tol) + " error/tolerance " + fmt(worst) + " <= 10");
  }
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

void field_recovery(Outcome& o) {
  const Run& r = run("biochemical_er50");
  const DnndModel model = load_dnnd(r);
  const double lo = r.result.observations.states.minCoeff();
  const double hi = r.result.observations.states.maxCoeff();
  const FieldTables tables = export_field(model, lo, hi, 41);

  const auto& self = tables.self_term;
  std::vector<double> offsets;
  std::vector<double> truth_f;
  for (Eigen::Index k = 0; k < self.rows(); ++k) {
    truth_f.push_back(1.0 - 0.1 * self(k, 0));
    offsets.push_back(truth_f.back() - self(k, 1));
  }
  const double c = median(offsets);
  double mae_f = 0.0;
  for (std::size_t k = 0; k < offsets.size(); ++k) mae_f += std::abs(offsets[k] - c);
  mae_f /= static_cast<double>(offsets.size());
  const auto [fmin, fmax] = std::minmax_element(truth_f.begin(), truth_f.end());
  const double range_f = *fmax - *fmin;

  const auto& cpl = tables.coupling_term;
  double mae_g = 0.0;
  double gmin = INFINITY;
  double gmax = -INFINITY;
  for (Eigen::Index k = 0; k < cpl.rows(); ++k) {
    const double g = -0.01 * cpl(k, 0) * cpl(k, 1);
    mae_g += std::abs(cpl(k, 2) - g);
    gmin = std::min(gmin, g);
    gmax = std::max(gmax, g);
  }
  mae_g /= static_cast<double>(cpl.rows());
  const double range_g = gmax - gmin;

  o.detail << "range [" << fmt(lo) << ", " << fmt(hi) << "]; F offset " << fmt(c) << "; ";
  o.require(mae_f < 0.1 * range_f, "F MAE " + fmt(mae_f) + " < " + fmt(0.1 * range_f));
  o.require(mae_g < 0.1 * range_g, "G MAE " + fmt(mae_g) + " < " + fmt(0.1 * range_g));
}

std::vector<fs::path> csv_files(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".csv") out.push_back(e.path().filename());
  std::sort(out.begin(), out.end());
  return out;
}

void determinism(Outcome& o) {
  for (const char* name : {"smoke", "heat_grid_ndcn"}) {
    const Run& a = run(name);
    const Run& b = run(name, "_rerun");
    const auto files = csv_files(a.dir);
    o.require(!files.empty() && files == csv_files(b.dir), std::string(name) + " same CSV set");
    int differing = 0;
    for (const auto& f : files)
      if (read_text_file(a.dir / f) != read_text_file(b.dir / f)) ++differing;
    o.require(differing == 0, std::string(name) + " " + std::to_string(files.size()) + " CSVs, " +
                                  std::to_string(differing) + " differ");
  }
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 3 && argc != 4) {
    std::fprintf(stderr, "usage: %s CONFIG_DIR SCRATCH_DIR [N,N,...]\n", argv[0]);
    return 2;
  }
  g_configs = argv[1];
  g_scratch = argv[2];
  fs::create_directories(g_scratch);

  const std::vector<std::pair<const char*, std::function<void(Outcome&)>>> criteria{
      {"1 heat-grid reproduction", heat_grid_reproduction},
      {"2 baseline extrapolation failure", baseline_failure},
      {"3 lyapunov signs", lyapunov_signs},
      {"4 flow legality", flow_legality},
      {"5 heat conservation and equilibrium", heat_conservation},
      {"6 gradient exactness", gradient_exactness},
      {"7 integrator order", integrator_order},
      {"8 field recovery", field_recovery},
      {"9 determinism", determinism}};

  std::vector<std::string> only;
  if (argc == 4) {
    std::stringstream list(argv[3]);
    for (std::string n; std::getline(list, n, ',');) only.push_back(n);
  }

  int failed = 0;
  int ran = 0;
  for (const auto& [name, body] : criteria) {
    const std::string number(name, std::strchr(name, ' '));
    if (!only.empty() && std::find(only.begin(), only.end(), number) == only.end()) continue;
    ++ran;
    Outcome o;
    try {
      body(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "error: " << e.what();
    }
    if (!o.pass) ++failed;
    std::printf("%s criterion %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %d criteria passed\n", ran - failed, ran);
  return failed == 0 ? 0 : 1;
}
