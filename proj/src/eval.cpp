#include "netflow/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "json.hpp"

#include "netflow/error.hpp"
#include "netflow/io.hpp"
#include "netflow/rng.hpp"

namespace netflow {

SolverConfig reference_solver() {
  SolverConfig cfg;
  cfg.rtol = 1e-10;
  cfg.atol = 1e-12;
  return cfg;
}

double mape(std::span<const double> pred, std::span<const double> truth, double eps) {
  if (pred.size() != truth.size()) throw InvalidArgument("mape: length mismatch");
  if (pred.empty()) throw InvalidArgument("mape: empty input");
  if (!(eps > 0.0)) throw InvalidArgument("mape: eps must be positive");
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i)
    sum += std::fabs(pred[i] - truth[i]) / std::max(std::fabs(truth[i]), eps);
  return 100.0 * sum / static_cast<double>(pred.size());
}

TimeSeries FieldPredictor::predict(const Vec& x0, std::span<const double> times, double t0) const {
  return solve_rkf45(*field_, x0, times, cfg_, t0);
}

TimeSeries NdcnPredictor::predict(const Vec& x0, std::span<const double> times, double t0) const {
  return ndcn_predict(*model_, x0, times, cfg_, t0);
}

std::vector<EvalWindow> default_windows() {
  return {{"interp", 0.0, 5.0, 20}, {"short", 5.0, 6.0, 20}, {"long", 40.0, 50.0, 20}};
}

void validate_windows(const std::vector<EvalWindow>& windows) {
  if (windows.empty()) throw InvalidArgument("eval: no windows");
  for (const auto& w : windows) {
    if (w.label.empty()) throw InvalidArgument("eval: window without a label");
    if (!(w.t_lo >= 0.0) || !(w.t_hi > w.t_lo) || !std::isfinite(w.t_hi))
      throw InvalidArgument("eval: window '" + w.label + "' needs 0 <= t_lo < t_hi");
    if (w.samples < 1) throw InvalidArgument("eval: window '" + w.label + "' needs samples >= 1");
  }
}

std::vector<EvalWindow> parse_windows(const std::string& spec) {
  if (spec.empty() || spec == "default") return default_windows();
  std::vector<EvalWindow> out;
  std::stringstream entries(spec);
  std::string entry;
  while (std::getline(entries, entry, ',')) {
    std::stringstream parts(entry);
    std::vector<std::string> fields;
    std::string f;
    while (std::getline(parts, f, ':')) fields.push_back(f);
    if (fields.size() != 4) throw InvalidArgument("eval: window '" + entry + "' is not label:t_lo:t_hi:samples");
    EvalWindow w;
    w.label = fields[0];
    try {
      w.t_lo = parse_double(fields[1]);
      w.t_hi = parse_double(fields[2]);
      std::size_t used = 0;
      w.samples = std::stoi(fields[3], &used);
      if (used != fields[3].size()) throw InvalidArgument("trailing characters");
    } catch (const std::exception&) {
      throw InvalidArgument("eval: window '" + entry + "' has a malformed number");
    }
    out.push_back(w);
  }
  validate_windows(out);
  return out;
}

std::vector<double> window_times(const EvalWindow& window, std::uint64_t seed) {
  std::vector<double> times = sample_times(window.samples, window.t_hi - window.t_lo, seed);
  for (double& t : times) t += window.t_lo;
  return times;
}

namespace {

double window_mape(const TimeSeries& pred, const TimeSeries& truth) {
  return mape({pred.states.data(), static_cast<std::size_t>(pred.states.size())},
              {truth.states.data(), static_cast<std::size_t>(truth.states.size())});
}

}  // namespace

std::vector<WindowResult> windowed_mape(const Predictor& model, const VectorField& truth, const Vec& x0,
                                        const std::vector<EvalWindow>& windows, int repeats,
                                        std::uint64_t seed) {
  validate_windows(windows);
  if (repeats < 1) throw InvalidArgument("eval: repeats must be >= 1");
  if (static_cast<std::size_t>(x0.size()) != model.dimension() ||
      static_cast<std::size_t>(x0.size()) != truth.dimension())
    throw InvalidArgument("eval: x0 dimension does not match the model or truth");

  std::vector<WindowResult> results(windows.size());
  for (std::size_t w = 0; w < windows.size(); ++w) results[w].window = windows[w];

  for (int r = 0; r < repeats; ++r) {
    for (std::size_t w = 0; w < windows.size(); ++w) {
      const auto times = window_times(windows[w], mix_seed(mix_seed(seed, static_cast<std::uint64_t>(r)), w));
      const TimeSeries ref = solve_rkf45(truth, x0, times, reference_solver());
      double value = std::numeric_limits<double>::infinity();
      try {
        const TimeSeries pred = model.predict(x0, times, 0.0);
        if (pred.states.allFinite()) value = window_mape(pred, ref);
      } catch (const NumericalError&) {
      }
      if (!std::isfinite(value)) results[w].diverged = true;
      results[w].per_repeat.push_back(value);
    }
  }
  for (auto& res : results) {
    const double n = static_cast<double>(res.per_repeat.size());
    double sum = 0.0;
    for (double v : res.per_repeat) sum += v;
    res.mean = sum / n;
    double ss = 0.0;
    if (!res.diverged)
      for (double v : res.per_repeat) ss += (v - res.mean) * (v - res.mean);
    res.std = res.diverged ? std::numeric_limits<double>::infinity()
                           : (res.per_repeat.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0);
  }
  return results;
}

void LyapunovConfig::validate() const {
  if (!(delta0 > 0.0) || !std::isfinite(delta0)) throw InvalidArgument("lyapunov: delta0 must be positive");
  if (!(renorm_interval > 0.0)) throw InvalidArgument("lyapunov: renorm_interval must be positive");
  if (!(transient >= 0.0) || !(horizon > transient) || !std::isfinite(horizon))
    throw InvalidArgument("lyapunov: need horizon > transient >= 0");
  solver.validate();
}

namespace {

// (x, y) -> (v(x), v(y)) on the doubled space.
class PairedField final : public VectorField {
public:
  explicit PairedField(const VectorField& base)
      : base_(&base), n_(static_cast<Eigen::Index>(base.dimension())), a_(n_), b_(n_), da_(n_), db_(n_) {}
  std::size_t dimension() const override { return 2 * base_->dimension(); }
  void velocity(const Vec& x, Vec& dx) const override {
    a_ = x.head(n_);
    b_ = x.tail(n_);
    base_->velocity(a_, da_);
    base_->velocity(b_, db_);
    dx.resize(2 * n_);
    dx.head(n_) = da_;
    dx.tail(n_) = db_;
  }

private:
  const VectorField* base_;
  Eigen::Index n_;
  mutable Vec a_, b_, da_, db_;
};

}  // namespace

LyapunovResult largest_lyapunov(const VectorField& field, const Vec& x0, const LyapunovConfig& cfg) {
  cfg.validate();
  const auto n = static_cast<Eigen::Index>(field.dimension());
  if (x0.size() != n) throw InvalidArgument("lyapunov: x0 dimension mismatch");

  Rng rng(cfg.seed);
  Vec dir(n);
  for (Eigen::Index i = 0; i < n; ++i) dir[i] = rng.uniform(-1.0, 1.0);
  if (dir.norm() == 0.0) dir.setOnes();
  dir *= cfg.delta0 / dir.norm();

  const PairedField paired(field);
  Vec state(2 * n);
  state.head(n) = x0;
  state.tail(n) = x0 + dir;

  const auto intervals = static_cast<long>(std::llround(cfg.horizon / cfg.renorm_interval));
  const double dt = cfg.horizon / static_cast<double>(intervals);
  LyapunovResult result;
  double log_sum = 0.0;
  double counted = 0.0;
  for (long k = 0; k < intervals; ++k) {
    const double t_begin = dt * static_cast<double>(k);
    const double t_end = dt * static_cast<double>(k + 1);
    const double stop[] = {t_end};
    try {
      state = solve_rkf45(paired, state, stop, cfg.solver, t_begin).state(0);
    } catch (const NumericalError&) {
      result.diverged = true;
      break;
    }
    const Vec sep = state.tail(n) - state.head(n);
    const double d = sep.norm();
    if (!std::isfinite(d) || d == 0.0) {
      result.diverged = true;
      break;
    }
    if (t_end > cfg.transient + 0.5 * dt) {
      log_sum += std::log(d / cfg.delta0);
      counted += dt;
    }
    state.tail(n) = state.head(n) + sep * (cfg.delta0 / d);
    result.time_reached = t_end;
  }
  result.exponent = counted > 0.0 ? log_sum / counted : std::numeric_limits<double>::quiet_NaN();
  return result;
}

std::vector<double> flow_times(double t1, double t2, int count) {
  if (count < 1) throw InvalidArgument("flow check: count must be >= 1");
  std::vector<double> times;
  for (int k = 1; k <= count; ++k) times.push_back(t1 + t2 * k / count);
  return times;
}

double flow_consistency(const Predictor& model, const Vec& x0, double t1, double t2,
                        std::span<const double> eval_times, double eps) {
  if (!(t1 > 0.0) || !(t2 > 0.0)) throw InvalidArgument("flow check: t1 and t2 must be positive");
  if (eval_times.empty()) throw InvalidArgument("flow check: no evaluation times");
  for (double t : eval_times)
    if (t < t1 || t > t1 + t2) throw InvalidArgument("flow check: evaluation times must lie in [t1, t1 + t2]");
  const TimeSeries straight = model.predict(x0, eval_times, 0.0);
  const double split[] = {t1};
  const Vec x1 = model.predict(x0, split, 0.0).state(0);
  const TimeSeries restarted = model.predict(x1, eval_times, t1);
  return ((straight.states - restarted.states).array().abs() / (straight.states.array().abs() + eps))
      .maxCoeff();
}

double fixed_point_residual(const VectorField& field, const Vec& x) {
  if (static_cast<std::size_t>(x.size()) != field.dimension())
    throw InvalidArgument("fixed point residual: dimension mismatch");
  return field.velocity(x).lpNorm<Eigen::Infinity>();
}

FieldTables export_field(const DnndModel& model, double lo, double hi, int resolution) {
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
    throw InvalidArgument("export field: need lo < hi");
  if (resolution < 2) throw InvalidArgument("export field: resolution must be >= 2");
  const Eigen::Index r = resolution;
  Eigen::RowVectorXd grid(r);
  for (Eigen::Index k = 0; k < r; ++k)
    grid[k] = k + 1 == r ? hi : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(r - 1);

  FieldTables tables;
  tables.self_term.resize(r, 2);
  tables.self_term.col(0) = grid.transpose();
  tables.self_term.col(1) = model.self_fn().forward(grid).transpose();

  Mat pairs(2, r * r);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < r; ++j) {
      pairs(0, i * r + j) = grid[i];
      pairs(1, i * r + j) = grid[j];
    }
  tables.coupling_term.resize(r * r, 3);
  tables.coupling_term.leftCols(2) = pairs.transpose();
  tables.coupling_term.col(2) = model.coupling_fn().forward(pairs).transpose();
  return tables;
}

namespace {

std::string table_csv(const Mat& table, const std::string& header, const std::vector<std::string>& comments) {
  std::string out;
  for (const auto& c : comments) out += "# " + c + "\n";
  out += header + "\n";
  for (Eigen::Index i = 0; i < table.rows(); ++i) {
    for (Eigen::Index j = 0; j < table.cols(); ++j) {
      if (j) out += ',';
      out += format_double(table(i, j));
    }
    out += '\n';
  }
  return out;
}

// JSON has no inf/nan; non-finite numbers are written as strings.
nlohmann::ordered_json number(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

}  // namespace

std::string format_self_table_csv(const FieldTables& tables, const std::vector<std::string>& comments) {
  return table_csv(tables.self_term, "x,F", comments);
}

std::string format_coupling_table_csv(const FieldTables& tables, const std::vector<std::string>& comments) {
  return table_csv(tables.coupling_term, "xi,xj,G", comments);
}

std::string format_eval_report_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["metadata"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : report.metadata) j["metadata"][k] = v;
  j["windows"] = nlohmann::ordered_json::array();
  for (const auto& w : report.windows) {
    nlohmann::ordered_json e;
    e["label"] = w.window.label;
    e["t_lo"] = w.window.t_lo;
    e["t_hi"] = w.window.t_hi;
    e["samples"] = w.window.samples;
    e["mape_mean"] = number(w.mean);
    e["mape_std"] = number(w.std);
    e["diverged"] = w.diverged;
    e["per_repeat"] = nlohmann::ordered_json::array();
    for (double v : w.per_repeat) e["per_repeat"].push_back(number(v));
    j["windows"].push_back(e);
  }
  if (report.lyapunov) {
    j["lyapunov"] = {{"exponent", number(report.lyapunov->exponent)},
                     {"diverged", report.lyapunov->diverged},
                     {"time_reached", report.lyapunov->time_reached}};
  }
  if (report.lyapunov_truth) {
    j["lyapunov_truth"] = {{"exponent", number(report.lyapunov_truth->exponent)},
                           {"diverged", report.lyapunov_truth->diverged},
                           {"time_reached", report.lyapunov_truth->time_reached}};
  }
  if (report.flow_deviation) j["flow_deviation"] = number(*report.flow_deviation);
  if (!report.fixed_point_residuals.empty()) {
    j["fixed_point_residuals"] = nlohmann::ordered_json::object();
    for (const auto& [label, v] : report.fixed_point_residuals) j["fixed_point_residuals"][label] = number(v);
  }
  return j.dump(2) + "\n";
}

std::string format_mape_csv(const EvalReport& report, const std::vector<std::string>& comments) {
  std::string out;
  for (const auto& c : comments) out += "# " + c + "\n";
  out += "window,t_lo,t_hi,samples,repeats,mape_mean,mape_std,diverged\n";
  for (const auto& w : report.windows) {
    out += w.window.label + ',' + format_double(w.window.t_lo) + ',' + format_double(w.window.t_hi) + ',' +
           std::to_string(w.window.samples) + ',' + std::to_string(w.per_repeat.size()) + ',' +
           format_double(w.mean) + ',' + format_double(w.std) + ',' + (w.diverged ? "1" : "0") + '\n';
  }
  return out;
}

}  // namespace netflow
