#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "netflow/dnnd.hpp"
#include "netflow/integrate.hpp"
#include "netflow/ndcn.hpp"
#include "netflow/vector_field.hpp"

namespace netflow {

inline constexpr double kMapeEps = 1e-8;

/// Solver settings used for ground-truth reference trajectories.
SolverConfig reference_solver();

/// 100 * mean(|pred_i - truth_i| / max(|truth_i|, eps)).
double mape(std::span<const double> pred, std::span<const double> truth, double eps = kMapeEps);

/// Anything that forecasts node states from an initial state.
class Predictor {
public:
  virtual ~Predictor() = default;
  virtual std::size_t dimension() const = 0;
  /// States at `times` (non-decreasing, >= t0) starting from (t0, x0).
  virtual TimeSeries predict(const Vec& x0, std::span<const double> times, double t0) const = 0;
};

/// Integrates a vector field with RKF45.
class FieldPredictor final : public Predictor {
public:
  explicit FieldPredictor(const VectorField& field, SolverConfig cfg = {}) : field_(&field), cfg_(cfg) {}
  std::size_t dimension() const override { return field_->dimension(); }
  TimeSeries predict(const Vec& x0, std::span<const double> times, double t0) const override;

private:
  const VectorField* field_;
  SolverConfig cfg_;
};

/// Encode, integrate in latent space, decode. A restart re-encodes.
class NdcnPredictor final : public Predictor {
public:
  explicit NdcnPredictor(const NdcnModel& model, SolverConfig cfg = {}) : model_(&model), cfg_(cfg) {}
  std::size_t dimension() const override { return model_->node_count(); }
  TimeSeries predict(const Vec& x0, std::span<const double> times, double t0) const override;

private:
  const NdcnModel* model_;
  SolverConfig cfg_;
};

struct EvalWindow {
  std::string label;
  double t_lo = 0.0;
  double t_hi = 0.0;
  int samples = 20;

  bool operator==(const EvalWindow&) const = default;
};

/// interp [0,5], short [5,6], long [40,50], 20 samples each.
std::vector<EvalWindow> default_windows();
void validate_windows(const std::vector<EvalWindow>& windows);

/// "default" or comma-separated "label:t_lo:t_hi:samples" entries.
std::vector<EvalWindow> parse_windows(const std::string& spec);

/// `samples` distinct uniform draws in (t_lo, t_hi], sorted.
std::vector<double> window_times(const EvalWindow& window, std::uint64_t seed);

struct WindowResult {
  EvalWindow window;
  std::vector<double> per_repeat;  // MAPE per repeat; +inf where the prediction diverged
  double mean = 0.0;
  double std = 0.0;                // sample standard deviation, 0 for one repeat
  bool diverged = false;
};

/// For each repeat r and window w, draws evaluation times from a seed
/// derived from (seed, r, w), integrates the truth from (0, x0) at reference
/// tolerance and compares with the predictor. A diverging prediction marks
/// the affected windows instead of throwing.
std::vector<WindowResult> windowed_mape(const Predictor& model, const VectorField& truth, const Vec& x0,
                                        const std::vector<EvalWindow>& windows, int repeats,
                                        std::uint64_t seed);

struct LyapunovConfig {
  double delta0 = 1e-6;
  double renorm_interval = 0.1;
  double horizon = 50.0;
  double transient = 5.0;
  std::uint64_t seed = 0;  // direction of the initial perturbation
  SolverConfig solver{};

  void validate() const;
};

struct LyapunovResult {
  double exponent = 0.0;
  bool diverged = false;
  double time_reached = 0.0;  // end of the last completed interval
};

/// Two-trajectory estimate of the largest Lyapunov exponent. The reference
/// and the perturbed state are integrated as one stacked system so both share
/// step sizes. After each renorm_interval the separation is rescaled to
/// delta0 and its log growth recorded; the exponent averages the growth after
/// the transient. Divergence yields a partial estimate flagged as such.
LyapunovResult largest_lyapunov(const VectorField& field, const Vec& x0, const LyapunovConfig& cfg = {});

/// max over times and nodes of |a - b| / (|a| + eps), with a the prediction
/// straight from (0, x0) and b the prediction restarted at t1 from a's state
/// there. `eval_times` must lie in [t1, t1 + t2].
double flow_consistency(const Predictor& model, const Vec& x0, double t1, double t2,
                        std::span<const double> eval_times, double eps = kMapeEps);

/// `count` evenly spaced times in (t1, t1 + t2].
std::vector<double> flow_times(double t1, double t2, int count = 10);

/// Max-norm of the velocity at `x`.
double fixed_point_residual(const VectorField& field, const Vec& x);

/// Learned F on a uniform grid (rows x, F) and G on the product grid (rows
/// x_i, x_j, G), x_i varying slowest.
struct FieldTables {
  Eigen::MatrixXd self_term;      // resolution x 2
  Eigen::MatrixXd coupling_term;  // resolution^2 x 3
};

FieldTables export_field(const DnndModel& model, double lo, double hi, int resolution);
std::string format_self_table_csv(const FieldTables& tables, const std::vector<std::string>& comments = {});
std::string format_coupling_table_csv(const FieldTables& tables,
                                      const std::vector<std::string>& comments = {});

struct EvalReport {
  std::vector<WindowResult> windows;
  std::optional<LyapunovResult> lyapunov;
  std::optional<LyapunovResult> lyapunov_truth;
  std::optional<double> flow_deviation;
  std::vector<std::pair<std::string, double>> fixed_point_residuals;
  std::map<std::string, std::string> metadata;
};

std::string format_eval_report_json(const EvalReport& report);
/// window,t_lo,t_hi,samples,repeats,mape_mean,mape_std,diverged
std::string format_mape_csv(const EvalReport& report, const std::vector<std::string>& comments = {});

}  // namespace netflow
