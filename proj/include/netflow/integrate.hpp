#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "netflow/vector_field.hpp"

namespace netflow {

/// Samples of a trajectory: column k of `states` is the state at times[k].
struct TimeSeries {
  std::vector<double> times;
  Eigen::MatrixXd states;  // dimension x length

  std::size_t length() const noexcept { return times.size(); }
  Eigen::Index dimension() const noexcept { return states.rows(); }
  Vec state(std::size_t k) const { return states.col(static_cast<Eigen::Index>(k)); }

  /// Throws FormatError unless times are finite and strictly increasing and
  /// every state is finite with a consistent dimension.
  void validate() const;
};

struct SolverConfig {
  double rtol = 1e-7;
  double atol = 1e-9;
  double h_init = 1e-2;
  double h_min = 1e-12;
  double h_max = 1.0;
  std::int64_t max_steps = 5'000'000;

  void validate() const;

  bool operator==(const SolverConfig&) const = default;
};

/// Adaptive Runge-Kutta-Fehlberg 4(5) from (t0, x0), reporting the state at
/// each of `eval_times` (non-decreasing, all >= t0). Steps are shortened to
/// land on every evaluation time, so outputs are never interpolated.
///
/// Throws NumericalError with reason Stiffness (step below h_min), Budget
/// (max_steps exceeded) or Divergence (non-finite state).
TimeSeries solve_rkf45(const VectorField& field, const Vec& x0, std::span<const double> eval_times,
                       const SolverConfig& cfg = {}, double t0 = 0.0);

/// Classical RK4 from (t0, x0); each gap between consecutive points of
/// {t0} U obs_times is split into `substeps_per_obs` equal steps.
TimeSeries solve_rk4_grid(const VectorField& field, const Vec& x0, std::span<const double> obs_times,
                          int substeps_per_obs, double t0 = 0.0);

/// Record of an RK4 rollout sufficient to backpropagate through it: the
/// step sizes and the four stage inputs of every step.
struct Rk4Tape {
  std::vector<double> step_sizes;
  Eigen::MatrixXd stage_inputs;     // dimension x (4 * steps)
  std::vector<int> steps_before_obs;  // number of steps taken before reaching obs k
};

/// Same trajectory as solve_rk4_grid; fills `tape` for rk4_backward.
TimeSeries rk4_rollout(const VectorField& field, const Vec& x0, std::span<const double> obs_times,
                       int substeps_per_obs, double t0, Rk4Tape& tape);

/// Reverse pass through a recorded rollout. `obs_cotangents` column k is the
/// cotangent of the state at obs k. Accumulates into `x0_bar` (cotangent of
/// the initial state) and `param_grad`.
void rk4_backward(const DifferentiableField& field, const Rk4Tape& tape,
                  const Eigen::MatrixXd& obs_cotangents, Vec& x0_bar, std::span<double> param_grad);

/// `count` distinct draws from U(0, t_max], sorted ascending.
std::vector<double> sample_times(int count, double t_max, std::uint64_t seed);

/// CSV with header `t,x0,...,x{n-1}`. Leading lines starting with '#' are
/// comments (used for provenance) and are skipped on read.
std::string format_series_csv(const TimeSeries& ts, const std::vector<std::string>& comments = {});
TimeSeries parse_series_csv(const std::string& text);
void save_series_csv(const TimeSeries& ts, const std::filesystem::path& path,
                     const std::vector<std::string>& comments = {});
TimeSeries load_series_csv(const std::filesystem::path& path);

}  // namespace netflow
