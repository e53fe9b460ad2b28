#include "netflow/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "netflow/error.hpp"
#include "netflow/io.hpp"
#include "netflow/rng.hpp"

namespace netflow {

void TimeSeries::validate() const {
  if (static_cast<Eigen::Index>(times.size()) != states.cols())
    throw FormatError("time series: " + std::to_string(times.size()) + " times but " +
                      std::to_string(states.cols()) + " states");
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (!std::isfinite(times[k])) throw FormatError("time series: non-finite time");
    if (k > 0 && !(times[k] > times[k - 1]))
      throw FormatError("time series: times must be strictly increasing (row " +
                        std::to_string(k + 1) + ")");
  }
  if (!states.allFinite()) throw FormatError("time series: non-finite state value");
}

void SolverConfig::validate() const {
  if (!(rtol > 0.0) || !(atol > 0.0)) throw InvalidArgument("solver tolerances must be > 0");
  if (!(h_min > 0.0 && h_min <= h_init && h_init <= h_max))
    throw InvalidArgument("solver steps must satisfy 0 < h_min <= h_init <= h_max");
  if (max_steps < 1) throw InvalidArgument("solver max_steps must be >= 1");
}

namespace {

void check_eval_times(std::span<const double> times, double t0) {
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (!std::isfinite(times[k])) throw InvalidArgument("evaluation times must be finite");
    if (times[k] < t0) throw InvalidArgument("evaluation time precedes the initial time");
    if (k > 0 && times[k] < times[k - 1])
      throw InvalidArgument("evaluation times must be non-decreasing");
  }
}

// Fehlberg 4(5) tableau.
constexpr double a21 = 1.0 / 4.0;
constexpr double a31 = 3.0 / 32.0, a32 = 9.0 / 32.0;
constexpr double a41 = 1932.0 / 2197.0, a42 = -7200.0 / 2197.0, a43 = 7296.0 / 2197.0;
constexpr double a51 = 439.0 / 216.0, a52 = -8.0, a53 = 3680.0 / 513.0, a54 = -845.0 / 4104.0;
constexpr double a61 = -8.0 / 27.0, a62 = 2.0, a63 = -3544.0 / 2565.0, a64 = 1859.0 / 4104.0,
                 a65 = -11.0 / 40.0;
constexpr double b1 = 16.0 / 135.0, b3 = 6656.0 / 12825.0, b4 = 28561.0 / 56430.0,
                 b5 = -9.0 / 50.0, b6 = 2.0 / 55.0;
// Fifth minus fourth order weights.
constexpr double e1 = 1.0 / 360.0, e3 = -128.0 / 4275.0, e4 = -2197.0 / 75240.0, e5 = 1.0 / 50.0,
                 e6 = 2.0 / 55.0;

}  // namespace

TimeSeries solve_rkf45(const VectorField& field, const Vec& x0, std::span<const double> eval_times,
                       const SolverConfig& cfg, double t0) {
  cfg.validate();
  const Eigen::Index n = static_cast<Eigen::Index>(field.dimension());
  if (x0.size() != n) throw InvalidArgument("initial state dimension mismatch");
  if (!x0.allFinite()) throw InvalidArgument("initial state must be finite");
  check_eval_times(eval_times, t0);

  TimeSeries out;
  out.times.assign(eval_times.begin(), eval_times.end());
  out.states.resize(n, static_cast<Eigen::Index>(eval_times.size()));
  if (eval_times.empty()) return out;

  std::size_t next = 0;
  while (next < eval_times.size() && eval_times[next] == t0) out.states.col(next++) = x0;

  double t = t0;
  double h = std::min(cfg.h_init, cfg.h_max);
  Vec y = x0, f0(n), k2(n), k3(n), k4(n), k5(n), k6(n), tmp(n), y1(n);
  field.velocity(y, f0);
  std::int64_t steps = 0;

  while (next < eval_times.size()) {
    if (++steps > cfg.max_steps)
      throw NumericalError(NumericalError::Reason::Budget,
                           "rkf45: step budget exhausted at t=" + format_double(t));
    // Steps end exactly on evaluation times, so every output carries the
    // full step accuracy.
    const double target = eval_times[next];
    double h_step = h;
    bool hit = false;
    if (t + h_step >= target || target - (t + h_step) < 1e-12 * std::max(1.0, std::abs(target))) {
      h_step = target - t;
      hit = true;
    }

    tmp = y + h_step * a21 * f0;
    field.velocity(tmp, k2);
    tmp = y + h_step * (a31 * f0 + a32 * k2);
    field.velocity(tmp, k3);
    tmp = y + h_step * (a41 * f0 + a42 * k2 + a43 * k3);
    field.velocity(tmp, k4);
    tmp = y + h_step * (a51 * f0 + a52 * k2 + a53 * k3 + a54 * k4);
    field.velocity(tmp, k5);
    tmp = y + h_step * (a61 * f0 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    field.velocity(tmp, k6);
    y1 = y + h_step * (b1 * f0 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);

    double err = 0.0;
    bool finite = y1.allFinite();
    if (finite) {
      for (Eigen::Index i = 0; i < n; ++i) {
        const double e = h_step * (e1 * f0[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i]);
        const double scale = cfg.atol + cfg.rtol * std::max(std::abs(y[i]), std::abs(y1[i]));
        err = std::max(err, std::abs(e) / scale);
      }
      finite = std::isfinite(err);
    }

    if (!finite || err > 1.0) {
      if (h_step <= cfg.h_min) {
        if (!finite)
          throw NumericalError(NumericalError::Reason::Divergence,
                               "rkf45: state became non-finite at t=" + format_double(t));
        throw NumericalError(NumericalError::Reason::Stiffness,
                             "rkf45: step size underflow at t=" + format_double(t));
      }
      const double factor = finite ? std::clamp(0.9 * std::pow(err, -0.2), 0.2, 1.0) : 0.2;
      h = std::max(h_step * factor, cfg.h_min);
      continue;
    }

    const double t1 = hit ? target : t + h_step;
    while (next < eval_times.size() && eval_times[next] <= t1) out.states.col(next++) = y1;
    t = t1;
    y.swap(y1);
    field.velocity(y, f0);

    const double factor = err > 0.0 ? std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0) : 5.0;
    // A step shortened to hit an evaluation time does not shrink the next one.
    const double grown = h_step * factor;
    h = std::clamp(hit && factor >= 1.0 ? std::max(h, grown) : grown, cfg.h_min, cfg.h_max);
  }
  return out;
}

namespace {

void check_substeps(int substeps) {
  if (substeps < 1) throw InvalidArgument("substeps_per_obs must be >= 1");
}

[[noreturn]] void throw_rk4_divergence(double t) {
  throw NumericalError(NumericalError::Reason::Divergence,
                       "rk4: state became non-finite near t=" + format_double(t));
}

}  // namespace

TimeSeries solve_rk4_grid(const VectorField& field, const Vec& x0, std::span<const double> obs_times,
                          int substeps_per_obs, double t0) {
  check_substeps(substeps_per_obs);
  check_eval_times(obs_times, t0);
  const Eigen::Index n = static_cast<Eigen::Index>(field.dimension());
  if (x0.size() != n) throw InvalidArgument("initial state dimension mismatch");

  TimeSeries out;
  out.times.assign(obs_times.begin(), obs_times.end());
  out.states.resize(n, static_cast<Eigen::Index>(obs_times.size()));
  Vec y = x0, k1(n), k2(n), k3(n), k4(n), tmp(n);
  double t = t0;
  for (std::size_t k = 0; k < obs_times.size(); ++k) {
    const double gap = obs_times[k] - t;
    if (gap > 0.0) {
      const double h = gap / substeps_per_obs;
      for (int s = 0; s < substeps_per_obs; ++s) {
        field.velocity(y, k1);
        tmp = y + 0.5 * h * k1;
        field.velocity(tmp, k2);
        tmp = y + 0.5 * h * k2;
        field.velocity(tmp, k3);
        tmp = y + h * k3;
        field.velocity(tmp, k4);
        y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      }
      if (!y.allFinite()) throw_rk4_divergence(obs_times[k]);
    }
    t = obs_times[k];
    out.states.col(static_cast<Eigen::Index>(k)) = y;
  }
  return out;
}

TimeSeries rk4_rollout(const VectorField& field, const Vec& x0, std::span<const double> obs_times,
                       int substeps_per_obs, double t0, Rk4Tape& tape) {
  check_substeps(substeps_per_obs);
  check_eval_times(obs_times, t0);
  const Eigen::Index n = static_cast<Eigen::Index>(field.dimension());
  if (x0.size() != n) throw InvalidArgument("initial state dimension mismatch");

  std::size_t total_steps = 0;
  {
    double t = t0;
    for (double to : obs_times) {
      if (to > t) total_steps += substeps_per_obs;
      t = to;
    }
  }
  tape.step_sizes.clear();
  tape.step_sizes.reserve(total_steps);
  tape.stage_inputs.resize(n, static_cast<Eigen::Index>(4 * total_steps));
  tape.steps_before_obs.assign(obs_times.size(), 0);

  TimeSeries out;
  out.times.assign(obs_times.begin(), obs_times.end());
  out.states.resize(n, static_cast<Eigen::Index>(obs_times.size()));
  Vec y = x0, k1(n), k2(n), k3(n), k4(n);
  double t = t0;
  Eigen::Index col = 0;
  for (std::size_t k = 0; k < obs_times.size(); ++k) {
    const double gap = obs_times[k] - t;
    if (gap > 0.0) {
      const double h = gap / substeps_per_obs;
      for (int s = 0; s < substeps_per_obs; ++s) {
        tape.step_sizes.push_back(h);
        tape.stage_inputs.col(col) = y;
        field.velocity(y, k1);
        tape.stage_inputs.col(col + 1) = y + 0.5 * h * k1;
        field.velocity(tape.stage_inputs.col(col + 1), k2);
        tape.stage_inputs.col(col + 2) = y + 0.5 * h * k2;
        field.velocity(tape.stage_inputs.col(col + 2), k3);
        tape.stage_inputs.col(col + 3) = y + h * k3;
        field.velocity(tape.stage_inputs.col(col + 3), k4);
        y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        col += 4;
      }
      if (!y.allFinite()) throw_rk4_divergence(obs_times[k]);
    }
    t = obs_times[k];
    tape.steps_before_obs[k] = static_cast<int>(tape.step_sizes.size());
    out.states.col(static_cast<Eigen::Index>(k)) = y;
  }
  return out;
}

void rk4_backward(const DifferentiableField& field, const Rk4Tape& tape,
                  const Eigen::MatrixXd& obs_cotangents, Vec& x0_bar, std::span<double> param_grad) {
  const Eigen::Index n = static_cast<Eigen::Index>(field.dimension());
  if (obs_cotangents.rows() != n ||
      obs_cotangents.cols() != static_cast<Eigen::Index>(tape.steps_before_obs.size()))
    throw InvalidArgument("rk4_backward: cotangent shape mismatch");
  if (x0_bar.size() != n) throw InvalidArgument("rk4_backward: x0_bar dimension mismatch");
  if (param_grad.size() != field.parameter_count())
    throw InvalidArgument("rk4_backward: gradient buffer size mismatch");

  Vec y_bar = Vec::Zero(n), k1b(n), k2b(n), k3b(n), k4b(n), sb(n);
  int obs = static_cast<int>(tape.steps_before_obs.size()) - 1;
  for (int step = static_cast<int>(tape.step_sizes.size()); step >= 0; --step) {
    // Observations recorded after `step` steps see the state y_step.
    while (obs >= 0 && tape.steps_before_obs[obs] == step) y_bar += obs_cotangents.col(obs--);
    if (step == 0) break;
    const int s = step - 1;
    const double h = tape.step_sizes[s];
    const Eigen::Index col = 4 * static_cast<Eigen::Index>(s);
    // y' = y + h/6 (k1 + 2k2 + 2k3 + k4), k_i = f(stage_i)
    k1b = (h / 6.0) * y_bar;
    k2b = (h / 3.0) * y_bar;
    k3b = (h / 3.0) * y_bar;
    k4b = (h / 6.0) * y_bar;
    // stage4 = y + h k3
    sb.setZero();
    field.vjp(tape.stage_inputs.col(col + 3), k4b, sb, param_grad);
    y_bar += sb;
    k3b += h * sb;
    // stage3 = y + h/2 k2
    sb.setZero();
    field.vjp(tape.stage_inputs.col(col + 2), k3b, sb, param_grad);
    y_bar += sb;
    k2b += 0.5 * h * sb;
    // stage2 = y + h/2 k1
    sb.setZero();
    field.vjp(tape.stage_inputs.col(col + 1), k2b, sb, param_grad);
    y_bar += sb;
    k1b += 0.5 * h * sb;
    // stage1 = y
    sb.setZero();
    field.vjp(tape.stage_inputs.col(col), k1b, sb, param_grad);
    y_bar += sb;
  }
  x0_bar += y_bar;
}

std::vector<double> sample_times(int count, double t_max, std::uint64_t seed) {
  if (count < 1) throw InvalidArgument("sample_times: count must be >= 1");
  if (!(t_max > 0.0) || !std::isfinite(t_max)) throw InvalidArgument("sample_times: t_max must be > 0");
  Rng rng(seed);
  std::vector<double> times;
  times.reserve(count);
  while (static_cast<int>(times.size()) < count) {
    // 1 - u maps [0, 1) onto (0, 1].
    const double t = t_max * (1.0 - rng.uniform01());
    if (t > 0.0 && std::find(times.begin(), times.end(), t) == times.end()) times.push_back(t);
  }
  std::sort(times.begin(), times.end());
  return times;
}

std::string format_series_csv(const TimeSeries& ts, const std::vector<std::string>& comments) {
  std::string out;
  for (const auto& c : comments) out += "# " + c + "\n";
  out += "t";
  for (Eigen::Index i = 0; i < ts.dimension(); ++i) out += ",x" + std::to_string(i);
  out += "\n";
  for (std::size_t k = 0; k < ts.length(); ++k) {
    out += format_double(ts.times[k]);
    for (Eigen::Index i = 0; i < ts.dimension(); ++i) {
      out += ',';
      out += format_double(ts.states(i, static_cast<Eigen::Index>(k)));
    }
    out += '\n';
  }
  return out;
}

TimeSeries parse_series_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  bool have_header = false;
  Eigen::Index n = 0;
  std::vector<double> times;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string_view> fields;
    std::string_view rest(line);
    while (true) {
      auto comma = rest.find(',');
      fields.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (!have_header) {
      if (fields.empty() || fields[0] != "t")
        throw FormatError("time series csv: header must start with 't'");
      n = static_cast<Eigen::Index>(fields.size()) - 1;
      if (n < 1) throw FormatError("time series csv: no state columns");
      have_header = true;
      continue;
    }
    if (static_cast<Eigen::Index>(fields.size()) != n + 1)
      throw FormatError("time series csv line " + std::to_string(lineno) + ": expected " +
                        std::to_string(n + 1) + " fields");
    try {
      times.push_back(parse_double(fields[0]));
      for (Eigen::Index i = 1; i <= n; ++i) values.push_back(parse_double(fields[i]));
    } catch (const FormatError& e) {
      throw FormatError("time series csv line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (!have_header) throw FormatError("time series csv: missing header");
  TimeSeries ts;
  ts.times = std::move(times);
  ts.states = Eigen::Map<Eigen::MatrixXd>(values.data(), n, static_cast<Eigen::Index>(ts.times.size()));
  ts.validate();
  return ts;
}

void save_series_csv(const TimeSeries& ts, const std::filesystem::path& path,
                     const std::vector<std::string>& comments) {
  write_text_file(path, format_series_csv(ts, comments));
}

TimeSeries load_series_csv(const std::filesystem::path& path) {
  try {
    return parse_series_csv(read_text_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace netflow
