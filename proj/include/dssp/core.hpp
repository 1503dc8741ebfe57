#ifndef DSSP_CORE_HPP_
#define DSSP_CORE_HPP_

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dssp {

using WorkerId = std::uint32_t;
/// Seconds: simulated time in the simulator, monotonic wall time in the runner.
using Timestamp = double;
/// Number of pushes received from one worker.
using IterationCount = std::int64_t;

enum class Paradigm { BSP, ASP, SSP, DSSP };
enum class ModelKind { QuadraticBowl, LinearRegression, LogisticRegression, TinyMLP };
enum class RunMode { Simulated, Threaded };

std::string_view to_string(Paradigm p);
std::string_view to_string(ModelKind k);
std::string_view to_string(RunMode m);
Paradigm parse_paradigm(std::string_view text);
ModelKind parse_model_kind(std::string_view text);
RunMode parse_run_mode(std::string_view text);

// Error classes. The CLI maps each one to its own exit code.

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

class ProtocolError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DeadlockError : public std::runtime_error {
 public:
  DeadlockError(const std::string& message, std::vector<WorkerId> stuck)
      : std::runtime_error(message), stuck_(std::move(stuck)) {}
  const std::vector<WorkerId>& stuck() const { return stuck_; }

 private:
  std::vector<WorkerId> stuck_;
};

struct WeightVector {
  std::vector<double> values;
  std::uint64_t version = 0;
};

struct GradientVector {
  std::vector<double> values;
  WorkerId source = 0;
  IterationCount source_iter = 0;
};

/// Staleness thresholds: s_lower is the SSP bound, r_max the number of
/// extra iterations a DSSP worker may be granted on top of it.
struct StalenessRange {
  int s_lower = 0;
  int r_max = 0;

  bool operator==(const StalenessRange&) const = default;
};

/// A positive random duration: constant c, uniform [a, b] or lognormal(mu, sigma).
struct Distribution {
  enum class Kind { Constant, Uniform, LogNormal };
  Kind kind = Kind::Constant;
  double a = 1.0;
  double b = 0.0;

  static Distribution constant(double c) { return {Kind::Constant, c, 0.0}; }
  static Distribution uniform(double lo, double hi) { return {Kind::Uniform, lo, hi}; }
  static Distribution lognormal(double mu, double sigma) { return {Kind::LogNormal, mu, sigma}; }

  double sample(std::mt19937_64& rng) const;
  bool operator==(const Distribution&) const = default;
};

std::string format_distribution(const Distribution& d);
Distribution parse_distribution(std::string_view text);

/// Per-worker compute time per mini-batch plus a one-way communication delay.
struct TimingModel {
  std::string preset = "homogeneous";
  std::vector<Distribution> compute;  // one per worker after validation
  Distribution comm_delay = Distribution::constant(0.05);

  bool operator==(const TimingModel&) const = default;
};

/// Names accepted by `timing`: "homogeneous", "gtx-mix", "custom".
TimingModel make_timing_preset(std::string_view name, int worker_count);

struct ExperimentConfig {
  Paradigm paradigm = Paradigm::SSP;
  StalenessRange staleness{3, 0};
  int worker_count = 2;
  TimingModel timing;
  ModelKind model_kind = ModelKind::LinearRegression;
  int batch_size = 8;
  double learning_rate = 0.05;
  int epochs = 5;
  std::uint64_t seed = 1;
  RunMode mode = RunMode::Simulated;

  // Workload shape.
  int dataset_size = 512;
  int dimension = 8;  // input features (parameter count for the bowl)
  int hidden_units = 8;
  double noise = 0.0;

  // Observation.
  int loss_every = 1;        // full-dataset loss sampled every k updates; 0 disables
  double loss_target = 0.0;  // time-to-target threshold; 0 disables

  bool operator==(const ExperimentConfig&) const = default;
};

/// Checks every field invariant and fills defaults. Throws ConfigError naming
/// the first offending field.
ExperimentConfig validate_config(ExperimentConfig config);

/// Flat `key = value` text with `#` comments. Unknown keys are errors.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::string& path);
std::string serialize_config(const ExperimentConfig& config);

/// Deterministic RNG stream for (seed, worker, purpose).
std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t worker, std::uint64_t purpose);

/// Shortest round-trip text form of a double.
std::string format_double(double v);

}  // namespace dssp

#endif  // DSSP_CORE_HPP_
