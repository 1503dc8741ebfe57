#ifndef DSSP_ENGINE_HPP_
#define DSSP_ENGINE_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "dssp/core.hpp"

namespace dssp {

struct Example {
  std::vector<double> x;
  double y = 0.0;
};

struct Dataset {
  ModelKind kind = ModelKind::LinearRegression;
  std::vector<Example> examples;
  /// Hidden ground-truth parameters the labels were generated from (for the
  /// bowl, its center).
  std::vector<double> truth;
};

/// Parameter layout and loss for one of the four model kinds.
///
/// Losses are batch means: squared error for the regressions and the MLP,
/// log-loss with logits clamped to [-30, 30] for logistic regression. The
/// bowl is 0.5 * |w - c|^2 and ignores its batch.
class Model {
 public:
  Model(ModelKind kind, int input_dim, int hidden_units, std::vector<double> center = {});

  ModelKind kind() const { return kind_; }
  int input_dim() const { return input_dim_; }
  int hidden_units() const { return hidden_; }
  /// Number of parameters.
  std::size_t dimension() const;

  double loss(std::span<const double> w, std::span<const Example> batch) const;
  /// Returns the loss; writes the mean gradient into `grad` (resized).
  double loss_and_gradient(std::span<const double> w, std::span<const Example> batch,
                           std::vector<double>& grad) const;

  /// TinyMLP forward pass for one input.
  double mlp_output(std::span<const double> w, std::span<const double> x) const;

 private:
  ModelKind kind_;
  int input_dim_;
  int hidden_;
  std::vector<double> center_;
};

Model make_model(const ExperimentConfig& config, const Dataset& data);

/// Synthetic data with a known ground truth. Regressions draw x ~ N(0, I) and
/// a hidden weight vector; labels get Gaussian noise of std `noise`. Logistic
/// labels are Bernoulli(sigmoid(truth . x)). Same seed, same dataset.
Dataset make_dataset(ModelKind kind, int n, int input_dim, int hidden_units, double noise,
                     std::uint64_t seed);
Dataset make_dataset(const ExperimentConfig& config);

struct DataShard {
  WorkerId owner = 0;
  std::vector<Example> examples;
  std::size_t cursor = 0;
  int epoch = 0;
};

/// Shuffles once per seed, then splits into contiguous shards whose sizes
/// differ by at most one.
std::vector<DataShard> partition(const Dataset& data, int worker_count, std::uint64_t seed);

using MiniBatch = std::vector<Example>;

/// m examples from the cursor, wrapping at the end of the shard. The epoch
/// counter increments whenever the cursor wraps.
MiniBatch next_batch(DataShard& shard, int m);

GradientVector compute_gradient(const Model& model, const WeightVector& w, const MiniBatch& batch);

/// What a worker needs from the server. `push` returns once the worker has
/// been granted OK.
class ServerPort {
 public:
  virtual ~ServerPort() = default;
  virtual void push(const GradientVector& g) = 0;
  virtual WeightVector pull(WorkerId worker) = 0;
};

struct WorkerState {
  WorkerId id = 0;
  DataShard shard;
  WeightVector local;
  IterationCount iterations = 0;
  int epoch_budget = 1;
  double last_batch_loss = 0.0;

  bool done() const { return shard.epoch >= epoch_budget; }
};

/// One iteration: gradient on local weights, push, wait for OK, pull, replace.
void worker_step(WorkerState& worker, const Model& model, int batch_size, ServerPort& server);

}  // namespace dssp

#endif  // DSSP_ENGINE_HPP_
