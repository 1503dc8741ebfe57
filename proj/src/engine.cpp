#include "dssp/engine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace dssp {

namespace {

constexpr double kLogitClamp = 30.0;

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

Model::Model(ModelKind kind, int input_dim, int hidden_units, std::vector<double> center)
    : kind_(kind), input_dim_(input_dim), hidden_(hidden_units), center_(std::move(center)) {
  if (input_dim < 1) throw std::invalid_argument("model input dimension must be >= 1");
  if (kind == ModelKind::TinyMLP && (hidden_units < 1 || hidden_units > 32)) {
    throw std::invalid_argument("TinyMLP hidden layer must have 1..32 units");
  }
  if (kind == ModelKind::QuadraticBowl) {
    if (center_.empty()) center_.assign(static_cast<std::size_t>(input_dim), 0.0);
    if (center_.size() != static_cast<std::size_t>(input_dim)) {
      throw std::invalid_argument("bowl center has the wrong dimension");
    }
  }
}

std::size_t Model::dimension() const {
  auto n = static_cast<std::size_t>(input_dim_);
  if (kind_ == ModelKind::TinyMLP) {
    auto h = static_cast<std::size_t>(hidden_);
    return h * n + 2 * h + 1;
  }
  return n;
}

double Model::mlp_output(std::span<const double> w, std::span<const double> x) const {
  const auto n = static_cast<std::size_t>(input_dim_);
  const auto h = static_cast<std::size_t>(hidden_);
  const double* bias = w.data() + h * n;
  const double* out_w = bias + h;
  double y = out_w[h];
  for (std::size_t j = 0; j < h; ++j) {
    y += out_w[j] * std::tanh(dot(w.subspan(j * n, n), x) + bias[j]);
  }
  return y;
}

double Model::loss(std::span<const double> w, std::span<const Example> batch) const {
  std::vector<double> unused;
  return loss_and_gradient(w, batch, unused);
}

double Model::loss_and_gradient(std::span<const double> w, std::span<const Example> batch,
                                 std::vector<double>& grad) const {
  const std::size_t d = dimension();
  if (w.size() != d) {
    throw std::invalid_argument("weights have dimension " + std::to_string(w.size()) + ", model expects " +
                                std::to_string(d));
  }
  grad.assign(d, 0.0);

  if (kind_ == ModelKind::QuadraticBowl) {
    double loss = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      grad[i] = w[i] - center_[i];
      loss += 0.5 * grad[i] * grad[i];
    }
    return loss;
  }

  if (batch.empty()) throw std::invalid_argument("empty mini-batch");
  const double scale = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;

  switch (kind_) {
    case ModelKind::LinearRegression:
      for (const auto& ex : batch) {
        const double r = dot(w, ex.x) - ex.y;
        loss += 0.5 * r * r;
        for (std::size_t i = 0; i < d; ++i) grad[i] += r * ex.x[i];
      }
      break;

    case ModelKind::LogisticRegression:
      for (const auto& ex : batch) {
        const double z = dot(w, ex.x);
        const double zc = std::clamp(z, -kLogitClamp, kLogitClamp);
        loss += softplus(zc) - ex.y * zc;
        if (z > -kLogitClamp && z < kLogitClamp) {
          const double r = sigmoid(z) - ex.y;
          for (std::size_t i = 0; i < d; ++i) grad[i] += r * ex.x[i];
        }
      }
      break;

    case ModelKind::TinyMLP: {
      const auto n = static_cast<std::size_t>(input_dim_);
      const auto h = static_cast<std::size_t>(hidden_);
      const double* bias = w.data() + h * n;
      const double* out_w = bias + h;
      std::vector<double> act(h);
      for (const auto& ex : batch) {
        double y = out_w[h];
        for (std::size_t j = 0; j < h; ++j) {
          act[j] = std::tanh(dot(w.subspan(j * n, n), ex.x) + bias[j]);
          y += out_w[j] * act[j];
        }
        const double r = y - ex.y;
        loss += 0.5 * r * r;
        for (std::size_t j = 0; j < h; ++j) {
          const double da = r * out_w[j] * (1.0 - act[j] * act[j]);
          for (std::size_t k = 0; k < n; ++k) grad[j * n + k] += da * ex.x[k];
          grad[h * n + j] += da;
          grad[h * n + h + j] += r * act[j];
        }
        grad[h * n + 2 * h] += r;
      }
      break;
    }

    case ModelKind::QuadraticBowl:
      break;
  }

  for (auto& g : grad) g *= scale;
  return loss * scale;
}

Model make_model(const ExperimentConfig& config, const Dataset& data) {
  return Model(config.model_kind, config.dimension, config.hidden_units,
               config.model_kind == ModelKind::QuadraticBowl ? data.truth : std::vector<double>{});
}

Dataset make_dataset(ModelKind kind, int n, int input_dim, int hidden_units, double noise,
                     std::uint64_t seed) {
  auto rng = make_stream(seed, 0, 0xda7a);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto dim = static_cast<std::size_t>(input_dim);

  Dataset data;
  data.kind = kind;
  Model shape(kind, input_dim, hidden_units);
  data.truth.resize(shape.dimension());

  if (kind == ModelKind::TinyMLP) {
    // Teacher network with fan-in scaled weights.
    const double in_scale = 1.0 / std::sqrt(static_cast<double>(input_dim));
    const double out_scale = 1.0 / std::sqrt(static_cast<double>(hidden_units));
    const auto h = static_cast<std::size_t>(hidden_units);
    for (std::size_t i = 0; i < h * dim; ++i) data.truth[i] = normal(rng) * in_scale;
    for (std::size_t i = h * dim; i < data.truth.size(); ++i) data.truth[i] = normal(rng) * out_scale;
  } else {
    for (auto& t : data.truth) t = normal(rng);
  }

  data.examples.resize(static_cast<std::size_t>(n));
  if (kind == ModelKind::QuadraticBowl) return data;  // loss ignores examples

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (auto& ex : data.examples) {
    ex.x.resize(dim);
    for (auto& v : ex.x) v = normal(rng);
    switch (kind) {
      case ModelKind::LinearRegression:
        ex.y = dot(data.truth, ex.x) + noise * normal(rng);
        break;
      case ModelKind::LogisticRegression:
        ex.y = unit(rng) < sigmoid(dot(data.truth, ex.x)) ? 1.0 : 0.0;
        break;
      case ModelKind::TinyMLP:
        ex.y = shape.mlp_output(data.truth, ex.x) + noise * normal(rng);
        break;
      case ModelKind::QuadraticBowl:
        break;
    }
  }
  return data;
}

Dataset make_dataset(const ExperimentConfig& config) {
  return make_dataset(config.model_kind, config.dataset_size, config.dimension, config.hidden_units,
                      config.noise, config.seed);
}

std::vector<DataShard> partition(const Dataset& data, int worker_count, std::uint64_t seed) {
  if (worker_count < 1) throw std::invalid_argument("worker_count must be >= 1");
  std::vector<std::size_t> order(data.examples.size());
  std::iota(order.begin(), order.end(), 0);
  auto rng = make_stream(seed, 0, 0x5407);
  std::shuffle(order.begin(), order.end(), rng);

  const auto p = static_cast<std::size_t>(worker_count);
  const std::size_t base = order.size() / p;
  const std::size_t extra = order.size() % p;
  std::vector<DataShard> shards(p);
  std::size_t next = 0;
  for (std::size_t w = 0; w < p; ++w) {
    shards[w].owner = static_cast<WorkerId>(w);
    const std::size_t size = base + (w < extra ? 1 : 0);
    shards[w].examples.reserve(size);
    for (std::size_t i = 0; i < size; ++i) shards[w].examples.push_back(data.examples[order[next++]]);
  }
  return shards;
}

MiniBatch next_batch(DataShard& shard, int m) {
  if (shard.examples.empty()) throw std::invalid_argument("next_batch on an empty shard");
  MiniBatch batch;
  batch.reserve(static_cast<std::size_t>(m));
  const std::size_t n = shard.examples.size();
  for (int i = 0; i < m; ++i) {
    batch.push_back(shard.examples[shard.cursor]);
    if (++shard.cursor == n) {
      shard.cursor = 0;
      ++shard.epoch;
    }
  }
  return batch;
}

GradientVector compute_gradient(const Model& model, const WeightVector& w, const MiniBatch& batch) {
  GradientVector g;
  model.loss_and_gradient(w.values, batch, g.values);
  return g;
}

void worker_step(WorkerState& worker, const Model& model, int batch_size, ServerPort& server) {
  const MiniBatch batch = next_batch(worker.shard, batch_size);
  GradientVector g;
  worker.last_batch_loss = model.loss_and_gradient(worker.local.values, batch, g.values);
  g.source = worker.id;
  g.source_iter = worker.iterations;
  server.push(g);
  worker.local = server.pull(worker.id);
  ++worker.iterations;
}

}  // namespace dssp
