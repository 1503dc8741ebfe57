#include "dssp/pserver.hpp"

#include <cmath>
#include <string>

namespace dssp {

WeightVector apply_update(const WeightVector& weights, const GradientVector& g, double learning_rate) {
  if (g.values.size() != weights.values.size()) {
    throw std::invalid_argument("gradient dimension " + std::to_string(g.values.size()) +
                                " does not match weights dimension " +
                                std::to_string(weights.values.size()));
  }
  WeightVector next;
  next.values.resize(weights.values.size());
  for (std::size_t i = 0; i < next.values.size(); ++i) {
    next.values[i] = weights.values[i] - learning_rate * g.values[i];
    if (!std::isfinite(next.values[i])) {
      throw DivergenceError("weight " + std::to_string(i) + " became non-finite at version " +
                            std::to_string(weights.version + 1));
    }
  }
  next.version = weights.version + 1;
  return next;
}

WeightVector initial_weights(std::size_t dimension, std::uint64_t seed) {
  auto rng = make_stream(seed, 0, 0x1417);
  std::uniform_real_distribution<double> dist(-0.5, 0.5);
  WeightVector w;
  w.values.resize(dimension);
  for (auto& v : w.values) v = dist(rng);
  return w;
}

ParameterServer::ParameterServer(WeightVector initial, double learning_rate, SyncPolicy policy)
    : weights_(std::move(initial)),
      learning_rate_(learning_rate),
      policy_(std::move(policy)),
      may_pull_(policy_.clocks().size(), true) {}

void ParameterServer::apply(const GradientVector& g) {
  if (g.source >= may_pull_.size()) {
    throw ProtocolError("unknown worker " + std::to_string(g.source));
  }
  if (g.values.size() != weights_.values.size()) {
    throw std::invalid_argument("gradient dimension mismatch from worker " + std::to_string(g.source));
  }
  for (double v : g.values) {
    if (!std::isfinite(v)) {
      ++rejected_;
      throw DivergenceError("non-finite gradient from worker " + std::to_string(g.source));
    }
  }
  weights_ = apply_update(weights_, g, learning_rate_);
}

void ParameterServer::mark_granted(const SyncDecision& d, WorkerId pusher) {
  if (d.outcome == Outcome::Grant) may_pull_[pusher] = true;
  for (WorkerId q : d.released) may_pull_[q] = true;
}

SyncDecision ParameterServer::handle_push(const GradientVector& g, Timestamp now) {
  return std::move(handle_push_batch(std::span(&g, 1), now).front());
}

std::vector<SyncDecision> ParameterServer::handle_push_batch(std::span<const GradientVector> grads,
                                                             Timestamp now) {
  // Reject protocol violations before touching the weights.
  for (const auto& g : grads) {
    if (g.source >= may_pull_.size()) throw ProtocolError("unknown worker " + std::to_string(g.source));
    if (policy_.is_deferred(g.source)) {
      throw ProtocolError("push from deferred worker " + std::to_string(g.source));
    }
  }
  for (const auto& g : grads) apply(g);

  std::vector<SyncDecision> decisions;
  decisions.reserve(grads.size());
  for (const auto& g : grads) {
    may_pull_[g.source] = false;
    decisions.push_back(policy_.on_push(g.source, now));
    mark_granted(decisions.back(), g.source);
  }
  return decisions;
}

WeightVector ParameterServer::handle_pull(WorkerId worker) {
  if (worker >= may_pull_.size()) throw ProtocolError("unknown worker " + std::to_string(worker));
  if (!may_pull_[worker]) {
    throw ProtocolError("pull from worker " + std::to_string(worker) + " without a grant");
  }
  may_pull_[worker] = false;
  return weights_;
}

std::vector<WorkerId> ParameterServer::retire(WorkerId worker) {
  auto released = policy_.retire(worker);
  for (WorkerId q : released) may_pull_[q] = true;
  return released;
}

}  // namespace dssp
