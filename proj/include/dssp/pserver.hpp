#ifndef DSSP_PSERVER_HPP_
#define DSSP_PSERVER_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "dssp/core.hpp"
#include "dssp/policy.hpp"

namespace dssp {

/// w - learning_rate * g, version + 1. Throws DivergenceError if any resulting
/// entry is non-finite.
WeightVector apply_update(const WeightVector& weights, const GradientVector& g, double learning_rate);

/// Uniform in [-0.5, 0.5] per coordinate, deterministic per seed.
WeightVector initial_weights(std::size_t dimension, std::uint64_t seed);

/// The logical parameter server. Not thread-safe; the runner wraps it in a mutex.
class ParameterServer {
 public:
  ParameterServer(WeightVector initial, double learning_rate, SyncPolicy policy);

  /// Applies the update, then asks the policy for a decision.
  SyncDecision handle_push(const GradientVector& g, Timestamp now);

  /// Pushes arriving at the same instant: every gradient is applied before the
  /// first decision is taken. Decisions come back in input order.
  std::vector<SyncDecision> handle_push_batch(std::span<const GradientVector> grads, Timestamp now);

  /// Snapshot of the current weights. Allowed once before the first push and
  /// once after every grant.
  WeightVector handle_pull(WorkerId worker);

  std::vector<WorkerId> retire(WorkerId worker);

  const WeightVector& weights() const { return weights_; }
  const SyncPolicy& policy() const { return policy_; }
  double learning_rate() const { return learning_rate_; }
  std::uint64_t rejected_updates() const { return rejected_; }

 private:
  void apply(const GradientVector& g);
  void mark_granted(const SyncDecision& d, WorkerId pusher);

  WeightVector weights_;
  double learning_rate_;
  SyncPolicy policy_;
  std::vector<bool> may_pull_;
  std::uint64_t rejected_ = 0;
};

}  // namespace dssp

#endif  // DSSP_PSERVER_HPP_
