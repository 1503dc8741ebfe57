#ifndef DSSP_METRICS_HPP_
#define DSSP_METRICS_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dssp/core.hpp"
#include "dssp/engine.hpp"
#include "dssp/trace.hpp"

namespace dssp {

struct WorkerMetrics {
  WorkerId worker = 0;
  double wait_s = 0.0;
  double compute_s = 0.0;
  double comm_s = 0.0;
  double elapsed_s = 0.0;
  IterationCount iterations = 0;
  int epochs = 0;
};

struct LossSample {
  std::uint64_t update = 0;
  Timestamp time = 0.0;
  double loss = 0.0;
};

/// What the run observed besides the event trace.
struct LossObservations {
  std::vector<LossSample> curve;
  /// f_t(w~_t): mini-batch loss of update t at the weights it was computed on.
  std::vector<double> update_losses;
  std::vector<int> epochs;  // per worker
  double target = 0.0;      // 0 disables time-to-target
  double final_loss = 0.0;
};

/// Samples the full-dataset loss every `every` server updates. Reads weight
/// snapshots only.
class LossTracker {
 public:
  LossTracker(const Model& model, const Dataset& data, int every, double target);

  /// Call after the server weights advanced; samples once per crossed multiple.
  void observe(const WeightVector& weights, Timestamp now);
  void record_update_loss(double batch_loss) { obs_.update_losses.push_back(batch_loss); }
  LossObservations finish(const WeightVector& final_weights, std::vector<int> epochs);

 private:
  const Model& model_;
  const Dataset& data_;
  int every_;
  std::uint64_t last_bucket_ = 0;
  LossObservations obs_;
};

struct MetricsReport {
  Paradigm paradigm = Paradigm::BSP;
  std::vector<WorkerMetrics> workers;
  std::uint64_t updates_applied = 0;
  double duration_s = 0.0;
  /// histogram[s] = number of updates applied with staleness s.
  std::vector<std::uint64_t> staleness_histogram;
  std::vector<LossSample> loss_curve;
  std::optional<double> time_to_target;
  std::optional<std::uint64_t> updates_to_target;
  double final_loss = 0.0;
  std::vector<double> update_losses;
  std::uint64_t rejected_updates = 0;

  bool complete = true;
  std::string incomplete_reason;
  std::vector<WorkerId> stuck;

  int max_staleness() const { return static_cast<int>(staleness_histogram.size()) - 1; }
  double total_wait(WorkerId w) const { return workers.at(w).wait_s; }
};

/// Aggregates a trace. A worker's time splits into compute (up to
/// ComputeDone), communication (every hop) and waiting (PushArrive to
/// Release of a deferred push). Staleness of an update is the largest push
/// count of any worker minus the pusher's count, right after the push.
MetricsReport summarize(const EventTrace& trace, Paradigm paradigm, const LossObservations& losses);

/// Report CSV: one row per worker and a final `all` row.
std::string report_csv_header();
std::string format_report_csv(const MetricsReport& report);

struct RegretCurve {
  std::vector<double> cumulative;  // R[T] for T = 1..n
  std::vector<double> average;     // R[T] / T
};

/// R[T] = sum_{t <= T} (f_t(w~_t) - f(w*)). Refuses non-convex model kinds.
RegretCurve compute_regret(std::span<const double> losses, double reference_optimum, ModelKind kind);

struct ReferenceSolution {
  std::vector<double> weights;
  double loss = 0.0;
  double gradient_norm = 0.0;
  std::uint64_t iterations = 0;
};

/// Full-batch gradient descent until the gradient norm drops below
/// `tolerance`. Only meaningful for convex models.
ReferenceSolution solve_reference_optimum(const Model& model, const Dataset& data,
                                          double tolerance = 1e-10,
                                          std::uint64_t max_iterations = 2'000'000);

}  // namespace dssp

#endif  // DSSP_METRICS_HPP_
