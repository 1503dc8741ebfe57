#ifndef DSSP_POLICY_HPP_
#define DSSP_POLICY_HPP_

#include <cstddef>
#include <optional>
#include <vector>

#include "dssp/core.hpp"

namespace dssp {

/// Push counts per worker. Retired workers (finished their budget) keep their
/// count but no longer take part in slowest/fastest determination.
class IterationClockTable {
 public:
  explicit IterationClockTable(int worker_count);

  std::size_t size() const { return counts_.size(); }
  IterationCount count(WorkerId w) const { return counts_.at(w); }
  const std::vector<IterationCount>& counts() const { return counts_; }
  bool active(WorkerId w) const { return active_.at(w); }
  bool any_active() const;

  void advance(WorkerId w) { ++counts_.at(w); }
  void retire(WorkerId w) { active_.at(w) = false; }

  /// Smallest WorkerId among the active workers with the minimum count.
  /// Falls back to all workers when none is active.
  WorkerId slowest() const;
  /// t_w >= t_i for every active i; ties count as fastest.
  bool is_fastest(WorkerId w) const;
  IterationCount min_active() const { return counts_[slowest()]; }
  IterationCount max_count() const;

 private:
  std::vector<IterationCount> counts_;
  std::vector<bool> active_;
};

/// Timestamps of the two most recent pushes of every worker.
struct PushHistoryTable {
  std::vector<Timestamp> latest;
  std::vector<Timestamp> previous;
  std::vector<int> populated;  // saturates at 2

  explicit PushHistoryTable(int worker_count)
      : latest(worker_count, 0.0), previous(worker_count, 0.0), populated(worker_count, 0) {}

  void record(WorkerId w, Timestamp t) {
    previous.at(w) = latest.at(w);
    latest.at(w) = t;
    if (populated[w] < 2) ++populated[w];
  }
};

/// Intervals shorter than this are treated as this long.
inline constexpr double kMinInterval = 1e-9;

/// Alg. 2 search on an already-recorded history: simulate r_max pushes of
/// `worker` and of `slowest` and return the index r in [0, r_max] of the
/// worker's simulated push closest to any simulated push of the slowest
/// worker. Smallest r wins ties. Returns 0 when either worker has fewer than
/// two recorded pushes.
int predict_extra_iterations(const PushHistoryTable& history, WorkerId worker, WorkerId slowest,
                             int r_max);

/// Records `push_time` for `worker`, then runs the prediction against the
/// slowest worker by push count.
int synchronization_controller(PushHistoryTable& history, WorkerId worker, Timestamp push_time,
                               const IterationClockTable& clocks, int r_max);

enum class Outcome { Grant, Defer };

struct SyncDecision {
  Outcome outcome = Outcome::Grant;
  std::vector<WorkerId> released;  // ascending WorkerId

  // Diagnostics for DSSP.
  bool via_credit = false;
  bool controller_consulted = false;
  int credits_minted = 0;
};

/// Effective staleness ceiling: s_lower for SSP, s_lower + r_max for DSSP.
/// Throws ConfigError for BSP and ASP, whose bounds are 0 and unbounded.
int max_staleness_bound(const ExperimentConfig& config);

/// Grant/defer state machine for one of the four paradigms. Callers serialize
/// on_push and retire.
class SyncPolicy {
 public:
  SyncPolicy(Paradigm paradigm, StalenessRange staleness, int worker_count);

  SyncDecision on_push(WorkerId worker, Timestamp now);

  /// Removes a worker that will never push again from the slowest-worker
  /// computation and returns the deferred workers this unblocks.
  std::vector<WorkerId> retire(WorkerId worker);

  Paradigm paradigm() const { return paradigm_; }
  StalenessRange staleness() const { return staleness_; }
  const IterationClockTable& clocks() const { return clocks_; }
  const PushHistoryTable& history() const { return history_; }
  int credits(WorkerId w) const { return credits_.at(w); }
  bool is_deferred(WorkerId w) const { return deferred_.at(w); }
  std::vector<WorkerId> deferred_workers() const;

 private:
  /// Deferred workers are released once within this many pushes of the slowest.
  int release_threshold() const;
  std::vector<WorkerId> collect_releasable();
  void check_worker(WorkerId w) const;

  Paradigm paradigm_;
  StalenessRange staleness_;
  IterationClockTable clocks_;
  PushHistoryTable history_;
  std::vector<int> credits_;
  std::vector<bool> deferred_;
};

}  // namespace dssp

#endif  // DSSP_POLICY_HPP_
