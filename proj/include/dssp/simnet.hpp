#ifndef DSSP_SIMNET_HPP_
#define DSSP_SIMNET_HPP_

#include <cstdint>
#include <queue>
#include <vector>

#include "dssp/core.hpp"
#include "dssp/metrics.hpp"
#include "dssp/trace.hpp"

namespace dssp {

struct RunResult {
  EventTrace trace;
  MetricsReport report;
  WeightVector final_weights;
};

struct Event {
  Timestamp at = 0.0;
  EventKind kind = EventKind::ComputeDone;
  WorkerId worker = 0;
  std::uint64_t seq = 0;
};

/// Min-queue on (at, seq); seq is the insertion counter, so ties replay in
/// the order they were scheduled.
class EventQueue {
 public:
  void schedule(Timestamp at, EventKind kind, WorkerId worker);
  bool empty() const { return heap_.empty(); }
  const Event& top() const { return heap_.top(); }
  Event pop();
  std::size_t size() const { return heap_.size(); }

 private:
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      return a.at != b.at ? a.at > b.at : a.seq > b.seq;
    }
  };
  std::priority_queue<Event, std::vector<Event>, Later> heap_;
  std::uint64_t next_seq_ = 0;
};

/// Runs the whole training job event by event until every worker has used
/// its epoch budget. Deterministic per config. Throws DeadlockError if the
/// queue drains while some worker is still blocked.
RunResult run_simulation(const ExperimentConfig& config);

/// t_fastest - t_source right after the update-th push (0-based) in the trace.
int staleness_of_update(const EventTrace& trace, std::size_t update_index);

}  // namespace dssp

#endif  // DSSP_SIMNET_HPP_
