#ifndef DSSP_RUNNER_HPP_
#define DSSP_RUNNER_HPP_

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "dssp/core.hpp"
#include "dssp/simnet.hpp"

namespace dssp {

struct RunOptions {
  /// Wall-clock budget in seconds; the run is aborted when it expires.
  std::optional<double> deadline_s;
  /// Fault injection: deferred workers are never released.
  bool hang_deferred = false;
};

/// Shared state of a threaded run: abort flag, completion tracking and the
/// condition variable the guard sleeps on.
class LiveRunHandle {
 public:
  explicit LiveRunHandle(int worker_count);

  bool aborted() const { return abort_.load(); }
  void abort(const std::string& reason);
  void mark_finished(WorkerId w);
  bool all_finished() const;
  std::vector<WorkerId> unfinished() const;
  std::string abort_reason() const;

  /// Blocks until every worker finished or `deadline` passes.
  bool wait_until(std::chrono::steady_clock::time_point deadline);

  /// Woken on abort; workers blocked on a grant wait here too.
  std::condition_variable& signal() { return cv_; }
  std::mutex& mutex() { return mu_; }

 private:
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::atomic<bool> abort_{false};
  std::vector<bool> finished_;
  std::string reason_;
};

/// Aborts the run if it has not completed within `budget_s` seconds. A
/// budget of zero or less aborts immediately.
void deadline_guard(LiveRunHandle& handle, double budget_s);

/// Real threads, one per worker, the server behind a single mutex and
/// monotonic-clock timestamps. Compute time is a calibrated busy-wait of the
/// configured duration, communication a sleep.
RunResult run_threaded(const ExperimentConfig& config, const RunOptions& options = {});

}  // namespace dssp

#endif  // DSSP_RUNNER_HPP_
