#include "dssp/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace dssp {

IterationClockTable::IterationClockTable(int worker_count)
    : counts_(static_cast<std::size_t>(worker_count), 0),
      active_(static_cast<std::size_t>(worker_count), true) {
  if (worker_count < 1) throw ConfigError("worker_count", "must be >= 1");
}

bool IterationClockTable::any_active() const {
  return std::find(active_.begin(), active_.end(), true) != active_.end();
}

WorkerId IterationClockTable::slowest() const {
  bool only_active = any_active();
  std::optional<WorkerId> best;
  for (WorkerId i = 0; i < counts_.size(); ++i) {
    if (only_active && !active_[i]) continue;
    if (!best || counts_[i] < counts_[*best]) best = i;
  }
  return *best;
}

bool IterationClockTable::is_fastest(WorkerId w) const {
  for (WorkerId i = 0; i < counts_.size(); ++i) {
    if (active_[i] && counts_[i] > counts_.at(w)) return false;
  }
  return true;
}

IterationCount IterationClockTable::max_count() const {
  return *std::max_element(counts_.begin(), counts_.end());
}

int predict_extra_iterations(const PushHistoryTable& history, WorkerId worker, WorkerId slowest,
                             int r_max) {
  if (r_max <= 0) return 0;
  if (history.populated.at(worker) < 2 || history.populated.at(slowest) < 2) return 0;

  const double interval_p = std::max(history.latest[worker] - history.previous[worker], kMinInterval);
  const double interval_s =
      std::max(history.latest[slowest] - history.previous[slowest], kMinInterval);
  const double base_p = history.latest[worker];
  const double base_s = history.latest[slowest] + interval_s;

  const auto n = static_cast<std::size_t>(r_max) + 1;
  std::vector<double> sim_slowest(n);
  for (std::size_t k = 0; k < n; ++k) sim_slowest[k] = base_s + static_cast<double>(k) * interval_s;

  // sim_slowest is increasing, so the nearest entry to any point is one of the
  // two neighbours of its insertion position.
  int best_r = 0;
  double best_gap = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < n; ++r) {
    const double point = base_p + static_cast<double>(r) * interval_p;
    auto it = std::lower_bound(sim_slowest.begin(), sim_slowest.end(), point);
    double gap = std::numeric_limits<double>::infinity();
    if (it != sim_slowest.end()) gap = std::min(gap, std::abs(*it - point));
    if (it != sim_slowest.begin()) gap = std::min(gap, std::abs(*std::prev(it) - point));
    if (gap < best_gap) {
      best_gap = gap;
      best_r = static_cast<int>(r);
    }
  }
  return best_r;
}

int synchronization_controller(PushHistoryTable& history, WorkerId worker, Timestamp push_time,
                               const IterationClockTable& clocks, int r_max) {
  history.record(worker, push_time);
  return predict_extra_iterations(history, worker, clocks.slowest(), r_max);
}

int max_staleness_bound(const ExperimentConfig& config) {
  switch (config.paradigm) {
    case Paradigm::SSP:
      return config.staleness.s_lower;
    case Paradigm::DSSP:
      return config.staleness.s_lower + config.staleness.r_max;
    case Paradigm::BSP:
      throw ConfigError("paradigm", "BSP has no staleness threshold (bound is 0)");
    case Paradigm::ASP:
      throw ConfigError("paradigm", "ASP staleness is unbounded");
  }
  return 0;
}

SyncPolicy::SyncPolicy(Paradigm paradigm, StalenessRange staleness, int worker_count)
    : paradigm_(paradigm),
      staleness_(staleness),
      clocks_(worker_count),
      history_(worker_count),
      credits_(static_cast<std::size_t>(worker_count), 0),
      deferred_(static_cast<std::size_t>(worker_count), false) {
  if (staleness.s_lower < 0 || staleness.r_max < 0) {
    throw ConfigError("staleness", "thresholds must be non-negative");
  }
}

int SyncPolicy::release_threshold() const {
  switch (paradigm_) {
    case Paradigm::BSP: return 0;
    case Paradigm::ASP: return std::numeric_limits<int>::max();
    case Paradigm::SSP:
    case Paradigm::DSSP: return staleness_.s_lower;
  }
  return 0;
}

void SyncPolicy::check_worker(WorkerId w) const {
  if (w >= clocks_.size()) {
    throw ProtocolError("unknown worker " + std::to_string(w));
  }
  if (deferred_[w]) {
    throw ProtocolError("push from deferred worker " + std::to_string(w));
  }
  if (!clocks_.active(w)) {
    throw ProtocolError("push from retired worker " + std::to_string(w));
  }
}

std::vector<WorkerId> SyncPolicy::collect_releasable() {
  std::vector<WorkerId> released;
  const IterationCount slowest = clocks_.min_active();
  const IterationCount threshold = release_threshold();
  for (WorkerId q = 0; q < deferred_.size(); ++q) {
    if (deferred_[q] && clocks_.count(q) - slowest <= threshold) {
      deferred_[q] = false;
      released.push_back(q);
    }
  }
  return released;
}

SyncDecision SyncPolicy::on_push(WorkerId p, Timestamp now) {
  check_worker(p);
  clocks_.advance(p);

  SyncDecision decision;
  bool recorded = false;

  if (paradigm_ == Paradigm::ASP) {
    decision.outcome = Outcome::Grant;
  } else if (paradigm_ == Paradigm::DSSP && credits_[p] > 0) {
    --credits_[p];
    decision.outcome = Outcome::Grant;
    decision.via_credit = true;
  } else {
    const IterationCount gap = clocks_.count(p) - clocks_.min_active();
    if (gap <= release_threshold()) {
      decision.outcome = Outcome::Grant;
    } else {
      decision.outcome = Outcome::Defer;
      if (paradigm_ == Paradigm::DSSP && clocks_.is_fastest(p)) {
        const int predicted =
            synchronization_controller(history_, p, now, clocks_, staleness_.r_max);
        recorded = true;
        decision.controller_consulted = true;
        // Grants stay within s_lower + r_max of the slowest worker: the
        // current push plus every credit it is handed.
        const IterationCount ceiling = staleness_.s_lower + staleness_.r_max;
        if (predicted > 0 && gap <= ceiling) {
          credits_[p] = static_cast<int>(std::min<IterationCount>(predicted, ceiling - gap));
          decision.credits_minted = credits_[p];
          decision.outcome = Outcome::Grant;
        }
      }
    }
  }
  if (!recorded) history_.record(p, now);

  if (decision.outcome == Outcome::Defer) deferred_[p] = true;
  decision.released = collect_releasable();
  return decision;
}

std::vector<WorkerId> SyncPolicy::retire(WorkerId w) {
  check_worker(w);
  clocks_.retire(w);
  credits_[w] = 0;
  return collect_releasable();
}

std::vector<WorkerId> SyncPolicy::deferred_workers() const {
  std::vector<WorkerId> out;
  for (WorkerId q = 0; q < deferred_.size(); ++q) {
    if (deferred_[q]) out.push_back(q);
  }
  return out;
}

}  // namespace dssp
