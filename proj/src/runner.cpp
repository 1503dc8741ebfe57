#include "dssp/runner.hpp"

#include <algorithm>
#include <deque>
#include <thread>

#include "dssp/engine.hpp"
#include "dssp/pserver.hpp"

namespace dssp {

LiveRunHandle::LiveRunHandle(int worker_count) : finished_(static_cast<std::size_t>(worker_count), false) {}

void LiveRunHandle::abort(const std::string& reason) {
  {
    std::lock_guard lock(mu_);
    if (!abort_.load()) reason_ = reason;
    abort_.store(true);
  }
  cv_.notify_all();
}

void LiveRunHandle::mark_finished(WorkerId w) {
  {
    std::lock_guard lock(mu_);
    finished_.at(w) = true;
  }
  cv_.notify_all();
}

bool LiveRunHandle::all_finished() const {
  std::lock_guard lock(mu_);
  return std::all_of(finished_.begin(), finished_.end(), [](bool f) { return f; });
}

std::vector<WorkerId> LiveRunHandle::unfinished() const {
  std::lock_guard lock(mu_);
  std::vector<WorkerId> out;
  for (WorkerId w = 0; w < finished_.size(); ++w) {
    if (!finished_[w]) out.push_back(w);
  }
  return out;
}

std::string LiveRunHandle::abort_reason() const {
  std::lock_guard lock(mu_);
  return reason_;
}

bool LiveRunHandle::wait_until(std::chrono::steady_clock::time_point deadline) {
  std::unique_lock lock(mu_);
  return cv_.wait_until(lock, deadline, [&] {
    return abort_.load() || std::all_of(finished_.begin(), finished_.end(), [](bool f) { return f; });
  });
}

void deadline_guard(LiveRunHandle& handle, double budget_s) {
  if (budget_s <= 0.0) {
    handle.abort("deadline of " + format_double(budget_s) + " s exceeded");
    return;
  }
  const auto deadline = std::chrono::steady_clock::now() +
                        std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                            std::chrono::duration<double>(budget_s));
  if (!handle.wait_until(deadline)) {
    handle.abort("deadline of " + format_double(budget_s) + " s exceeded");
  }
}

namespace {

using Clock = std::chrono::steady_clock;

class ThreadedRun {
 public:
  ThreadedRun(const ExperimentConfig& config, const RunOptions& options)
      : config_(config),
        options_(options),
        data_(make_dataset(config)),
        model_(make_model(config, data_)),
        server_(initial_weights(model_.dimension(), config.seed), config.learning_rate,
                SyncPolicy(config.paradigm, config.staleness, config.worker_count)),
        losses_(model_, data_, config.loss_every, config.loss_target),
        handle_(config.worker_count),
        granted_(static_cast<std::size_t>(config.worker_count), false),
        final_push_(static_cast<std::size_t>(config.worker_count), false),
        epochs_(static_cast<std::size_t>(config.worker_count), 0) {
    trace_.worker_count = config.worker_count;
    shards_ = partition(data_, config.worker_count, config.seed);
  }

  RunResult run() {
    start_ = Clock::now();
    losses_.observe(server_.weights(), 0.0);

    std::thread guard;
    if (options_.deadline_s) {
      if (*options_.deadline_s <= 0.0) {
        deadline_guard(handle_, *options_.deadline_s);
      } else {
        guard = std::thread([this] { deadline_guard(handle_, *options_.deadline_s); });
      }
    }

    std::vector<std::thread> threads;
    for (int i = 0; i < config_.worker_count; ++i) {
      threads.emplace_back([this, i] { worker_main(static_cast<WorkerId>(i)); });
    }
    for (auto& t : threads) t.join();
    if (guard.joinable()) guard.join();

    RunResult result;
    result.final_weights = server_.weights();
    result.report = summarize(trace_, config_.paradigm, losses_.finish(server_.weights(), epochs_));
    result.report.rejected_updates = server_.rejected_updates();
    if (handle_.aborted()) {
      result.report.complete = false;
      result.report.incomplete_reason = handle_.abort_reason();
      result.report.stuck = handle_.unfinished();
    }
    result.trace = std::move(trace_);
    return result;
  }

 private:
  double now() const { return std::chrono::duration<double>(Clock::now() - start_).count(); }

  // Caller holds the handle mutex.
  void record(WorkerId w, EventKind kind, TraceDecision d = TraceDecision::None) {
    trace_.records.push_back({now(), w, kind, server_.policy().clocks().count(w), d});
  }

  void busy_wait(double seconds) {
    const auto until = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                          std::chrono::duration<double>(seconds));
    while (Clock::now() < until && !handle_.aborted()) {
    }
  }

  void sleep(double seconds) {
    if (seconds > 0.0) std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
  }

  // Caller holds the handle mutex.
  void grant(std::deque<WorkerId> pending) {
    while (!pending.empty()) {
      const WorkerId id = pending.front();
      pending.pop_front();
      granted_[id] = true;
      if (final_push_[id]) {
        record(id, EventKind::Retire);
        for (auto q : server_.retire(id)) {
          if (options_.hang_deferred) continue;
          record(q, EventKind::Release);
          pending.push_back(q);
        }
      }
    }
  }

  void worker_main(WorkerId id) {
    try {
      WorkerState state;
      state.id = id;
      state.shard = shards_[id];
      state.epoch_budget = config_.epochs;
      auto compute_rng = make_stream(config_.seed, id, 0xc0);
      auto comm_rng = make_stream(config_.seed, id, 0xc1);
      {
        std::lock_guard lock(handle_.mutex());
        state.local = server_.handle_pull(id);
      }

      while (!handle_.aborted()) {
        busy_wait(config_.timing.compute[id].sample(compute_rng));
        const MiniBatch batch = next_batch(state.shard, config_.batch_size);
        GradientVector g;
        const double batch_loss = model_.loss_and_gradient(state.local.values, batch, g.values);
        g.source = id;
        g.source_iter = state.iterations;
        const bool final = state.done();
        {
          std::lock_guard lock(handle_.mutex());
          record(id, EventKind::ComputeDone);
        }

        sleep(config_.timing.comm_delay.sample(comm_rng));
        {
          std::lock_guard lock(handle_.mutex());
          final_push_[id] = final;
          const SyncDecision d = server_.handle_push(g, now());
          losses_.record_update_loss(batch_loss);
          losses_.observe(server_.weights(), now());
          record(id, EventKind::PushArrive,
                 d.outcome == Outcome::Grant ? TraceDecision::Grant : TraceDecision::Defer);
          std::deque<WorkerId> pending;
          if (d.outcome == Outcome::Grant) pending.push_back(id);
          if (!options_.hang_deferred) {
            for (auto q : d.released) {
              record(q, EventKind::Release);
              pending.push_back(q);
            }
          }
          grant(std::move(pending));
        }
        handle_.signal().notify_all();

        {
          std::unique_lock lock(handle_.mutex());
          handle_.signal().wait(lock, [&] { return granted_[id] || handle_.aborted(); });
          if (!granted_[id]) break;
          granted_[id] = false;
        }

        sleep(config_.timing.comm_delay.sample(comm_rng));
        {
          std::lock_guard lock(handle_.mutex());
          record(id, EventKind::GrantDeliver);
        }
        sleep(config_.timing.comm_delay.sample(comm_rng));
        WeightVector snapshot;
        {
          std::lock_guard lock(handle_.mutex());
          snapshot = server_.handle_pull(id);
          record(id, EventKind::PullArrive);
        }
        sleep(config_.timing.comm_delay.sample(comm_rng));
        {
          std::lock_guard lock(handle_.mutex());
          record(id, EventKind::PullReturn);
          epochs_[id] = state.shard.epoch;
        }
        state.local = std::move(snapshot);
        ++state.iterations;
        if (final) {
          handle_.mark_finished(id);
          break;
        }
      }
    } catch (const std::exception& e) {
      handle_.abort("worker " + std::to_string(id) + " failed: " + e.what());
    }
  }

  const ExperimentConfig& config_;
  RunOptions options_;
  Dataset data_;
  Model model_;
  ParameterServer server_;
  LossTracker losses_;
  LiveRunHandle handle_;
  std::vector<DataShard> shards_;
  std::vector<bool> granted_;
  std::vector<bool> final_push_;
  std::vector<int> epochs_;
  EventTrace trace_;
  Clock::time_point start_;
};

}  // namespace

RunResult run_threaded(const ExperimentConfig& config, const RunOptions& options) {
  if (config.mode != RunMode::Threaded) {
    throw ConfigError("mode", "run_threaded needs mode = threaded");
  }
  ThreadedRun run(config, options);
  return run.run();
}

}  // namespace dssp
