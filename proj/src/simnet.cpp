#include "dssp/simnet.hpp"

#include <algorithm>
#include <deque>
#include <string>

#include "dssp/engine.hpp"
#include "dssp/pserver.hpp"

namespace dssp {

void EventQueue::schedule(Timestamp at, EventKind kind, WorkerId worker) {
  heap_.push(Event{at, kind, worker, next_seq_++});
}

Event EventQueue::pop() {
  Event e = heap_.top();
  heap_.pop();
  return e;
}

namespace {

constexpr std::uint64_t kComputeStream = 0xc0;
constexpr std::uint64_t kCommStream = 0xc1;

struct SimWorker {
  WorkerState state;
  std::mt19937_64 compute_rng;
  std::mt19937_64 comm_rng;
  GradientVector pending;
  double pending_loss = 0.0;
  WeightVector snapshot;
  bool final_push = false;
  bool finished = false;
};

class Simulation {
 public:
  explicit Simulation(const ExperimentConfig& config)
      : config_(config),
        data_(make_dataset(config)),
        model_(make_model(config, data_)),
        server_(initial_weights(model_.dimension(), config.seed), config.learning_rate,
                SyncPolicy(config.paradigm, config.staleness, config.worker_count)),
        losses_(model_, data_, config.loss_every, config.loss_target) {
    trace_.worker_count = config.worker_count;
    auto shards = partition(data_, config.worker_count, config.seed);
    for (int i = 0; i < config.worker_count; ++i) {
      const auto id = static_cast<WorkerId>(i);
      SimWorker w;
      w.state.id = id;
      w.state.shard = std::move(shards[static_cast<std::size_t>(i)]);
      w.state.epoch_budget = config.epochs;
      w.state.local = server_.handle_pull(id);
      w.compute_rng = make_stream(config.seed, id, kComputeStream);
      w.comm_rng = make_stream(config.seed, id, kCommStream);
      workers_.push_back(std::move(w));
    }
  }

  RunResult run() {
    losses_.observe(server_.weights(), 0.0);
    for (auto& w : workers_) start_compute(w, 0.0);

    while (!queue_.empty()) {
      Event e = queue_.pop();
      switch (e.kind) {
        case EventKind::ComputeDone: on_compute_done(e); break;
        case EventKind::PushArrive: on_push_arrive(e); break;
        case EventKind::GrantDeliver: on_grant_deliver(e); break;
        case EventKind::PullArrive: on_pull_arrive(e); break;
        case EventKind::PullReturn: on_pull_return(e); break;
        case EventKind::Release:
        case EventKind::Retire: break;
      }
    }

    std::vector<WorkerId> stuck;
    for (const auto& w : workers_) {
      if (!w.finished) stuck.push_back(w.state.id);
    }
    if (!stuck.empty()) {
      std::string names;
      for (auto id : stuck) names += (names.empty() ? "" : ",") + std::to_string(id);
      throw DeadlockError("event queue drained with blocked workers {" + names + "}", stuck);
    }

    std::vector<int> epochs;
    for (const auto& w : workers_) epochs.push_back(w.state.shard.epoch);
    RunResult result;
    result.final_weights = server_.weights();
    result.report = summarize(trace_, config_.paradigm, losses_.finish(server_.weights(), epochs));
    result.report.rejected_updates = server_.rejected_updates();
    result.trace = std::move(trace_);
    return result;
  }

 private:
  double comm_delay(SimWorker& w) { return config_.timing.comm_delay.sample(w.comm_rng); }

  void record(Timestamp at, WorkerId w, EventKind kind, TraceDecision d = TraceDecision::None) {
    trace_.records.push_back({at, w, kind, server_.policy().clocks().count(w), d});
  }

  void start_compute(SimWorker& w, Timestamp now) {
    const double duration = config_.timing.compute[w.state.id].sample(w.compute_rng);
    queue_.schedule(now + duration, EventKind::ComputeDone, w.state.id);
  }

  void on_compute_done(const Event& e) {
    auto& w = workers_[e.worker];
    const MiniBatch batch = next_batch(w.state.shard, config_.batch_size);
    w.pending = GradientVector{};
    w.pending_loss = model_.loss_and_gradient(w.state.local.values, batch, w.pending.values);
    w.pending.source = w.state.id;
    w.pending.source_iter = w.state.iterations;
    w.final_push = w.state.done();
    record(e.at, e.worker, EventKind::ComputeDone);
    queue_.schedule(e.at + comm_delay(w), EventKind::PushArrive, e.worker);
  }

  void on_push_arrive(const Event& first) {
    // Pushes landing at the same instant are aggregated: all gradients are
    // applied before any decision.
    std::vector<WorkerId> pushers{first.worker};
    while (!queue_.empty() && queue_.top().at == first.at && queue_.top().kind == EventKind::PushArrive) {
      pushers.push_back(queue_.pop().worker);
    }
    std::vector<GradientVector> grads;
    grads.reserve(pushers.size());
    for (auto id : pushers) grads.push_back(std::move(workers_[id].pending));

    const auto decisions = server_.handle_push_batch(grads, first.at);
    for (auto id : pushers) losses_.record_update_loss(workers_[id].pending_loss);
    losses_.observe(server_.weights(), first.at);

    std::deque<WorkerId> granted;
    for (std::size_t i = 0; i < pushers.size(); ++i) {
      const auto& d = decisions[i];
      record(first.at, pushers[i], EventKind::PushArrive,
             d.outcome == Outcome::Grant ? TraceDecision::Grant : TraceDecision::Defer);
      if (d.outcome == Outcome::Grant) granted.push_back(pushers[i]);
      for (auto q : d.released) {
        record(first.at, q, EventKind::Release);
        granted.push_back(q);
      }
    }
    while (!granted.empty()) {
      const WorkerId id = granted.front();
      granted.pop_front();
      auto& w = workers_[id];
      if (w.final_push) {
        record(first.at, id, EventKind::Retire);
        for (auto q : server_.retire(id)) {
          record(first.at, q, EventKind::Release);
          granted.push_back(q);
        }
      }
      queue_.schedule(first.at + comm_delay(w), EventKind::GrantDeliver, id);
    }
  }

  void on_grant_deliver(const Event& e) {
    record(e.at, e.worker, EventKind::GrantDeliver);
    queue_.schedule(e.at + comm_delay(workers_[e.worker]), EventKind::PullArrive, e.worker);
  }

  void on_pull_arrive(const Event& e) {
    auto& w = workers_[e.worker];
    w.snapshot = server_.handle_pull(e.worker);
    record(e.at, e.worker, EventKind::PullArrive);
    queue_.schedule(e.at + comm_delay(w), EventKind::PullReturn, e.worker);
  }

  void on_pull_return(const Event& e) {
    auto& w = workers_[e.worker];
    w.state.local = std::move(w.snapshot);
    ++w.state.iterations;
    record(e.at, e.worker, EventKind::PullReturn);
    if (w.final_push) {
      w.finished = true;
    } else {
      start_compute(w, e.at);
    }
  }

  const ExperimentConfig& config_;
  Dataset data_;
  Model model_;
  ParameterServer server_;
  LossTracker losses_;
  std::vector<SimWorker> workers_;
  EventQueue queue_;
  EventTrace trace_;
};

}  // namespace

RunResult run_simulation(const ExperimentConfig& config) {
  if (config.mode != RunMode::Simulated) {
    throw ConfigError("mode", "run_simulation needs mode = simulated");
  }
  Simulation sim(config);
  return sim.run();
}

int staleness_of_update(const EventTrace& trace, std::size_t update_index) {
  IterationCount frontier = 0;
  std::size_t seen = 0;
  for (const auto& r : trace.records) {
    if (r.kind != EventKind::PushArrive) continue;
    frontier = std::max(frontier, r.t_p);
    if (seen++ == update_index) return static_cast<int>(frontier - r.t_p);
  }
  throw std::out_of_range("update index " + std::to_string(update_index) + " beyond trace");
}

}  // namespace dssp
