#include <doctest.h>

#include <cmath>

#include "dssp/simnet.hpp"
#include "oracles.hpp"
#include "scenarios.hpp"

using namespace dssp;

namespace {

ExperimentConfig two_speed(Paradigm p, StalenessRange s, double fast, double slow, double comm) {
  ExperimentConfig c;
  c.paradigm = p;
  c.staleness = s;
  c.worker_count = 2;
  c.model_kind = ModelKind::QuadraticBowl;
  c.dimension = 2;
  c.dataset_size = 64;
  c.batch_size = 4;
  c.epochs = 2;
  c.timing = make_timing_preset("custom", 2);
  c.timing.compute = {Distribution::constant(fast), Distribution::constant(slow)};
  c.timing.comm_delay = Distribution::constant(comm);
  return validate_config(c);
}

}  // namespace

TEST_CASE("event queue pops by time, then insertion order") {
  EventQueue q;
  q.schedule(2.0, EventKind::PushArrive, 0);
  q.schedule(1.0, EventKind::ComputeDone, 1);
  q.schedule(2.0, EventKind::ComputeDone, 2);
  q.schedule(1.0, EventKind::PullReturn, 3);
  CHECK(q.pop().worker == 1);
  CHECK(q.pop().worker == 3);
  CHECK(q.pop().worker == 0);
  CHECK(q.pop().worker == 2);
  CHECK(q.empty());
}

TEST_CASE("BSP with equal speeds and no delay runs in lockstep, one second per round") {
  auto r = run_simulation(two_speed(Paradigm::BSP, {0, 0}, 1.0, 1.0, 0.0));
  std::vector<std::vector<double>> done(2);
  for (const auto& rec : r.trace.records) {
    if (rec.kind == EventKind::ComputeDone) done[rec.worker].push_back(rec.time);
  }
  REQUIRE(done[0].size() == 16);
  CHECK(done[0] == done[1]);
  for (std::size_t k = 0; k < done[0].size(); ++k) CHECK(done[0][k] == static_cast<double>(k + 1));
  CHECK(r.report.duration_s == 16.0);
}

TEST_CASE("SSP golden trace: compute 1.0 vs 4.0, s = 3, zero delay") {
  // Hand-simulated. The fast worker is granted through t_0 = 3; at time 4
  // both pushes land together (gap 4 - 1 = 3, both granted); its push at 5
  // makes the gap 4 and defers until the slow worker's push at 8.
  auto r = run_simulation(two_speed(Paradigm::SSP, {3, 0}, 1.0, 4.0, 0.0));
  const std::string golden =
      "1\t0\tcompute_done\t0\t-\n"
      "1\t0\tpush_arrive\t1\tgrant\n"
      "1\t0\tgrant_deliver\t1\t-\n"
      "1\t0\tpull_arrive\t1\t-\n"
      "1\t0\tpull_return\t1\t-\n"
      "2\t0\tcompute_done\t1\t-\n"
      "2\t0\tpush_arrive\t2\tgrant\n"
      "2\t0\tgrant_deliver\t2\t-\n"
      "2\t0\tpull_arrive\t2\t-\n"
      "2\t0\tpull_return\t2\t-\n"
      "3\t0\tcompute_done\t2\t-\n"
      "3\t0\tpush_arrive\t3\tgrant\n"
      "3\t0\tgrant_deliver\t3\t-\n"
      "3\t0\tpull_arrive\t3\t-\n"
      "3\t0\tpull_return\t3\t-\n"
      "4\t1\tcompute_done\t0\t-\n"
      "4\t0\tcompute_done\t3\t-\n"
      "4\t1\tpush_arrive\t1\tgrant\n"
      "4\t0\tpush_arrive\t4\tgrant\n"
      "4\t1\tgrant_deliver\t1\t-\n";
  EventTrace head{2, {r.trace.records.begin(), r.trace.records.begin() + 20}};
  CHECK(format_trace(head) == golden);

  // Every fast-worker defer happens exactly when t_0 - t_1 > 3 and lasts 3 s.
  IterationCount t[2] = {0, 0};
  double deferred_at = -1.0;
  int defers = 0;
  for (const auto& rec : r.trace.records) {
    if (rec.kind == EventKind::PushArrive) {
      t[rec.worker] = rec.t_p;
      if (rec.worker == 0) {
        CHECK((rec.decision == TraceDecision::Defer) == (t[0] - t[1] > 3));
        if (rec.decision == TraceDecision::Defer) {
          deferred_at = rec.time;
          ++defers;
        }
      }
    }
    if (rec.kind == EventKind::Release && rec.worker == 0) {
      CHECK(rec.time - deferred_at == doctest::Approx(3.0));
    }
  }
  CHECK(defers > 5);
  CHECK(r.report.workers[1].wait_s == 0.0);
}

TEST_CASE("DSSP(3, 12) waits no longer than SSP(3) on the same heterogeneous setup") {
  for (double ratio : {1.5, 2.0, 3.0, 4.0}) {
    CAPTURE(ratio);
    auto ssp = run_simulation(two_speed(Paradigm::SSP, {3, 0}, 1.0, ratio, 0.05));
    auto dssp = run_simulation(two_speed(Paradigm::DSSP, {3, 12}, 1.0, ratio, 0.05));
    CHECK(dssp.report.workers[0].wait_s <= ssp.report.workers[0].wait_s);
  }
}

TEST_CASE("identical configs give byte-identical traces") {
  std::mt19937_64 rng(44);
  for (auto p : {Paradigm::BSP, Paradigm::ASP, Paradigm::SSP, Paradigm::DSSP}) {
    auto c = scenario::random_config(rng, p);
    CHECK(format_trace(run_simulation(c).trace) == format_trace(run_simulation(c).trace));
  }
}

TEST_CASE("random configs: no deadlock, invariants hold, summaries match the scan oracle") {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 160; ++i) {
    const auto p = static_cast<Paradigm>(i % 4);
    auto c = scenario::random_config(rng, p, 1, 8);
    CAPTURE(serialize_config(c));
    RunResult r;
    REQUIRE_NOTHROW(r = run_simulation(c));
    const auto scan = oracle::scan_trace(r.trace);

    CHECK(scan.time_monotone);
    CHECK(scan.every_defer_released);
    if (p == Paradigm::BSP) CHECK(scan.max_gap_at_grants <= 1);
    if (p == Paradigm::SSP) CHECK(scan.max_gap_at_grants <= c.staleness.s_lower + 1);
    if (p == Paradigm::DSSP) CHECK(scan.max_gap_at_grants <= c.staleness.s_lower + c.staleness.r_max + 1);

    IterationCount pushes = 0;
    for (WorkerId w = 0; w < static_cast<WorkerId>(c.worker_count); ++w) {
      const auto& m = r.report.workers[w];
      const auto& o = scan.workers[w];
      pushes += m.iterations;
      CHECK(m.compute_s == doctest::Approx(o.compute).epsilon(1e-12));
      CHECK(m.comm_s == doctest::Approx(o.comm).epsilon(1e-12));
      CHECK(m.wait_s == doctest::Approx(o.wait).epsilon(1e-12));
      CHECK(m.elapsed_s == o.end);
      CHECK(std::abs(m.compute_s + m.comm_s + m.wait_s - m.elapsed_s) < 1e-9);
      CHECK(m.epochs == c.epochs);
    }
    CHECK(r.report.updates_applied == static_cast<std::uint64_t>(scan.updates));
    CHECK(r.final_weights.version == r.report.updates_applied);
    CHECK(pushes == scan.updates);
    CHECK(r.report.max_staleness() == scan.max_staleness);
    std::uint64_t mass = 0;
    for (auto n : r.report.staleness_histogram) mass += n;
    CHECK(mass == r.report.updates_applied);
  }
}

TEST_CASE("long random runs (about 10k events each) never deadlock") {
  std::mt19937_64 rng(77);
  for (int i = 0; i < 40; ++i) {
    auto c = scenario::random_config(rng, static_cast<Paradigm>(i % 4), 1, 8);
    c.dataset_size = 1000;
    c.batch_size = 2;
    c.epochs = 3;
    c = validate_config(c);
    CAPTURE(serialize_config(c));
    RunResult r;
    REQUIRE_NOTHROW(r = run_simulation(c));
    CHECK(r.trace.records.size() >= 7000);
    CHECK(oracle::scan_trace(r.trace).every_defer_released);
  }
}

TEST_CASE("staleness_of_update") {
  auto bsp = run_simulation(two_speed(Paradigm::BSP, {0, 0}, 1.0, 2.5, 0.01));
  const auto n = bsp.report.updates_applied;
  for (std::size_t i = 0; i < n; ++i) CHECK(staleness_of_update(bsp.trace, i) <= 1);
  CHECK_THROWS_AS(staleness_of_update(bsp.trace, n), std::out_of_range);

  auto asp = run_simulation(two_speed(Paradigm::ASP, {0, 0}, 1.0, 1.0, 0.0));
  for (std::size_t i = 0; i < asp.report.updates_applied; ++i) CHECK(staleness_of_update(asp.trace, i) >= 0);

  auto dssp = run_simulation(two_speed(Paradigm::DSSP, {3, 12}, 1.0, 4.0, 0.05));
  int worst = 0;
  for (std::size_t i = 0; i < dssp.report.updates_applied; ++i) {
    worst = std::max(worst, staleness_of_update(dssp.trace, i));
  }
  CHECK(worst <= 3 + 12 + 1);
  CHECK(worst == dssp.report.max_staleness());
}

TEST_CASE("simulator refuses threaded configs") {
  ExperimentConfig c;
  c.mode = RunMode::Threaded;
  CHECK_THROWS_AS(run_simulation(validate_config(c)), ConfigError);
}
