#include <doctest.h>

#include <sstream>

#include "dssp/metrics.hpp"
#include "dssp/simnet.hpp"

using namespace dssp;

TEST_CASE("regret of optimal play is zero") {
  std::vector<double> f(50, 0.75);
  auto r = compute_regret(f, 0.75, ModelKind::LogisticRegression);
  for (std::size_t t = 0; t < f.size(); ++t) {
    CHECK(r.cumulative[t] == 0.0);
    CHECK(r.average[t] == 0.0);
  }
}

TEST_CASE("constant excess gives linear regret and a flat average") {
  std::vector<double> f(40, 1.25);
  auto r = compute_regret(f, 1.0, ModelKind::LinearRegression);
  for (std::size_t t = 0; t < f.size(); ++t) {
    CHECK(r.cumulative[t] == doctest::Approx(0.25 * static_cast<double>(t + 1)));
    CHECK(r.average[t] == doctest::Approx(0.25));
  }
}

TEST_CASE("regret refuses the MLP") {
  std::vector<double> f{1.0};
  CHECK_THROWS(compute_regret(f, 0.0, ModelKind::TinyMLP));
  auto data = make_dataset(ModelKind::TinyMLP, 16, 2, 2, 0.0, 1);
  CHECK_THROWS(solve_reference_optimum(Model(ModelKind::TinyMLP, 2, 2), data));
}

TEST_CASE("reference optimum reaches the gradient tolerance") {
  auto lin = make_dataset(ModelKind::LinearRegression, 256, 6, 1, 0.0, 3);
  auto sol = solve_reference_optimum(Model(ModelKind::LinearRegression, 6, 1), lin);
  CHECK(sol.gradient_norm < 1e-10);
  CHECK(sol.loss < 1e-18);
  for (std::size_t i = 0; i < 6; ++i) CHECK(sol.weights[i] == doctest::Approx(lin.truth[i]).epsilon(1e-8));

  auto logit = make_dataset(ModelKind::LogisticRegression, 512, 4, 1, 0.0, 3);
  Model m(ModelKind::LogisticRegression, 4, 1);
  auto opt = solve_reference_optimum(m, logit);
  CHECK(opt.gradient_norm < 1e-10);
  CHECK(opt.loss <= m.loss(logit.truth, logit.examples));
}

TEST_CASE("empty trace summarizes to zeros") {
  EventTrace t;
  t.worker_count = 3;
  auto r = summarize(t, Paradigm::SSP, {});
  REQUIRE(r.workers.size() == 3);
  for (const auto& w : r.workers) {
    CHECK(w.wait_s == 0.0);
    CHECK(w.compute_s == 0.0);
    CHECK(w.comm_s == 0.0);
    CHECK(w.iterations == 0);
  }
  CHECK(r.updates_applied == 0);
  CHECK(r.duration_s == 0.0);
  CHECK(r.max_staleness() == -1);
  CHECK_FALSE(r.time_to_target);
}

TEST_CASE("summarize splits time into compute, communication and waiting") {
  EventTrace t;
  t.worker_count = 1;
  t.records = {
      {1.0, 0, EventKind::ComputeDone, 0, TraceDecision::None},
      {1.5, 0, EventKind::PushArrive, 1, TraceDecision::Defer},
      {4.0, 0, EventKind::Release, 1, TraceDecision::None},
      {4.5, 0, EventKind::GrantDeliver, 1, TraceDecision::None},
      {5.0, 0, EventKind::PullArrive, 1, TraceDecision::None},
      {5.5, 0, EventKind::PullReturn, 1, TraceDecision::None},
  };
  auto r = summarize(t, Paradigm::SSP, {});
  CHECK(r.workers[0].compute_s == 1.0);
  CHECK(r.workers[0].comm_s == 2.0);
  CHECK(r.workers[0].wait_s == 2.5);
  CHECK(r.workers[0].elapsed_s == 5.5);
  CHECK(r.workers[0].iterations == 1);
  CHECK(r.updates_applied == 1);
}

TEST_CASE("BSP on a symmetric setup gives every worker the same wait") {
  ExperimentConfig c;
  c.paradigm = Paradigm::BSP;
  c.worker_count = 4;
  c.timing.preset = "homogeneous";
  c.timing.comm_delay = Distribution::constant(0.05);
  c.epochs = 2;
  auto r = run_simulation(validate_config(c));
  for (const auto& w : r.report.workers) {
    CHECK(w.wait_s == doctest::Approx(r.report.workers[0].wait_s).epsilon(1e-12));
    CHECK(w.elapsed_s == doctest::Approx(r.report.workers[0].elapsed_s).epsilon(1e-12));
  }
}

TEST_CASE("loss tracker samples every k updates and finds the target") {
  auto data = make_dataset(ModelKind::QuadraticBowl, 4, 1, 1, 0.0, 1);
  Model bowl(ModelKind::QuadraticBowl, 1, 1, {0.0});
  LossTracker tracker(bowl, data, 3, 0.1);
  WeightVector w{{1.0}, 0};
  tracker.observe(w, 0.0);
  for (int k = 1; k <= 10; ++k) {
    w = WeightVector{{1.0 / (k + 1)}, static_cast<std::uint64_t>(k)};
    tracker.observe(w, k * 0.5);
  }
  auto obs = tracker.finish(w, {1});
  REQUIRE(obs.curve.size() == 4);
  CHECK(obs.curve[0].update == 0);
  CHECK(obs.curve[1].update == 3);
  CHECK(obs.curve[3].update == 9);
  EventTrace empty;
  empty.worker_count = 1;
  auto report = summarize(empty, Paradigm::ASP, obs);
  REQUIRE(report.time_to_target);
  // loss at update 3 is 0.5 * 0.25^2 = 0.03125 < 0.1
  CHECK(*report.time_to_target == 1.5);
  CHECK(*report.updates_to_target == 3);
  CHECK(report.final_loss == doctest::Approx(0.5 / 121.0));
}

TEST_CASE("report CSV layout") {
  MetricsReport r;
  r.paradigm = Paradigm::DSSP;
  r.workers.resize(2);
  r.workers[0] = {0, 1.5, 10.0, 0.25, 11.75, 7, 1};
  r.workers[1] = {1, 0.0, 20.0, 0.5, 20.5, 5, 1};
  r.updates_applied = 12;
  r.staleness_histogram = {5, 4, 3};
  r.final_loss = 0.125;
  r.time_to_target = 3.5;
  const std::string expected =
      "paradigm,worker,iterations,epochs,wait_s,compute_s,comm_s,updates_total,max_staleness,"
      "time_to_target_s,final_loss\n"
      "dssp,0,7,1,1.500000,10.000000,0.250000,12,2,3.500000,0.125\n"
      "dssp,1,5,1,0.000000,20.000000,0.500000,12,2,3.500000,0.125\n"
      "dssp,all,12,2,1.500000,30.000000,0.750000,12,2,3.500000,0.125\n";
  CHECK(format_report_csv(r) == expected);
  CHECK(format_report_csv(r).rfind(report_csv_header(), 0) == 0);
}
