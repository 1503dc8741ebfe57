#include "dssp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace dssp {

LossTracker::LossTracker(const Model& model, const Dataset& data, int every, double target)
    : model_(model), data_(data), every_(every) {
  obs_.target = target;
}

void LossTracker::observe(const WeightVector& weights, Timestamp now) {
  if (every_ <= 0) return;
  const std::uint64_t bucket = weights.version / static_cast<std::uint64_t>(every_);
  if (bucket == last_bucket_ && !(weights.version == 0 && obs_.curve.empty())) return;
  last_bucket_ = bucket;
  obs_.curve.push_back({weights.version, now, model_.loss(weights.values, data_.examples)});
}

LossObservations LossTracker::finish(const WeightVector& final_weights, std::vector<int> epochs) {
  obs_.final_loss = model_.loss(final_weights.values, data_.examples);
  obs_.epochs = std::move(epochs);
  return obs_;
}

MetricsReport summarize(const EventTrace& trace, Paradigm paradigm, const LossObservations& losses) {
  MetricsReport report;
  report.paradigm = paradigm;
  const auto p = static_cast<std::size_t>(trace.worker_count);
  report.workers.resize(p);
  for (std::size_t w = 0; w < p; ++w) {
    report.workers[w].worker = static_cast<WorkerId>(w);
    if (w < losses.epochs.size()) report.workers[w].epochs = losses.epochs[w];
  }

  std::vector<double> segment_start(p, 0.0);
  std::vector<IterationCount> clocks(p, 0);
  IterationCount frontier = 0;

  for (const auto& r : trace.records) {
    if (r.worker >= p) throw std::invalid_argument("trace names an unknown worker");
    auto& m = report.workers[r.worker];
    const double span = r.time - segment_start[r.worker];
    switch (r.kind) {
      case EventKind::ComputeDone:
        m.compute_s += span;
        break;
      case EventKind::PushArrive: {
        m.comm_s += span;
        clocks[r.worker] = r.t_p;
        frontier = std::max(frontier, r.t_p);
        const auto staleness = static_cast<std::size_t>(frontier - r.t_p);
        if (report.staleness_histogram.size() <= staleness) {
          report.staleness_histogram.resize(staleness + 1, 0);
        }
        ++report.staleness_histogram[staleness];
        ++report.updates_applied;
        break;
      }
      case EventKind::Release:
        m.wait_s += span;
        break;
      case EventKind::GrantDeliver:
      case EventKind::PullArrive:
        m.comm_s += span;
        break;
      case EventKind::PullReturn:
        m.comm_s += span;
        ++m.iterations;
        break;
      case EventKind::Retire:
        continue;  // bookkeeping only, takes no time
    }
    segment_start[r.worker] = r.time;
    report.duration_s = std::max(report.duration_s, r.time);
  }
  for (std::size_t w = 0; w < p; ++w) report.workers[w].elapsed_s = segment_start[w];

  report.loss_curve = losses.curve;
  report.update_losses = losses.update_losses;
  report.final_loss = losses.final_loss;
  if (losses.target > 0.0) {
    for (const auto& s : losses.curve) {
      if (s.loss < losses.target) {
        report.time_to_target = s.time;
        report.updates_to_target = s.update;
        break;
      }
    }
  }
  return report;
}

std::string report_csv_header() {
  return "paradigm,worker,iterations,epochs,wait_s,compute_s,comm_s,updates_total,max_staleness,"
         "time_to_target_s,final_loss\n";
}

namespace {

std::string fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string general(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

std::string format_report_csv(const MetricsReport& report) {
  std::string out = report_csv_header();
  const std::string paradigm(to_string(report.paradigm));
  const std::string tail = "," + std::to_string(report.updates_applied) + "," +
                           std::to_string(std::max(report.max_staleness(), 0)) + "," +
                           (report.time_to_target ? fixed(*report.time_to_target) : "NA") + "," +
                           general(report.final_loss) + "\n";
  WorkerMetrics all;
  for (const auto& m : report.workers) {
    out += paradigm + "," + std::to_string(m.worker) + "," + std::to_string(m.iterations) + "," +
           std::to_string(m.epochs) + "," + fixed(m.wait_s) + "," + fixed(m.compute_s) + "," +
           fixed(m.comm_s) + tail;
    all.iterations += m.iterations;
    all.epochs += m.epochs;
    all.wait_s += m.wait_s;
    all.compute_s += m.compute_s;
    all.comm_s += m.comm_s;
  }
  out += paradigm + ",all," + std::to_string(all.iterations) + "," + std::to_string(all.epochs) + "," +
         fixed(all.wait_s) + "," + fixed(all.compute_s) + "," + fixed(all.comm_s) + tail;
  return out;
}

RegretCurve compute_regret(std::span<const double> losses, double reference_optimum, ModelKind kind) {
  if (kind == ModelKind::TinyMLP) {
    throw std::invalid_argument("regret is only defined for convex model kinds");
  }
  RegretCurve curve;
  curve.cumulative.reserve(losses.size());
  curve.average.reserve(losses.size());
  double sum = 0.0;
  for (std::size_t t = 0; t < losses.size(); ++t) {
    sum += losses[t] - reference_optimum;
    curve.cumulative.push_back(sum);
    curve.average.push_back(sum / static_cast<double>(t + 1));
  }
  return curve;
}

ReferenceSolution solve_reference_optimum(const Model& model, const Dataset& data, double tolerance,
                                          std::uint64_t max_iterations) {
  if (model.kind() == ModelKind::TinyMLP) {
    throw std::invalid_argument("reference optimum requires a convex model");
  }
  const std::size_t d = model.dimension();

  // Curvature bound from the top eigenvalue of the mean outer product,
  // estimated by power iteration.
  double curvature = 1.0;
  if (model.kind() != ModelKind::QuadraticBowl) {
    std::vector<double> v(d, 1.0 / std::sqrt(static_cast<double>(d)));
    std::vector<double> next(d);
    double lambda = 0.0;
    for (int it = 0; it < 100; ++it) {
      std::fill(next.begin(), next.end(), 0.0);
      for (const auto& ex : data.examples) {
        const double proj = std::inner_product(ex.x.begin(), ex.x.end(), v.begin(), 0.0);
        for (std::size_t i = 0; i < d; ++i) next[i] += proj * ex.x[i];
      }
      for (auto& x : next) x /= static_cast<double>(data.examples.size());
      lambda = std::sqrt(std::inner_product(next.begin(), next.end(), next.begin(), 0.0));
      if (lambda == 0.0) break;
      for (std::size_t i = 0; i < d; ++i) v[i] = next[i] / lambda;
    }
    curvature = model.kind() == ModelKind::LogisticRegression ? lambda / 4.0 : lambda;
    curvature = std::max(curvature * 1.05, 1e-12);
  }
  const double step = 1.0 / curvature;

  ReferenceSolution sol;
  sol.weights.assign(d, 0.0);
  std::vector<double> grad;
  for (; sol.iterations < max_iterations; ++sol.iterations) {
    sol.loss = model.loss_and_gradient(sol.weights, data.examples, grad);
    sol.gradient_norm = std::sqrt(std::inner_product(grad.begin(), grad.end(), grad.begin(), 0.0));
    if (sol.gradient_norm < tolerance) break;
    for (std::size_t i = 0; i < d; ++i) sol.weights[i] -= step * grad[i];
  }
  sol.loss = model.loss_and_gradient(sol.weights, data.examples, grad);
  return sol;
}

}  // namespace dssp
