#include "dssp/trace.hpp"

#include <array>
#include <charconv>
#include <sstream>

namespace dssp {

namespace {

constexpr std::array<std::string_view, 7> kKindNames = {
    "compute_done", "push_arrive", "grant_deliver", "pull_arrive", "pull_return", "release", "retire"};
constexpr std::array<std::string_view, 3> kDecisionNames = {"-", "grant", "defer"};

}  // namespace

std::string_view to_string(EventKind k) { return kKindNames[static_cast<std::size_t>(k)]; }
std::string_view to_string(TraceDecision d) { return kDecisionNames[static_cast<std::size_t>(d)]; }

std::string format_trace(const EventTrace& trace) {
  std::string out;
  out.reserve(trace.records.size() * 40);
  for (const auto& r : trace.records) {
    out += format_double(r.time);
    out += '\t';
    out += std::to_string(r.worker);
    out += '\t';
    out += to_string(r.kind);
    out += '\t';
    out += std::to_string(r.t_p);
    out += '\t';
    out += to_string(r.decision);
    out += '\n';
  }
  return out;
}

EventTrace parse_trace(std::string_view text, int worker_count) {
  EventTrace trace;
  trace.worker_count = worker_count;
  std::istringstream in{std::string(text)};
  for (std::string line; std::getline(in, line);) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string time, worker, kind, t_p, decision;
    if (!std::getline(fields, time, '\t') || !std::getline(fields, worker, '\t') ||
        !std::getline(fields, kind, '\t') || !std::getline(fields, t_p, '\t') ||
        !std::getline(fields, decision, '\t')) {
      throw std::invalid_argument("malformed trace line: " + line);
    }
    TraceRecord r;
    std::from_chars(time.data(), time.data() + time.size(), r.time);
    r.worker = static_cast<WorkerId>(std::stoul(worker));
    r.t_p = std::stoll(t_p);
    bool found = false;
    for (std::size_t i = 0; i < kKindNames.size(); ++i) {
      if (kind == kKindNames[i]) {
        r.kind = static_cast<EventKind>(i);
        found = true;
      }
    }
    if (!found) throw std::invalid_argument("unknown event kind: " + kind);
    found = false;
    for (std::size_t i = 0; i < kDecisionNames.size(); ++i) {
      if (decision == kDecisionNames[i]) {
        r.decision = static_cast<TraceDecision>(i);
        found = true;
      }
    }
    if (!found) throw std::invalid_argument("unknown decision: " + decision);
    trace.records.push_back(r);
  }
  return trace;
}

}  // namespace dssp
