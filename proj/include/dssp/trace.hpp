#ifndef DSSP_TRACE_HPP_
#define DSSP_TRACE_HPP_

#include <string>
#include <string_view>
#include <vector>

#include "dssp/core.hpp"

namespace dssp {

/// Worker-loop events plus two server-side markers: Release (a deferred
/// worker got its OK) and Retire (a worker made its final push).
enum class EventKind { ComputeDone, PushArrive, GrantDeliver, PullArrive, PullReturn, Release, Retire };
enum class TraceDecision { None, Grant, Defer };

std::string_view to_string(EventKind k);
std::string_view to_string(TraceDecision d);

struct TraceRecord {
  Timestamp time = 0.0;
  WorkerId worker = 0;
  EventKind kind = EventKind::ComputeDone;
  IterationCount t_p = 0;  // worker's push count at that instant
  TraceDecision decision = TraceDecision::None;

  bool operator==(const TraceRecord&) const = default;
};

struct EventTrace {
  int worker_count = 0;
  std::vector<TraceRecord> records;
};

/// `time<TAB>worker<TAB>kind<TAB>t_p<TAB>decision`, one record per line.
/// Time uses the shortest text form that round-trips.
std::string format_trace(const EventTrace& trace);
EventTrace parse_trace(std::string_view text, int worker_count);

}  // namespace dssp

#endif  // DSSP_TRACE_HPP_
