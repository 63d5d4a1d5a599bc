#pragma once

#include "rtcx/lifecycle.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace rtcx {

class Executive;

/// One append-only event-log entry: the accepted event, every state change
/// it caused, and the rejection code when the event was refused.
struct LogRecord {
  std::uint64_t seq = 0;
  LifecycleEvent event;
  std::vector<StateChange> changes;
  std::string error;

  bool operator==(const LogRecord&) const = default;
};

std::string to_json_line(const LogRecord& record);
LogRecord log_record_from_json(std::string_view line);

std::string to_text(const std::vector<LogRecord>& records);
std::vector<LogRecord> parse_event_log(std::istream& in);
std::vector<LogRecord> parse_event_log_text(std::string_view text);

/// Re-dispatches the logged events, in order, against a fresh executive.
/// Rejected events are re-submitted too; their errors must reproduce.
/// Returns the fresh executive's log for comparison with the original.
std::vector<LogRecord> replay_event_log(const std::vector<LogRecord>& records, Executive& fresh);

}  // namespace rtcx
