#include "rtcx/event_log.hpp"

#include "rtcx/executive.hpp"

#include <json.hpp>

#include <sstream>

namespace rtcx {

namespace {

using json = nlohmann::ordered_json;

json event_to_json(const LifecycleEvent& e) {
  json j;
  j["kind"] = std::string(to_string(e.kind));
  j["subject"] = e.subject;
  j["name"] = e.subject_name;
  if (e.kind == EventKind::Install) j["descriptor"] = e.descriptor_xml;
  if (e.kind == EventKind::SetProperty) {
    j["property"] = e.property;
    j["value"] = e.value;
  }
  return j;
}

LifecycleEvent event_from_json(const json& j) {
  LifecycleEvent e;
  auto kind = event_kind_from(j.at("kind").get<std::string>());
  if (!kind) throw std::invalid_argument("unknown event kind in log: " + j.dump());
  e.kind = *kind;
  e.subject = j.value("subject", kNoHandle);
  e.subject_name = j.value("name", std::string{});
  e.descriptor_xml = j.value("descriptor", std::string{});
  e.property = j.value("property", std::string{});
  e.value = j.value("value", std::string{});
  return e;
}

json change_to_json(const StateChange& c) {
  json j;
  j["id"] = c.id;
  j["name"] = c.name;
  j["from"] = std::string(to_string(c.from));
  j["to"] = std::string(to_string(c.to));
  j["reason"] = c.reason;
  return j;
}

StateChange change_from_json(const json& j) {
  StateChange c;
  c.id = j.at("id").get<Handle>();
  c.name = j.at("name").get<std::string>();
  auto from = lifecycle_state_from(j.at("from").get<std::string>());
  auto to = lifecycle_state_from(j.at("to").get<std::string>());
  if (!from || !to) throw std::invalid_argument("unknown state in log: " + j.dump());
  c.from = *from;
  c.to = *to;
  c.reason = j.value("reason", std::string{});
  return c;
}

}  // namespace

std::string to_json_line(const LogRecord& record) {
  json j;
  j["seq"] = record.seq;
  j["event"] = event_to_json(record.event);
  json changes = json::array();
  for (const auto& c : record.changes) changes.push_back(change_to_json(c));
  j["changes"] = std::move(changes);
  if (!record.error.empty()) j["error"] = record.error;
  return j.dump();
}

LogRecord log_record_from_json(std::string_view line) {
  const json j = json::parse(line);
  LogRecord record;
  record.seq = j.at("seq").get<std::uint64_t>();
  record.event = event_from_json(j.at("event"));
  record.event.sequence_no = record.seq;
  for (const auto& c : j.at("changes")) record.changes.push_back(change_from_json(c));
  record.error = j.value("error", std::string{});
  return record;
}

std::string to_text(const std::vector<LogRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += to_json_line(r);
    out += '\n';
  }
  return out;
}

std::vector<LogRecord> parse_event_log(std::istream& in) {
  std::vector<LogRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    records.push_back(log_record_from_json(line));
  }
  return records;
}

std::vector<LogRecord> parse_event_log_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_event_log(in);
}

std::vector<LogRecord> replay_event_log(const std::vector<LogRecord>& records,
                                        Executive& fresh) {
  for (const auto& record : records) {
    LifecycleEvent e = record.event;
    e.sequence_no = 0;  // the fresh executive assigns its own sequence
    try {
      fresh.dispatch(e);
    } catch (const ExecError&) {
      // Rejected in the original run too; the log comparison verifies it.
    }
  }
  return fresh.log_snapshot();
}

}  // namespace rtcx
