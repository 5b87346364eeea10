#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pmsim/money.hpp"

namespace pmsim {

using json = nlohmann::json;

// Append-only, line-delimited event log. One JSON object per line with a
// stable field order (keys are sorted on dump), so identical runs produce
// byte-identical files. The first line is a file header carrying the schema
// version and run parameters; every following line is an EventRecord.

inline constexpr int kLogVersion = 1;

enum class EventKind {
  QuoteUpdate,
  Settlement,
  Context,
  Verdict,
  Execution,
  LedgerDelta,
  Note,
  Snapshot,
  AgentError,
};

inline const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::QuoteUpdate: return "QuoteUpdate";
    case EventKind::Settlement: return "Settlement";
    case EventKind::Context: return "Context";
    case EventKind::Verdict: return "Verdict";
    case EventKind::Execution: return "Execution";
    case EventKind::LedgerDelta: return "LedgerDelta";
    case EventKind::Note: return "Note";
    case EventKind::Snapshot: return "Snapshot";
    case EventKind::AgentError: return "AgentError";
  }
  return "?";
}

inline EventKind event_kind_from_string(const std::string& s) {
  for (EventKind k :
       {EventKind::QuoteUpdate, EventKind::Settlement, EventKind::Context,
        EventKind::Verdict, EventKind::Execution, EventKind::LedgerDelta,
        EventKind::Note, EventKind::Snapshot, EventKind::AgentError})
    if (s == to_string(k)) return k;
  throw ValidationError("unknown event kind: " + s);
}

struct EventRecord {
  std::int64_t seq = 0; // strictly increasing
  std::int64_t cycle_index = -1;
  EventKind kind = EventKind::Note;
  std::optional<std::string> agent_id;
  json payload;
};

inline void to_json(json& j, const EventRecord& e) {
  j = json{{"seq", e.seq},
           {"cycle", e.cycle_index},
           {"kind", to_string(e.kind)},
           {"payload", e.payload}};
  if (e.agent_id) j["agent_id"] = *e.agent_id;
}

inline void from_json(const json& j, EventRecord& e) {
  j.at("seq").get_to(e.seq);
  j.at("cycle").get_to(e.cycle_index);
  e.kind = event_kind_from_string(j.at("kind").get<std::string>());
  e.payload = j.at("payload");
  if (j.contains("agent_id"))
    e.agent_id = j.at("agent_id").get<std::string>();
  else
    e.agent_id.reset();
}

struct LogError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class EventLogWriter {
public:
  // header: run parameters needed to interpret the log without re-simulating
  explicit EventLogWriter(std::ostream& out, json header_extra = {}) : out_(&out) {
    json header{{"format", "pmsim-log"}, {"version", kLogVersion}};
    if (header_extra.is_object())
      for (auto& [k, v] : header_extra.items()) header[k] = v;
    (*out_) << header.dump() << '\n';
  }

  std::int64_t append(EventKind kind, std::int64_t cycle,
                      std::optional<std::string> agent_id, json payload) {
    EventRecord e;
    e.seq = next_seq_++;
    e.cycle_index = cycle;
    e.kind = kind;
    e.agent_id = std::move(agent_id);
    e.payload = std::move(payload);
    (*out_) << json(e).dump() << '\n';
    return e.seq;
  }

  std::int64_t next_seq() const { return next_seq_; }

private:
  std::ostream* out_;
  std::int64_t next_seq_ = 0;
};

struct LogContents {
  int version = 0;
  json header;
  std::vector<EventRecord> events;
  bool truncated_tail = false; // final partial line was dropped
};

// A malformed final line is tolerated (dropped, flagged); a malformed
// interior line is a hard error naming the line number.
inline LogContents parse_log(std::istream& in) {
  LogContents lc;
  std::string line;
  std::vector<std::pair<std::size_t, std::string>> raw;
  std::size_t lineno = 0;
  bool header_done = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!header_done) {
      json h;
      try {
        h = json::parse(line);
      } catch (const json::exception&) {
        throw LogError("log line 1: malformed header");
      }
      if (h.value("format", "") != "pmsim-log")
        throw LogError("log line 1: not an event log");
      lc.version = h.value("version", -1);
      lc.header = std::move(h);
      header_done = true;
      continue;
    }
    raw.emplace_back(lineno, line);
  }
  if (!header_done) {
    lc.version = kLogVersion; // empty file: nothing to read
    return lc;
  }
  for (std::size_t i = 0; i < raw.size(); ++i) {
    try {
      json j = json::parse(raw[i].second);
      lc.events.push_back(j.get<EventRecord>());
    } catch (const std::exception&) {
      if (i + 1 == raw.size()) { // truncated tail: stop before it
        lc.truncated_tail = true;
        break;
      }
      throw LogError("log line " + std::to_string(raw[i].first) +
                     ": malformed record");
    }
  }
  std::int64_t prev = -1;
  for (const EventRecord& e : lc.events) {
    if (e.seq <= prev)
      throw LogError("log: seq not strictly increasing at seq " +
                     std::to_string(e.seq));
    prev = e.seq;
  }
  return lc;
}

inline LogContents read_log(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw LogError("cannot open log: " + path);
  return parse_log(f);
}

} // namespace pmsim
