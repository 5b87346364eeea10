#pragma once

#include <algorithm>
#include <cctype>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "pmsim/money.hpp"
#include "pmsim/rng.hpp"

namespace pmsim {

// Cross-cycle memory for agents: notes, beliefs, and plans, isolated per
// agent namespace, with hard size limits to keep context bounded.

enum class NoteKind { Note, Belief, Plan };

inline const char* to_string(NoteKind k) {
  switch (k) {
    case NoteKind::Note: return "note";
    case NoteKind::Belief: return "belief";
    case NoteKind::Plan: return "plan";
  }
  return "?";
}

inline NoteKind note_kind_from_string(const std::string& s) {
  if (s == "note") return NoteKind::Note;
  if (s == "belief") return NoteKind::Belief;
  if (s == "plan") return NoteKind::Plan;
  throw ValidationError("unknown note kind: " + s);
}

struct NoteLimitError : ValidationError {
  using ValidationError::ValidationError;
};

struct Note {
  std::string key;
  std::string body;
  NoteKind kind = NoteKind::Note;
  std::int64_t updated_seq = 0;
};

struct NoteLimits {
  std::size_t max_body_bytes = 10'240;
  std::size_t max_notes_per_agent = 100;
};

class KnowledgeStore {
public:
  static constexpr std::size_t kMaxBodyBytes = 10'240;
  static constexpr std::size_t kMaxNotesPerAgent = 100;

  explicit KnowledgeStore(NoteLimits limits = {}) : limits_(limits) {}

  void put(const std::string& agent_id, const std::string& key,
           const std::string& body, NoteKind kind = NoteKind::Note) {
    check_body(body);
    auto& shelf = shelves_[agent_id];
    auto it = shelf.find(key);
    if (it == shelf.end() && shelf.size() >= limits_.max_notes_per_agent)
      throw NoteLimitError("note cap reached: " +
                           std::to_string(limits_.max_notes_per_agent) +
                           " notes per agent");
    Note& n = shelf[key];
    n.key = key;
    n.body = body;
    n.kind = kind;
    n.updated_seq = ++seq_;
  }

  void edit(const std::string& agent_id, const std::string& key,
            const std::string& body) {
    check_body(body);
    auto shelf = shelves_.find(agent_id);
    if (shelf == shelves_.end() || !shelf->second.count(key))
      throw ValidationError("edit: no such note: " + key);
    Note& n = shelf->second[key];
    n.body = body;
    n.updated_seq = ++seq_;
  }

  // Case-insensitive substring match over keys and bodies, most recently
  // touched first.
  std::vector<Note> search(const std::string& agent_id,
                           const std::string& query) const {
    std::vector<Note> hits;
    auto shelf = shelves_.find(agent_id);
    if (shelf == shelves_.end()) return hits;
    std::string q = lower(query);
    for (const auto& [key, note] : shelf->second) {
      if (q.empty() || lower(note.key).find(q) != std::string::npos ||
          lower(note.body).find(q) != std::string::npos)
        hits.push_back(note);
    }
    std::sort(hits.begin(), hits.end(), [](const Note& a, const Note& b) {
      return a.updated_seq > b.updated_seq;
    });
    return hits;
  }

  std::size_t count(const std::string& agent_id) const {
    auto shelf = shelves_.find(agent_id);
    return shelf == shelves_.end() ? 0 : shelf->second.size();
  }

private:
  void check_body(const std::string& body) const {
    if (body.size() > limits_.max_body_bytes)
      throw NoteLimitError("note body exceeds limit of " +
                           std::to_string(limits_.max_body_bytes) + " bytes");
  }

  static std::string lower(std::string s) {
    for (char& c : s)
      c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
  }

  NoteLimits limits_;
  std::map<std::string, std::map<std::string, Note>> shelves_;
  std::int64_t seq_ = 0;
};

// Offline stand-in for the shared web-search tool: a canned, seeded corpus
// mapping queries to snippets. Same (seed, query) always returns the same
// snippet.
class ResearchProvider {
public:
  explicit ResearchProvider(std::uint64_t seed) : seed_(seed) {}

  std::string research(const std::string& query) const {
    static const char* kTemplates[] = {
        "Consensus forecasts lean toward the stated threshold holding",
        "Recent data releases point modestly against the event",
        "Coverage is mixed; base rates suggest no strong edge",
        "Primary sources indicate elevated odds of the event",
        "Historical frequency for comparable events is low",
        "Expert commentary is split with a slight bullish tilt",
    };
    std::uint64_t h = mix_seed(seed_, fnv1a64(query));
    const char* t = kTemplates[h % (sizeof(kTemplates) / sizeof(*kTemplates))];
    return std::string(t) + " [ref " + std::to_string(h % 100000) + "] re: " + query;
  }

private:
  std::uint64_t seed_;
};

} // namespace pmsim
