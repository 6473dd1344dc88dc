#pragma once

// Interactive LMC sessions. Commands on one session run strictly one at a
// time in arrival order (a ticket queue); `run` gives up its turn between
// instructions so that input can be supplied while it is in progress.

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tmw/error.hpp"
#include "tmw/exec/trace_io.hpp"
#include "tmw/lmc/assembler.hpp"
#include "tmw/lmc/tm_engine.hpp"

namespace tmw::service {

using nlohmann::json;

enum class Mode { idle, running, awaiting_input, halted, faulted };

inline const char* to_string(Mode m) noexcept {
  switch (m) {
    case Mode::idle: return "idle";
    case Mode::running: return "running";
    case Mode::awaiting_input: return "awaiting_input";
    case Mode::halted: return "halted";
    case Mode::faulted: return "faulted";
  }
  return "?";
}

class SessionError : public Error {
 public:
  enum class Kind { not_found, conflict, capacity, invalid };

  SessionError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

struct ServiceConfig {
  std::size_t max_sessions = 64;
  std::chrono::seconds idle_timeout{30 * 60};
  long default_max_steps = 10000;
  int retry_after_seconds = 30;
};

struct Message {
  std::uint64_t seq = 0;
  std::string type;  // delta, occurrence or mode
  json payload;
};

inline json to_json(const Message& m) { return json{{"seq", m.seq}, {"type", m.type}, {"payload", m.payload}}; }

// Changed snapshot fields only; changed mailboxes as {"index": value}.
inline json snapshot_delta(const json& before, const json& after) {
  json delta = json::object();
  for (auto it = after.begin(); it != after.end(); ++it) {
    if (it.key() == "mailboxes") {
      json cells = json::object();
      const auto& old = before.contains("mailboxes") ? before["mailboxes"] : json::array();
      for (std::size_t i = 0; i < it->size(); ++i) {
        if (i >= old.size() || old[i] != (*it)[i]) cells[std::to_string(i)] = (*it)[i];
      }
      if (!cells.empty()) delta["mailboxes"] = std::move(cells);
    } else if (!before.contains(it.key()) || before[it.key()] != *it) {
      delta[it.key()] = *it;
    }
  }
  return delta;
}

inline json apply_delta(json snapshot, const json& delta) {
  for (auto it = delta.begin(); it != delta.end(); ++it) {
    if (it.key() == "mailboxes") {
      for (auto cell = it->begin(); cell != it->end(); ++cell) {
        snapshot["mailboxes"][std::stoul(cell.key())] = *cell;
      }
    } else {
      snapshot[it.key()] = *it;
    }
  }
  return snapshot;
}

struct LoadResult {
  bool ok = false;
  lmc::ObjectImage image;
  std::vector<lmc::Diagnostic> diagnostics;
};

struct StepOutcome {
  Mode mode = Mode::idle;
  json delta = json::object();
  std::vector<events::EventOccurrence> occurrences;
  exec::ActionTrace records;
  std::optional<std::string> fault;
};

struct RunOutcome {
  Mode mode = Mode::idle;
  long steps = 0;
  bool steps_exhausted = false;
  std::vector<events::EventOccurrence> occurrences;
  std::optional<std::string> fault;
};

inline std::string random_session_id() {
  static std::mutex m;
  static std::random_device device;
  std::lock_guard lock(m);
  std::uniform_int_distribution<std::uint32_t> dist;
  static const char* hex = "0123456789abcdef";
  std::string id;
  for (int word = 0; word < 4; ++word) {
    auto bits = dist(device);
    for (int i = 0; i < 8; ++i, bits >>= 4) id += hex[bits & 0xF];
  }
  return id;
}

class SessionManager {
 public:
  using Clock = std::chrono::steady_clock;
  using Now = std::function<Clock::time_point()>;

  explicit SessionManager(ServiceConfig config = {}, Now now = Clock::now)
      : config_(config), now_(std::move(now)), defs_(lmc::lmc_event_defs()) {}

  const ServiceConfig& config() const noexcept { return config_; }

  std::string create() {
    std::lock_guard lock(mutex_);
    sweep_locked();
    if (sessions_.size() >= config_.max_sessions) {
      throw SessionError(SessionError::Kind::capacity, "session limit of " + std::to_string(config_.max_sessions) +
                                                           " reached; retry in " +
                                                           std::to_string(config_.retry_after_seconds) + " s");
    }
    auto s = std::make_shared<Session>();
    do {
      s->id = random_session_id();
    } while (sessions_.contains(s->id));
    s->created = s->touched = now_();
    s->machine.emplace(lmc::LmcState{}, lmc::StarvationPolicy::pause);
    s->snapshot = lmc::snapshot_to_json(s->machine->state());
    sessions_[s->id] = s;
    return s->id;
  }

  std::size_t size() {
    std::lock_guard lock(mutex_);
    sweep_locked();
    return sessions_.size();
  }

  LoadResult load_source(const std::string& id, std::string_view source) {
    auto s = find(id);
    Turn turn(*s);
    require_not_running(*s);
    LoadResult result;
    try {
      result.image = lmc::assemble_text(source);
    } catch (const lmc::AssemblyError& e) {
      result.diagnostics = e.diagnostics();
      return result;
    }
    install(*s, result.image);
    result.ok = true;
    return result;
  }

  LoadResult load_image(const std::string& id, lmc::ObjectImage image) {
    auto s = find(id);
    Turn turn(*s);
    require_not_running(*s);
    install(*s, image);
    return LoadResult{true, std::move(image), {}};
  }

  StepOutcome step(const std::string& id) {
    auto s = find(id);
    Turn turn(*s);
    require_steppable(*s);
    return step_locked(*s);
  }

  void provide_input(const std::string& id, int value) {
    if (!lmc::is_cell(value)) {
      throw SessionError(SessionError::Kind::invalid, "input value " + std::to_string(value) + " outside 0-999");
    }
    auto s = find(id);
    Turn turn(*s);
    s->machine->provide_input(value);
    publish_snapshot(*s);
  }

  RunOutcome run(const std::string& id, std::optional<long> max_steps = std::nullopt) {
    const long limit = max_steps.value_or(config_.default_max_steps);
    if (limit < 0) throw SessionError(SessionError::Kind::invalid, "max_steps must be non-negative");
    auto s = find(id);
    RunOutcome out;
    {
      Turn turn(*s);
      require_steppable(*s);
      set_mode(*s, Mode::running);
    }
    try {
      while (true) {
        Turn turn(*s);
        if (out.steps >= limit) {
          out.steps_exhausted = true;
          set_mode(*s, Mode::idle);
          out.mode = Mode::idle;
          break;
        }
        auto st = step_locked(*s, true);
        ++out.steps;
        out.occurrences.insert(out.occurrences.end(), st.occurrences.begin(), st.occurrences.end());
        if (st.mode != Mode::running) {
          out.mode = st.mode;
          out.fault = st.fault;
          if (st.mode == Mode::awaiting_input) --out.steps;
          break;
        }
      }
    } catch (...) {
      Turn turn(*s);
      if (s->mode == Mode::running) set_mode(*s, Mode::idle);
      throw;
    }
    return out;
  }

  json state(const std::string& id) {
    auto s = find(id);
    Turn turn(*s);
    json occ = json::array();
    for (const auto& o : s->machine->occurrences()) occ.push_back(events::to_json(o));
    return json{{"id", s->id},
                {"mode", to_string(s->mode)},
                {"snapshot", s->snapshot},
                {"occurrences", std::move(occ)},
                {"length", s->image.length()},
                {"symbols", s->image.symbols}};
  }

  Mode mode(const std::string& id) {
    auto s = find(id);
    std::lock_guard lock(s->m);
    return s->mode;
  }

  // Push-channel messages with seq > since.
  std::vector<Message> messages(const std::string& id, std::uint64_t since = 0) {
    auto s = find(id);
    std::lock_guard lock(s->m);
    return collect(*s, since);
  }

  // Blocks until a message newer than `since` exists or the timeout elapses.
  std::vector<Message> wait_messages(const std::string& id, std::uint64_t since, std::chrono::milliseconds timeout) {
    auto s = find(id);
    std::unique_lock lock(s->m);
    s->cv.wait_for(lock, timeout, [&] { return !s->log.empty() && s->log.back().seq > since; });
    return collect(*s, since);
  }

  void expire() {
    std::lock_guard lock(mutex_);
    sweep_locked();
  }

 private:
  struct Session {
    std::string id;
    std::mutex m;
    std::condition_variable cv;
    std::uint64_t next_ticket = 0;
    std::uint64_t serving = 0;

    lmc::ObjectImage image;
    std::optional<lmc::TmMachine> machine;
    Mode mode = Mode::idle;
    json snapshot;
    std::vector<Message> log;
    std::uint64_t next_seq = 1;
    Clock::time_point created, touched;
  };

  // Holds the session's turn for the lifetime of the object.
  class Turn {
   public:
    explicit Turn(Session& s) : s_(s) {
      std::unique_lock lock(s_.m);
      auto ticket = s_.next_ticket++;
      s_.cv.wait(lock, [&] { return s_.serving == ticket; });
    }
    ~Turn() {
      {
        std::lock_guard lock(s_.m);
        ++s_.serving;
      }
      s_.cv.notify_all();
    }
    Turn(const Turn&) = delete;
    Turn& operator=(const Turn&) = delete;

   private:
    Session& s_;
  };

  std::shared_ptr<Session> find(const std::string& id) {
    std::lock_guard lock(mutex_);
    sweep_locked();
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw SessionError(SessionError::Kind::not_found, "unknown session");
    it->second->touched = now_();
    return it->second;
  }

  void sweep_locked() {
    const auto now = now_();
    std::erase_if(sessions_, [&](const auto& kv) { return now - kv.second->touched > config_.idle_timeout; });
  }

  static void require_not_running(const Session& s) {
    if (s.mode == Mode::running) throw SessionError(SessionError::Kind::conflict, "session running");
  }

  static void require_steppable(const Session& s) {
    switch (s.mode) {
      case Mode::halted: throw SessionError(SessionError::Kind::conflict, "session halted");
      case Mode::faulted: throw SessionError(SessionError::Kind::conflict, "session faulted");
      case Mode::running: throw SessionError(SessionError::Kind::conflict, "session running");
      case Mode::awaiting_input:
        if (s.machine->state().trays.input.empty()) {
          throw SessionError(SessionError::Kind::conflict, "session awaiting input");
        }
        break;
      case Mode::idle: break;
    }
  }

  void install(Session& s, const lmc::ObjectImage& image) {
    s.image = image;
    s.machine.emplace(lmc::initial_state(image.cells), lmc::StarvationPolicy::pause);
    publish_snapshot(s);
    set_mode(s, Mode::idle);
  }

  StepOutcome step_locked(Session& s, bool in_run = false) {
    auto r = s.machine->step_instruction();
    StepOutcome out;
    out.records = std::move(r.records);
    out.occurrences = std::move(r.occurrences);
    out.fault = r.fault;
    for (const auto& o : out.occurrences) push(s, "occurrence", occurrence_payload(o));
    out.delta = publish_snapshot(s);
    Mode next = in_run ? Mode::running : Mode::idle;
    switch (r.status) {
      case lmc::StepStatus::halted: next = Mode::halted; break;
      case lmc::StepStatus::faulted: next = Mode::faulted; break;
      case lmc::StepStatus::awaiting_input: next = Mode::awaiting_input; break;
      case lmc::StepStatus::tick_limit:
      case lmc::StepStatus::completed: break;
    }
    set_mode(s, next, r.fault);
    out.mode = next;
    return out;
  }

  json occurrence_payload(const events::EventOccurrence& o) const {
    json j = events::to_json(o);
    for (const auto& d : defs_) {
      if (d.id == o.event) {
        j["name"] = d.name;
        j["doc"] = d.doc;
      }
    }
    return j;
  }

  json publish_snapshot(Session& s) {
    json now = lmc::snapshot_to_json(s.machine->state());
    json delta = snapshot_delta(s.snapshot, now);
    s.snapshot = std::move(now);
    if (!delta.empty()) push(s, "delta", delta);
    return delta;
  }

  void set_mode(Session& s, Mode mode, const std::optional<std::string>& reason = std::nullopt) {
    bool changed;
    {
      std::lock_guard lock(s.m);
      changed = s.mode != mode;
      s.mode = mode;
    }
    if (changed) {
      json payload{{"mode", to_string(mode)}};
      if (reason) payload["reason"] = *reason;
      push(s, "mode", std::move(payload));
    }
  }

  void push(Session& s, std::string type, json payload) {
    {
      std::lock_guard lock(s.m);
      s.log.push_back(Message{s.next_seq++, std::move(type), std::move(payload)});
    }
    s.cv.notify_all();
  }

  static std::vector<Message> collect(const Session& s, std::uint64_t since) {
    std::vector<Message> out;
    for (const auto& m : s.log) {
      if (m.seq > since) out.push_back(m);
    }
    return out;
  }

  ServiceConfig config_;
  Now now_;
  std::vector<events::EventDef> defs_;
  std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
};

}  // namespace tmw::service
