#pragma once

// HTTP binding of the session service. Push messages are available both as a
// server-sent event stream (GET /sessions/{id}/events) and by polling
// (GET /sessions/{id}/messages?since=N).

#include <atomic>
#include <chrono>
#include <memory>
#include <optional>
#include <string>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "tmw/core/io.hpp"
#include "tmw/core/simplify.hpp"
#include "tmw/events/events.hpp"
#include "tmw/lmc/tm_model.hpp"
#include "tmw/service/session.hpp"

namespace tmw::service {

namespace detail {

inline void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

inline int status_for(SessionError::Kind kind) {
  switch (kind) {
    case SessionError::Kind::not_found: return 404;
    case SessionError::Kind::conflict: return 409;
    case SessionError::Kind::capacity: return 503;
    case SessionError::Kind::invalid: return 400;
  }
  return 500;
}

inline json body_json(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    return json::parse(req.body);
  } catch (const json::parse_error& e) {
    throw SessionError(SessionError::Kind::invalid, std::string("request body is not JSON: ") + e.what());
  }
}

inline json occurrences_json(const std::vector<events::EventOccurrence>& occ) { return events::to_json(occ); }

inline std::string sse_frame(const Message& m) {
  return "id: " + std::to_string(m.seq) + "\nevent: " + m.type + "\ndata: " + to_json(m).dump() + "\n\n";
}

inline std::string export_artifact(const std::string& what, const std::string& format) {
  if (format != "dot" && format != "json") throw SessionError(SessionError::Kind::invalid, "format must be dot or json");
  if (what == "static" || what == "static-simplified") {
    auto model = lmc::lmc_static_model();
    if (what == "static-simplified") model = core::simplify(model);
    return core::export_model(model, format == "dot" ? core::ExportFormat::dot : core::ExportFormat::json);
  }
  if (what == "events") {
    if (format == "dot") throw SessionError(SessionError::Kind::invalid, "event definitions export as json only");
    return events::to_json(lmc::lmc_event_defs()).dump(2);
  }
  if (what == "behavior") {
    auto b = lmc::lmc_behavioral_model();
    return format == "dot" ? events::behavior_to_dot(b, "lmc-behavior") : events::to_json(b).dump(2);
  }
  throw SessionError(SessionError::Kind::not_found, "unknown export '" + what + "'");
}

}  // namespace detail

// Registers all routes on `server`. `manager` must outlive the server.
inline void mount(httplib::Server& server, SessionManager& manager) {
  using detail::send_json;
  using httplib::Request;
  using httplib::Response;

  auto guarded = [&manager](auto handler) {
    return [&manager, handler](const Request& req, Response& res) {
      try {
        handler(req, res);
      } catch (const SessionError& e) {
        json body{{"error", e.what()}};
        if (e.kind() == SessionError::Kind::capacity) {
          body["retry_after"] = manager.config().retry_after_seconds;
          res.set_header("Retry-After", std::to_string(manager.config().retry_after_seconds));
        }
        if (e.kind() == SessionError::Kind::conflict && req.path_params.contains("id")) {
          try {
            body["mode"] = to_string(manager.mode(req.path_params.at("id")));
          } catch (const SessionError&) {
          }
        }
        send_json(res, detail::status_for(e.kind()), body);
      } catch (const Error& e) {
        send_json(res, 400, json{{"error", e.what()}});
      } catch (const json::exception& e) {
        send_json(res, 400, json{{"error", std::string("bad request: ") + e.what()}});
      }
    };
  };

  server.Post("/sessions", guarded([&](const Request&, Response& res) {
                auto id = manager.create();
                send_json(res, 201, json{{"id", id}, {"mode", to_string(manager.mode(id))}});
              }));

  server.Post("/sessions/:id/load", guarded([&](const Request& req, Response& res) {
                const auto& id = req.path_params.at("id");
                LoadResult r;
                const auto type = req.get_header_value("Content-Type");
                if (type.starts_with("text/plain")) {
                  r = manager.load_source(id, req.body);
                } else {
                  auto body = detail::body_json(req);
                  if (body.contains("source")) {
                    r = manager.load_source(id, body.at("source").get<std::string>());
                  } else if (body.contains("image")) {
                    r = manager.load_image(id, lmc::image_from_json(body.at("image")));
                  } else {
                    throw SessionError(SessionError::Kind::invalid, "load needs \"source\" or \"image\"");
                  }
                }
                if (!r.ok) {
                  json diags = json::array();
                  for (const auto& d : r.diagnostics) diags.push_back({{"line", d.line}, {"message", d.message}});
                  send_json(res, 422, json{{"ok", false}, {"diagnostics", diags}});
                  return;
                }
                send_json(res, 200,
                          json{{"ok", true},
                               {"length", r.image.length()},
                               {"cells", r.image.cells},
                               {"symbols", r.image.symbols},
                               {"mode", to_string(manager.mode(id))}});
              }));

  server.Post("/sessions/:id/step", guarded([&](const Request& req, Response& res) {
                const auto& id = req.path_params.at("id");
                auto s = manager.step(id);
                json body{{"mode", to_string(s.mode)},
                          {"delta", s.delta},
                          {"occurrences", detail::occurrences_json(s.occurrences)},
                          {"records", exec::trace_to_json(s.records)}};
                if (s.fault) body["fault"] = *s.fault;
                send_json(res, 200, body);
              }));

  server.Post("/sessions/:id/run", guarded([&](const Request& req, Response& res) {
                const auto& id = req.path_params.at("id");
                auto body = detail::body_json(req);
                std::optional<long> max_steps;
                if (body.contains("max_steps")) max_steps = body.at("max_steps").get<long>();
                auto r = manager.run(id, max_steps);
                json out{{"mode", to_string(r.mode)},
                         {"steps", r.steps},
                         {"steps_exhausted", r.steps_exhausted},
                         {"occurrences", detail::occurrences_json(r.occurrences)}};
                if (r.fault) out["fault"] = *r.fault;
                send_json(res, 200, out);
              }));

  server.Post("/sessions/:id/input", guarded([&](const Request& req, Response& res) {
                const auto& id = req.path_params.at("id");
                auto body = detail::body_json(req);
                std::vector<int> values;
                if (body.contains("value")) values.push_back(body.at("value").get<int>());
                if (body.contains("values")) {
                  for (int v : body.at("values").get<std::vector<int>>()) values.push_back(v);
                }
                if (values.empty()) throw SessionError(SessionError::Kind::invalid, "input needs \"value\" or \"values\"");
                for (int v : values) {
                  if (!lmc::is_cell(v)) {
                    throw SessionError(SessionError::Kind::invalid, "input value " + std::to_string(v) + " outside 0-999");
                  }
                }
                for (int v : values) manager.provide_input(id, v);
                send_json(res, 200, json{{"queued", values.size()}, {"mode", to_string(manager.mode(id))}});
              }));

  server.Get("/sessions/:id/state", guarded([&](const Request& req, Response& res) {
               send_json(res, 200, manager.state(req.path_params.at("id")));
             }));

  server.Get("/sessions/:id/export/:what", guarded([&](const Request& req, Response& res) {
               manager.mode(req.path_params.at("id"));
               const auto& what = req.path_params.at("what");
               auto format = req.has_param("format") ? req.get_param_value("format")
                                                     : std::string(what == "events" ? "json" : "dot");
               if (what == "static" && req.get_param_value("simplified") == "1") {
                 res.set_content(detail::export_artifact("static-simplified", format),
                                 format == "dot" ? "text/vnd.graphviz" : "application/json");
                 return;
               }
               res.set_content(detail::export_artifact(what, format),
                               format == "dot" ? "text/vnd.graphviz" : "application/json");
             }));

  server.Get("/sessions/:id/messages", guarded([&](const Request& req, Response& res) {
               std::uint64_t since = req.has_param("since") ? std::stoull(req.get_param_value("since")) : 0;
               json out = json::array();
               for (const auto& m : manager.messages(req.path_params.at("id"), since)) out.push_back(to_json(m));
               send_json(res, 200, out);
             }));

  server.Get("/sessions/:id/events", guarded([&](const Request& req, Response& res) {
               const std::string id = req.path_params.at("id");
               manager.mode(id);
               std::uint64_t since = 0;
               if (req.has_header("Last-Event-ID")) since = std::stoull(req.get_header_value("Last-Event-ID"));
               if (req.has_param("since")) since = std::stoull(req.get_param_value("since"));
               auto cursor = std::make_shared<std::uint64_t>(since);
               res.set_header("Cache-Control", "no-cache");
               res.set_chunked_content_provider("text/event-stream", [&manager, id, cursor](std::size_t,
                                                                                            httplib::DataSink& sink) {
                 try {
                   auto batch = manager.wait_messages(id, *cursor, std::chrono::seconds(15));
                   if (batch.empty()) {
                     std::string ping = ": keep-alive\n\n";
                     return sink.write(ping.data(), ping.size());
                   }
                   for (const auto& m : batch) {
                     auto frame = detail::sse_frame(m);
                     if (!sink.write(frame.data(), frame.size())) return false;
                     *cursor = m.seq;
                   }
                   return true;
                 } catch (const SessionError&) {
                   sink.done();
                   return true;
                 }
               });
             }));
}

struct ServerOptions {
  std::string host = "0.0.0.0";
  int port = 8080;
  std::optional<std::string> static_dir;
  ServiceConfig service;
};

// Blocks until the server stops.
inline bool serve(const ServerOptions& options) {
  SessionManager manager(options.service);
  httplib::Server server;
  mount(server, manager);
  if (options.static_dir && !server.set_mount_point("/", *options.static_dir)) {
    throw PreconditionError("static directory '" + *options.static_dir + "' does not exist");
  }
  return server.listen(options.host, options.port);
}

}  // namespace tmw::service
