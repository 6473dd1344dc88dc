#pragma once

// Workbench commands. Each returns a process exit status; program output goes
// to `out`, diagnostics to `err`.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tmw/core/io.hpp"
#include "tmw/core/simplify.hpp"
#include "tmw/events/events.hpp"
#include "tmw/exec/trace_io.hpp"
#include "tmw/lmc/assembler.hpp"
#include "tmw/lmc/machine.hpp"
#include "tmw/lmc/tm_engine.hpp"

namespace tmw::cli {

using nlohmann::json;

enum class Engine { reference, tm, both };

struct RunConfig {
  std::string program;  // assembly source or image file
  std::vector<int> input;
  long max_steps = 10000;
  exec::Tick max_ticks = 10'000'000;
  Engine engine = Engine::tm;
  std::optional<std::string> trace_path;
  std::optional<std::string> events_path;
};

inline std::optional<std::string> read_file(const std::string& path, std::ostream& err) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    err << path << ": cannot read file\n";
    return std::nullopt;
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline bool write_file(const std::string& path, const std::string& text, std::ostream& err) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) {
    err << path << ": cannot write file\n";
    return false;
  }
  return true;
}

// Comma- or whitespace-separated integers 0-999.
inline std::vector<int> parse_values(std::string_view text) {
  std::vector<int> values;
  std::string word;
  auto flush = [&] {
    if (word.empty()) return;
    if (!lmc::is_number(word) || word.size() > 3) throw PreconditionError("input value '" + word + "' is not in 0-999");
    values.push_back(std::stoi(word));
    word.clear();
  };
  for (char c : text) {
    if (c == ',' || std::isspace(static_cast<unsigned char>(c))) {
      flush();
    } else {
      word += c;
    }
  }
  flush();
  return values;
}

// Images are JSON or purely numeric text; anything else is assembly.
inline bool looks_like_image(std::string_view text) {
  auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return false;
  if (text[first] == '{' || text[first] == '[') return true;
  return std::all_of(text.begin(), text.end(),
                     [](char c) { return std::isdigit(static_cast<unsigned char>(c)) || std::isspace(static_cast<unsigned char>(c)); });
}

inline std::optional<lmc::ObjectImage> load_program(const std::string& path, std::ostream& err) {
  auto text = read_file(path, err);
  if (!text) return std::nullopt;
  try {
    if (looks_like_image(*text)) return lmc::read_image(*text);
    return lmc::assemble_text(*text);
  } catch (const lmc::AssemblyError& e) {
    for (const auto& d : e.diagnostics()) err << path << ":" << d.line << ": " << d.message << "\n";
  } catch (const Error& e) {
    err << path << ": " << e.what() << "\n";
  }
  return std::nullopt;
}

inline int cmd_asm(const std::string& source, const std::string& out_path, std::ostream& out, std::ostream& err) {
  auto text = read_file(source, err);
  if (!text) return 1;
  lmc::ObjectImage image;
  try {
    image = lmc::assemble_text(*text);
  } catch (const lmc::AssemblyError& e) {
    for (const auto& d : e.diagnostics()) err << source << ":" << d.line << ": " << d.message << "\n";
    return 1;
  }
  const bool as_json = out_path.ends_with(".json");
  if (!write_file(out_path, as_json ? lmc::image_to_json(image).dump(2) + "\n" : lmc::image_to_text(image), err)) {
    return 1;
  }
  for (const auto& [label, addr] : image.symbols) out << label << " " << addr << "\n";
  return 0;
}

struct EngineResult {
  std::vector<lmc::LmcState> snapshots;
  lmc::LmcState final_state;
  lmc::StopReason stop = lmc::StopReason::step_limit;
  std::optional<std::string> error;
  exec::ActionTrace trace;
  std::vector<events::EventOccurrence> occurrences;
};

inline EngineResult run_engine(Engine engine, const lmc::LmcState& initial, const RunConfig& config) {
  EngineResult r;
  try {
    if (engine == Engine::reference) {
      auto run = lmc::run_reference(initial, config.max_steps, lmc::StarvationPolicy::error);
      r.snapshots = std::move(run.snapshots);
      r.final_state = std::move(run.final_state);
      r.stop = run.stop;
    } else {
      auto run = lmc::tm_run(initial, {config.max_steps, config.max_ticks, lmc::StarvationPolicy::error});
      r.snapshots = std::move(run.snapshots);
      r.final_state = std::move(run.final_state);
      r.stop = run.stop;
      r.trace = std::move(run.trace);
      r.occurrences = std::move(run.occurrences);
    }
  } catch (const Error& e) {
    r.error = e.what();
  }
  return r;
}

inline int cmd_run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  auto image = load_program(config.program, err);
  if (!image) return 1;
  lmc::LmcState initial;
  try {
    initial = lmc::initial_state(image->cells, config.input);
  } catch (const Error& e) {
    err << e.what() << "\n";
    return 1;
  }

  std::optional<EngineResult> reference, tm;
  if (config.engine != Engine::tm) reference = run_engine(Engine::reference, initial, config);
  if (config.engine != Engine::reference) tm = run_engine(Engine::tm, initial, config);

  int status = 0;
  if (reference && tm) {
    const auto& a = reference->snapshots;
    const auto& b = tm->snapshots;
    for (std::size_t i = 0; i < std::max(a.size(), b.size()); ++i) {
      if (i >= a.size() || i >= b.size()) {
        err << "divergence after instruction " << i << ": reference recorded " << a.size() << " snapshots, tm "
            << b.size() << "\n";
        status = 1;
        break;
      }
      if (auto diff = lmc::first_difference(a[i], b[i]); !diff.empty()) {
        err << "divergence at snapshot " << i << ": " << diff << " (reference vs tm)\n";
        status = 1;
        break;
      }
    }
    if (status == 0 && reference->error != tm->error) {
      err << "divergence in outcome: reference '" << reference->error.value_or("ok") << "', tm '"
          << tm->error.value_or("ok") << "'\n";
      status = 1;
    }
  }

  const EngineResult& main = tm ? *tm : *reference;
  for (int v : main.final_state.trays.output) out << v << "\n";

  if (main.error) {
    err << main.error.value() << "\n";
    status = 1;
  } else if (main.stop == lmc::StopReason::step_limit) {
    err << "step limit reached after " << (main.snapshots.size() - 1) << " instructions at pc=" << main.final_state.pc
        << "\n";
    status = status ? status : 2;
  }

  if (config.trace_path || config.events_path) {
    if (!tm) {
      err << "--trace and --events need the tm engine\n";
      return 1;
    }
    auto model = lmc::lmc_static_model();
    if (config.trace_path && !write_file(*config.trace_path, exec::trace_to_json(tm->trace, &model).dump(1) + "\n", err)) {
      return 1;
    }
    if (config.events_path && !write_file(*config.events_path, events::to_json(tm->occurrences).dump(1) + "\n", err)) {
      return 1;
    }
  }
  return status;
}

inline int cmd_export(const std::string& what, const std::string& format, const std::optional<std::string>& out_path,
                      std::ostream& out, std::ostream& err) {
  std::string text;
  if (format != "dot" && format != "json") {
    err << "unknown format '" << format << "'; use dot or json\n";
    return 1;
  }
  if (what == "static" || what == "static-simplified") {
    auto model = lmc::lmc_static_model();
    if (what == "static-simplified") model = core::simplify(model);
    text = core::export_model(model, format == "dot" ? core::ExportFormat::dot : core::ExportFormat::json);
  } else if (what == "events") {
    if (format == "dot") {
      err << "event definitions export as json only\n";
      return 1;
    }
    text = events::to_json(lmc::lmc_event_defs()).dump(2) + "\n";
  } else if (what == "behavior") {
    auto b = lmc::lmc_behavioral_model();
    text = format == "dot" ? events::behavior_to_dot(b, "lmc-behavior") : events::to_json(b).dump(2) + "\n";
  } else {
    err << "unknown artifact '" << what << "'; use static, static-simplified, events or behavior\n";
    return 1;
  }
  if (out_path) return write_file(*out_path, text, err) ? 0 : 1;
  out << text;
  return 0;
}

}  // namespace tmw::cli
