#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "tmw/cli/commands.hpp"
#include "tmw/service/http.hpp"

int main(int argc, char** argv) {
  using namespace tmw;
  CLI::App app{"Thinging-machine workbench for the Little Man Computer"};
  app.require_subcommand(1);

  std::string asm_source, asm_out;
  auto* asm_cmd = app.add_subcommand("asm", "assemble LMC source into a mailbox image");
  asm_cmd->add_option("source", asm_source, "assembly file")->required();
  asm_cmd->add_option("-o,--output", asm_out, "image file (.json for JSON, otherwise 100 text lines)")->required();

  cli::RunConfig run;
  std::string inputs, input_file, engine = "tm";
  auto* run_cmd = app.add_subcommand("run", "run a program in batch mode");
  run_cmd->add_option("program", run.program, "assembly source or image file")->required();
  run_cmd->add_option("--input", inputs, "comma-separated input values (0-999)");
  run_cmd->add_option("--input-file", input_file, "file of input values");
  run_cmd->add_option("--engine", engine, "reference, tm or both")
      ->check(CLI::IsMember({"reference", "tm", "both"}))
      ->capture_default_str();
  run_cmd->add_option("--max-steps", run.max_steps, "instruction limit")->check(CLI::NonNegativeNumber)->capture_default_str();
  run_cmd->add_option("--max-ticks", run.max_ticks, "TM tick limit")->check(CLI::NonNegativeNumber)->capture_default_str();
  run_cmd->add_option("--trace", run.trace_path, "write the action trace as JSON");
  run_cmd->add_option("--events", run.events_path, "write event occurrences as JSON");

  std::string what, format = "dot";
  std::optional<std::string> export_out;
  auto* export_cmd = app.add_subcommand("export", "export a built-in LMC model artifact");
  export_cmd->add_option("what", what, "static, static-simplified, events or behavior")
      ->required()
      ->check(CLI::IsMember({"static", "static-simplified", "events", "behavior"}));
  auto* format_opt = export_cmd->add_option("--format", format, "dot or json")->check(CLI::IsMember({"dot", "json"}));
  export_cmd->add_option("-o,--output", export_out, "output file (default: stdout)");

  service::ServerOptions server;
  long idle_seconds = 30 * 60;
  auto* serve_cmd = app.add_subcommand("serve", "start the session service");
  serve_cmd->add_option("--port", server.port, "listen port")->envname("TMW_PORT")->capture_default_str();
  serve_cmd->add_option("--host", server.host, "listen address")->envname("TMW_HOST")->capture_default_str();
  serve_cmd->add_option("--static", server.static_dir, "directory of web UI assets")->envname("TMW_STATIC_DIR");
  serve_cmd->add_option("--max-sessions", server.service.max_sessions, "session cap")
      ->envname("TMW_MAX_SESSIONS")
      ->capture_default_str();
  serve_cmd->add_option("--idle-timeout", idle_seconds, "seconds before an idle session expires")
      ->envname("TMW_IDLE_TIMEOUT")
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  if (asm_cmd->parsed()) return cli::cmd_asm(asm_source, asm_out, std::cout, std::cerr);

  if (run_cmd->parsed()) {
    try {
      run.input = cli::parse_values(inputs);
      if (!input_file.empty()) {
        auto text = cli::read_file(input_file, std::cerr);
        if (!text) return 1;
        for (int v : cli::parse_values(*text)) run.input.push_back(v);
      }
    } catch (const Error& e) {
      std::cerr << e.what() << "\n";
      return 1;
    }
    run.engine = engine == "reference" ? cli::Engine::reference : engine == "both" ? cli::Engine::both : cli::Engine::tm;
    return cli::cmd_run(run, std::cout, std::cerr);
  }

  if (export_cmd->parsed()) {
    if (format_opt->count() == 0 && what == "events") format = "json";
    return cli::cmd_export(what, format, export_out, std::cout, std::cerr);
  }

  if (serve_cmd->parsed()) {
    server.service.idle_timeout = std::chrono::seconds(idle_seconds);
    try {
      std::cerr << "listening on " << server.host << ":" << server.port << "\n";
      if (!service::serve(server)) {
        std::cerr << "cannot listen on " << server.host << ":" << server.port << "\n";
        return 1;
      }
    } catch (const Error& e) {
      std::cerr << e.what() << "\n";
      return 1;
    }
  }
  return 0;
}
