#pragma once

// Small hand-built models and a random valid-model generator shared by tests.

#include <random>
#include <string>
#include <vector>

#include "tmw/core/model.hpp"
#include "tmw/core/validate.hpp"

namespace tmw::testkit {

using core::ModelBuilder;
using core::StageKind;
using core::StaticModel;

// A.Create -> A.Release -> A.Transfer -> B.Transfer -> B.Receive -> B.Process
inline StaticModel two_machine_chain() {
  ModelBuilder b("chain");
  b.machine("A", "A").machine("B", "B");
  b.stage("a.create", StageKind::create, "A")
      .stage("a.release", StageKind::release, "A")
      .stage("a.transfer", StageKind::transfer, "A")
      .stage("b.transfer", StageKind::transfer, "B")
      .stage("b.receive", StageKind::receive, "B")
      .stage("b.process", StageKind::process, "B");
  b.chain({"a.create", "a.release", "a.transfer", "b.transfer", "b.receive", "b.process"});
  return b.build();
}

// Random model that validates in strict mode. Each machine is built from
// legal segments; machines are linked transfer -> transfer.
inline StaticModel random_valid_model(std::mt19937& rng) {
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  ModelBuilder b("random");
  const int machines = pick(1, 4);
  std::vector<std::string> processes, creates, releases, transfers_out, transfers_in;
  int counter = 0;
  auto fresh = [&](const std::string& m, const char* tag) { return m + "." + tag + std::to_string(counter++); };

  for (int mi = 0; mi < machines; ++mi) {
    std::string m = "M" + std::to_string(mi);
    b.machine(m, "machine " + std::to_string(mi), mi > 0 && pick(0, 2) == 0 ? std::optional<std::string>("M0") : std::nullopt);
    const bool has_store = pick(0, 1) == 1;
    if (has_store) b.storage(m + ".store", m);

    // Optional receive side: transfer_in -> receive -> (process | release)
    std::string entry;
    if (mi > 0 || pick(0, 1)) {
      auto tin = fresh(m, "tin");
      auto rcv = fresh(m, "rcv");
      b.stage(tin, StageKind::transfer, m).stage(rcv, StageKind::receive, m);
      b.flow(tin, rcv);
      transfers_in.push_back(tin);
      entry = rcv;
    } else {
      entry = fresh(m, "c");
      b.stage(entry, StageKind::create, m);
      creates.push_back(entry);
    }
    // Process chain.
    std::string prev = entry;
    const int chain = pick(0, 3);
    for (int i = 0; i < chain; ++i) {
      auto p = fresh(m, "p");
      b.stage(p, StageKind::process, m, std::nullopt,
              has_store && pick(0, 1) ? std::optional<std::string>(m + ".store") : std::nullopt);
      b.flow(prev, p);
      processes.push_back(p);
      prev = p;
    }
    // Optional send side: release -> transfer_out
    if (pick(0, 2) > 0) {
      auto rel = fresh(m, "rel");
      auto tout = fresh(m, "tout");
      b.stage(rel, StageKind::release, m).stage(tout, StageKind::transfer, m);
      b.flow(prev, rel).flow(rel, tout);
      releases.push_back(rel);
      transfers_out.push_back(tout);
    }
    // Extra creates feeding a process.
    if (!processes.empty() && pick(0, 2) == 0) {
      auto c = fresh(m, "c");
      b.stage(c, StageKind::create, m);
      creates.push_back(c);
      // Only connect to a process in this machine.
      for (auto it = processes.rbegin(); it != processes.rend(); ++it) {
        if (it->starts_with(m + ".")) {
          b.flow(c, *it);
          break;
        }
      }
    }
  }
  // Cross-machine links: each transfer_out to at most one transfer_in.
  auto ins = transfers_in;
  std::shuffle(ins.begin(), ins.end(), rng);
  for (std::size_t i = 0; i < transfers_out.size() && i < ins.size(); ++i) {
    if (transfers_out[i].substr(0, 2) != ins[i].substr(0, 2)) b.flow(transfers_out[i], ins[i]);
  }
  // Triggers between core stages.
  std::vector<std::string> targets = processes;
  targets.insert(targets.end(), creates.begin(), creates.end());
  targets.insert(targets.end(), releases.begin(), releases.end());
  const int triggers = targets.empty() ? 0 : pick(0, 3);
  std::vector<std::string> sources = processes;
  sources.insert(sources.end(), creates.begin(), creates.end());
  for (int i = 0; i < triggers && !sources.empty(); ++i) {
    auto from = sources[static_cast<std::size_t>(pick(0, static_cast<int>(sources.size()) - 1))];
    auto to = targets[static_cast<std::size_t>(pick(0, static_cast<int>(targets.size()) - 1))];
    if (from == to) continue;
    b.trigger("t" + std::to_string(i), from, to, pick(0, 1) ? std::optional<std::string>("g") : std::nullopt);
  }
  return b.build();
}

}  // namespace tmw::testkit
