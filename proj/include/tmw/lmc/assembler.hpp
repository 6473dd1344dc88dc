#pragma once

// LMC assembly. Grammar, one statement per line:
//   line := [label] mnemonic [operand] [comment]
// where comments start with ';' or "//". A label must share its line with a
// mnemonic. Mnemonics are case-insensitive, labels are not.

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "tmw/error.hpp"
#include "tmw/lmc/machine.hpp"

namespace tmw::lmc {

enum class Mnemonic { hlt, add, sub, sta, lda, bra, brz, brp, inp, out, dat };

inline constexpr std::string_view to_string(Mnemonic m) noexcept {
  switch (m) {
    case Mnemonic::hlt: return "HLT";
    case Mnemonic::add: return "ADD";
    case Mnemonic::sub: return "SUB";
    case Mnemonic::sta: return "STA";
    case Mnemonic::lda: return "LDA";
    case Mnemonic::bra: return "BRA";
    case Mnemonic::brz: return "BRZ";
    case Mnemonic::brp: return "BRP";
    case Mnemonic::inp: return "INP";
    case Mnemonic::out: return "OUT";
    case Mnemonic::dat: return "DAT";
  }
  return "?";
}

inline std::optional<Mnemonic> parse_mnemonic(std::string_view word) {
  std::string up(word);
  for (auto& c : up) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  static const std::map<std::string, Mnemonic, std::less<>> table = {
      {"HLT", Mnemonic::hlt}, {"HALT", Mnemonic::hlt}, {"ADD", Mnemonic::add}, {"SUB", Mnemonic::sub},
      {"STA", Mnemonic::sta}, {"STO", Mnemonic::sta},  {"LDA", Mnemonic::lda}, {"BRA", Mnemonic::bra},
      {"BRZ", Mnemonic::brz}, {"BRP", Mnemonic::brp},  {"INP", Mnemonic::inp}, {"IN", Mnemonic::inp},
      {"OUT", Mnemonic::out}, {"DAT", Mnemonic::dat}};
  auto it = table.find(up);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

enum class Arity { none, required, optional };

constexpr Arity arity(Mnemonic m) noexcept {
  switch (m) {
    case Mnemonic::hlt:
    case Mnemonic::inp:
    case Mnemonic::out: return Arity::none;
    case Mnemonic::dat: return Arity::optional;
    default: return Arity::required;
  }
}

// Opcode digit for address-carrying instructions.
constexpr int opcode_of(Mnemonic m) noexcept {
  switch (m) {
    case Mnemonic::add: return opcode::add;
    case Mnemonic::sub: return opcode::sub;
    case Mnemonic::sta: return opcode::sta;
    case Mnemonic::lda: return opcode::lda;
    case Mnemonic::bra: return opcode::bra;
    case Mnemonic::brz: return opcode::brz;
    case Mnemonic::brp: return opcode::brp;
    default: return -1;
  }
}

using Operand = std::variant<int, std::string>;

struct SourceLine {
  std::optional<std::string> label;
  Mnemonic mnemonic = Mnemonic::hlt;
  std::optional<Operand> operand;
  std::optional<std::string> comment;
  int line = 0;

  friend bool operator==(const SourceLine&, const SourceLine&) = default;
};

struct Diagnostic {
  int line = 0;
  std::string message;

  friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

class AssemblyError : public Error {
 public:
  explicit AssemblyError(std::vector<Diagnostic> diagnostics)
      : Error(render(diagnostics)), diagnostics_(std::move(diagnostics)) {}

  const std::vector<Diagnostic>& diagnostics() const noexcept { return diagnostics_; }

 private:
  static std::string render(const std::vector<Diagnostic>& ds) {
    std::string out;
    for (const auto& d : ds) {
      if (!out.empty()) out += '\n';
      out += d.line > 0 ? "line " + std::to_string(d.line) + ": " + d.message : d.message;
    }
    return out;
  }

  std::vector<Diagnostic> diagnostics_;
};

inline bool is_identifier(std::string_view s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

inline bool is_number(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

inline std::vector<SourceLine> parse(std::string_view text) {
  std::vector<SourceLine> lines;
  std::vector<Diagnostic> errors;
  int number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++number;
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);

    std::optional<std::string> comment;
    auto cut = std::min(raw.find(';'), raw.find("//"));
    if (cut != std::string_view::npos) {
      auto rest = raw.substr(cut + (raw[cut] == ';' ? 1 : 2));
      auto first = rest.find_first_not_of(" \t");
      comment = first == std::string_view::npos ? std::string{} : std::string(rest.substr(first));
      raw = raw.substr(0, cut);
    }

    std::vector<std::string> tokens;
    std::istringstream in{std::string(raw)};
    for (std::string t; in >> t;) tokens.push_back(t);
    if (tokens.empty()) continue;

    SourceLine line;
    line.line = number;
    line.comment = comment;
    std::size_t next = 0;
    if (auto m = parse_mnemonic(tokens[0])) {
      line.mnemonic = *m;
      next = 1;
    } else if (tokens.size() > 1 && parse_mnemonic(tokens[1])) {
      if (!is_identifier(tokens[0])) {
        errors.push_back({number, "malformed label '" + tokens[0] + "'"});
        continue;
      }
      line.label = tokens[0];
      line.mnemonic = *parse_mnemonic(tokens[1]);
      next = 2;
    } else {
      errors.push_back({number, "unknown mnemonic '" + tokens[0] + "'"});
      continue;
    }

    const auto name = std::string(to_string(line.mnemonic));
    if (next < tokens.size()) {
      const auto& op = tokens[next];
      if (arity(line.mnemonic) == Arity::none) {
        errors.push_back({number, name + " takes no operand"});
        continue;
      }
      if (is_number(op)) {
        line.operand = op.size() > 4 ? 10000 : std::stoi(op);
      } else if (is_identifier(op)) {
        line.operand = op;
      } else {
        errors.push_back({number, "malformed operand '" + op + "'"});
        continue;
      }
      if (next + 1 < tokens.size()) {
        errors.push_back({number, "unexpected '" + tokens[next + 1] + "'"});
        continue;
      }
    } else if (arity(line.mnemonic) == Arity::required) {
      errors.push_back({number, name + " needs an operand"});
      continue;
    }
    lines.push_back(std::move(line));
  }
  if (!errors.empty()) throw AssemblyError(std::move(errors));
  return lines;
}

struct ObjectImage {
  std::vector<int> cells;
  std::map<std::string, int> symbols;

  std::size_t length() const noexcept { return cells.size(); }

  friend bool operator==(const ObjectImage&, const ObjectImage&) = default;
};

inline ObjectImage assemble(const std::vector<SourceLine>& lines) {
  std::vector<Diagnostic> errors;
  ObjectImage image;
  if (lines.size() > static_cast<std::size_t>(mailbox_count)) {
    errors.push_back({lines[mailbox_count].line, "program exceeds 100 cells"});
    throw AssemblyError(std::move(errors));
  }
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto& l = lines[i];
    if (l.label && !image.symbols.emplace(*l.label, static_cast<int>(i)).second) {
      errors.push_back({l.line, "duplicate label '" + *l.label + "'"});
    }
  }
  for (const auto& l : lines) {
    int value = 0;
    if (l.operand) {
      if (const auto* name = std::get_if<std::string>(&*l.operand)) {
        auto it = image.symbols.find(*name);
        if (it == image.symbols.end()) {
          errors.push_back({l.line, "undefined label '" + *name + "'"});
          image.cells.push_back(0);
          continue;
        }
        value = it->second;
      } else {
        value = std::get<int>(*l.operand);
      }
    }
    const bool is_data = l.mnemonic == Mnemonic::dat;
    if (is_data ? !is_cell(value) : !is_address(value)) {
      errors.push_back({l.line, "operand " + std::to_string(value) + " outside " + (is_data ? "0-999" : "0-99")});
      image.cells.push_back(0);
      continue;
    }
    switch (l.mnemonic) {
      case Mnemonic::hlt: image.cells.push_back(0); break;
      case Mnemonic::inp: image.cells.push_back(inp_cell); break;
      case Mnemonic::out: image.cells.push_back(out_cell); break;
      case Mnemonic::dat: image.cells.push_back(value); break;
      default: image.cells.push_back(opcode_of(l.mnemonic) * 100 + value); break;
    }
  }
  if (!errors.empty()) throw AssemblyError(std::move(errors));
  return image;
}

inline ObjectImage assemble_text(std::string_view text) { return assemble(parse(text)); }

// Instructions are recognised only on cells reachable from address 0; every
// other cell, and every cell that does not reassemble to itself, is DAT.
inline std::string disassemble(std::span<const int> cells) {
  const std::size_t n = cells.size();
  std::vector<bool> code(n, false);
  std::vector<std::size_t> work;
  if (n > 0) work.push_back(0);
  auto as_instruction = [](int cell) -> std::optional<Mnemonic> {
    if (cell == 0) return Mnemonic::hlt;
    if (cell == inp_cell) return Mnemonic::inp;
    if (cell == out_cell) return Mnemonic::out;
    switch (cell / 100) {
      case opcode::add: return Mnemonic::add;
      case opcode::sub: return Mnemonic::sub;
      case opcode::sta: return Mnemonic::sta;
      case opcode::lda: return Mnemonic::lda;
      case opcode::bra: return Mnemonic::bra;
      case opcode::brz: return Mnemonic::brz;
      case opcode::brp: return Mnemonic::brp;
      default: return std::nullopt;
    }
  };
  while (!work.empty()) {
    auto at = work.back();
    work.pop_back();
    if (at >= n || code[at]) continue;
    auto m = as_instruction(cells[at]);
    if (!m) continue;
    code[at] = true;
    const auto target = static_cast<std::size_t>(cells[at] % 100);
    if (*m == Mnemonic::hlt) continue;
    if (*m == Mnemonic::bra) {
      work.push_back(target);
      continue;
    }
    if (*m == Mnemonic::brz || *m == Mnemonic::brp) work.push_back(target);
    work.push_back(at + 1);
  }

  std::set<std::size_t> labelled;
  for (std::size_t i = 0; i < n; ++i) {
    if (code[i] && arity(*as_instruction(cells[i])) == Arity::required) {
      auto target = static_cast<std::size_t>(cells[i] % 100);
      if (target < n) labelled.insert(target);
    }
  }

  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    if (labelled.contains(i)) out += "L" + std::to_string(i) + " ";
    if (!code[i]) {
      out += "DAT " + std::to_string(cells[i]) + "\n";
      continue;
    }
    auto m = *as_instruction(cells[i]);
    out += to_string(m);
    if (arity(m) == Arity::required) {
      auto target = static_cast<std::size_t>(cells[i] % 100);
      out += " " + (target < n ? "L" + std::to_string(target) : std::to_string(target));
    }
    out += "\n";
  }
  return out;
}

inline std::string disassemble(const ObjectImage& image) { return disassemble(std::span<const int>(image.cells)); }

// Image files: JSON ({"mailboxes": [...]} or a bare array) or 100 lines of
// zero-padded decimal cells.
inline nlohmann::json image_to_json(const ObjectImage& image) {
  std::vector<int> boxes(mailbox_count, 0);
  std::copy(image.cells.begin(), image.cells.end(), boxes.begin());
  return nlohmann::json{{"mailboxes", boxes}, {"length", image.length()}, {"symbols", image.symbols}};
}

inline std::string image_to_text(const ObjectImage& image) {
  std::string out;
  for (int i = 0; i < mailbox_count; ++i) {
    int cell = i < static_cast<int>(image.cells.size()) ? image.cells[static_cast<std::size_t>(i)] : 0;
    out += LmcFault::pad(cell) + "\n";
  }
  return out;
}

inline void check_cells(const std::vector<int>& cells) {
  if (cells.size() > static_cast<std::size_t>(mailbox_count)) throw SchemaError("image holds more than 100 cells");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (!is_cell(cells[i])) throw SchemaError("image cell " + std::to_string(i) + " outside 0-999");
  }
}

inline ObjectImage image_from_json(const nlohmann::json& j) {
  try {
    ObjectImage image;
    if (j.is_array()) {
      image.cells = j.get<std::vector<int>>();
    } else {
      image.cells = j.at("mailboxes").get<std::vector<int>>();
      if (auto it = j.find("length"); it != j.end()) {
        auto len = it->get<std::size_t>();
        if (len > image.cells.size()) throw SchemaError("image length exceeds its mailbox array");
        image.cells.resize(len);
      }
      if (auto it = j.find("symbols"); it != j.end()) image.symbols = it->get<std::map<std::string, int>>();
    }
    check_cells(image.cells);
    return image;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("image schema: ") + e.what());
  }
}

inline ObjectImage image_from_text(std::string_view text) {
  ObjectImage image;
  std::istringstream in{std::string(text)};
  int line = 0;
  for (std::string word; in >> word;) {
    ++line;
    if (!is_number(word) || word.size() > 3) throw ParseError("image line " + std::to_string(line) + ": '" + word + "' is not a cell", line, 1);
    image.cells.push_back(std::stoi(word));
  }
  check_cells(image.cells);
  return image;
}

inline ObjectImage read_image(std::string_view text) {
  auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string_view::npos && (text[first] == '{' || text[first] == '[')) {
    try {
      return image_from_json(nlohmann::json::parse(text));
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("image JSON: ") + e.what(), 0, 0);
    }
  }
  return image_from_text(text);
}

}  // namespace tmw::lmc
