#include "smforge/umple.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

#include "text_util.hpp"

namespace smforge {

std::string ParseDiagnostic::to_string() const {
  return "line " + std::to_string(line) + ": " +
         (severity == Severity::kError ? "error: " : "warning: ") + message;
}

std::size_t UmpleDocument::error_count() const {
  return std::count_if(diagnostics.begin(), diagnostics.end(),
                       [](const auto& d) { return d.severity == Severity::kError; });
}

std::size_t UmpleDocument::warning_count() const {
  return diagnostics.size() - error_count();
}

namespace {

std::string summarize(const std::vector<ParseDiagnostic>& diagnostics) {
  std::string out = "Umple parse failed";
  for (const auto& d : diagnostics) {
    if (d.severity == Severity::kError) {
      out += "; " + d.to_string();
      break;
    }
  }
  return out;
}

}  // namespace

ParseFailed::ParseFailed(std::vector<ParseDiagnostic> diagnostics)
    : std::runtime_error(summarize(diagnostics)),
      diagnostics_(std::move(diagnostics)) {}

// ---------------------------------------------------------------------------
// Emitter

namespace {

void check_emittable(const Transition& t) {
  if (t.event && !is_identifier(*t.event)) {
    throw EmitError("event is not an identifier: '" + *t.event + "'");
  }
  if (t.guard && t.guard->find_first_of("[]\n\r") != std::string::npos) {
    throw EmitError("guard cannot be written in Umple: '" + *t.guard + "'");
  }
  for (const auto& a : t.actions) {
    if (a.find_first_of("{};\n\r") != std::string::npos) {
      throw EmitError("action cannot be written in Umple: '" + a + "'");
    }
  }
}

void emit_transition(const Transition& t, const std::string& indent,
                     std::string& out) {
  out += indent;
  if (t.event) out += *t.event + " ";
  if (t.guard) out += "[" + *t.guard + "] ";
  if (!t.actions.empty()) {
    out += "/ {";
    for (const auto& a : t.actions) out += " " + a + ";";
    out += " } ";
  }
  out += "-> " + t.target + ";\n";
}

void emit_state(const StateNode& s, const std::vector<Transition>& transitions,
                int depth, std::string& out) {
  const std::string indent(static_cast<std::size_t>(depth) * 2, ' ');
  const std::string inner = indent + "  ";
  const std::string key = try_normalize_name(s.name);
  std::vector<const Transition*> mine;
  for (const auto& t : transitions) {
    if (try_normalize_name(t.source) == key) mine.push_back(&t);
  }
  if (mine.empty() && !s.is_composite()) {
    out += indent + s.name + " {}\n";
    return;
  }
  out += indent + s.name + " {\n";
  for (const auto* t : mine) emit_transition(*t, inner, out);
  if (s.has_history) out += inner + "H\n";
  for (std::size_t r = 0; r < s.regions.size(); ++r) {
    if (r > 0) out += inner + "||\n";
    const auto& region = s.regions[r];
    for (const auto& sub : region.substates) {
      if (sub.name == region.initial) emit_state(sub, transitions, depth + 1, out);
    }
    for (const auto& sub : region.substates) {
      if (sub.name != region.initial) emit_state(sub, transitions, depth + 1, out);
    }
  }
  out += indent + "}\n";
}

}  // namespace

std::string emit_umple(const StateMachine& sm) {
  require_valid(sm);
  if (!is_identifier(sm.name)) {
    throw EmitError("machine name is not an identifier: '" + sm.name + "'");
  }
  for (const auto& t : sm.transitions) check_emittable(t);

  std::string out = "class " + sm.name + " {\n  sm {\n";
  for (const auto& s : sm.root_states) emit_state(s, sm.transitions, 2, out);
  out += "  }\n}\n";
  return out;
}

// ---------------------------------------------------------------------------
// Lexer

namespace {

enum class Tok {
  kIdent,
  kLBrace,
  kRBrace,
  kGuard,    // [ ... ]   text = inner
  kActions,  // / { ... } text = inner
  kArrow,
  kSemi,
  kBar,      // ||
  kOther,
  kEnd,
};

struct Token {
  Tok kind;
  std::string text;
  std::size_t line;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run(std::vector<ParseDiagnostic>& diags) {
    std::vector<Token> out;
    while (true) {
      skip_space_and_comments();
      if (pos_ >= src_.size()) break;
      const std::size_t line = line_;
      const char c = src_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
                src_[pos_] == '_' || src_[pos_] == '.')) {
          ++pos_;
        }
        while (pos_ < src_.size() && src_[pos_] == '*') ++pos_;
        out.push_back({Tok::kIdent, std::string(src_.substr(start, pos_ - start)), line});
      } else if (c == '{') {
        ++pos_;
        out.push_back({Tok::kLBrace, "{", line});
      } else if (c == '}') {
        ++pos_;
        out.push_back({Tok::kRBrace, "}", line});
      } else if (c == ';') {
        ++pos_;
        out.push_back({Tok::kSemi, ";", line});
      } else if (c == '-' && peek(1) == '>') {
        pos_ += 2;
        out.push_back({Tok::kArrow, "->", line});
      } else if (c == '|' && peek(1) == '|') {
        pos_ += 2;
        out.push_back({Tok::kBar, "||", line});
      } else if (c == '[') {
        auto inner = balanced('[', ']');
        if (!inner) {
          diags.push_back({line, Severity::kError, "unterminated guard '['"});
          out.push_back({Tok::kOther, "[", line});
        } else {
          out.push_back({Tok::kGuard, *inner, line});
        }
      } else if (c == '/' && next_non_space_is('{')) {
        ++pos_;
        skip_space_and_comments();
        auto inner = balanced('{', '}');
        if (!inner) {
          diags.push_back({line, Severity::kError, "unterminated action block"});
          out.push_back({Tok::kOther, "/", line});
        } else {
          out.push_back({Tok::kActions, *inner, line});
        }
      } else {
        // Multi-byte UTF-8 sequences and stray punctuation end up here.
        ++pos_;
        out.push_back({Tok::kOther, std::string(1, c), line});
      }
    }
    out.push_back({Tok::kEnd, "", line_});
    return out;
  }

 private:
  char peek(std::size_t off) const {
    return pos_ + off < src_.size() ? src_[pos_ + off] : '\0';
  }

  bool next_non_space_is(char want) const {
    std::size_t p = pos_ + 1;
    while (p < src_.size() && (src_[p] == ' ' || src_[p] == '\t')) ++p;
    return p < src_.size() && src_[p] == want;
  }

  void advance() {
    if (src_[pos_] == '\n') ++line_;
    ++pos_;
  }

  void skip_space_and_comments() {
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '/' && peek(1) == '/') {
        while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
      } else if (c == '/' && peek(1) == '*') {
        pos_ += 2;
        while (pos_ < src_.size() && !(src_[pos_] == '*' && peek(1) == '/')) {
          advance();
        }
        pos_ = std::min(src_.size(), pos_ + 2);
      } else {
        return;
      }
    }
  }

  // Consumes open ... close with nesting; returns the inner text.
  std::optional<std::string> balanced(char open, char close) {
    const std::size_t save_pos = pos_;
    const std::size_t save_line = line_;
    int depth = 0;
    std::size_t start = pos_ + 1;
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == open) {
        ++depth;
      } else if (c == close) {
        if (--depth == 0) {
          std::string inner(src_.substr(start, pos_ - start));
          ++pos_;
          return inner;
        }
      }
      advance();
    }
    pos_ = save_pos + 1;
    line_ = save_line;
    return std::nullopt;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
};

// ---------------------------------------------------------------------------
// Parser

struct PendingTransition {
  std::string source;
  std::string target;  // raw target token
  std::optional<std::string> event;
  std::optional<std::string> guard;
  std::vector<std::string> actions;
  std::size_t line;
};

class Parser {
 public:
  Parser(std::vector<Token> tokens, ParseMode mode,
         std::vector<ParseDiagnostic>& diags)
      : toks_(std::move(tokens)), mode_(mode), diags_(diags) {}

  std::optional<StateMachine> parse_document() {
    StateMachine sm;
    bool wrapped = false;
    if (lenient()) {
      if (!seek_machine_start(sm, wrapped)) {
        warn(cur().line, "no state machine block found");
        return std::nullopt;
      }
    } else {
      if (is_ident("class")) {
        ++i_;
        if (cur().kind != Tok::kIdent) return fail("expected class name");
        sm.name = cur().text;
        ++i_;
        if (!expect(Tok::kLBrace, "'{' after class name")) return std::nullopt;
        wrapped = true;
      }
      if (cur().kind != Tok::kIdent) return fail("expected state machine name");
      if (!wrapped) sm.name = cur().text;
      ++i_;
      if (!expect(Tok::kLBrace, "'{' after state machine name")) return std::nullopt;
    }

    parse_body(nullptr, sm.root_states, /*allow_regions=*/false);
    if (failed_) return std::nullopt;
    if (!expect(Tok::kRBrace, "'}' closing the state machine")) {
      if (!lenient()) return std::nullopt;
    }
    if (wrapped && !expect(Tok::kRBrace, "'}' closing the class")) {
      if (!lenient()) return std::nullopt;
    }
    if (cur().kind != Tok::kEnd) {
      if (lenient()) {
        warn(cur().line, "content after the state machine ignored");
      } else {
        return fail("unexpected content after the state machine");
      }
    }

    resolve_transitions(sm);
    if (failed_) return std::nullopt;
    finalize_structure(sm);
    return sm;
  }

 private:
  bool lenient() const { return mode_ == ParseMode::kLenient; }
  const Token& cur() const { return toks_[i_]; }
  const Token& at(std::size_t off) const {
    return toks_[std::min(i_ + off, toks_.size() - 1)];
  }
  bool is_ident(std::string_view text) const {
    return cur().kind == Tok::kIdent && cur().text == text;
  }

  std::nullopt_t fail(const std::string& msg) {
    diags_.push_back({cur().line, Severity::kError, msg});
    failed_ = true;
    return std::nullopt;
  }

  void warn(std::size_t line, const std::string& msg) {
    diags_.push_back({line, Severity::kWarning, msg});
  }

  // Strict: records an error and stops. Lenient: records a warning.
  void problem(std::size_t line, const std::string& msg) {
    if (lenient()) {
      warn(line, msg);
    } else {
      diags_.push_back({line, Severity::kError, msg});
      failed_ = true;
    }
  }

  bool expect(Tok kind, const std::string& what) {
    if (cur().kind == kind) {
      ++i_;
      return true;
    }
    problem(cur().line, "expected " + what);
    return false;
  }

  // Lenient prelude: skip prose until "<ident> {", honouring an optional
  // "class <Name> {" wrapper.
  bool seek_machine_start(StateMachine& sm, bool& wrapped) {
    while (cur().kind != Tok::kEnd) {
      if (is_ident("class") && at(1).kind == Tok::kIdent &&
          at(2).kind == Tok::kLBrace) {
        sm.name = at(1).text;
        i_ += 3;
        wrapped = true;
        while (cur().kind != Tok::kEnd &&
               !(cur().kind == Tok::kIdent && at(1).kind == Tok::kLBrace)) {
          if (cur().kind == Tok::kRBrace) return false;
          ++i_;
        }
        if (cur().kind == Tok::kEnd) return false;
        i_ += 2;
        return true;
      }
      if (cur().kind == Tok::kIdent && at(1).kind == Tok::kLBrace) {
        sm.name = cur().text;
        i_ += 2;
        return true;
      }
      ++i_;
    }
    return false;
  }

  // Skips the rest of a bad statement: through ';', or up to a '}' or the
  // first token on a later line.
  void recover(std::size_t line) {
    while (cur().kind != Tok::kEnd) {
      if (cur().kind == Tok::kSemi) {
        ++i_;
        return;
      }
      if (cur().kind == Tok::kRBrace || cur().line > line) return;
      ++i_;
    }
  }

  bool history_marker_here() const {
    if (!(cur().kind == Tok::kIdent && (cur().text == "H" || cur().text == "H*"))) {
      return false;
    }
    const Token& next = at(1);
    if (next.kind == Tok::kSemi) return true;
    return next.kind == Tok::kEnd || next.kind == Tok::kRBrace ||
           next.line > cur().line;
  }

  // Parses entries until the closing '}' (not consumed).
  void parse_body(StateNode* owner, std::vector<StateNode>& root_out,
                  bool allow_regions) {
    std::vector<Region> regions(1);
    std::size_t bar_line = 0;
    while (!failed_ && cur().kind != Tok::kEnd && cur().kind != Tok::kRBrace) {
      const std::size_t line = cur().line;
      if (cur().kind == Tok::kBar) {
        ++i_;
        if (!allow_regions) {
          problem(line, "'||' outside a composite state");
          continue;
        }
        if (regions.back().substates.empty()) {
          problem(line, "'||' without states before it");
          continue;
        }
        regions.emplace_back();
        bar_line = line;
        continue;
      }
      if (history_marker_here()) {
        ++i_;
        if (cur().kind == Tok::kSemi) ++i_;
        if (owner == nullptr) {
          problem(line, "history marker outside a state");
        } else {
          owner->has_history = true;
        }
        continue;
      }
      if (cur().kind == Tok::kIdent && at(1).kind == Tok::kLBrace) {
        parse_state(regions.back().substates);
        continue;
      }
      if (cur().kind == Tok::kIdent &&
          (cur().text == "entry" || cur().text == "exit" || cur().text == "do") &&
          at(1).kind != Tok::kArrow) {
        problem(line, "entry/exit/do actions are not supported");
        ++i_;
        if (cur().kind == Tok::kActions) {
          ++i_;
          if (cur().kind == Tok::kSemi) ++i_;
        } else {
          recover(line);
        }
        continue;
      }
      parse_transition(owner, line);
    }
    if (!regions.back().substates.empty() || regions.size() == 1) {
      // keep
    } else {
      problem(bar_line, "'||' without states after it");
      regions.pop_back();
    }
    if (owner == nullptr) {
      root_out = std::move(regions.front().substates);
      return;
    }
    if (!regions.front().substates.empty()) {
      owner->kind = StateKind::kComposite;
      owner->regions = std::move(regions);
    }
  }

  void parse_state(std::vector<StateNode>& siblings) {
    const std::size_t line = cur().line;
    StateNode node;
    node.name = cur().text;
    i_ += 2;  // ident '{'
    if (node.name.find('.') != std::string::npos || node.name.back() == '*') {
      problem(line, "invalid state name '" + node.name + "'");
      node.name = to_identifier(node.name);
    }
    parse_body(&node, siblings, /*allow_regions=*/true);
    if (failed_) return;
    if (!expect(Tok::kRBrace, "'}' closing state " + node.name)) return;
    if (node.has_history && !node.is_composite()) {
      problem(line, "history marker in simple state " + node.name);
      node.has_history = false;
    }
    const std::string key = try_normalize_name(node.name);
    if (key.empty()) {
      problem(line, "unusable state name '" + node.name + "'");
      return;
    }
    if (!seen_.emplace(key, line).second) {
      problem(line, "duplicate state '" + node.name + "'");
      return;
    }
    siblings.push_back(std::move(node));
  }

  void parse_transition(StateNode* owner, std::size_t line) {
    PendingTransition t;
    t.line = line;
    if (cur().kind == Tok::kIdent && at(1).kind != Tok::kLBrace) {
      t.event = cur().text;
      ++i_;
      if (t.event->find('.') != std::string::npos || t.event->back() == '*') {
        problem(line, "invalid event name '" + *t.event + "'");
        if (failed_) return;
        recover(line);
        return;
      }
    }
    if (cur().kind == Tok::kGuard) {
      std::string g = text::collapse_space(cur().text);
      ++i_;
      if (g.empty()) {
        problem(line, "empty guard");
        if (failed_) return;
      } else {
        t.guard = std::move(g);
      }
    }
    if (cur().kind == Tok::kActions) {
      t.actions = split_actions(cur().text);
      ++i_;
    }
    if (cur().kind != Tok::kArrow) {
      problem(line, t.event ? "expected '->' after '" + *t.event + "'"
                            : "unexpected '" + cur().text + "'");
      if (failed_) return;
      if (cur().kind == Tok::kEnd) return;
      if (cur().line == line && cur().kind != Tok::kRBrace &&
          cur().kind != Tok::kSemi && !t.event) {
        ++i_;
      }
      recover(line);
      return;
    }
    ++i_;
    if (lenient() && cur().kind == Tok::kActions && t.actions.empty()) {
      t.actions = split_actions(cur().text);
      ++i_;
    }
    if (cur().kind != Tok::kIdent) {
      problem(line, "transition without target");
      if (failed_) return;
      recover(line);
      return;
    }
    t.target = cur().text;
    ++i_;
    if (cur().kind == Tok::kSemi) {
      ++i_;
    } else {
      problem(line, "expected ';' after transition target");
      if (failed_) return;
    }
    if (owner == nullptr) {
      problem(line, "transition outside a state");
      return;
    }
    t.source = owner->name;
    pending_.push_back(std::move(t));
  }

  static std::vector<std::string> split_actions(const std::string& body) {
    std::vector<std::string> out;
    for (auto& part : text::split(body, ';')) {
      std::string a = text::collapse_space(part);
      if (!a.empty()) out.push_back(std::move(a));
    }
    return out;
  }

  void resolve_transitions(StateMachine& sm) {
    for (auto& p : pending_) {
      std::string target = p.target;
      bool to_history = false;
      auto dot = target.rfind('.');
      if (dot != std::string::npos) {
        std::string last = target.substr(dot + 1);
        std::string head = target.substr(0, dot);
        if (last == "H" || last == "H*") {
          to_history = true;
          auto prev = head.rfind('.');
          target = prev == std::string::npos ? head : head.substr(prev + 1);
        } else {
          target = last;
        }
        problem(p.line, "qualified target '" + p.target + "' resolved to '" +
                            target + "'");
        if (failed_) return;
      }
      StateNode* dst = find_state(sm, target);
      if (dst == nullptr) {
        problem(p.line, "unknown target '" + p.target + "'");
        if (failed_) return;
        continue;
      }
      if (to_history && dst->is_composite()) dst->has_history = true;
      const StateNode* src = find_state(sm, p.source);
      if (src == nullptr) continue;  // source dropped as a duplicate
      sm.transitions.push_back(
          {src->name, dst->name, p.event, p.guard, std::move(p.actions)});
    }
  }

  std::vector<Token> toks_;
  std::size_t i_ = 0;
  ParseMode mode_;
  std::vector<ParseDiagnostic>& diags_;
  bool failed_ = false;
  std::map<std::string, std::size_t> seen_;
  std::vector<PendingTransition> pending_;
};

// Keeps the content of the first fenced block that contains a '{'. Returns
// the text unchanged when it has no fences.
std::string strip_fences(std::string_view text) {
  if (text.find("```") == std::string_view::npos) return std::string(text);
  std::vector<std::string> blocks;
  std::string current;
  bool inside = false;
  for (const auto& line : text::split_lines(text)) {
    std::string_view trimmed = text::trim(line);
    if (trimmed.starts_with("```")) {
      if (inside) blocks.push_back(std::move(current));
      current.clear();
      inside = !inside;
      continue;
    }
    if (inside) {
      current += line;
      current += '\n';
    } else {
      // Blank out prose but keep line numbering stable.
      current += '\n';
    }
  }
  if (inside) blocks.push_back(std::move(current));
  for (auto& b : blocks) {
    if (b.find('{') != std::string::npos) return b;
  }
  return std::string(text);
}

}  // namespace

UmpleDocument parse_umple(std::string_view text, ParseMode mode) {
  UmpleDocument doc;
  doc.source_text = std::string(text);
  const std::string body =
      mode == ParseMode::kLenient ? strip_fences(text) : std::string(text);

  Lexer lexer(body);
  auto tokens = lexer.run(doc.diagnostics);
  if (mode == ParseMode::kLenient) {
    for (auto& d : doc.diagnostics) d.severity = Severity::kWarning;
  } else if (doc.error_count() > 0) {
    throw ParseFailed(doc.diagnostics);
  }

  Parser parser(std::move(tokens), mode, doc.diagnostics);
  auto machine = parser.parse_document();

  if (mode == ParseMode::kStrict) {
    if (!machine || doc.error_count() > 0) throw ParseFailed(doc.diagnostics);
    auto violations = validate(*machine);
    if (!violations.empty()) {
      for (const auto& v : violations) {
        doc.diagnostics.push_back({1, Severity::kError, v.to_string()});
      }
      throw ParseFailed(doc.diagnostics);
    }
    doc.machine = std::move(machine);
    return doc;
  }

  if (!machine) {
    machine.emplace();
    machine->name = "sm";
  }
  if (!is_identifier(machine->name)) machine->name = "sm";
  for (const auto& v : validate(*machine)) {
    doc.diagnostics.push_back({1, Severity::kWarning, v.to_string()});
  }
  doc.machine = std::move(machine);
  return doc;
}

}  // namespace smforge
