#include "smforge/tables.hpp"

#include <algorithm>
#include <cctype>

#include "text_util.hpp"

namespace smforge {

std::string_view row_kind_name(RowKind kind) {
  switch (kind) {
    case RowKind::kSimple: return "simple";
    case RowKind::kComposite: return "composite";
    case RowKind::kHistoryMarker: return "history";
  }
  return "";
}

// ---------------------------------------------------------------------------
// Tolerant scanner

namespace {

std::string decode_entities(std::string_view s) {
  static constexpr std::pair<std::string_view, char> kEntities[] = {
      {"&amp;", '&'}, {"&lt;", '<'}, {"&gt;", '>'}, {"&quot;", '"'}};
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    bool matched = false;
    if (s[i] == '&') {
      for (const auto& [name, ch] : kEntities) {
        if (text::iequals_prefix(s, i, name)) {
          out.push_back(ch);
          i += name.size();
          matched = true;
          break;
        }
      }
    }
    if (!matched) out.push_back(s[i++]);
  }
  return out;
}

struct Tag {
  std::string name;  // lowercase, without '/'
  bool closing = false;
  std::size_t end = 0;  // index one past '>'
};

// Recognizes a tag starting at text[pos] == '<'. Returns nullopt when the
// '<' is plain text (not followed by a letter, '/' + letter, or '!').
std::optional<Tag> read_tag(std::string_view text, std::size_t pos) {
  std::size_t p = pos + 1;
  if (p >= text.size()) return std::nullopt;
  Tag tag;
  if (text.substr(p, 3) == "!--") {
    auto close = text.find("-->", p + 3);
    if (close == std::string_view::npos) return std::nullopt;
    tag.name = "!--";
    tag.end = close + 3;
    return tag;
  }
  if (text[p] == '/') {
    tag.closing = true;
    ++p;
  }
  if (p >= text.size()) return std::nullopt;
  if (!std::isalpha(static_cast<unsigned char>(text[p])) && text[p] != '!') {
    return std::nullopt;
  }
  std::size_t name_start = p;
  while (p < text.size() && (std::isalnum(static_cast<unsigned char>(text[p])) ||
                             text[p] == '!' || text[p] == '-')) {
    ++p;
  }
  tag.name = text::to_lower(text.substr(name_start, p - name_start));
  auto close = text.find('>', p);
  if (close == std::string_view::npos) return std::nullopt;
  tag.end = close + 1;
  return tag;
}

class TableBuilder {
 public:
  void open_row() {
    close_row();
    row_open_ = true;
  }
  void close_row() {
    close_cell();
    if (row_open_ && !row_.empty()) table_.rows.push_back(std::move(row_));
    row_.clear();
    row_open_ = false;
  }
  void open_cell() {
    close_cell();
    if (!row_open_) row_open_ = true;
    cell_open_ = true;
  }
  void close_cell() {
    if (!cell_open_) return;
    row_.push_back(text::collapse_space(decode_entities(cell_)));
    cell_.clear();
    cell_open_ = false;
  }
  void text(std::string_view s) {
    if (cell_open_) cell_ += s;
  }
  bool in_cell() const { return cell_open_; }
  RawTable finish() {
    close_row();
    return std::move(table_);
  }

 private:
  RawTable table_;
  std::vector<std::string> row_;
  std::string cell_;
  bool row_open_ = false;
  bool cell_open_ = false;
};

}  // namespace

std::vector<RawTable> extract_html_tables(std::string_view response) {
  std::vector<RawTable> out;
  std::size_t pos = 0;
  while (pos < response.size()) {
    auto lt = response.find('<', pos);
    if (lt == std::string_view::npos) break;
    auto tag = read_tag(response, lt);
    if (!tag || tag->closing || tag->name != "table") {
      pos = lt + 1;
      continue;
    }

    TableBuilder builder;
    int depth = 1;
    std::size_t p = tag->end;
    bool closed = false;
    while (p < response.size()) {
      auto next = response.find('<', p);
      if (next == std::string_view::npos) {
        builder.text(response.substr(p));
        p = response.size();
        break;
      }
      builder.text(response.substr(p, next - p));
      auto t = read_tag(response, next);
      if (!t) {
        builder.text("<");
        p = next + 1;
        continue;
      }
      p = t->end;
      if (t->name == "table") {
        if (!t->closing) {
          ++depth;
        } else if (--depth == 0) {
          closed = true;
          break;
        }
        continue;
      }
      if (depth > 1) continue;  // nested table markup is stripped
      if (t->name == "td" || t->name == "th") {
        if (t->closing) {
          builder.close_cell();
        } else {
          builder.open_cell();
        }
      } else if (t->name == "tr") {
        if (t->closing) {
          builder.close_row();
        } else if (!builder.in_cell()) {
          builder.open_row();
        }
      }
      // Any other tag is dropped.
    }
    if (closed) out.push_back(builder.finish());
    pos = p;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Classification

namespace {

enum class Schema { kStates, kTransitions, kStructure, kEvents, kUnknown };

struct Columns {
  std::map<std::string, std::size_t> index;

  std::optional<std::size_t> find(std::string_view key) const {
    auto it = index.find(std::string(key));
    if (it == index.end()) return std::nullopt;
    return it->second;
  }
  bool has(std::string_view key) const { return find(key).has_value(); }
};

Columns read_header(const std::vector<std::string>& header) {
  Columns cols;
  for (std::size_t i = 0; i < header.size(); ++i) {
    cols.index.emplace(try_normalize_name(header[i]), i);
  }
  return cols;
}

Schema classify(const Columns& c) {
  if (c.has("source") && c.has("target")) return Schema::kTransitions;
  if (c.has("composite") && c.has("substates")) return Schema::kStructure;
  if (c.has("name")) return Schema::kStates;
  if (c.has("event")) return Schema::kEvents;
  return Schema::kUnknown;
}

std::string cell(const std::vector<std::string>& row,
                 std::optional<std::size_t> col) {
  if (!col || *col >= row.size()) return "";
  return row[*col];
}

bool is_blank_value(std::string_view v) {
  static constexpr std::string_view kBlank[] = {"",    "-",  "none", "n/a",
                                                "na",  "null", "\xE2\x80\x94",
                                                "\xE2\x80\x93"};
  const std::string lower = text::to_lower(text::trim(v));
  return std::find(std::begin(kBlank), std::end(kBlank), lower) != std::end(kBlank);
}

std::optional<std::string> optional_cell(const std::vector<std::string>& row,
                                         std::optional<std::size_t> col) {
  std::string v = cell(row, col);
  if (is_blank_value(v)) return std::nullopt;
  return v;
}

std::vector<std::string> split_list(std::string_view s, char sep) {
  std::vector<std::string> out;
  if (is_blank_value(s)) return out;
  for (auto& part : text::split(s, sep)) {
    std::string v = text::collapse_space(part);
    if (!v.empty() && !is_blank_value(v)) out.push_back(std::move(v));
  }
  return out;
}

bool truthy(std::string_view v) {
  const std::string lower = text::to_lower(text::trim(v));
  return lower == "yes" || lower == "y" || lower == "true" || lower == "x" ||
         lower == "1" || lower == "h" || lower == "shallow" || lower == "deep";
}

RowKind parse_kind(std::string_view v) {
  const std::string k = try_normalize_name(v);
  if (k.starts_with("history")) return RowKind::kHistoryMarker;
  if (k == "composite" || k == "superstate" || k == "hierarchical" ||
      k == "compound" || k == "parallel" || k == "orthogonal") {
    return RowKind::kComposite;
  }
  return RowKind::kSimple;
}

std::string row_label(std::size_t index) {
  return "row " + std::to_string(index);
}

}  // namespace

TableParse parse_tables(const std::vector<RawTable>& tables) {
  TableParse result;
  auto& model = result.model;
  for (const auto& table : tables) {
    if (table.rows.empty()) continue;
    const Columns cols = read_header(table.rows.front());
    const Schema schema = classify(cols);
    switch (schema) {
      case Schema::kStates: {
        result.parsed.insert(Component::kStates);
        auto name = cols.find("name");
        auto parent = cols.find("parent");
        auto region = cols.find("region");
        auto kind = cols.find("kind");
        for (std::size_t r = 1; r < table.rows.size(); ++r) {
          const auto& row = table.rows[r];
          StateRow s;
          s.name = cell(row, name);
          if (is_blank_value(s.name)) {
            result.warnings.push_back({"", "states", row_label(r) + " has no state name; skipped"});
            continue;
          }
          s.parent = optional_cell(row, parent);
          s.region = optional_cell(row, region);
          s.kind = kind ? parse_kind(cell(row, kind)) : RowKind::kSimple;
          if (s.kind == RowKind::kHistoryMarker && !s.parent) {
            result.warnings.push_back(
                {"", "history", row_label(r) + " history marker without parent; skipped"});
            continue;
          }
          model.states_rows.push_back(std::move(s));
        }
        break;
      }
      case Schema::kTransitions: {
        result.parsed.insert(Component::kTransitions);
        auto source = cols.find("source");
        auto target = cols.find("target");
        auto event = cols.find("event");
        auto guard = cols.find("guard");
        auto actions = cols.find("actions");
        if (!actions) actions = cols.find("action");
        if (guard) result.parsed.insert(Component::kGuards);
        if (actions) result.parsed.insert(Component::kActions);
        for (std::size_t r = 1; r < table.rows.size(); ++r) {
          const auto& row = table.rows[r];
          TransitionRow t;
          t.source = cell(row, source);
          t.target = cell(row, target);
          if (is_blank_value(t.source) || is_blank_value(t.target)) {
            result.warnings.push_back(
                {"", "transitions", row_label(r) + " missing source or target; skipped"});
            continue;
          }
          t.event = optional_cell(row, event);
          t.guard = optional_cell(row, guard);
          t.actions = split_list(cell(row, actions), ';');
          model.transition_rows.push_back(std::move(t));
        }
        break;
      }
      case Schema::kStructure: {
        result.parsed.insert(Component::kHierarchical);
        result.parsed.insert(Component::kParallel);
        auto composite = cols.find("composite");
        auto region = cols.find("region");
        auto substates = cols.find("substates");
        auto history = cols.find("history");
        if (history) result.parsed.insert(Component::kHistory);
        for (std::size_t r = 1; r < table.rows.size(); ++r) {
          const auto& row = table.rows[r];
          StructureRow s;
          s.composite = cell(row, composite);
          s.substates = split_list(cell(row, substates), ',');
          if (is_blank_value(s.composite) || s.substates.empty()) {
            result.warnings.push_back(
                {"", "hierarchical", row_label(r) + " missing composite or substates; skipped"});
            continue;
          }
          s.region = optional_cell(row, region).value_or("");
          s.has_history = history && truthy(cell(row, history));
          model.structure_rows.push_back(std::move(s));
        }
        break;
      }
      case Schema::kEvents: {
        result.events_parsed = true;
        auto event = cols.find("event");
        for (std::size_t r = 1; r < table.rows.size(); ++r) {
          std::string e = cell(table.rows[r], event);
          if (is_blank_value(e)) continue;
          if (std::find(model.events.begin(), model.events.end(), e) ==
              model.events.end()) {
            model.events.push_back(std::move(e));
          }
        }
        break;
      }
      case Schema::kUnknown:
        result.warnings.push_back({"", "-", "unrecognized table header ignored"});
        break;
    }
  }
  return result;
}

TableParse parse_response_tables(std::string_view response) {
  return parse_tables(extract_html_tables(response));
}

// ---------------------------------------------------------------------------
// Emission

PartialModel partial_from_machine(const StateMachine& sm) {
  require_valid(sm);
  PartialModel p;
  for_each_state(sm.root_states, [&](const StateNode& s, const StateNode* parent,
                                     std::size_t region) {
    StateRow row;
    row.name = s.name;
    if (parent) {
      row.parent = parent->name;
      row.region = parent->regions[region].name;
    }
    row.kind = s.is_composite() ? RowKind::kComposite : RowKind::kSimple;
    p.states_rows.push_back(std::move(row));
  });
  for (const auto& t : sm.transitions) {
    p.transition_rows.push_back({t.source, t.target, t.event, t.guard, t.actions});
  }
  for_each_state(sm.root_states, [&](const StateNode& s, const StateNode*, std::size_t) {
    for (const auto& r : s.regions) {
      StructureRow row;
      row.composite = s.name;
      row.region = r.name;
      for (const auto& sub : r.substates) {
        if (sub.name == r.initial) row.substates.push_back(sub.name);
      }
      for (const auto& sub : r.substates) {
        if (sub.name != r.initial) row.substates.push_back(sub.name);
      }
      row.has_history = s.has_history;
      p.structure_rows.push_back(std::move(row));
    }
  });
  return p;
}

namespace {

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

void emit_row(const std::vector<std::string>& cells, bool header, std::string& out) {
  const char* tag = header ? "th" : "td";
  out += "  <tr>";
  for (const auto& c : cells) {
    out += "<";
    out += tag;
    out += ">" + escape(c) + "</";
    out += tag;
    out += ">";
  }
  out += "</tr>\n";
}

std::string join(const std::vector<std::string>& items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

}  // namespace

std::string emit_partial_tables(const PartialModel& p) {
  std::string out;
  out += "<table>\n";
  emit_row({"Name", "Parent", "Region", "Kind"}, true, out);
  for (const auto& s : p.states_rows) {
    emit_row({s.name, s.parent.value_or(""), s.region.value_or(""),
              std::string(row_kind_name(s.kind))},
             false, out);
  }
  out += "</table>\n\n<table>\n";
  emit_row({"Source", "Target", "Event", "Guard", "Actions"}, true, out);
  for (const auto& t : p.transition_rows) {
    emit_row({t.source, t.target, t.event.value_or(""), t.guard.value_or(""),
              join(t.actions, "; ")},
             false, out);
  }
  out += "</table>\n\n<table>\n";
  emit_row({"Composite", "Region", "Substates", "History"}, true, out);
  for (const auto& s : p.structure_rows) {
    emit_row({s.composite, s.region, join(s.substates, ", "),
              s.has_history ? "yes" : "no"},
             false, out);
  }
  out += "</table>\n";
  return out;
}

std::string emit_tables(const StateMachine& sm) {
  return emit_partial_tables(partial_from_machine(sm));
}

std::string emit_events_table(const std::vector<std::string>& events) {
  std::string out = "<table>\n";
  emit_row({"Event"}, true, out);
  for (const auto& e : events) emit_row({e}, false, out);
  out += "</table>\n";
  return out;
}

}  // namespace smforge
