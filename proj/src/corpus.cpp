#include "smforge/corpus.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <sstream>
#include <tuple>

#include "smforge/umple.hpp"
#include "text_util.hpp"

namespace smforge {

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingFile(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t& field(ComponentCounts& c, Component comp) {
  switch (comp) {
    case Component::kStates: return c.states;
    case Component::kTransitions: return c.transitions;
    case Component::kGuards: return c.guards;
    case Component::kActions: return c.actions;
    case Component::kHierarchical: return c.hierarchical_states;
    case Component::kParallel: return c.parallel_regions;
    case Component::kHistory: return c.history_states;
  }
  return c.states;
}

std::size_t parse_count(const std::string& value, std::size_t lineno) {
  std::size_t used = 0;
  long long v = -1;
  try {
    v = std::stoll(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != value.size() || v < 0) {
    throw MetaError("meta line " + std::to_string(lineno) + ": '" + value + "' is not a count");
  }
  return static_cast<std::size_t>(v);
}

}  // namespace

ScenarioMeta parse_meta(std::string_view text) {
  ScenarioMeta meta;
  std::size_t lineno = 0;
  for (auto line : text::split_lines(text)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t(text::trim(line));
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw MetaError("meta line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string lhs(text::trim(std::string_view(t).substr(0, eq)));
    const std::string value(text::trim(std::string_view(t).substr(eq + 1)));

    if (const auto colon = lhs.find(':'); colon != std::string::npos) {
      const std::string space_key = text::to_lower(text::trim(std::string_view(lhs).substr(0, colon)));
      const std::string gen(text::trim(std::string_view(lhs).substr(colon + 1)));
      auto space = alias_space_from_key(space_key);
      if (!space) {
        throw MetaError("meta line " + std::to_string(lineno) + ": unknown alias space '" +
                        space_key + "'");
      }
      if (gen.empty() || value.empty()) {
        throw MetaError("meta line " + std::to_string(lineno) + ": empty alias side");
      }
      meta.aliases.add(*space, gen, value);
      meta.alias_pairs.push_back({*space, gen, value});
      continue;
    }

    const std::string key = text::to_lower(lhs);
    if (auto comp = component_from_key(key)) {
      field(meta.declared, *comp) = parse_count(value, lineno);
      if (std::find(meta.declared_keys.begin(), meta.declared_keys.end(), *comp) ==
          meta.declared_keys.end()) {
        meta.declared_keys.push_back(*comp);
      }
    } else if (key == "id") {
      meta.id = value;
    } else if (key == "pool") {
      const std::string v = text::to_lower(value);
      if (v != "true" && v != "false") {
        throw MetaError("meta line " + std::to_string(lineno) + ": pool must be true or false");
      }
      meta.pool_member = v == "true";
    } else if (key == "pool_rank") {
      meta.pool_rank = static_cast<int>(parse_count(value, lineno));
    } else {
      throw MetaError("meta line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
  }
  return meta;
}

Scenario load_scenario(const std::filesystem::path& dir) {
  const std::string description = read_file(dir / "description.txt");
  const std::string model_text = read_file(dir / "model.ump");
  const std::string meta_text = read_file(dir / "meta.toml");

  ScenarioMeta meta;
  try {
    meta = parse_meta(meta_text);
  } catch (const MetaError& e) {
    throw MetaError((dir / "meta.toml").string() + ": " + e.what());
  } catch (const AliasConflict& e) {
    throw MetaError((dir / "meta.toml").string() + ": " + e.what());
  }
  if (meta.declared_keys.size() != std::size(kAllComponents)) {
    throw MetaError((dir / "meta.toml").string() + ": all seven component counts are required");
  }

  UmpleDocument doc = parse_umple(model_text, ParseMode::kStrict);

  Scenario s;
  s.id = meta.id ? *meta.id : dir.filename().string();
  s.description = description;
  s.truth = std::move(*doc.machine);
  s.declared = meta.declared;
  s.aliases = std::move(meta.aliases);
  s.alias_pairs = std::move(meta.alias_pairs);
  s.is_example_pool_member = meta.pool_member;
  s.pool_rank = meta.pool_rank;
  s.dir = dir;
  return s;
}

std::vector<Scenario> load_corpus(const std::filesystem::path& root) {
  if (!std::filesystem::is_directory(root)) throw MissingFile(root);
  std::vector<std::filesystem::path> dirs;
  for (const auto& e : std::filesystem::directory_iterator(root)) {
    if (e.is_directory() && std::filesystem::exists(e.path() / "model.ump")) dirs.push_back(e.path());
  }
  std::vector<Scenario> out;
  for (const auto& d : dirs) out.push_back(load_scenario(d));
  std::sort(out.begin(), out.end(),
            [](const Scenario& a, const Scenario& b) { return a.id < b.id; });
  return out;
}

std::string VerifyResult::detail() const {
  if (ok()) return "ok";
  std::string out;
  for (const auto& m : mismatches) {
    if (!out.empty()) out += "; ";
    out += std::string(component_key(m.component)) + ": declared " + std::to_string(m.declared) +
           ", actual " + std::to_string(m.actual);
  }
  return out;
}

namespace {

VerifyResult compare(const ComponentCounts& expected, const ComponentCounts& actual) {
  VerifyResult r;
  for (Component c : kAllComponents) {
    const auto e = count_of(expected, c);
    const auto a = count_of(actual, c);
    if (e != a) r.mismatches.push_back({c, e, a});
  }
  return r;
}

struct Reference {
  std::string_view id;
  ComponentCounts counts;
};

// states, transitions, guards, actions, hierarchical, parallel, history
constexpr std::array<Reference, 8> kReferences{{
    {"printer", {6, 17, 6, 3, 2, 0, 1}},
    {"spa_manager", {11, 17, 4, 0, 3, 5, 1}},
    {"dishwasher", {9, 17, 4, 7, 2, 2, 1}},
    {"chess_clock", {9, 16, 4, 6, 3, 2, 1}},
    {"bread_maker", {9, 17, 4, 5, 3, 0, 1}},
    {"thermomix_tm6", {9, 17, 7, 6, 1, 0, 1}},
    {"w_umple", {17, 41, 5, 24, 5, 2, 1}},
    {"ssc7", {7, 24, 10, 16, 1, 0, 1}},
}};

}  // namespace

VerifyResult verify_counts(const Scenario& s) {
  return compare(s.declared, component_counts(s.truth));
}

std::optional<ComponentCounts> reference_counts(std::string_view scenario_id) {
  const std::string key = try_normalize_name(scenario_id);
  for (const auto& r : kReferences) {
    if (try_normalize_name(r.id) == key) return r.counts;
  }
  return std::nullopt;
}

std::optional<VerifyResult> verify_reference(const Scenario& s) {
  auto ref = reference_counts(s.id);
  if (!ref) return std::nullopt;
  return compare(*ref, component_counts(s.truth));
}

std::vector<std::string> example_pool(const std::vector<Scenario>& corpus) {
  std::vector<const Scenario*> members;
  for (const auto& s : corpus) {
    if (s.is_example_pool_member) members.push_back(&s);
  }
  std::sort(members.begin(), members.end(), [](const Scenario* a, const Scenario* b) {
    return std::tie(a->pool_rank, a->id) < std::tie(b->pool_rank, b->id);
  });
  std::vector<std::string> out;
  for (const auto* s : members) out.push_back(s->id);
  return out;
}

ExampleSource to_example(const Scenario& s) { return {s.id, s.description, s.truth}; }

std::vector<ExampleSource> to_examples(const std::vector<Scenario>& corpus) {
  std::vector<ExampleSource> out;
  for (const auto& s : corpus) out.push_back(to_example(s));
  return out;
}

}  // namespace smforge
