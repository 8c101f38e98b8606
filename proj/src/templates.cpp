#include "smforge/templates.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace smforge {

namespace detail {
const std::map<std::string, std::string>& embedded_templates();
}

namespace {

struct Placeholder {
  std::size_t begin;
  std::size_t end;  // one past "}}"
  std::string name;
};

std::vector<Placeholder> scan(std::string_view text) {
  std::vector<Placeholder> out;
  std::size_t pos = 0;
  while ((pos = text.find("{{", pos)) != std::string_view::npos) {
    const auto close = text.find("}}", pos + 2);
    if (close == std::string_view::npos) throw TemplateError("unterminated '{{' in template");
    std::string name(text.substr(pos + 2, close - pos - 2));
    out.push_back({pos, close + 2, std::move(name)});
    pos = close + 2;
  }
  return out;
}

}  // namespace

std::vector<std::string> placeholders(std::string_view text) {
  std::vector<std::string> out;
  for (auto& p : scan(text)) {
    if (std::find(out.begin(), out.end(), p.name) == out.end()) out.push_back(p.name);
  }
  return out;
}

std::string render_text(std::string_view text, const std::map<std::string, std::string>& values) {
  std::string out;
  std::size_t last = 0;
  for (const auto& p : scan(text)) {
    auto it = values.find(p.name);
    if (it == values.end()) throw TemplateError("no value for placeholder {{" + p.name + "}}");
    out.append(text.substr(last, p.begin - last));
    out.append(it->second);
    last = p.end;
  }
  out.append(text.substr(last));
  return out;
}

TemplateSet TemplateSet::builtin() {
  TemplateSet set;
  for (const auto& [k, v] : detail::embedded_templates()) set.templates_.emplace(k, v);
  return set;
}

TemplateSet TemplateSet::with_overrides(const std::filesystem::path& dir) {
  TemplateSet set = builtin();
  if (!std::filesystem::is_directory(dir)) {
    throw TemplateError("template directory " + dir.string() + " not found");
  }
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file() || e.path().extension() != ".txt") continue;
    auto rel = std::filesystem::relative(e.path(), dir);
    rel.replace_extension();
    std::ifstream in(e.path(), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    set.set(rel.generic_string(), ss.str());
  }
  return set;
}

bool TemplateSet::contains(std::string_view key) const { return templates_.contains(key); }

const std::string& TemplateSet::get(std::string_view key) const {
  auto it = templates_.find(key);
  if (it == templates_.end()) throw TemplateError("no template '" + std::string(key) + "'");
  return it->second;
}

std::vector<std::string> TemplateSet::keys() const {
  std::vector<std::string> out;
  for (const auto& [k, _] : templates_) out.push_back(k);
  return out;
}

void TemplateSet::set(std::string key, std::string text) {
  templates_.insert_or_assign(std::move(key), std::move(text));
}

std::string TemplateSet::render(std::string_view key,
                                const std::map<std::string, std::string>& values) const {
  try {
    return render_text(get(key), values);
  } catch (const TemplateError& e) {
    throw TemplateError(std::string(key) + ": " + e.what());
  }
}

}  // namespace smforge
