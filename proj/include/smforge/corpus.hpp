#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "smforge/evaluator.hpp"
#include "smforge/ir.hpp"
#include "smforge/strategies.hpp"

namespace smforge {

class MissingFile : public std::runtime_error {
 public:
  explicit MissingFile(const std::filesystem::path& path)
      : std::runtime_error("missing file " + path.string()), path_(path) {}
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

class MetaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One alias line as written.
struct AliasPair {
  AliasSpace space = AliasSpace::kState;
  std::string generated;
  std::string truth;
};

struct ScenarioMeta {
  std::optional<std::string> id;
  ComponentCounts declared;
  std::vector<Component> declared_keys;  // counts present in the file
  AliasMap aliases;
  std::vector<AliasPair> alias_pairs;
  bool pool_member = false;
  int pool_rank = 0;
};

/// Flat `key = value` lines: the seven component keys, `id`, `pool`
/// (true/false) and `pool_rank`; alias lines `<space>: gen = truth` with
/// space one of state, event, guard, action. `#` starts a comment.
ScenarioMeta parse_meta(std::string_view text);

struct Scenario {
  std::string id;
  std::string description;
  StateMachine truth;
  ComponentCounts declared;
  AliasMap aliases;
  std::vector<AliasPair> alias_pairs;
  bool is_example_pool_member = false;
  int pool_rank = 0;
  std::filesystem::path dir;
};

/// Reads description.txt, model.ump (strict) and meta.toml. Throws
/// MissingFile, ParseFailed or MetaError. Count mismatches are left to
/// verify_counts.
Scenario load_scenario(const std::filesystem::path& dir);

/// Every subdirectory holding a model.ump, sorted by scenario id.
std::vector<Scenario> load_corpus(const std::filesystem::path& root);

struct CountMismatch {
  Component component;
  std::size_t declared = 0;
  std::size_t actual = 0;
};

struct VerifyResult {
  std::vector<CountMismatch> mismatches;

  bool ok() const { return mismatches.empty(); }
  /// "transitions: declared 18, actual 17; ..." or "ok".
  std::string detail() const;
};

VerifyResult verify_counts(const Scenario& s);

/// Ground-truth component counts of the published benchmark, keyed by
/// scenario id (printer, spa_manager, dishwasher, chess_clock, bread_maker,
/// thermomix_tm6, w_umple, ssc7). Used only for imported models.
std::optional<ComponentCounts> reference_counts(std::string_view scenario_id);

/// Compares an imported scenario with its published counts; nullopt when
/// the id has no reference entry.
std::optional<VerifyResult> verify_reference(const Scenario& s);

/// Pool members ordered by (pool_rank, id).
std::vector<std::string> example_pool(const std::vector<Scenario>& corpus);

ExampleSource to_example(const Scenario& s);
std::vector<ExampleSource> to_examples(const std::vector<Scenario>& corpus);

}  // namespace smforge
