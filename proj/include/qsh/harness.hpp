#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qsh/model_spec.hpp"

namespace qsh::harness {

inline constexpr const char* kToolName = "qsh";
inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr int kFormatVersion = 1;
inline constexpr double kDefaultBudget = 5e12;

enum class Task { spin_chern_transfer, spin_chern_realspace, edge_current, perturbation_scan, gap_report };
std::string to_string(Task t);
Task task_from_string(const std::string& name);

struct SweepSpec {
  std::vector<std::pair<std::string, std::vector<nlohmann::json>>> grid;  // key order = nesting order
  std::vector<std::uint64_t> seeds;                                       // empty: model seed only
};

/// Validated experiment description. `params` holds every task parameter with
/// defaults filled in; `raw` is the config exactly as given.
struct ExperimentConfig {
  int format_version = kFormatVersion;
  Task task = Task::gap_report;
  ModelSpec model;
  nlohmann::json params;
  std::string output_dir;
  std::optional<SweepSpec> sweep;
  double budget = kDefaultBudget;
  nlohmann::json raw;
};

/// Strict validation; throws InputError naming the offending field.
ExperimentConfig parse_config(const nlohmann::json& j);
/// Reads and validates a file; malformed JSON is an InputError.
ExperimentConfig load_config(const std::filesystem::path& path);

/// FNV-1a 64 of the canonical (sorted-key, compact) dump, as 16 hex digits.
std::string config_hash(const nlohmann::json& j);

/// Rough work estimate: (largest matrix dimension)^3 x number of
/// decompositions for one run of the task.
double estimate_cost(const ExperimentConfig& cfg);

/// Column names of the results CSV for a task.
std::vector<std::string> task_columns(Task t);

struct AuxFile {
  std::string name;
  std::string content;
};

/// Rows and side files produced by a task. Rows are appended as they are
/// computed so partial output survives a guard failure.
struct TaskOutput {
  std::vector<std::vector<std::string>> rows;
  nlohmann::json summary = nlohmann::json::object();
  std::vector<AuxFile> aux;
  std::vector<std::uint64_t> seeds;
};

/// Runs the task in memory. Throws InputError / GuardError.
void execute(const ExperimentConfig& cfg, int threads, TaskOutput& out);

struct RunOptions {
  std::optional<std::filesystem::path> out_dir;  // overrides cfg.output_dir
  int threads = 1;
  bool force_budget = false;
};

/// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitGuard = 3;

/// `run`: results.csv, result.json, side files and manifest.json in the
/// output directory. Messages go to `log`.
int run(const std::filesystem::path& config_path, const RunOptions& opts, std::ostream& log);
int run(const ExperimentConfig& cfg, const RunOptions& opts, std::ostream& log);

/// `sweep`: one task run per (grid point, seed) into sweep.csv, resumable
/// from sweep.checkpoint.jsonl.
int sweep(const std::filesystem::path& config_path, const RunOptions& opts, std::ostream& log);

/// `validate`: schema check only.
int validate(const std::filesystem::path& config_path, std::ostream& log);

/// `report`: plot data (.dat) and summary.txt from the CSVs in a result directory.
int report(const std::filesystem::path& dir, std::ostream& log);

/// CSV helpers shared with tests.
std::string csv_line(const std::vector<std::string>& cells);
std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path);
std::string format_number(double x);

}  // namespace qsh::harness
