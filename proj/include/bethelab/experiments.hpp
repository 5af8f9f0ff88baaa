#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bethelab/io.hpp"

namespace bethelab {

inline constexpr int kCsvSchemaVersion = 1;

// One long-format CSV line; see docs/csv_schema.md.
struct ResultRow {
  std::string experiment, command, family;
  int n = 0;
  double beta = 0;
  int ell = 0;
  std::string quantity;
  double value = 0;
  double band = 0;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
  double wall_ms = 0;
  std::string note;
};

struct RunOptions {
  std::optional<std::uint64_t> seed;        // overrides the spec
  std::optional<std::uint64_t> budget_cap;  // overrides the spec
  int jobs = 1;
};

struct ExperimentResult {
  std::string experiment;
  std::vector<ResultRow> rows;
  json report;  // decompose only
};

const std::vector<std::string>& experiment_commands();
ExperimentResult run_experiment(const std::string& command, const json& spec, const RunOptions& opt = {});

std::string csv_header();
std::string csv_line(const ResultRow& r);
void write_csv(const std::string& path, const std::vector<ResultRow>& rows);

}  // namespace bethelab
