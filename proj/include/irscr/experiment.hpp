#pragma once

// Monte-Carlo harness: sweep one axis (transmit power, interference
// tolerance, or element count), average rates over seeded realizations, and
// emit machine-readable results. Schemes at a grid point always consume the
// same channel realizations so comparisons are paired.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "irscr/ao.hpp"
#include "irscr/channel_gen.hpp"
#include "irscr/types.hpp"

namespace irscr {

enum class SweepKind { power, ptol, elements };

const char* to_string(SweepKind k);

struct ExperimentConfig {
  SweepKind sweep = SweepKind::power;
  std::vector<double> grid;  // dBm for power/ptol; element counts for elements
  ScenarioDims dims;
  GeometryConfig geometry;
  double p_max_dbm = 30.0;
  double p_tol_dbm = -90.0;
  std::vector<std::string> schemes = {"proposed", "baseline1", "baseline2"};
  int realizations = 50;
  std::uint64_t base_seed = 1;
  int threads = 0;          // 0: hardware concurrency
  int failure_budget = 5;   // tolerated per (grid point, scheme)
  std::string output_dir = "out";
  AoConfig ao;

  void validate() const;
};

ExperimentConfig load_experiment_config(std::istream& is);
ExperimentConfig load_experiment_config_file(const std::string& path);

struct ResultRow {
  std::string sweep;
  double value = 0.0;
  std::string scheme;
  double mean_rate = 0.0;
  double std_error = 0.0;
  int realizations = 0;
  int failures = 0;
};

struct ResultTable {
  std::vector<ResultRow> rows;

  bool operator==(const ResultTable&) const = default;
};

// Run the whole sweep. Throws when a (grid point, scheme) cell exceeds the
// failure budget.
ResultTable run_sweep(const ExperimentConfig& cfg);

// One realization of one scheme; exposed for the `single` CLI subcommand.
struct SingleRunOutput {
  double rate = 0.0;
  AoTrace trace;  // empty for baselines
};
SingleRunOutput run_single(const ExperimentConfig& cfg, const std::string& scheme,
                           std::uint64_t seed);

// results.csv plus a companion matplotlib script next to it
void emit(const ResultTable& table, const std::filesystem::path& out_dir);
void write_result_table(const ResultTable& table, std::ostream& os);
ResultTable parse_result_table(std::istream& is);

}  // namespace irscr
