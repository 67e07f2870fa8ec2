#include "irscr/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "irscr/baselines.hpp"
#include "irscr/rng.hpp"
#include "irscr/system_model.hpp"

namespace irscr {

const char* to_string(SweepKind k) {
  switch (k) {
    case SweepKind::power: return "power";
    case SweepKind::ptol: return "ptol";
    case SweepKind::elements: return "elements";
  }
  return "unknown";
}

void ExperimentConfig::validate() const {
  if (grid.empty()) throw ConfigError("experiment: sweep grid must be non-empty");
  if (realizations < 1)
    throw ConfigError("experiment: realization count must be >= 1");
  dims.validate();
  geometry.validate();
  ao.validate();
  if (schemes.empty()) throw ConfigError("experiment: no schemes selected");
  for (const auto& s : schemes)
    if (s != "proposed" && s != "baseline1" && s != "baseline2")
      throw ConfigError("experiment: unknown scheme '" + s + "'");
  if (sweep == SweepKind::elements)
    for (double v : grid)
      if (v < 1.0 || v != std::floor(v))
        throw ConfigError("experiment: element grid values must be integers >= 1");
  if (failure_budget < 0)
    throw ConfigError("experiment: failure_budget must be >= 0");
}

namespace {

using nlohmann::json;

SweepKind sweep_from_string(const std::string& s) {
  if (s == "power") return SweepKind::power;
  if (s == "ptol") return SweepKind::ptol;
  if (s == "elements") return SweepKind::elements;
  throw ConfigError("experiment: unknown sweep kind '" + s + "'");
}

template <typename T>
void maybe(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

ExperimentConfig load_experiment_config(std::istream& is) {
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("experiment config: invalid JSON: ") + e.what());
  }
  ExperimentConfig cfg;
  try {
    if (j.contains("sweep")) cfg.sweep = sweep_from_string(j["sweep"]);
    maybe(j, "grid", cfg.grid);
    if (j.contains("dims")) {
      const auto& d = j["dims"];
      maybe(d, "n_t", cfg.dims.n_t);
      maybe(d, "m", cfg.dims.m);
      maybe(d, "k_users", cfg.dims.k_users);
      maybe(d, "i_users", cfg.dims.i_users);
    }
    if (j.contains("geometry")) {
      const auto& g = j["geometry"];
      maybe(g, "cell_radius_m", cfg.geometry.cell_radius);
      maybe(g, "bs_separation_m", cfg.geometry.bs_separation);
      maybe(g, "irs_position", cfg.geometry.irs_position);
      maybe(g, "carrier_hz", cfg.geometry.carrier_hz);
      maybe(g, "pathloss_exponent", cfg.geometry.pathloss_exponent);
      maybe(g, "bs_gain_dbi", cfg.geometry.bs_gain_dbi);
      maybe(g, "noise_power_dbm", cfg.geometry.noise_power_dbm);
      maybe(g, "pu_noise_power_dbm", cfg.geometry.pu_noise_power_dbm);
      if (g.contains("irs_link_model")) {
        const std::string m = g["irs_link_model"].get<std::string>();
        if (m == "product")
          cfg.geometry.irs_link_model = IrsLinkModel::product;
        else if (m == "composite")
          cfg.geometry.irs_link_model = IrsLinkModel::composite;
        else
          throw ConfigError("experiment: unknown irs_link_model '" + m + "'");
      }
    }
    if (j.contains("budgets")) {
      const auto& b = j["budgets"];
      maybe(b, "p_max_dbm", cfg.p_max_dbm);
      maybe(b, "p_tol_dbm", cfg.p_tol_dbm);
    }
    maybe(j, "schemes", cfg.schemes);
    maybe(j, "realizations", cfg.realizations);
    maybe(j, "base_seed", cfg.base_seed);
    maybe(j, "threads", cfg.threads);
    maybe(j, "failure_budget", cfg.failure_budget);
    maybe(j, "output_dir", cfg.output_dir);
    if (j.contains("ao")) {
      const auto& a = j["ao"];
      maybe(a, "eps_ao", cfg.ao.eps_ao);
      maybe(a, "max_outer_iter", cfg.ao.max_outer_iter);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("experiment config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("experiment: cannot open config file " + path);
  return load_experiment_config(is);
}

namespace {

struct Cell {
  double value;         // grid value (dBm or element count)
  std::string scheme;   // row label, e.g. proposed_case1
  std::string method;   // proposed | baseline1 | baseline2
  ScenarioDims dims;
  double p_max_dbm;
  double p_tol_dbm;
};

std::vector<Cell> expand_cells(const ExperimentConfig& cfg) {
  std::vector<Cell> cells;
  for (double v : cfg.grid) {
    for (const auto& scheme : cfg.schemes) {
      Cell base;
      base.value = v;
      base.method = scheme;
      base.dims = cfg.dims;
      base.p_max_dbm = cfg.p_max_dbm;
      base.p_tol_dbm = cfg.p_tol_dbm;
      switch (cfg.sweep) {
        case SweepKind::power:
          base.p_max_dbm = v;
          base.scheme = scheme;
          cells.push_back(base);
          break;
        case SweepKind::ptol:
          base.p_tol_dbm = v;
          base.scheme = scheme;
          cells.push_back(base);
          break;
        case SweepKind::elements:
          if (scheme == "proposed") {
            // case 1: grow the surface; case 2: grow the array
            Cell c1 = base;
            c1.dims.m = static_cast<int>(v);
            c1.scheme = "proposed_case1";
            cells.push_back(c1);
            Cell c2 = base;
            c2.dims.n_t = static_cast<int>(v);
            c2.scheme = "proposed_case2";
            cells.push_back(c2);
          } else {
            Cell c = base;
            c.dims.n_t = static_cast<int>(v);
            c.scheme = scheme;
            cells.push_back(c);
          }
          break;
      }
    }
  }
  return cells;
}

double run_one(const ExperimentConfig& cfg, const Cell& cell, std::uint64_t seed) {
  const ScenarioRealization scen =
      generate_scenario(cell.dims, cfg.geometry, seed);
  BudgetConfig budgets;
  budgets.p_max = dbm_to_watt(cell.p_max_dbm);
  budgets.p_tol = RVec::Constant(cell.dims.i_users, dbm_to_watt(cell.p_tol_dbm));

  if (cell.method == "proposed") {
    AoConfig ao = cfg.ao;
    ao.seed = seed;
    return optimize(scen.channels, budgets, ao).trace.final_rate;
  }
  if (cell.method == "baseline1")
    return baseline1_zf_random_phase(scen.channels, budgets, seed).rate;
  AoConfig ao = cfg.ao;
  ao.seed = seed;
  return baseline2_no_irs(scen.channels, budgets, ao).rate;
}

}  // namespace

SingleRunOutput run_single(const ExperimentConfig& cfg, const std::string& scheme,
                           std::uint64_t seed) {
  const ScenarioRealization scen = generate_scenario(cfg.dims, cfg.geometry, seed);
  BudgetConfig budgets;
  budgets.p_max = dbm_to_watt(cfg.p_max_dbm);
  budgets.p_tol = RVec::Constant(cfg.dims.i_users, dbm_to_watt(cfg.p_tol_dbm));

  SingleRunOutput out;
  if (scheme == "proposed") {
    AoConfig ao = cfg.ao;
    ao.seed = seed;
    const AoResult res = optimize(scen.channels, budgets, ao);
    out.rate = res.trace.final_rate;
    out.trace = res.trace;
  } else if (scheme == "baseline1") {
    out.rate = baseline1_zf_random_phase(scen.channels, budgets, seed).rate;
  } else if (scheme == "baseline2") {
    AoConfig ao = cfg.ao;
    ao.seed = seed;
    out.rate = baseline2_no_irs(scen.channels, budgets, ao).rate;
  } else {
    throw ConfigError("run_single: unknown scheme '" + scheme + "'");
  }
  return out;
}

ResultTable run_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::vector<Cell> cells = expand_cells(cfg);

  int n_threads = cfg.threads > 0
                      ? cfg.threads
                      : static_cast<int>(std::thread::hardware_concurrency());
  n_threads = std::max(1, std::min(n_threads, cfg.realizations));

  ResultTable table;
  for (const auto& cell : cells) {
    std::vector<double> rates(cfg.realizations,
                              std::numeric_limits<double>::quiet_NaN());
    std::atomic<int> next{0};
    auto worker = [&]() {
      for (;;) {
        const int r = next.fetch_add(1);
        if (r >= cfg.realizations) return;
        const std::uint64_t seed = mix_seed(cfg.base_seed, r);
        try {
          rates[r] = run_one(cfg, cell, seed);
        } catch (const Error&) {
          // left as NaN; counted below
        }
      }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    // aggregate in realization order so results do not depend on scheduling
    int ok = 0, failures = 0;
    double mean = 0.0;
    for (double r : rates) {
      if (std::isnan(r)) {
        ++failures;
        continue;
      }
      ++ok;
      mean += r;
    }
    if (failures > cfg.failure_budget)
      throw SolverFailure("sweep cell " + cell.scheme + " @ " +
                          std::to_string(cell.value) + ": " +
                          std::to_string(failures) + " failures exceed budget " +
                          std::to_string(cfg.failure_budget));
    mean = ok > 0 ? mean / ok : 0.0;
    double var = 0.0;
    for (double r : rates)
      if (!std::isnan(r)) var += (r - mean) * (r - mean);
    const double se = ok > 1 ? std::sqrt(var / (static_cast<double>(ok) *
                                                (ok - 1)))
                             : 0.0;

    ResultRow row;
    row.sweep = to_string(cfg.sweep);
    row.value = cell.value;
    row.scheme = cell.scheme;
    row.mean_rate = mean;
    row.std_error = se;
    row.realizations = ok;
    row.failures = failures;
    table.rows.push_back(std::move(row));
  }
  return table;
}

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_result_table(const ResultTable& table, std::ostream& os) {
  os << "sweep,value,scheme,mean_rate,std_error,realizations,failures\n";
  for (const auto& r : table.rows)
    os << r.sweep << "," << fmt_double(r.value) << "," << r.scheme << ","
       << fmt_double(r.mean_rate) << "," << fmt_double(r.std_error) << ","
       << r.realizations << "," << r.failures << "\n";
}

ResultTable parse_result_table(std::istream& is) {
  ResultTable table;
  std::string line;
  if (!std::getline(is, line))
    throw ConfigError("result table: missing header");
  if (line != "sweep,value,scheme,mean_rate,std_error,realizations,failures")
    throw ConfigError("result table: unexpected header '" + line + "'");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    ResultRow r;
    std::getline(ss, r.sweep, ',');
    std::getline(ss, field, ',');
    r.value = std::stod(field);
    std::getline(ss, r.scheme, ',');
    std::getline(ss, field, ',');
    r.mean_rate = std::stod(field);
    std::getline(ss, field, ',');
    r.std_error = std::stod(field);
    std::getline(ss, field, ',');
    r.realizations = std::stoi(field);
    std::getline(ss, field, ',');
    r.failures = std::stoi(field);
    table.rows.push_back(std::move(r));
  }
  return table;
}

namespace {

constexpr const char* kPlotScript = R"PY(#!/usr/bin/env python3
"""Render rate-vs-sweep curves from results.csv (one labeled curve per scheme)."""
import csv
import os
import sys

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
path = sys.argv[1] if len(sys.argv) > 1 else os.path.join(here, "results.csv")

rows = list(csv.DictReader(open(path)))
if not rows:
    sys.exit("no data rows in " + path)

sweep = rows[0]["sweep"]
schemes = sorted({r["scheme"] for r in rows})
plt.figure(figsize=(7, 5))
for scheme in schemes:
    pts = sorted((float(r["value"]), float(r["mean_rate"]), float(r["std_error"]))
                 for r in rows if r["scheme"] == scheme)
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    es = [p[2] for p in pts]
    plt.errorbar(xs, ys, yerr=es, marker="o", capsize=3, label=scheme)

xlabel = {"power": "max transmit power (dBm)",
          "ptol": "interference tolerance (dBm)",
          "elements": "number of elements"}.get(sweep, sweep)
plt.xlabel(xlabel)
plt.ylabel("average sum rate (bits/s/Hz)")
plt.grid(True, alpha=0.4)
plt.legend()
out = os.path.splitext(path)[0] + ".png"
plt.savefig(out, dpi=150, bbox_inches="tight")
print("wrote", out)
)PY";

}  // namespace

void emit(const ResultTable& table, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  {
    std::ofstream os(out_dir / "results.csv");
    if (!os) throw Error("emit: cannot write results.csv");
    write_result_table(table, os);
  }
  {
    std::ofstream os(out_dir / "plot_results.py");
    if (!os) throw Error("emit: cannot write plot_results.py");
    os << kPlotScript;
  }
}

}  // namespace irscr
