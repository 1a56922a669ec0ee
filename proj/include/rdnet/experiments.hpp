#pragma once

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace rdnet {

inline constexpr std::uint64_t kDefaultSeed = 42;

/// Shortest decimal string that parses back to the same double.
std::string format_double(double x);

/// Long-format table; every row starts with the `experiment` and `seed` columns.
class Table {
 public:
  Table(std::string name, std::string experiment, std::uint64_t seed, std::vector<std::string> columns);

  const std::string& name() const noexcept { return name_; }
  const std::vector<std::string>& columns() const noexcept { return columns_; }
  std::size_t size() const noexcept { return rows_.size(); }
  const std::vector<std::string>& row(std::size_t k) const { return rows_.at(k); }

  /// One formatted CSV cell.
  struct Cell {
    std::string text;
    Cell(double x) : text(format_double(x)) {}
    Cell(int x) : text(std::to_string(x)) {}
    Cell(unsigned long x) : text(std::to_string(x)) {}
    Cell(unsigned long long x) : text(std::to_string(x)) {}
    Cell(bool b) : text(b ? "1" : "0") {}
    Cell(std::string s) : text(std::move(s)) {}
    Cell(const char* s) : text(s) {}
  };

  /// Appends a row of experiment-specific cells. Throws std::invalid_argument
  /// when the count does not match the columns.
  void add(std::initializer_list<Cell> cells);

  void write_csv(std::ostream& os) const;
  /// Index of a column by name; throws std::out_of_range.
  std::size_t column(const std::string& name) const;
  double number(std::size_t row, const std::string& col) const;

 private:
  std::string name_;
  std::string experiment_;
  std::string seed_;
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

class UnknownExperiment : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Parameters for one experiment run. Empty grids and zero counts select the
/// experiment's defaults, which are echoed into the manifest.
struct SweepSpec {
  std::string experiment;
  std::uint64_t base_seed = kDefaultSeed;
  int replications = 0;
  unsigned threads = 1;
  bool raw = false;
  std::vector<double> theta_grid;
  std::vector<double> phi_grid;
  std::vector<double> rho_grid;
  std::vector<double> ell_grid;
  std::vector<std::size_t> n_grid;
};

struct SweepResult {
  std::vector<Table> tables;
  nlohmann::json manifest;

  const Table& table(const std::string& name) const;
};

/// Identifiers accepted by run_experiment.
const std::vector<std::string>& experiment_ids();

/// Dispatches on spec.experiment. Throws UnknownExperiment.
SweepResult run_experiment(const SweepSpec& spec);

SweepResult exp_link_sustainability(const SweepSpec& spec);      // fig1
SweepResult exp_n4_stability_domains(const SweepSpec& spec);     // fig2
SweepResult exp_n6_welfare_effort_profit(const SweepSpec& spec); // fig3
SweepResult exp_crowding_out(const SweepSpec& spec);             // fig4
SweepResult exp_welfare_vs_density(const SweepSpec& spec);       // fig5
SweepResult exp_pa_vs_random_same_links(const SweepSpec& spec);  // fig6
SweepResult exp_transition_profit(const SweepSpec& spec);        // figA1
SweepResult exp_large_n_stability(const SweepSpec& spec);        // figA2

/// Writes the first table to <experiment>.csv, the others to
/// <experiment>_<table>.csv, and the manifest to <experiment>_manifest.json.
void write_result(const SweepResult& result, const std::filesystem::path& dir);

/// k / 100 for k in [lo, hi].
std::vector<double> percent_grid(int lo, int hi);
/// `points` log-spaced values from lo to hi inclusive.
std::vector<double> log_grid(double lo, double hi, std::size_t points);

/// Largest cell count a region sweep may allocate.
inline constexpr std::size_t kMaxRegionCells = 20'000'000;

}  // namespace rdnet
