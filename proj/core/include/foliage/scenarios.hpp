#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "foliage/varfields.hpp"

namespace foliage {

// One verification row: a named check with its measured value, the bound it
// is held to, and whether it passed. Informational rows carry contracted =
// false and never fail a run.
struct CheckRow {
  std::string scenario;
  std::string suite;
  std::string check;
  int r = -1;                                        // -1 when not order-specific
  double t = std::numeric_limits<double>::quiet_NaN();  // NaN off foliations
  double value = 0.0;
  double bound = 0.0;
  bool contracted = true;
  bool pass = true;
};

struct RunOptions {
  int grid_scale = 1;   // multiplies every base grid size
  unsigned seed = 7;    // classification sampling
  bool dump_fields = false;
};

// name -> nodes x (leaf coordinates..., value) table
struct FieldDump {
  std::string name;
  std::string header;  // comma-separated column names
  Eigen::MatrixXd table;
};

struct ScenarioResult {
  std::vector<CheckRow> rows;
  std::vector<std::string> notes;  // classification results, probe gaps, conventions
  std::vector<FieldDump> dumps;
  bool all_contracts_pass() const;
};

// A shipped geometry with its suites. run executes the requested subset of
// suites ("identities", "operators", "stability", "fields") and ignores names
// the scenario does not carry.
struct Scenario {
  std::string name;
  std::string summary;
  std::vector<std::string> suites;
  std::function<ScenarioResult(const std::vector<std::string>&, const RunOptions&)> run;
};

const std::vector<Scenario>& scenario_catalog();
const Scenario& find_scenario(const std::string& name);  // ConfigError when unknown

// grid sizes must stay powers of two in [8, 512] after scaling
int scaled_grid_size(int base, int scale);

}  // namespace foliage
