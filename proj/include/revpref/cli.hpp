#pragma once

// Pipeline orchestration behind the revpref command-line tool. Each command
// produces one JSON report.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "revpref/patches.hpp"
#include "revpref/stochastic_test.hpp"
#include "revpref/types.hpp"

namespace revpref {

struct RunConfig {
  std::string command;  // check, patches, types, test, welfare, ci, eval, simulate

  std::string data;     // wide csv of (prices, bundle) observations
  std::string choices;  // long csv: period, household, x1..xL
  std::string prices;   // period, p1..pL
  std::string layout;   // cached layout JSON (read if it exists, else written)
  std::string types;    // cached type matrix JSON (read if it exists, else written)

  double alpha = 0.05;
  double grid_step = 0.01;
  int replications = 1000;
  std::optional<double> tau;
  std::string omega = "identity";
  std::uint64_t seed = 0;
  BoundaryPolicy boundary = BoundaryPolicy::Drop;
  long long type_cap = 10'000'000;
  std::optional<std::pair<std::string, std::string>> pair;  // period ids
  std::string out;  // report path; stdout when empty
  int threads = 0;
  bool full_matrix = false;

  // eval
  std::vector<double> bundle;
  std::optional<double> expenditure;

  // simulate
  std::string model = "quasilinear";  // quasilinear or mixture
  int goods = 2;
  int periods = 2;
  int households = 100;
  std::string nu;  // mixture weights file; uniform when empty
  std::string choices_out;
  std::string prices_out;
};

/// Exit codes: 0 ok, 1 input error, 2 model infeasible, 3 solver failure.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Throws InputError on out-of-range settings.
void validate(const RunConfig& config);

nlohmann::json layout_to_json(const PatchLayout& layout);
PatchLayout layout_from_json(const nlohmann::json& j);
nlohmann::json types_to_json(const TypeMatrix& types, bool full_matrix);
TypeMatrix types_from_json(const nlohmann::json& j, const PatchLayout& layout);

const char* version();

}  // namespace revpref
