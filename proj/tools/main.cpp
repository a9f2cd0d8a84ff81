#include <cstdlib>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "revpref/cli.hpp"

namespace {

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  for (std::string item; std::getline(in, item, ',');) out.push_back(std::stod(item));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  revpref::RunConfig cfg;
  CLI::App app{"Revealed preference tests for consumer panels and cross-sections"};
  app.set_version_flag("--version", std::string(revpref::version()));
  app.require_subcommand(1, 1);

  std::string boundary = "drop";
  std::string pair;
  std::string bundle;
  double expenditure = 0.0;
  bool have_tau = false;
  double tau = 0.0;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--alpha", cfg.alpha, "Test level for confidence intervals")->capture_default_str();
    sub->add_option("--grid-step", cfg.grid_step, "Spacing of the theta grid")->capture_default_str();
    sub->add_option("--replications,-R", cfg.replications, "Bootstrap replications")->capture_default_str();
    sub->add_option_function<double>("--tau", [&](double v) { have_tau = true; tau = v; },
                                     "Tightening parameter (default sqrt(log N / N))");
    sub->add_option("--seed", cfg.seed, "Root random seed")->capture_default_str();
    sub->add_option("--omega", cfg.omega, "identity or diag:<file>")->capture_default_str();
    sub->add_option("--boundary", boundary, "Choices on a budget boundary: drop or abort")
        ->check(CLI::IsMember({"drop", "abort"}))
        ->capture_default_str();
    sub->add_option("--type-cap", cfg.type_cap, "Maximum number of rational types")->capture_default_str();
    sub->add_option("--pair", pair, "Period ids t,t' for welfare comparisons");
    sub->add_option("--out", cfg.out, "Write the JSON report here instead of stdout");
    sub->add_option("--threads", cfg.threads, "Worker threads (falls back to REVPREF_THREADS)");
    sub->add_option("--data", cfg.data, "Wide csv: p1..pL, x1..xL[, label]");
    sub->add_option("--choices", cfg.choices, "Long csv: period, household, x1..xL");
    sub->add_option("--prices", cfg.prices, "Price csv: period, p1..pL");
    sub->add_option("--layout", cfg.layout, "Layout cache (read if present, written otherwise)");
    sub->add_option("--types", cfg.types, "Type matrix cache (read if present, written otherwise)");
  };

  const std::vector<std::pair<const char*, const char*>> commands{
      {"check", "GARP and GAPP verdicts for a single consumer"},
      {"patches", "Enumerate the patches of each budget"},
      {"types", "Enumerate the rational types"},
      {"test", "J_N statistic and bootstrap p-value"},
      {"welfare", "Bounds on the share revealed better off at t than at t'"},
      {"ci", "Confidence interval for that share"},
      {"eval", "Evaluate a utility rationalizing the data"},
      {"simulate", "Write a synthetic cross-section"}};
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    common(sub);
    sub->callback([&cfg, n = std::string(name)] { cfg.command = n; });
    if (std::string(name) == "types") sub->add_flag("--full-matrix", cfg.full_matrix, "Include the dense matrix");
    if (std::string(name) == "eval") {
      sub->add_option("--bundle", bundle, "Comma-separated bundle")->required();
      sub->add_option("--expenditure", expenditure, "Expenditure e in U(x, -e)");
    }
    if (std::string(name) == "simulate") {
      sub->add_option("--model", cfg.model, "quasilinear or mixture")
          ->check(CLI::IsMember({"quasilinear", "mixture"}))
          ->capture_default_str();
      sub->add_option("--goods", cfg.goods)->capture_default_str();
      sub->add_option("--periods", cfg.periods)->capture_default_str();
      sub->add_option("--households", cfg.households, "Households per period")->capture_default_str();
      sub->add_option("--nu", cfg.nu, "Mixture weights, one per type (default uniform)");
      sub->add_option("--choices-out", cfg.choices_out)->required();
      sub->add_option("--prices-out", cfg.prices_out)->required();
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  for (auto* sub : app.get_subcommands())
    if (sub->get_name() == "eval" && sub->count("--expenditure")) cfg.expenditure = expenditure;
  if (have_tau) cfg.tau = tau;
  cfg.boundary = boundary == "abort" ? revpref::BoundaryPolicy::Abort : revpref::BoundaryPolicy::Drop;
  try {
    if (!pair.empty()) {
      const auto comma = pair.find(',');
      if (comma == std::string::npos) throw std::invalid_argument("--pair expects t,t'");
      cfg.pair = std::make_pair(pair.substr(0, comma), pair.substr(comma + 1));
    }
    if (!bundle.empty()) cfg.bundle = parse_list(bundle);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return revpref::run(cfg, std::cout, std::cerr);
}
