#include "revpref/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "revpref/afriat.hpp"
#include "revpref/counterfactual.hpp"
#include "revpref/dataset.hpp"
#include "revpref/error.hpp"
#include "revpref/parallel.hpp"
#include "revpref/relations.hpp"
#include "revpref/simulate.hpp"

#ifndef REVPREF_VERSION
#define REVPREF_VERSION "0.0.0"
#endif

namespace revpref {

using nlohmann::json;

namespace {

// Pairwise rankings are listed only for panels up to this size.
constexpr int kMaxRankedPeriods = 20;

json vec_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vec json_vec(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Vec>(values.data(), static_cast<Eigen::Index>(values.size()));
}

std::string hex(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << v;
  return s.str();
}

json side_json(Side s) {
  switch (s) {
    case Side::Below: return "below";
    case Side::Above: return "above";
    default: return nullptr;
  }
}

Side json_side(const json& j) {
  if (j.is_null()) return Side::None;
  const auto s = j.get<std::string>();
  if (s == "below") return Side::Below;
  if (s == "above") return Side::Above;
  throw InputError("layout: unknown side '" + s + "'");
}

json witness_json(const std::optional<CycleWitness>& w, const std::vector<std::string>& labels) {
  if (!w) return nullptr;
  json periods = json::array();
  for (int t : w->sequence) periods.push_back(labels.empty() ? std::to_string(t + 1) : labels[t]);
  return {{"sequence", w->sequence}, {"periods", periods}, {"strict_edge_at", w->strict_edge_at}};
}

json kkt_json(const KktResiduals& k) {
  return {{"stationarity", k.stationarity},
          {"dual_feasibility", k.dual_feasibility},
          {"complementarity", k.complementarity},
          {"primal_feasibility", k.primal_feasibility}};
}

void require(const std::string& value, const char* flag, const std::string& command) {
  if (value.empty()) throw InputError(command + " requires " + flag);
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InputError("'" + path + "' is not valid JSON: " + e.what());
  }
}

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

// Everything that needs the budgets: the prices, their period ids, and the
// layout and type matrix, each loaded from cache or computed.
struct Pipeline {
  const RunConfig& config;
  std::vector<std::string> ids;
  Mat prices;
  std::optional<StochasticDataset> data;
  std::optional<PatchLayout> layout;
  std::optional<TypeMatrix> types;

  explicit Pipeline(const RunConfig& c) : config(c) {}

  void load_prices_only() {
    require(config.prices, "--prices", config.command);
    auto table = revpref::load_prices(config.prices);
    ids = std::move(table.ids);
    prices = std::move(table.prices);
  }

  void load_data() {
    require(config.choices, "--choices", config.command);
    require(config.prices, "--prices", config.command);
    data = load_stochastic(config.choices, config.prices);
    prices = data->price_matrix();
    ids.clear();
    for (const auto& p : data->periods()) ids.push_back(p.id);
  }

  const PatchLayout& get_layout() {
    if (layout) return *layout;
    if (!config.layout.empty() && std::filesystem::exists(config.layout)) {
      layout = layout_from_json(read_json(config.layout));
      if (layout->prices.rows() != prices.rows() || layout->prices.cols() != prices.cols() ||
          (layout->prices - prices).cwiseAbs().maxCoeff() > 0.0)
        throw InputError("cached layout '" + config.layout + "' was built for different prices");
    } else {
      layout = enumerate_patches(prices, Execution::Parallel);
      if (!config.layout.empty()) write_json(config.layout, layout_to_json(*layout));
    }
    return *layout;
  }

  const TypeMatrix& get_types() {
    if (types) return *types;
    const auto& l = get_layout();
    if (!config.types.empty() && std::filesystem::exists(config.types)) {
      types = types_from_json(read_json(config.types), l);
    } else {
      types = enumerate_types(l, {config.type_cap, Execution::Parallel});
      if (!config.types.empty()) write_json(config.types, types_to_json(*types, false));
    }
    return *types;
  }

  int period_index(const std::string& id) const {
    for (int t = 0; t < static_cast<int>(ids.size()); ++t)
      if (ids[t] == id) return t;
    throw InputError("unknown period '" + id + "'");
  }
};

json config_json(const RunConfig& c, std::optional<double> tau) {
  json j = {{"seed", c.seed},
            {"tau", tau ? json(*tau) : json(nullptr)},
            {"replications", c.replications},
            {"alpha", c.alpha},
            {"grid_step", c.grid_step},
            {"omega", c.omega},
            {"boundary", c.boundary == BoundaryPolicy::Drop ? "drop" : "abort"},
            {"type_cap", c.type_cap},
            {"threads", worker_threads()},
            {"version", version()}};
  return j;
}

json probabilities_json(const ChoiceProbabilities& pi, const Pipeline& p) {
  json periods = json::array();
  for (int t = 0; t < static_cast<int>(p.ids.size()); ++t)
    periods.push_back({{"period", p.ids[t]},
                       {"retained", pi.sample_sizes[t]},
                       {"dropped", pi.dropped[t]},
                       {"patches", p.layout->count(t)}});
  return {{"pi_hat", vec_json(pi.stacked)}, {"total_n", pi.total_n}, {"periods", periods}};
}

json run_check(const RunConfig& c, std::optional<double>&) {
  require(c.data, "--data", c.command);
  const auto data = load_deterministic(c.data);
  const auto garp = check_garp(data);
  const auto gapp = check_gapp(data);
  const auto normalized = check_garp(normalize_expenditure(data));
  json j = {{"periods", data.size()},
            {"goods", data.goods()},
            {"garp", garp.passes},
            {"gapp", gapp.passes},
            {"normalized_garp", normalized.passes},
            {"garp_witness", witness_json(garp.witness, data.labels())},
            {"gapp_witness", witness_json(gapp.witness, data.labels())}};
  try {
    const auto m = robustness_margin(data);
    j["robustness"] = {{"min_gap", m.min_gap}, {"bundle_norm", m.bundle_norm}};
  } catch (const GenericityError& e) {
    j["robustness"] = nullptr;
    j["genericity_failure"] = {e.first, e.second};
  }
  if (gapp.passes && data.size() <= kMaxRankedPeriods) {
    json ranks = json::array();
    for (int t = 0; t < data.size(); ++t)
      for (int s = 0; s < data.size(); ++s)
        if (t != s) {
          const auto r = price_preference_query(data, t, s);
          if (r != PriceRanking::Unranked) ranks.push_back({{"better", t}, {"worse", s}, {"ranking", to_string(r)}});
        }
    j["price_rankings"] = ranks;
  }
  return j;
}

json run_patches(const RunConfig& c, std::optional<double>&) {
  Pipeline p(c);
  p.load_prices_only();
  json j = layout_to_json(p.get_layout());
  j["period_ids"] = p.ids;
  return j;
}

json run_types(const RunConfig& c, std::optional<double>&) {
  Pipeline p(c);
  p.load_prices_only();
  const auto& types = p.get_types();
  json j = types_to_json(types, c.full_matrix);
  j["H"] = types.columns();
  j["I"] = types.rows;
  j["period_ids"] = p.ids;
  return j;
}

json run_test(const RunConfig& c, std::optional<double>& tau) {
  Pipeline p(c);
  p.load_data();
  const auto& types = p.get_types();
  const auto pi = estimate_pi(*p.data, *p.layout, c.boundary);
  const auto omega = Omega::parse(c.omega, types.rows);
  const auto r = bootstrap_pvalue(pi, types, omega, {c.replications, c.tau, c.seed, Execution::Parallel});
  tau = r.tau;
  json j = probabilities_json(pi, p);
  j["H"] = types.columns();
  j["I"] = types.rows;
  j["jN"] = r.jn;
  j["pValue"] = r.p_value ? json(*r.p_value) : json(nullptr);
  j["nu_hat"] = vec_json(r.nu_hat);
  j["eta_hat"] = vec_json(r.eta_hat);
  j["support"] = r.support;
  j["kkt"] = kkt_json(r.kkt);
  j["bootstrap"] = r.bootstrap;
  return j;
}

std::pair<int, int> pair_indices(const RunConfig& c, const Pipeline& p) {
  if (!c.pair) throw InputError(c.command + " requires --pair t,t'");
  const int t = p.period_index(c.pair->first);
  const int s = p.period_index(c.pair->second);
  if (t == s) throw InputError("--pair needs two different periods");
  return {t, s};
}

json run_welfare(const RunConfig& c, std::optional<double>&) {
  Pipeline p(c);
  p.load_data();
  const auto [t, s] = pair_indices(c, p);
  const auto& types = p.get_types();
  const auto pi = estimate_pi(*p.data, *p.layout, c.boundary);
  const auto omega = Omega::parse(c.omega, types.rows);
  const double jn = compute_jn(pi, types, omega).jn;
  const Vec target = welfare_target(pi, types, omega, jn);
  const auto b = welfare_bounds(target, types, *p.layout, t, s);
  json j = probabilities_json(pi, p);
  j["pair"] = {p.ids[t], p.ids[s]};
  j["jN"] = jn;
  j["target"] = jn == 0.0 ? "pi_hat" : "projection";
  j["lower"] = b.lower;
  j["upper"] = b.upper;
  j["anyRationalizationUpper"] = b.any_rationalization_upper;
  j["nu_at_lower"] = vec_json(b.nu_at_lower);
  j["nu_at_upper"] = vec_json(b.nu_at_upper);
  return j;
}

json degenerate_interval(const RunConfig& c, const std::string& reason, double lo, double hi) {
  json grid = json::array();
  std::vector<double> thetas{lo};
  if (hi > lo) {
    const auto steps = static_cast<long long>(std::floor((hi - lo) / c.grid_step + 1e-9));
    for (long long k = 1; k <= steps; ++k) thetas.push_back(lo + static_cast<double>(k) * c.grid_step);
    if (hi - thetas.back() > 1e-12) thetas.push_back(hi);
  }
  for (double th : thetas)
    grid.push_back({{"theta", th}, {"jN", 0.0}, {"critical_value", 0.0}, {"accepted", true}, {"infeasible", false}});
  return {{"degenerate", true},
          {"reason", reason},
          {"grid", grid},
          {"accepted", thetas},
          {"hull", {lo, hi}},
          {"clamped_floors", false}};
}

json run_ci(const RunConfig& c, std::optional<double>& tau) {
  Pipeline p(c);
  p.load_data();
  if (p.data->size() == 1) {
    tau = c.tau ? *c.tau : default_tau(p.data->total_sample_size());
    return degenerate_interval(c, "a single period imposes no cross-budget restriction", 0.0, 1.0);
  }
  const auto [t, s] = pair_indices(c, p);
  const auto& types = p.get_types();
  const auto pi = estimate_pi(*p.data, *p.layout, c.boundary);
  const auto omega = Omega::parse(c.omega, types.rows);
  const Vec rho = type_indicator(types, *p.layout, t, s);
  tau = c.tau ? *c.tau : default_tau(pi.total_n);

  json j = probabilities_json(pi, p);
  j["pair"] = {p.ids[t], p.ids[s]};
  if (rho.maxCoeff() - rho.minCoeff() <= 1e-12) {
    j.update(degenerate_interval(c, "every type gives the same answer", rho(0), rho(0)));
    return j;
  }

  IntervalConfig ic;
  ic.alpha = c.alpha;
  ic.grid_step = c.grid_step;
  ic.replications = c.replications;
  ic.tau = tau;
  ic.seed = c.seed;
  ic.execution = Execution::Parallel;
  const double jn = compute_jn(pi, types, omega).jn;
  const auto bounds = welfare_range(welfare_target(pi, types, omega, jn), types, rho);
  ic.extra_points = {bounds.lower, bounds.upper};
  const auto ci = confidence_interval(pi, types, rho, omega, ic);

  json grid = json::array();
  for (const auto& g : ci.grid)
    grid.push_back({{"theta", g.theta},
                    {"jN", g.jn},
                    {"critical_value", g.critical_value},
                    {"accepted", g.accepted},
                    {"infeasible", g.infeasible}});
  j["degenerate"] = false;
  j["jN"] = jn;
  j["bounds"] = {bounds.lower, bounds.upper};
  j["grid"] = grid;
  j["accepted"] = ci.accepted();
  j["hull"] = ci.hull ? json{ci.hull->first, ci.hull->second} : json(nullptr);
  j["clamped_floors"] = ci.clamped_floors;
  if (!ci.hull) j["diagnostic"] = "no parameter value is accepted: the model itself is rejected";
  return j;
}

json run_eval(const RunConfig& c, std::optional<double>&) {
  require(c.data, "--data", c.command);
  const auto data = load_deterministic(c.data);
  if (static_cast<int>(c.bundle.size()) != data.goods())
    throw InputError("--bundle has " + std::to_string(c.bundle.size()) + " entries, expected " +
                     std::to_string(data.goods()));
  const Vec x = Eigen::Map<const Vec>(c.bundle.data(), static_cast<Eigen::Index>(c.bundle.size()));
  const auto u = build_augmented_utility(data);
  json j = {{"bundle", c.bundle}, {"budget_constant", u.budget_constant}};
  if (c.expenditure) {
    j["expenditure"] = *c.expenditure;
    j["utility"] = u.evaluate(x, *c.expenditure);
  } else {
    j["expenditure"] = nullptr;
    j["utility"] = nullptr;
  }
  json at_prices = json::array();
  for (int t = 0; t < data.size(); ++t) at_prices.push_back(u.at_prices(x, t));
  j["utility_at_observed_prices"] = at_prices;
  if (check_garp(data).passes) {
    j["afriat_utility"] = evaluate_utility(solve_afriat(data), data, x);
  } else {
    j["afriat_utility"] = nullptr;
  }
  return j;
}

json run_simulate(const RunConfig& c, std::optional<double>&) {
  require(c.choices_out, "--choices-out", c.command);
  require(c.prices_out, "--prices-out", c.command);
  StochasticDataset data;
  if (c.model == "quasilinear") {
    QuasilinearSpec spec;
    spec.goods = c.goods;
    spec.periods = c.periods;
    spec.households = c.households;
    spec.seed = c.seed;
    spec.execution = Execution::Parallel;
    data = gen_quasilinear(spec).data;
  } else if (c.model == "mixture") {
    Pipeline p(c);
    p.load_prices_only();
    const auto& types = p.get_types();
    MixtureSpec spec;
    spec.layout = &*p.layout;
    spec.types = &types;
    if (c.nu.empty()) {
      spec.nu_star = Vec::Constant(types.columns(), 1.0 / types.columns());
    } else {
      std::ifstream in(c.nu);
      if (!in) throw InputError("cannot open '" + c.nu + "'");
      std::vector<double> w;
      for (double v; in >> v;) w.push_back(v);
      spec.nu_star = Eigen::Map<const Vec>(w.data(), static_cast<Eigen::Index>(w.size()));
    }
    spec.sample_sizes.assign(p.layout->budgets(), c.households);
    spec.seed = c.seed;
    spec.execution = Execution::Parallel;
    auto sim = gen_mixture(spec);
    std::vector<Period> periods = sim.periods();
    for (std::size_t t = 0; t < periods.size(); ++t) periods[t].id = p.ids[t];
    data = StochasticDataset(std::move(periods));
  } else {
    throw InputError("unknown model '" + c.model + "' (expected quasilinear or mixture)");
  }
  std::ofstream choices(c.choices_out), prices(c.prices_out);
  if (!choices) throw InputError("cannot write '" + c.choices_out + "'");
  if (!prices) throw InputError("cannot write '" + c.prices_out + "'");
  write_stochastic(choices, prices, data);
  return {{"model", c.model},
          {"periods", data.size()},
          {"goods", data.goods()},
          {"total_n", data.total_sample_size()},
          {"choices", c.choices_out},
          {"prices", c.prices_out}};
}

}  // namespace

const char* version() { return REVPREF_VERSION; }

json layout_to_json(const PatchLayout& layout) {
  json budgets = json::array();
  std::vector<int> counts;
  for (int t = 0; t < layout.budgets(); ++t) {
    json patches = json::array();
    for (const auto& patch : layout.per_budget[t]) {
      json signs = json::array();
      for (Side s : patch.signs) signs.push_back(side_json(s));
      patches.push_back({{"signs", signs}, {"witness", vec_json(patch.witness)}, {"margin", patch.margin}});
    }
    budgets.push_back({{"patches", patches}});
    counts.push_back(layout.count(t));
  }
  json prices = json::array();
  for (int t = 0; t < layout.budgets(); ++t) prices.push_back(vec_json(layout.prices.row(t).transpose()));
  return {{"prices", prices},
          {"budgets", budgets},
          {"duplicate_of", layout.duplicate_of},
          {"counts", counts},
          {"total_rows", layout.total_rows()},
          {"fingerprint", hex(layout_fingerprint(layout))}};
}

PatchLayout layout_from_json(const json& j) {
  try {
    PatchLayout layout;
    const auto& prices = j.at("prices");
    const auto n = static_cast<Eigen::Index>(prices.size());
    if (n < 1) throw InputError("layout: no budgets");
    const auto l = static_cast<Eigen::Index>(prices.at(0).size());
    layout.prices.resize(n, l);
    for (Eigen::Index t = 0; t < n; ++t) {
      const Vec row = json_vec(prices.at(t));
      if (row.size() != l) throw InputError("layout: ragged price rows");
      layout.prices.row(t) = row.transpose();
    }
    layout.duplicate_of = j.at("duplicate_of").get<std::vector<int>>();
    const auto& budgets = j.at("budgets");
    if (static_cast<Eigen::Index>(budgets.size()) != n ||
        static_cast<Eigen::Index>(layout.duplicate_of.size()) != n)
      throw InputError("layout: budget count does not match the prices");
    for (Eigen::Index t = 0; t < n; ++t) {
      std::vector<Patch> patches;
      for (const auto& pj : budgets.at(t).at("patches")) {
        Patch patch;
        patch.budget = static_cast<int>(t);
        for (const auto& s : pj.at("signs")) patch.signs.push_back(json_side(s));
        if (static_cast<Eigen::Index>(patch.signs.size()) != n) throw InputError("layout: sign vector length");
        patch.witness = json_vec(pj.at("witness"));
        patch.margin = pj.at("margin").get<double>();
        patches.push_back(std::move(patch));
      }
      layout.per_budget.push_back(std::move(patches));
    }
    if (hex(layout_fingerprint(layout)) != j.at("fingerprint").get<std::string>())
      throw InputError("layout: fingerprint mismatch (file edited or corrupt)");
    return layout;
  } catch (const json::exception& e) {
    throw InputError(std::string("layout: ") + e.what());
  }
}

json types_to_json(const TypeMatrix& types, bool full_matrix) {
  json columns = json::array();
  for (int j = 0; j < types.columns(); ++j) {
    std::vector<int> a(types.budgets);
    for (int t = 0; t < types.budgets; ++t) a[t] = types.patch(j, t);
    columns.push_back(a);
  }
  json out = {{"layout_fingerprint", hex(types.layout_id)},
              {"budgets", types.budgets},
              {"rows", types.rows},
              {"columns", types.columns()},
              {"assignments", columns}};
  if (full_matrix) {
    const Mat dense(types.matrix);
    json rows = json::array();
    for (Eigen::Index i = 0; i < dense.rows(); ++i) {
      std::vector<int> r(static_cast<std::size_t>(dense.cols()));
      for (Eigen::Index k = 0; k < dense.cols(); ++k) r[static_cast<std::size_t>(k)] = static_cast<int>(dense(i, k));
      rows.push_back(r);
    }
    out["matrix"] = rows;
  }
  return out;
}

TypeMatrix types_from_json(const json& j, const PatchLayout& layout) {
  try {
    if (j.at("layout_fingerprint").get<std::string>() != hex(layout_fingerprint(layout)))
      throw InputError("cached type matrix was built for a different layout");
    const int n = layout.budgets();
    std::vector<std::uint16_t> flat;
    for (const auto& col : j.at("assignments")) {
      const auto a = col.get<std::vector<int>>();
      if (static_cast<int>(a.size()) != n) throw InputError("types: assignment length");
      for (int v : a) {
        if (v < 0 || v > std::numeric_limits<std::uint16_t>::max()) throw InputError("types: patch index");
        flat.push_back(static_cast<std::uint16_t>(v));
      }
    }
    return make_type_matrix(layout, std::move(flat));
  } catch (const json::exception& e) {
    throw InputError(std::string("types: ") + e.what());
  }
}

void validate(const RunConfig& c) {
  static const std::vector<std::string> commands{"check", "test", "patches", "types",
                                                 "welfare", "ci", "eval", "simulate"};
  if (std::find(commands.begin(), commands.end(), c.command) == commands.end())
    throw InputError("unknown command '" + c.command + "'");
  if (!(c.alpha > 0.0 && c.alpha <= 0.5)) throw InputError("--alpha must lie in (0, 0.5]");
  if (!(c.grid_step > 0.0 && c.grid_step <= 0.25)) throw InputError("--grid-step must lie in (0, 0.25]");
  if (c.replications < 1) throw InputError("--replications must be at least 1");
  if (c.tau && !(*c.tau > 0.0 && *c.tau < 1.0)) throw InputError("--tau must lie in (0, 1)");
  if (c.type_cap < 1) throw InputError("--type-cap must be positive");
  if (c.threads < 0) throw InputError("--threads must be nonnegative");
  if (c.goods < 1 || c.periods < 1 || c.households < 1)
    throw InputError("--goods, --periods and --households must be positive");
  if (c.expenditure && !std::isfinite(*c.expenditure)) throw InputError("--expenditure must be finite");
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  std::optional<double> tau = config.tau;
  try {
    validate(config);
    set_worker_threads(resolve_thread_count(config.threads));
    json body;
    if (config.command == "check") body = run_check(config, tau);
    else if (config.command == "patches") body = run_patches(config, tau);
    else if (config.command == "types") body = run_types(config, tau);
    else if (config.command == "test") body = run_test(config, tau);
    else if (config.command == "welfare") body = run_welfare(config, tau);
    else if (config.command == "ci") body = run_ci(config, tau);
    else if (config.command == "eval") body = run_eval(config, tau);
    else body = run_simulate(config, tau);

    json report = {{"command", config.command}, {"config", config_json(config, tau)}, {"result", body}};
    if (config.out.empty()) {
      out << report.dump(2) << '\n';
    } else {
      write_json(config.out, report);
    }
    return 0;
  } catch (const TypeBudgetExceeded& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const ModelError& e) {
    err << "model infeasible: " << e.what() << '\n';
    return 2;
  } catch (const SolverError& e) {
    err << "solver failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace revpref
