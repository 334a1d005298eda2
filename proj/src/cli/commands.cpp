#include "adgame/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "adgame/budget.hpp"
#include "adgame/equilibrium.hpp"
#include "adgame/error.hpp"
#include "adgame/nash.hpp"

namespace adgame::cli {

using ojson = nlohmann::ordered_json;

namespace {

std::string numbered(const char* prefix, std::size_t k) { return prefix + std::to_string(k + 1); }

std::vector<Artifact> single(const std::filesystem::path& out, std::string content) {
  return {Artifact{out, std::move(content)}};
}

ojson array(const std::vector<double>& xs) {
  ojson a = ojson::array();
  for (double x : xs) a.push_back(x);
  return a;
}

ojson optional_number(const std::optional<double>& x) { return x ? ojson(*x) : ojson(nullptr); }

double param(const Params& p, const std::string& name, std::optional<double> fallback = {}) {
  auto it = p.find(name);
  if (it != p.end()) return it->second;
  if (fallback) return *fallback;
  throw InvalidInput("parameter '" + name + "' is required");
}

std::optional<double> maybe(const Params& p, const std::string& name) {
  auto it = p.find(name);
  return it == p.end() ? std::nullopt : std::optional<double>(it->second);
}

VersusSettings versus(const Params& p) {
  VersusSettings v;
  v.rho1 = param(p, "rho1", v.rho1);
  v.rho2 = param(p, "rho2", v.rho2);
  v.sigma1 = param(p, "sigma1", v.sigma1);
  v.B = param(p, "B", v.B);
  v.B2 = param(p, "B2", v.B2);
  v.m = param(p, "m", v.m);
  return v;
}

double positive_tol(const RunOptions& opt) {
  const double t = *opt.tol;
  if (!(std::isfinite(t) && t > 0.0 && t < 1.0)) throw InvalidInput("--tol must lie in (0, 1)");
  return t;
}

void reject_grid(const RunOptions& opt, const char* command) {
  if (opt.grid)
    throw InvalidInput(std::string("--grid is not accepted by ") + command +
                       " (only allocate and sweep)");
}

const ControlPolicy& need_controls(const Scenario& s) {
  if (!s.controls) throw InvalidInput("scenario field /controls: required field is missing");
  return *s.controls;
}

// Every row of a grid, first axis outermost.
template <class F>
void for_each_cell(const std::vector<Axis>& axes, F&& f) {
  std::vector<std::vector<double>> vals;
  for (const auto& a : axes) vals.push_back(a.values());
  std::vector<std::size_t> idx(axes.size(), 0);
  while (true) {
    std::vector<double> cell(axes.size());
    for (std::size_t i = 0; i < axes.size(); ++i) cell[i] = vals[i][idx[i]];
    f(cell);
    std::size_t d = axes.size();
    while (d > 0) {
      --d;
      if (++idx[d] < vals[d].size()) break;
      idx[d] = 0;
      if (d == 0) return;
    }
    if (axes.empty()) return;
  }
}

void check_axes(const std::vector<Axis>& axes, const std::vector<std::string>& allowed,
                const char* what) {
  if (axes.empty()) throw InvalidInput(std::string(what) + " needs at least one grid axis");
  for (const auto& a : axes)
    if (std::find(allowed.begin(), allowed.end(), a.name) == allowed.end())
      throw InvalidInput(std::string(what) + ": unknown grid axis '" + a.name + "'");
  if (axes.size() == 2 && axes[0].name == axes[1].name)
    throw InvalidInput(std::string(what) + ": grid axis repeated");
}

}  // namespace

std::vector<Artifact> cmd_simulate(const Scenario& s, const std::filesystem::path& out,
                                   const RunOptions& opt) {
  reject_grid(opt, "simulate");
  if (s.firms.empty()) throw InvalidInput("scenario field /firms: required field is missing");
  if (!s.initial) throw InvalidInput("scenario field /initial: required field is missing");
  const auto& policy = need_controls(s);
  numerics::IntegratorConfig cfg;
  if (opt.tol) {
    cfg.rel_tol = positive_tol(opt);
    cfg.abs_tol = cfg.rel_tol * 1e-2;
  }
  const std::size_t n = s.firms.size();
  const auto traj = simulate(s.model, MarketState(s.m, *s.initial), s.firms, policy,
                             s.simulate.t_end, s.simulate.samples, cfg);

  std::vector<std::string> header{"t"};
  for (std::size_t k = 0; k < n; ++k) header.push_back(numbered("s_", k));
  header.push_back("epsilon");
  const bool controls = s.simulate.emit_controls;
  if (controls) {
    for (std::size_t k = 0; k < n; ++k) header.push_back(numbered("u_", k));
    if (s.model == Model::targeted)
      for (std::size_t k = 0; k < n; ++k) header.push_back(numbered("v_", k));
    if (s.model == Model::tiered) header.push_back("v");
  }
  CsvWriter csv(header);
  for (std::size_t i = 0; i < traj.grid.size(); ++i) {
    std::vector<double> row{traj.grid[i]};
    const auto& st = traj.states[i];
    row.insert(row.end(), st.s().begin(), st.s().end());
    row.push_back(market_potential(st));
    if (controls) {
      const auto& cv = traj.controls[i];
      row.insert(row.end(), cv.u().begin(), cv.u().end());
      row.insert(row.end(), cv.v().begin(), cv.v().end());
    }
    csv.row(row);
  }
  return single(out, csv.str());
}

std::vector<Artifact> cmd_steady(const Scenario& s, const std::filesystem::path& out,
                                 const RunOptions& opt) {
  reject_grid(opt, "steady");
  if (s.firms.empty()) throw InvalidInput("scenario field /firms: required field is missing");
  const auto& policy = need_controls(s);
  if (policy.kind() != ControlPolicy::Kind::constant)
    throw InvalidInput("scenario field /controls/kind: steady states need constant controls");
  const ControlVector& cv = policy.values().front();
  const std::size_t n = s.firms.size();

  SteadyStateReport rep;
  StabilityReport stab;
  switch (s.model) {
    case Model::nontargeted:
      rep = nontargeted_steady_state(s.m, s.firms, cv);
      stab = nontargeted_stability(s.firms, cv);
      break;
    case Model::targeted:
      rep = targeted_steady_state(s.m, s.firms, cv);
      stab = n == 2 ? duopoly_stability(s.firms, cv) : targeted_stability(s.firms, cv);
      break;
    case Model::tiered:
      if (n != 2) {
        std::ostringstream os;
        os << "unsupported size: tiered steady state is available for 2 tiers, got " << n;
        throw Unsupported(os.str());
      }
      rep = tier_steady_state_two(s.m, s.firms, cv.v()[0], cv.u()[0]);
      stab = tier_stability_two(s.firms, cv.v()[0], cv.u()[0]);
      break;
  }
  ojson j;
  j["model"] = to_string(s.model);
  j["m"] = rep.m;
  j["s_star"] = array(rep.s_star);
  j["epsilon_star"] = rep.epsilon_star;
  j["U"] = rep.U;
  j["V"] = optional_number(rep.V);
  j["D"] = optional_number(rep.D);
  j["residual_norm"] = rep.residual_norm;
  ojson eig = ojson::array();
  for (const auto& e : stab.eigenvalues) {
    ojson z;
    z["re"] = e.real();
    z["im"] = e.imag();
    eig.push_back(z);
  }
  j["eigenvalues"] = eig;
  j["stable"] = stab.stable;
  if (stab.d_star) j["d_star"] = *stab.d_star;
  return single(out, dump_json(j));
}

std::vector<Artifact> cmd_nash(const Scenario& s, const std::filesystem::path& out,
                               const RunOptions& opt) {
  reject_grid(opt, "nash");
  if (!s.game) throw InvalidInput("scenario field /game: required field is missing");
  if (s.model == Model::tiered)
    throw Unsupported("no differential game is defined for the tiered model");
  GameSpec spec;
  spec.firms = s.firms;
  spec.m = s.m;
  spec.r = s.game->r;
  spec.T = s.game->T;
  spec.x0 = s.game->x0;
  spec.variant = s.model == Model::targeted ? GameVariant::targeted_duopoly
                                            : GameVariant::nontargeted;
  numerics::ShootingConfig cfg;
  if (opt.tol) cfg.newton_tol = positive_tol(opt);

  const auto sol = solve_nash(spec, cfg);
  const auto check = verify_nash(sol, s.game->deviations);
  const std::size_t n = spec.firms.size();
  const bool targeted = spec.variant == GameVariant::targeted_duopoly;

  std::vector<std::string> header{"t"};
  for (std::size_t k = 0; k < n; ++k) header.push_back(numbered("x_", k));
  if (targeted) {
    for (const char* name : {"phi_11", "phi_12", "phi_21", "phi_22"}) header.push_back(name);
  } else {
    for (std::size_t k = 0; k < n; ++k) header.push_back(numbered("phi_", k));
  }
  for (std::size_t k = 0; k < n; ++k) header.push_back(numbered("u_", k));
  if (targeted)
    for (std::size_t k = 0; k < n; ++k) header.push_back(numbered("v_", k));
  CsvWriter csv(header);
  const auto& tr = sol.trajectory;
  for (std::size_t i = 0; i < tr.grid.size(); ++i) {
    std::vector<double> row{tr.grid[i]};
    for (double x : tr.states[i].s()) row.push_back(x / spec.m);
    row.insert(row.end(), tr.costates[i].begin(), tr.costates[i].end());
    row.insert(row.end(), tr.controls[i].u().begin(), tr.controls[i].u().end());
    row.insert(row.end(), tr.controls[i].v().begin(), tr.controls[i].v().end());
    csv.row(row);
  }

  ojson j;
  j["variant"] = to_string(spec.variant);
  j["converged"] = sol.bvp.converged;
  j["newton_iterations"] = sol.bvp.iterations;
  j["homotopy_stages"] = sol.homotopy_stages;
  j["terminal_residual_norm"] = sol.bvp.terminal_residual_norm;
  j["max_terminal_costate"] = sol.max_terminal_costate;
  j["condition_estimate"] = sol.bvp.condition_estimate;
  j["clamp_events"] = sol.clamp_events;
  j["grid_points"] = tr.grid.size();
  std::vector<double> profits, errors;
  for (std::size_t k = 0; k < n; ++k) {
    const auto p = profit(spec, tr, k);
    profits.push_back(p.value);
    errors.push_back(p.error_estimate);
  }
  j["profit"] = array(profits);
  j["profit_error_estimate"] = array(errors);
  j["terminal_epsilon"] = market_potential(tr.states.back()) / spec.m;
  ojson dev;
  const auto& o = s.game->deviations;
  dev["opponents"] = o.opponents == OpponentResponse::open_loop ? "open_loop" : "closed_loop";
  dev["count_per_firm"] = o.perturbations;
  dev["magnitude"] = o.magnitude;
  dev["seed"] = o.seed;
  dev["equilibrium_profit"] = array(check.equilibrium_profit);
  dev["max_gap"] = check.max_gap;
  ojson recs = ojson::array();
  for (const auto& r : check.records) {
    ojson x;
    x["firm"] = r.firm + 1;
    x["kind"] = r.kind == DeviationRecord::Kind::scale ? "scale" : "bump";
    x["on_u"] = r.on_u;
    x["on_v"] = r.on_v;
    x["amount"] = r.amount;
    if (r.kind == DeviationRecord::Kind::bump) {
      x["center"] = r.center;
      x["width"] = r.width;
    }
    x["gap"] = r.gap;
    recs.push_back(x);
  }
  dev["records"] = recs;
  j["deviations"] = dev;

  auto summary = out;
  summary += ".summary.json";
  return {Artifact{out, csv.str()}, Artifact{summary, dump_json(j)}};
}

namespace {

ojson allocation_json(const std::string& kind, const AllocationResult& r) {
  ojson j;
  j["kind"] = kind;
  j["B"] = r.B;
  j["u"] = r.u;
  j["v"] = r.v;
  j["fraction"] = r.fraction;
  j["objective"] = r.objective;
  j["method"] = to_string(r.method);
  j["delta0"] = optional_number(r.delta0);
  j["delta1"] = optional_number(r.delta1);
  j["s1"] = optional_number(r.s1);
  j["s2"] = optional_number(r.s2);
  j["cross_check_gap"] = optional_number(r.cross_check_gap);
  return j;
}

AllocationResult allocate_one(const std::string& kind, const Params& p) {
  if (kind == "instant") {
    AllocationQuery q;
    q.X = param(p, "X");
    q.rho = param(p, "rho", 1.0);
    q.sigma = param(p, "sigma", 1.0);
    q.B = param(p, "B", 1.0);
    q.N = param(p, "N", 1.0);
    return instantaneous_allocation(q);
  }
  if (kind == "steady") return steady_share_vs_nontargeted(param(p, "c1"), param(p, "c2"), versus(p));
  if (kind == "lead") return maximize_lead(param(p, "c"), versus(p));
  return tier_allocation(param(p, "c1"), param(p, "c2"));
}

}  // namespace

std::vector<Artifact> cmd_allocate(const Scenario& s, const std::filesystem::path& out,
                                   const RunOptions& opt) {
  if (!s.allocate) throw InvalidInput("scenario field /allocate: required field is missing");
  const std::string& kind = s.allocate->kind;
  if (!opt.grid) {
    const auto r = allocate_one(kind, s.allocate->params);
    ojson j = allocation_json(kind, r);
    if (kind == "lead") j["dominance"] = to_string(dominance_region(param(s.allocate->params, "c"), r.u));
    return single(out, dump_json(j));
  }
  const auto& axes = *opt.grid;
  check_axes(axes, allocate_parameters(kind), "allocate");
  std::vector<std::string> header;
  for (const auto& a : axes) header.push_back(a.name);
  const bool shares = kind == "steady" || kind == "lead";
  const char* u_name = kind == "instant" ? "u" : "u1";
  header.push_back(u_name);
  header.push_back(std::string(u_name) + "_squared");
  header.push_back("objective");
  if (shares) {
    header.push_back("s1");
    header.push_back("s2");
  }
  CsvWriter csv(header);
  for_each_cell(axes, [&](const std::vector<double>& cell) {
    Params p = s.allocate->params;
    for (std::size_t i = 0; i < axes.size(); ++i) p[axes[i].name] = cell[i];
    const auto r = allocate_one(kind, p);
    std::vector<double> row = cell;
    row.push_back(r.u);
    row.push_back(r.u * r.u);
    row.push_back(r.objective);
    if (shares) {
      row.push_back(*r.s1);
      row.push_back(*r.s2);
    }
    csv.row(row);
  });
  return single(out, csv.str());
}

namespace {

double sweep_value(const std::string& q, const Params& p) {
  auto c_pair = [&] {
    const auto c = maybe(p, "c");
    return std::pair{param(p, "c1", c), param(p, "c2", c)};
  };
  if (q == "s1" || q == "s2" || q == "lead") {
    const auto [c1, c2] = c_pair();
    const auto [s1, s2] = steady_shares_vs_nontargeted(c1, c2, param(p, "u1"), versus(p));
    return q == "s1" ? s1 : q == "s2" ? s2 : s1 - s2;
  }
  if (q == "optimal_u1_squared") {
    const auto [c1, c2] = c_pair();
    return steady_share_vs_nontargeted(c1, c2, versus(p)).fraction;
  }
  if (q == "lead_u1_squared") return maximize_lead(param(p, "c"), versus(p)).fraction;
  if (q == "tier_u1") {
    const auto [c1, c2] = c_pair();
    return tier_allocation(c1, c2).u;
  }
  if (q == "epsilon_star") {
    const auto [c1, c2] = c_pair();
    const auto u1 = maybe(p, "u1");
    return tier_potential(c1, c2, u1 ? *u1 : tier_allocation(c1, c2).u);
  }
  AllocationQuery a;
  a.X = param(p, "X");
  a.rho = param(p, "rho", 1.0);
  a.sigma = param(p, "sigma", 1.0);
  a.B = param(p, "B", 1.0);
  return instantaneous_allocation(a).fraction;
}

}  // namespace

std::vector<Artifact> cmd_sweep(const Scenario& s, const std::filesystem::path& out,
                                const RunOptions& opt) {
  if (!s.sweep) throw InvalidInput("scenario field /sweep: required field is missing");
  const auto& axes = opt.grid ? *opt.grid : s.sweep->axes;
  check_axes(axes, sweep_parameters(), "sweep");
  std::vector<std::string> header;
  for (const auto& a : axes) header.push_back(a.name);
  header.push_back(s.sweep->quantity);
  CsvWriter csv(header);
  for_each_cell(axes, [&](const std::vector<double>& cell) {
    Params p = s.sweep->fixed;
    for (std::size_t i = 0; i < axes.size(); ++i) p[axes[i].name] = cell[i];
    std::vector<double> row = cell;
    row.push_back(sweep_value(s.sweep->quantity, p));
    csv.row(row);
  });
  return single(out, csv.str());
}

int run_cli(int argc, char** argv, std::ostream& err) {
  CLI::App app{"Advertising oligopoly solver"};
  app.require_subcommand(1);
  std::string scenario_path, out_path, grid_spec;
  double tol = 0.0;
  struct Cmd {
    const char* name;
    const char* help;
    std::vector<Artifact> (*run)(const Scenario&, const std::filesystem::path&, const RunOptions&);
  };
  const Cmd cmds[] = {
      {"simulate", "Integrate the share dynamics and write a CSV trajectory", cmd_simulate},
      {"steady", "Closed-form steady state and its stability as JSON", cmd_steady},
      {"nash", "Solve the differential game; CSV path plus <out>.summary.json", cmd_nash},
      {"allocate", "Budget allocation as JSON, or CSV over --grid", cmd_allocate},
      {"sweep", "Grid of an observable as CSV", cmd_sweep},
  };
  std::vector<CLI::App*> subs;
  for (const auto& c : cmds) {
    auto* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("--scenario", scenario_path, "Scenario JSON file")->required();
    sub->add_option("--out", out_path, "Output file")->required();
    sub->add_option("--tol", tol, "Integrator (simulate) or Newton (nash) tolerance");
    sub->add_option("--grid", grid_spec, "Sweep axes: name=lo:hi:count[,name=lo:hi:count]");
    subs.push_back(sub);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::ostringstream msg, dummy;
    app.exit(e, dummy, msg);
    err << msg.str();
    return exit_input;
  }

  try {
    const Cmd* chosen = nullptr;
    CLI::App* sub = nullptr;
    for (std::size_t i = 0; i < subs.size(); ++i)
      if (subs[i]->parsed()) {
        chosen = &cmds[i];
        sub = subs[i];
      }
    RunOptions opt;
    if (sub->count("--tol")) opt.tol = tol;
    if (sub->count("--grid")) opt.grid = parse_grid_spec(grid_spec);
    const Scenario s = load_scenario(scenario_path);
    const auto out = resolve_output(out_path);
    write_artifacts(chosen->run(s, out, opt));
    return exit_ok;
  } catch (const Unsupported& e) {
    err << "adgame: unsupported: " << e.what() << "\n";
    return exit_unsupported;
  } catch (const InvalidInput& e) {
    err << "adgame: input error: " << e.what() << "\n";
    return exit_input;
  } catch (const SingularJacobian& e) {
    err << "adgame: numerical failure: " << e.what() << " (condition estimate "
        << e.condition_estimate() << ")\n";
    return exit_numerical;
  } catch (const Error& e) {
    err << "adgame: numerical failure: " << e.what() << "\n";
    return exit_numerical;
  } catch (const std::exception& e) {
    err << "adgame: internal error: " << e.what() << "\n";
    return exit_numerical;
  }
}

}  // namespace adgame::cli
