#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "domain.hpp"
#include "ltlf.hpp"
#include "pddl.hpp"
#include "regret.hpp"
#include "solvers.hpp"
#include "symgame.hpp"

namespace symsynth::cli {

// process exit codes, shared by every subcommand
inline constexpr int kOk = 0;
inline constexpr int kFailure = 1;
inline constexpr int kInfeasible = 2;
inline constexpr int kCapExceeded = 3;
inline constexpr int kMismatch = 4;

struct CliError : std::runtime_error {
  int code;
  explicit CliError(const std::string& msg, int c = kFailure)
      : std::runtime_error(msg), code(c) {}
};

enum class Solver { Explicit, SymbolicMonolithic, SymbolicPartitioned };
enum class Objective { MinMax, Regret };

inline const char* solver_name(Solver s) {
  switch (s) {
    case Solver::Explicit: return "explicit";
    case Solver::SymbolicMonolithic: return "symbolic-monolithic";
    default: return "symbolic-partitioned";
  }
}

inline Solver solver_from_name(const std::string& s) {
  if (s == "explicit") return Solver::Explicit;
  if (s == "symbolic-monolithic") return Solver::SymbolicMonolithic;
  if (s == "symbolic-partitioned") return Solver::SymbolicPartitioned;
  throw CliError("unknown solver '" + s + "'");
}

inline const char* objective_name(Objective o) {
  return o == Objective::MinMax ? "minmax" : "regret";
}

inline Objective objective_from_name(const std::string& s) {
  if (s == "minmax") return Objective::MinMax;
  if (s == "regret") return Objective::Regret;
  throw CliError("unknown objective '" + s + "'");
}

struct RunConfig {
  std::string instance_path;
  std::string pddl_domain, pddl_problem, caps_path;
  std::string formula;  // LTLf text, or a path to a file holding it
  Solver solver = Solver::SymbolicMonolithic;
  Objective objective = Objective::MinMax;
  std::optional<int64_t> budget;
  uint64_t seed = 0;
  std::string out_dir = "out";
  uint32_t max_states = 2000000;  // explicit-representation refusal cap
  uint32_t max_vars = 512;        // decision-variable refusal cap
};

namespace detail {

struct Stopwatch {
  using Clock = std::chrono::steady_clock;
  Clock::time_point start = Clock::now();
  Clock::time_point mark = Clock::now();
  nlohmann::json laps = nlohmann::json::object();
  void lap(const char* name) {
    auto now = Clock::now();
    laps[name] = std::chrono::duration<double, std::milli>(now - mark).count();
    mark = now;
  }
  nlohmann::json done() {
    laps["total"] =
        std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    return laps;
  }
};

inline std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CliError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const std::string& dir, const std::string& name,
                       const std::string& text) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  fs::path p = fs::path(dir) / name;
  std::ofstream out(p);
  if (!out) throw CliError("cannot write '" + p.string() + "'");
  out << text;
}

// --formula accepts either the formula itself or a file containing it
inline std::string formula_text(const std::string& arg) {
  std::error_code ec;
  if (!arg.empty() && std::filesystem::is_regular_file(arg, ec)) {
    std::string t = slurp(arg);
    while (!t.empty() && (t.back() == '\n' || t.back() == '\r')) t.pop_back();
    return t;
  }
  return arg;
}

inline nlohmann::json value_json(int64_t v) {
  return v == solve::kInf ? nlohmann::json("inf") : nlohmann::json(v);
}

inline std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

// winning robot (state, task) pairs with the first recorded action each
inline nlohmann::json symbolic_strategy_rows(const manip::Game& arena,
                                             const manip::AbstractedGame& abs,
                                             const sym::SymbolicGame& sg,
                                             const sym::SymbolicTask& task,
                                             const solve::LayeredResult& r) {
  auto& m = *sg.m;
  nlohmann::json rows = nlohmann::json::array();
  dd::Ref pending = m.apply(dd::BinOp::And, r.winning, m.negate(task.accepting));
  if (pending == m.zero()) return rows;
  std::vector<dd::VarId> universe = sg.blocks.x;
  universe.insert(universe.end(), sg.blocks.y.begin(), sg.blocks.y.end());
  std::vector<int8_t> asg(m.var_count(), 0);
  m.foreach_sat(pending, universe, [&](const std::vector<uint8_t>& row) {
    uint64_t code = dd::decode_bits(universe, row, sg.blocks.x);
    uint64_t z = dd::decode_bits(universe, row, sg.blocks.y);
    for (size_t k = 0; k < universe.size(); k++)
      asg[universe[k]] = static_cast<int8_t>(row[k]);
    nlohmann::json jr;
    jr["state"] = code;
    jr["game_state"] = arena.state_names[abs.robot_states[code]];
    jr["task_state"] = z;
    bool found = false;
    for (uint32_t a = 0; a < sg.n_robot_actions && !found; a++) {
      for (size_t k = 0; k < sg.blocks.o.size(); k++)
        asg[sg.blocks.o[k]] = static_cast<int8_t>((a >> k) & 1);
      auto t = m.eval(r.moves, asg);
      if (!t.is_inf && t.value != 0) {
        jr["action"] = arena.robot_action_names[a];
        found = true;
      }
    }
    if (!found) throw CliError("winning state has no recorded move");
    rows.push_back(std::move(jr));
  });
  return rows;
}

}  // namespace detail

inline manip::Instance load_run_instance(const RunConfig& cfg) {
  manip::Instance inst;
  bool have_json = !cfg.instance_path.empty();
  bool have_pddl = !cfg.pddl_domain.empty() || !cfg.pddl_problem.empty();
  if (have_json && have_pddl)
    throw CliError("pass either --instance or PDDL inputs, not both");
  if (have_json) {
    inst = manip::load_instance(cfg.instance_path);
  } else if (have_pddl) {
    if (cfg.pddl_domain.empty() || cfg.pddl_problem.empty())
      throw CliError("PDDL input needs both --pddl-domain and --pddl-problem");
    inst = pddl::load_pddl(cfg.pddl_domain, cfg.pddl_problem, cfg.caps_path)
               .instance;
  } else {
    throw CliError("no instance: pass --instance or --pddl-domain/--pddl-problem");
  }
  if (!cfg.formula.empty()) inst.formula = detail::formula_text(cfg.formula);
  if (inst.formula.empty()) throw CliError("instance has no task formula");
  return inst;
}

struct PipelineOutcome {
  int code = kOk;
  bool feasible = false;
  int64_t minmax = solve::kInf;  // objective values at the start state
  int64_t regret = solve::kInf;
  nlohmann::json report;
  nlohmann::json rows = nlohmann::json::array();  // strategy artifact rows
};

// one synthesis run on a fresh manager; shared by synth and bench
inline PipelineOutcome run_pipeline(const manip::Instance& inst,
                                    const RunConfig& cfg) {
  PipelineOutcome out;
  detail::Stopwatch sw;
  nlohmann::json& rep = out.report;
  rep["kind"] = "synth";
  rep["solver"] = solver_name(cfg.solver);
  rep["objective"] = objective_name(cfg.objective);
  rep["seed"] = cfg.seed;
  rep["formula"] = inst.formula;

  auto cap = [&](const std::string& dim, uint64_t n, uint64_t limit) {
    rep["cap"] = {{"dimension", dim}, {"size", n}, {"limit", limit}};
    rep["timing"] = sw.done();
    out.code = kCapExceeded;
  };

  manip::Game arena;
  try {
    arena = manip::build_game(inst.domain, cfg.max_states);
  } catch (const manip::DomainError& e) {
    if (std::string(e.what()).find("state cap exceeded") != std::string::npos) {
      cap("arena states", cfg.max_states, cfg.max_states);
      return out;
    }
    throw;
  }
  auto dfa = ltlf::to_dfa(ltlf::parse_formula(inst.formula));
  sw.lap("build");
  rep["instance"] = {{"locations", inst.domain.locations.size()},
                     {"objects", inst.domain.objects.size()},
                     {"arena_states", arena.size()},
                     {"dfa_states", dfa.n_states}};
  const uint64_t product_bound =
      uint64_t(arena.size()) * std::max<uint32_t>(1, dfa.n_states);

  if (cfg.solver == Solver::Explicit) {
    if (product_bound > cfg.max_states) {
      cap("product states", product_bound, cfg.max_states);
      return out;
    }
    auto product = solve::build_product(arena, dfa);
    rep["instance"]["product_states"] = product.size();
    auto ex = solve::explicit_vi(product);
    sw.lap("minmax");
    out.minmax = ex.values[product.init];
    rep["minmax_value"] = detail::value_json(out.minmax);
    rep["iterations"] = {{"sweeps", ex.sweeps}};
    if (cfg.objective == Objective::MinMax) {
      out.feasible = out.minmax < solve::kInf;
      out.rows = solve::strategy_json(product, arena, ex.strategy);
      sw.lap("strategy");
    } else {
      if (!cfg.budget && out.minmax == solve::kInf) {
        rep["feasible"] = false;
        rep["note"] = "no finite min-max value, so no default budget";
        rep["timing"] = sw.done();
        out.code = kInfeasible;
        return out;
      }
      int64_t budget = cfg.budget ? *cfg.budget : regret::auto_budget(out.minmax);
      rep["budget"] = budget;
      rep["budget_auto"] = !cfg.budget.has_value();
      auto run = regret::run_regret_explicit(arena, dfa, budget);
      sw.lap("regret");
      out.feasible = run.res.feasible;
      out.regret = run.res.feasible ? run.res.regret : solve::kInf;
      rep["regret_value"] = detail::value_json(out.regret);
      rep["sizes"] = {{"utility_nodes", run.ug.g.size()},
                      {"best_response_nodes", run.brg.g.size()},
                      {"alternative_values", run.brg.b_values.size()}};
      out.rows = regret::regret_strategy_json(run, arena);
      sw.lap("strategy");
    }
  } else {
    const bool part = cfg.solver == Solver::SymbolicPartitioned;
    auto abs = manip::abstract(arena);
    rep["instance"]["robot_states"] = abs.robot_states.size();
    if (product_bound <= cfg.max_states)
      rep["instance"]["product_states"] = solve::build_product(arena, dfa).size();
    const uint32_t nr = static_cast<uint32_t>(arena.robot_action_names.size());
    const uint32_t nh = static_cast<uint32_t>(arena.human_action_names.size());
    const uint32_t base_bits =
        dd::bits_for(abs.robot_states.size()) + dd::bits_for(dfa.n_states) +
        dd::bits_for(nr) + dd::bits_for(nh);
    const uint32_t z0 = dfa.step(dfa.init, dfa.mask_of(arena.letter(arena.init)));

    if (cfg.objective == Objective::MinMax) {
      if (base_bits > cfg.max_vars) {
        cap("decision variables", base_bits, cfg.max_vars);
        return out;
      }
      dd::Manager m;
      auto blocks = sym::allocate_blocks(m, abs.robot_states.size(),
                                         dfa.n_states, 0, nr, nh);
      auto sg = sym::encode(m, arena, abs, blocks);
      auto task = sym::encode_task(sg, dfa);
      dd::Ref real = m.apply(dd::BinOp::And, sg.states, task.states);
      dd::Ref targets = m.apply(dd::BinOp::And, real, task.accepting);
      auto tr = part ? sym::build_partitioned(sg) : sym::build_monolithic(sg);
      sw.lap("encode");
      auto res = solve::symbolic_vi_weighted(sg, task, tr, targets);
      sw.lap("minmax");
      out.minmax = solve::extract_value(
          sg, res, solve::product_cube(sg, task, abs.init, z0));
      out.feasible = out.minmax < solve::kInf;
      rep["minmax_value"] = detail::value_json(out.minmax);
      rep["iterations"] = {{"layers", res.layers.size()}};
      rep["variables"] = {{"x", blocks.x.size()},
                          {"y", blocks.y.size()},
                          {"o", blocks.o.size()},
                          {"i", blocks.i.size()}};
      rep["peak_nodes"] = m.stats().peak_nodes;
      out.rows = detail::symbolic_strategy_rows(arena, abs, sg, task, res);
      sw.lap("strategy");
    } else {
      int64_t budget;
      if (cfg.budget) {
        budget = *cfg.budget;
      } else {
        // the default budget rule needs the min-max value first
        if (base_bits > cfg.max_vars) {
          cap("decision variables", base_bits, cfg.max_vars);
          return out;
        }
        dd::Manager pm;
        auto blocks = sym::allocate_blocks(pm, abs.robot_states.size(),
                                           dfa.n_states, 0, nr, nh);
        auto sg = sym::encode(pm, arena, abs, blocks);
        auto task = sym::encode_task(sg, dfa);
        dd::Ref real = pm.apply(dd::BinOp::And, sg.states, task.states);
        dd::Ref targets = pm.apply(dd::BinOp::And, real, task.accepting);
        auto tr = part ? sym::build_partitioned(sg) : sym::build_monolithic(sg);
        auto res = solve::symbolic_vi_weighted(sg, task, tr, targets);
        out.minmax = solve::extract_value(
            sg, res, solve::product_cube(sg, task, abs.init, z0));
        rep["minmax_value"] = detail::value_json(out.minmax);
        sw.lap("minmax");
        if (out.minmax == solve::kInf) {
          rep["feasible"] = false;
          rep["note"] = "no finite min-max value, so no default budget";
          rep["timing"] = sw.done();
          out.code = kInfeasible;
          return out;
        }
        budget = regret::auto_budget(out.minmax);
      }
      rep["budget"] = budget;
      rep["budget_auto"] = !cfg.budget.has_value();
      const uint32_t bits = base_bits + dd::bits_for(uint64_t(budget) + 2);
      if (bits > cfg.max_vars) {
        cap("decision variables", bits, cfg.max_vars);
        return out;
      }
      dd::Manager m;
      auto run = regret::run_regret_symbolic(m, arena, abs, dfa, budget, part);
      sw.lap("regret");
      out.feasible = run.res.feasible;
      out.regret = run.res.feasible ? run.res.regret : solve::kInf;
      rep["regret_value"] = detail::value_json(out.regret);
      auto st = regret::stage_stats(run);
      rep["sizes"] = {{"utility_points", st.utility_points},
                      {"alternative_rows", st.alternate_rows},
                      {"alternative_values", run.brg.b_values.size()}};
      rep["variables"] = {{"x", run.ug.blocks.x.size()},
                          {"y", run.ug.blocks.y.size()},
                          {"u", run.ug.blocks.u.size()},
                          {"o", run.ug.blocks.o.size()},
                          {"i", run.ug.blocks.i.size()},
                          {"b", run.brg.b.size()}};
      rep["peak_nodes"] = st.peak_dd_nodes;
      rep["iterations"] = {{"thresholds", run.res.layers.size()}};
      out.rows = regret::regret_strategy_json(run, arena, abs);
      sw.lap("strategy");
    }
  }
  rep["feasible"] = out.feasible;
  rep["timing"] = sw.done();
  if (!out.feasible) out.code = kInfeasible;
  return out;
}

inline int run_synth(const RunConfig& cfg, std::ostream& os) {
  auto inst = load_run_instance(cfg);
  auto out = run_pipeline(inst, cfg);
  if (out.code != kCapExceeded) {
    nlohmann::json art;
    art["format"] = "symsynth-strategy-v1";
    art["solver"] = solver_name(cfg.solver);
    art["objective"] = objective_name(cfg.objective);
    art["seed"] = cfg.seed;
    art["formula"] = inst.formula;
    if (out.report.contains("budget")) art["budget"] = out.report["budget"];
    art["value"] = cfg.objective == Objective::MinMax
                       ? detail::value_json(out.minmax)
                       : detail::value_json(out.regret);
    art["feasible"] = out.feasible;
    art["instance"] = manip::instance_to_json(inst);
    art["rows"] = out.rows;
    detail::write_text(cfg.out_dir, "strategy.json", art.dump(2) + "\n");
  }
  detail::write_text(cfg.out_dir, "report.json", out.report.dump() + "\n");
  os << out.report.dump() << "\n";
  return out.code;
}

// ---------------------------------------------------------------------------
// translate

struct TranslateConfig {
  std::string formula;
  std::string out_dir = "out";
};

inline std::string dfa_dot(const ltlf::Dfa& d) {
  auto letter_str = [&](uint32_t mask) {
    std::string s = "{";
    bool first = true;
    for (size_t j = 0; j < d.atoms.size(); j++)
      if (mask & (uint32_t(1) << j)) {
        if (!first) s += ",";
        s += d.atoms[j];
        first = false;
      }
    return s + "}";
  };
  std::ostringstream ss;
  ss << "digraph dfa {\n  rankdir=LR;\n  start [shape=point];\n";
  for (uint32_t s = 0; s < d.n_states; s++)
    ss << "  q" << s << " [shape="
       << (d.accepting[s] ? "doublecircle" : "circle") << "];\n";
  ss << "  start -> q" << d.init << ";\n";
  for (uint32_t s = 0; s < d.n_states; s++) {
    std::map<uint32_t, std::string> grouped;  // dst -> letter list
    for (uint32_t mask = 0; mask < d.delta[s].size(); mask++) {
      std::string& lbl = grouped[d.delta[s][mask]];
      if (!lbl.empty()) lbl += " | ";
      lbl += letter_str(mask);
    }
    for (const auto& [dst, lbl] : grouped)
      ss << "  q" << s << " -> q" << dst << " [label=\"" << lbl << "\"];\n";
  }
  ss << "}\n";
  return ss.str();
}

inline nlohmann::json dfa_json(const ltlf::Dfa& d, const std::string& formula) {
  nlohmann::json j;
  j["formula"] = formula;
  j["atoms"] = d.atoms;
  j["n_states"] = d.n_states;
  j["init"] = d.init;
  nlohmann::json acc = nlohmann::json::array();
  for (uint32_t s = 0; s < d.n_states; s++)
    if (d.accepting[s]) acc.push_back(s);
  j["accepting"] = acc;
  j["delta"] = d.delta;
  return j;
}

inline int run_translate(const TranslateConfig& cfg, std::ostream& os) {
  std::string text = detail::formula_text(cfg.formula);
  if (text.empty()) throw CliError("translate needs --formula");
  auto dfa = ltlf::to_dfa(ltlf::parse_formula(text));
  detail::write_text(cfg.out_dir, "dfa.dot", dfa_dot(dfa));
  detail::write_text(cfg.out_dir, "dfa.json", dfa_json(dfa, text).dump(2) + "\n");
  nlohmann::json rep;
  rep["kind"] = "translate";
  rep["formula"] = text;
  rep["atoms"] = dfa.atoms;
  rep["n_states"] = dfa.n_states;
  os << rep.dump() << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// rollout

struct RolloutConfig {
  std::string strategy_path;
  std::string human = "adversarial";
  uint32_t count = 1;
  uint64_t seed = 0;
  std::string out_dir = "out";
  uint32_t max_steps = 100000;
  uint32_t max_states = 2000000;
};

namespace detail {

struct HumanSpec {
  solve::HumanPolicy policy = solve::HumanPolicy::Adversarial;
  uint64_t seed = 0;
  std::vector<uint32_t> script;
};

inline HumanSpec parse_human(const std::string& s, uint64_t default_seed,
                             const manip::Game& arena) {
  HumanSpec h;
  auto colon = s.find(':');
  std::string head = s.substr(0, colon);
  std::string tail = colon == std::string::npos ? "" : s.substr(colon + 1);
  if (head == "adversarial") {
    h.policy = solve::HumanPolicy::Adversarial;
  } else if (head == "cooperative") {
    h.policy = solve::HumanPolicy::Cooperative;
  } else if (head == "random") {
    h.policy = solve::HumanPolicy::Random;
    h.seed = tail.empty() ? default_seed : std::stoull(tail);
  } else if (head == "script") {
    h.policy = solve::HumanPolicy::Scripted;
    if (tail.empty()) throw CliError("script policy needs a path: script:FILE");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(slurp(tail));
    } catch (const nlohmann::json::exception& e) {
      throw CliError("cannot parse script '" + tail + "': " + e.what());
    }
    if (!j.is_array()) throw CliError("script must be a JSON array of human actions");
    for (const auto& a : j) {
      std::string name = a.get<std::string>();
      auto it = std::find(arena.human_action_names.begin(),
                          arena.human_action_names.end(), name);
      if (it == arena.human_action_names.end())
        throw CliError("unknown human action '" + name + "' in script");
      h.script.push_back(
          static_cast<uint32_t>(it - arena.human_action_names.begin()));
    }
  } else {
    throw CliError("unknown human policy '" + s + "'");
  }
  return h;
}

inline nlohmann::json payoff_stats(const std::vector<int64_t>& payoffs,
                                   uint32_t accepted) {
  nlohmann::json j;
  j["accepted"] = accepted;
  if (payoffs.empty()) {
    j["payoff"] = nullptr;
    return j;
  }
  int64_t lo = payoffs[0], hi = payoffs[0], sum = 0;
  for (int64_t p : payoffs) {
    lo = std::min(lo, p);
    hi = std::max(hi, p);
    sum += p;
  }
  j["payoff"] = {{"min", lo},
                 {"max", hi},
                 {"mean", double(sum) / double(payoffs.size())}};
  return j;
}

}  // namespace detail

inline int run_rollout(const RolloutConfig& cfg, std::ostream& os) {
  nlohmann::json art;
  try {
    art = nlohmann::json::parse(detail::slurp(cfg.strategy_path));
  } catch (const nlohmann::json::exception& e) {
    throw CliError("cannot parse '" + cfg.strategy_path + "': " + e.what());
  }
  if (!art.is_object() || art.value("format", "") != "symsynth-strategy-v1")
    throw CliError("'" + cfg.strategy_path + "' is not a strategy artifact");
  manip::Instance inst;
  try {
    inst = manip::instance_from_json(art.at("instance"));
    inst.formula = art.at("formula").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw CliError("malformed strategy artifact: " + std::string(e.what()));
  }
  Objective obj = objective_from_name(art.at("objective").get<std::string>());
  auto arena = manip::build_game(inst.domain, cfg.max_states);
  auto dfa = ltlf::to_dfa(ltlf::parse_formula(inst.formula));
  auto human = detail::parse_human(cfg.human, cfg.seed, arena);

  std::map<std::string, uint32_t> action_of;
  for (uint32_t a = 0; a < arena.robot_action_names.size(); a++)
    action_of.emplace(arena.robot_action_names[a], a);
  std::map<std::string, uint32_t> state_of;
  for (uint32_t v = 0; v < arena.size(); v++)
    state_of.emplace(arena.state_names[v], v);
  auto b_of = [](const nlohmann::json& v) {
    return v.is_string() ? solve::kInf : v.get<int64_t>();
  };
  auto check_row = [&](const nlohmann::json& row) {
    auto st = state_of.find(row.at("game_state").get<std::string>());
    if (st == state_of.end() || arena.owner[st->second] != 0 ||
        row.at("task_state").get<uint32_t>() >= dfa.n_states ||
        !action_of.count(row.at("action").get<std::string>()))
      throw CliError("strategy row does not match the instance: " + row.dump());
  };

  std::vector<int64_t> payoffs;
  uint32_t accepted = 0;
  nlohmann::json transcripts = nlohmann::json::array();
  auto edge_cost = [](const auto& edges, uint32_t action, uint32_t dst) {
    for (const auto& e : edges)
      if (e.action == action && e.dst == dst) return e.cost;
    return int64_t(0);
  };

  if (obj == Objective::MinMax) {
    auto product = solve::build_product(arena, dfa);
    std::map<std::pair<uint32_t, uint32_t>, uint32_t> locate;  // (v, z) -> node
    for (uint32_t s = 0; s < product.size(); s++)
      if (product.owner[s] == 0)
        locate[{product.v_of[s], product.z_of[s]}] = s;
    std::map<uint32_t, uint32_t> strategy;
    for (const auto& row : art.at("rows")) {
      check_row(row);
      auto it = locate.find({state_of.at(row.at("game_state").get<std::string>()),
                             row.at("task_state").get<uint32_t>()});
      if (it != locate.end())
        strategy[it->second] = action_of.at(row.at("action").get<std::string>());
    }
    auto values = solve::explicit_vi(product).values;
    for (uint32_t i = 0; i < cfg.count; i++) {
      solve::RolloutSpec spec;
      spec.policy = human.policy;
      spec.seed = human.seed + i;
      spec.script = human.script;
      spec.max_steps = cfg.max_steps;
      auto r = solve::rollout(product, arena, dfa, strategy, values, spec);
      nlohmann::json steps = nlohmann::json::array();
      for (size_t k = 0; k < r.actions.size(); k++) {
        uint32_t src = r.states[k], dst = r.states[k + 1];
        bool robot = product.owner[src] == 0;
        steps.push_back(
            {{"state", arena.state_names[product.v_of[src]]},
             {"task_state", product.z_of[src]},
             {"owner", robot ? "robot" : "human"},
             {"action", robot ? arena.robot_action_names[r.actions[k]]
                              : arena.human_action_names[r.actions[k]]},
             {"cost", edge_cost(product.edges[src], r.actions[k], dst)}});
      }
      uint32_t last = r.states.back();
      transcripts.push_back(
          {{"steps", std::move(steps)},
           {"final", {{"state", arena.state_names[product.v_of[last]]},
                      {"task_state", product.z_of[last]}}},
           {"payoff", r.payoff},
           {"accepted", r.accepted}});
      payoffs.push_back(r.payoff);
      accepted += r.accepted ? 1 : 0;
    }
  } else {
    if (!art.contains("budget"))
      throw CliError("regret strategy artifact lacks a budget");
    int64_t budget = art.at("budget").get<int64_t>();
    auto run = regret::run_regret_explicit(arena, dfa, budget);
    const auto& product = run.product;
    // rows are keyed by (game state, task state, payoff so far, declined value)
    std::map<std::tuple<uint32_t, uint32_t, int64_t, int64_t>, uint32_t> rowmap;
    for (const auto& row : art.at("rows")) {
      check_row(row);
      rowmap[{state_of.at(row.at("game_state").get<std::string>()),
              row.at("task_state").get<uint32_t>(),
              row.at("utility").get<int64_t>(), b_of(row.at("b"))}] =
          action_of.at(row.at("action").get<std::string>());
    }
    auto locate = [&](uint32_t n) {  // best-response node -> product node
      uint32_t un = run.brg.g.v_of[n];
      return un == regret::kNoNode ? regret::kNoNode : run.ug.g.v_of[un];
    };
    std::map<uint32_t, uint32_t> strategy;
    for (uint32_t n = 0; n < run.brg.g.size(); n++) {
      if (run.brg.g.owner[n] != 0) continue;
      uint32_t pn = locate(n);
      if (pn == regret::kNoNode) continue;
      auto it = rowmap.find({product.v_of[pn], product.z_of[pn],
                             run.brg.u_of[n],
                             run.brg.b_values[run.brg.g.z_of[n]]});
      if (it != rowmap.end()) strategy[n] = it->second;
    }
    for (uint32_t i = 0; i < cfg.count; i++) {
      solve::RolloutSpec spec;
      spec.policy = human.policy;
      spec.seed = human.seed + i;
      spec.script = human.script;
      spec.max_steps = cfg.max_steps;
      auto r = regret::rollout_brg(run.brg, strategy, spec);
      auto describe = [&](uint32_t n) {
        uint32_t pn = locate(n);
        nlohmann::json j;
        if (pn == regret::kNoNode) {
          j["state"] = "overshoot";
          j["task_state"] = nullptr;
        } else {
          j["state"] = arena.state_names[product.v_of[pn]];
          j["task_state"] = product.z_of[pn];
        }
        return j;
      };
      nlohmann::json steps = nlohmann::json::array();
      for (size_t k = 0; k < r.actions.size(); k++) {
        uint32_t src = r.nodes[k], dst = r.nodes[k + 1];
        bool robot = run.brg.g.owner[src] == 0;
        nlohmann::json step = describe(src);
        step["owner"] = robot ? "robot" : "human";
        step["action"] = robot ? arena.robot_action_names[r.actions[k]]
                               : arena.human_action_names[r.actions[k]];
        step["cost"] = edge_cost(run.brg.g.edges[src], r.actions[k], dst);
        steps.push_back(std::move(step));
      }
      transcripts.push_back({{"steps", std::move(steps)},
                             {"final", describe(r.nodes.back())},
                             {"payoff", r.payoff},
                             {"accepted", r.accepted}});
      payoffs.push_back(r.payoff);
      accepted += r.accepted ? 1 : 0;
    }
  }

  detail::write_text(cfg.out_dir, "transcripts.json", transcripts.dump(2) + "\n");
  nlohmann::json rep = detail::payoff_stats(payoffs, accepted);
  rep["kind"] = "rollout";
  rep["human"] = cfg.human;
  rep["n"] = cfg.count;
  rep["objective"] = objective_name(obj);
  os << rep.dump() << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// bench

struct BenchConfig {
  std::string scenario;  // vary-L | vary-O | vary-B
  int64_t lo = 0, hi = -1;
  std::vector<Solver> solvers = {Solver::Explicit, Solver::SymbolicMonolithic,
                                 Solver::SymbolicPartitioned};
  std::vector<uint64_t> seeds = {0};
  std::optional<uint32_t> locations, objects;  // the fixed dimensions
  std::string out_dir = "out";
  uint32_t max_states = 2000000;
  uint32_t max_vars = 512;
};

inline int run_bench(const BenchConfig& cfg, std::ostream& os) {
  const bool vary_l = cfg.scenario == "vary-L";
  const bool vary_o = cfg.scenario == "vary-O";
  const bool vary_b = cfg.scenario == "vary-B";
  if (!vary_l && !vary_o && !vary_b)
    throw CliError("unknown scenario '" + cfg.scenario + "'");
  if (cfg.lo > cfg.hi) throw CliError("empty parameter range");
  if (cfg.lo < (vary_b ? 0 : 1)) throw CliError("parameter range starts too low");
  if (cfg.seeds.empty()) throw CliError("no seeds");
  const uint32_t fixed_l = cfg.locations.value_or(vary_b ? 3 : 4);
  const uint32_t fixed_o = cfg.objects.value_or(vary_b ? 1 : 3);

  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  std::ofstream jsonl(std::filesystem::path(cfg.out_dir) / "bench.jsonl");
  if (!jsonl) throw CliError("cannot write into '" + cfg.out_dir + "'");
  std::vector<nlohmann::json> records;
  auto emit = [&](nlohmann::json r) {
    std::string line = r.dump();
    os << line << "\n";
    jsonl << line << "\n";
    records.push_back(std::move(r));
  };

  for (int64_t p = cfg.lo; p <= cfg.hi; p++) {
    const uint32_t n_loc = vary_l ? uint32_t(p) : fixed_l;
    const uint32_t n_obj = vary_o ? uint32_t(p) : fixed_o;
    for (uint64_t seed : cfg.seeds) {
      manip::Instance inst;
      std::string gen_err;
      try {
        inst = manip::gen_benchmark(n_loc, n_obj, seed);
      } catch (const std::exception& e) {
        gen_err = e.what();
      }
      for (Solver s : cfg.solvers) {
        nlohmann::json rec;
        rec["scenario"] = cfg.scenario;
        rec["param"] = p;
        rec["seed"] = seed;
        rec["locations"] = n_loc;
        rec["objects"] = n_obj;
        rec["solver"] = solver_name(s);
        if (!gen_err.empty()) {
          rec["status"] = "error";
          rec["error"] = gen_err;
          emit(std::move(rec));
          continue;
        }
        RunConfig rc;
        rc.solver = s;
        rc.objective = vary_b ? Objective::Regret : Objective::MinMax;
        if (vary_b) rc.budget = p;
        rc.seed = seed;
        rc.max_states = cfg.max_states;
        rc.max_vars = cfg.max_vars;
        try {
          auto out = run_pipeline(inst, rc);
          for (const auto& [k, v] : out.report.items()) rec[k] = v;
          rec["status"] = out.code == kCapExceeded ? "skip"
                          : out.code == kInfeasible ? "infeasible"
                                                    : "ok";
        } catch (const std::exception& e) {
          rec["status"] = "error";
          rec["error"] = e.what();
        }
        emit(std::move(rec));
      }
    }
  }

  // every solver that finished an instance must report the same start value
  bool mismatch = false;
  std::map<std::pair<int64_t, uint64_t>, std::map<std::string, nlohmann::json>>
      groups;
  const char* vkey = vary_b ? "regret_value" : "minmax_value";
  for (const auto& r : records) {
    std::string st = r.value("status", "");
    if (st != "ok" && st != "infeasible") continue;
    if (!r.contains(vkey)) continue;
    groups[{r["param"].get<int64_t>(), r["seed"].get<uint64_t>()}]
          [r["solver"].get<std::string>()] = r[vkey];
  }
  for (const auto& [key, by_solver] : groups) {
    std::vector<nlohmann::json> distinct;
    for (const auto& [sname, v] : by_solver)
      if (std::find(distinct.begin(), distinct.end(), v) == distinct.end())
        distinct.push_back(v);
    if (distinct.size() > 1) {
      mismatch = true;
      nlohmann::json bad;
      bad["check"] = "cross-solver";
      bad["ok"] = false;
      bad["param"] = key.first;
      bad["seed"] = key.second;
      bad["values"] = by_solver;
      emit(std::move(bad));
    }
  }
  if (!mismatch)
    emit({{"check", "cross-solver"}, {"ok", true}, {"groups", groups.size()}});

  if (vary_b) {
    // larger budgets may only improve the attainable regret
    bool monotone = true;
    std::map<std::pair<uint64_t, std::string>, std::map<int64_t, int64_t>> runs;
    for (const auto& r : records) {
      std::string st = r.value("status", "");
      if ((st != "ok" && st != "infeasible") || !r.contains("regret_value"))
        continue;
      const auto& v = r["regret_value"];
      runs[{r["seed"].get<uint64_t>(), r["solver"].get<std::string>()}]
          [r["param"].get<int64_t>()] =
              v.is_string() ? solve::kInf : v.get<int64_t>();
    }
    for (const auto& [key, by_budget] : runs) {
      int64_t prev = solve::kInf;
      bool first = true;
      for (const auto& [b, reg] : by_budget) {
        if (!first && reg > prev) monotone = false;
        prev = reg;
        first = false;
      }
    }
    emit({{"check", "regret-monotone"}, {"ok", monotone}});
  }

  std::ostringstream csv;
  csv << "scenario,param,seed,solver,status,minmax,regret,feasible,arena_states,"
         "product_states,peak_nodes,total_ms\n";
  auto cell = [](const nlohmann::json& r, const char* key) {
    if (!r.contains(key)) return std::string();
    const auto& v = r[key];
    return v.is_string() ? v.get<std::string>() : v.dump();
  };
  for (const auto& r : records) {
    if (r.contains("check")) continue;
    nlohmann::json in = r.value("instance", nlohmann::json::object());
    nlohmann::json tm = r.value("timing", nlohmann::json::object());
    csv << cell(r, "scenario") << ',' << cell(r, "param") << ','
        << cell(r, "seed") << ',' << cell(r, "solver") << ','
        << cell(r, "status") << ',' << cell(r, "minmax_value") << ','
        << cell(r, "regret_value") << ',' << cell(r, "feasible") << ','
        << cell(in, "arena_states") << ',' << cell(in, "product_states") << ','
        << cell(r, "peak_nodes") << ',' << cell(tm, "total") << "\n";
  }
  detail::write_text(cfg.out_dir, "bench.csv", csv.str());
  return mismatch ? kMismatch : kOk;
}

}  // namespace symsynth::cli
