#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "symsynth/dd.hpp"
#include "symsynth/domain.hpp"
#include "symsynth/ltlf.hpp"
#include "symsynth/symgame.hpp"

namespace symsynth::solve {

struct SolverError : std::runtime_error {
  explicit SolverError(const std::string& m) : std::runtime_error(m) {}
};

inline constexpr int64_t kInf = std::numeric_limits<int64_t>::max();

inline int64_t add_cost(int64_t c, int64_t w) {
  return w == kInf ? kInf : c + w;
}

// arena states paired with a task-monitor state; the monitor advances
// whenever an edge enters a robot state, reading that state's label
struct ProductGame {
  struct Edge {
    uint32_t action;
    int64_t cost;
    uint32_t dst;
  };
  uint32_t init = 0;
  std::vector<uint32_t> v_of, z_of;
  std::vector<uint8_t> owner;      // from the arena: 0 robot, 1 human
  std::vector<uint8_t> accepting;  // terminal for valuation and rollout
  std::vector<std::vector<Edge>> edges;
  std::map<std::pair<uint32_t, uint32_t>, uint32_t> index;  // (v, z) -> id

  uint32_t size() const { return static_cast<uint32_t>(owner.size()); }
};

inline ProductGame build_product(const manip::Game& g, const ltlf::Dfa& d) {
  for (const auto& a : d.atoms) {
    bool known = false;
    for (const auto& p : g.props) known = known || p == a;
    if (!known)
      throw SolverError("task atom is not a game proposition: " + a);
  }
  ProductGame p;
  auto intern = [&](uint32_t v, uint32_t z) {
    auto it = p.index.find({v, z});
    if (it != p.index.end()) return it->second;
    uint32_t id = p.size();
    p.index.emplace(std::make_pair(v, z), id);
    p.v_of.push_back(v);
    p.z_of.push_back(z);
    p.owner.push_back(g.owner[v]);
    p.accepting.push_back(d.accepting[z] ? 1 : 0);
    p.edges.emplace_back();
    return id;
  };
  uint32_t z0 = d.step(d.init, d.mask_of(g.letter(g.init)));
  p.init = intern(g.init, z0);
  for (uint32_t s = 0; s < p.size(); s++) {
    uint32_t v = p.v_of[s], z = p.z_of[s];
    for (const auto& e : g.edges[v]) {
      uint32_t zz =
          g.owner[e.dst] == 0 ? d.step(z, d.mask_of(g.letter(e.dst))) : z;
      uint32_t dst = intern(e.dst, zz);  // may grow p.edges
      p.edges[s].push_back({e.action, e.cost, dst});
    }
  }
  return p;
}

// min-max cost to reach acceptance, iterated downward from unsolved
struct ExplicitResult {
  std::vector<int64_t> values;
  std::map<uint32_t, uint32_t> strategy;  // robot product state -> action
  uint32_t sweeps = 0;                    // sweeps that changed something
};

inline ExplicitResult explicit_vi(const ProductGame& p) {
  const uint32_t n = p.size();
  ExplicitResult r;
  r.values.assign(n, kInf);
  int64_t maxc = 0;
  for (uint32_t s = 0; s < n; s++) {
    if (p.accepting[s]) r.values[s] = 0;
    for (const auto& e : p.edges[s]) maxc = std::max(maxc, e.cost);
  }
  const uint64_t cap = uint64_t(n) * (uint64_t(n) * uint64_t(maxc) + 2) + 2;
  for (uint64_t sweep = 0;; sweep++) {
    if (sweep > cap)
      throw SolverError("explicit value iteration exceeded its sweep bound");
    bool changed = false;
    for (uint32_t s = 0; s < n; s++) {
      if (p.accepting[s] || p.edges[s].empty()) continue;
      int64_t best = p.owner[s] == 0 ? kInf : 0;
      for (const auto& e : p.edges[s]) {
        int64_t w = add_cost(e.cost, r.values[e.dst]);
        best = p.owner[s] == 0 ? std::min(best, w) : std::max(best, w);
      }
      if (best < r.values[s]) {
        r.values[s] = best;
        changed = true;
      }
    }
    if (!changed) break;
    r.sweeps++;
  }
  for (uint32_t s = 0; s < n; s++) {
    if (p.owner[s] != 0 || p.accepting[s] || r.values[s] == kInf) continue;
    int64_t best = kInf;
    uint32_t pick = 0;
    for (const auto& e : p.edges[s]) {
      int64_t w = add_cost(e.cost, r.values[e.dst]);
      if (w < best) {
        best = w;
        pick = e.action;
      }
    }
    r.strategy.emplace(s, pick);
  }
  return r;
}

// qualitative attractor; move rows keep the iteration that first won a state
struct UniformResult {
  dd::Ref winning;
  dd::Ref moves;  // over (X, Y, O)
  uint32_t iterations = 0;
};

namespace detail {
struct PreMoves {
  dd::Ref states, moves;
};

inline PreMoves product_pre_moves(const sym::SymbolicGame& sg,
                                  const sym::SymbolicTask& task,
                                  const sym::TrPart& p, dd::Ref omega) {
  auto& m = *sg.m;
  dd::Ref pre = sym::product_pre(sg, task, omega, p);
  dd::Ref covered = m.apply(dd::BinOp::Or, m.negate(p.valid), pre);
  dd::Ref held = m.quantify(covered, sg.blocks.i, dd::Quant::Forall);
  dd::Ref good = m.apply(dd::BinOp::And, sym::robot_choices(sg, p), held);
  return {m.quantify(good, sg.blocks.o, dd::Quant::Exists), good};
}
}  // namespace detail

inline UniformResult symbolic_vi_uniform(const sym::SymbolicGame& sg,
                                         const sym::SymbolicTask& task,
                                         dd::Ref targets) {
  auto& m = *sg.m;
  sym::TrPart whole;
  whole.valid = sg.valid;
  whole.eta = sg.eta;
  dd::Ref real = m.apply(dd::BinOp::And, sg.states, task.states);
  UniformResult r;
  r.winning = m.apply(dd::BinOp::And, targets, real);
  r.moves = m.zero();
  for (;;) {
    auto pm = detail::product_pre_moves(sg, task, whole, r.winning);
    dd::Ref fresh = m.apply(dd::BinOp::And, m.apply(dd::BinOp::And, pm.states, real),
                            m.negate(r.winning));
    if (fresh == m.zero()) return r;
    r.moves = m.apply(dd::BinOp::Or, r.moves,
                      m.apply(dd::BinOp::And, pm.moves, fresh));
    r.winning = m.apply(dd::BinOp::Or, r.winning, fresh);
    r.iterations++;
  }
}

// ascending layered fixpoint over integer cost classes
struct LayeredResult {
  std::vector<std::pair<int64_t, dd::Ref>> layers;  // ascending, nonempty
  dd::Ref winning;
  dd::Ref moves;  // over (X, Y, O), rows from each state's entry layer
};

inline LayeredResult symbolic_vi_weighted(const sym::SymbolicGame& sg,
                                          const sym::SymbolicTask& task,
                                          const std::vector<sym::TrPart>& tr,
                                          dd::Ref targets) {
  auto& m = *sg.m;
  dd::Ref real = m.apply(dd::BinOp::And, sg.states, task.states);
  int64_t maxc = 0;
  for (const auto& p : tr) maxc = std::max(maxc, p.cost);
  const int64_t window = std::max<int64_t>(1, maxc);
  const int64_t cap =
      maxc * (int64_t(sg.n_states) * std::max<uint32_t>(1, task.n_states) + 1) +
      window + 1;

  LayeredResult r;
  r.moves = m.zero();
  r.winning = m.zero();
  std::vector<std::pair<int64_t, dd::Ref>> unions;  // prefix unions of layers
  auto union_up_to = [&](int64_t j) {
    dd::Ref u = m.zero();
    for (const auto& [jj, uu] : unions) {
      if (jj > j) break;
      u = uu;
    }
    return u;
  };

  int64_t idle = 0;
  for (int64_t value = 0;; value++) {
    if (value > cap)
      throw SolverError("weighted value iteration exceeded its layer bound");
    dd::Ref layer =
        value == 0 ? m.apply(dd::BinOp::And, targets, real) : m.zero();
    for (;;) {  // zero-cost classes feed the layer they extend
      bool grew = false;
      for (const auto& p : tr) {
        if (p.cost > value || p.valid == m.zero()) continue;
        dd::Ref base = union_up_to(value - p.cost);
        if (p.cost == 0) base = m.apply(dd::BinOp::Or, base, layer);
        auto pm = detail::product_pre_moves(sg, task, p, base);
        dd::Ref fresh = m.apply(
            dd::BinOp::And, m.apply(dd::BinOp::And, pm.states, real),
            m.negate(m.apply(dd::BinOp::Or, r.winning, layer)));
        if (fresh != m.zero()) {
          layer = m.apply(dd::BinOp::Or, layer, fresh);
          grew = true;
        }
      }
      if (!grew) break;
    }
    if (layer == m.zero()) {
      if (++idle >= window) return r;
      continue;
    }
    idle = 0;
    // collect every value-achieving move for the states entering here
    dd::Ref entry_moves = m.zero();
    for (const auto& p : tr) {
      if (p.cost > value || p.valid == m.zero()) continue;
      dd::Ref base = union_up_to(value - p.cost);
      if (p.cost == 0) base = m.apply(dd::BinOp::Or, base, layer);
      entry_moves = m.apply(
          dd::BinOp::Or, entry_moves,
          detail::product_pre_moves(sg, task, p, base).moves);
    }
    r.moves = m.apply(dd::BinOp::Or, r.moves,
                      m.apply(dd::BinOp::And, entry_moves, layer));
    r.winning = m.apply(dd::BinOp::Or, r.winning, layer);
    r.layers.emplace_back(value, layer);
    unions.emplace_back(value, r.winning);
  }
}

inline dd::Ref product_cube(const sym::SymbolicGame& sg,
                            const sym::SymbolicTask& task, uint64_t code,
                            uint64_t z) {
  auto& m = *sg.m;
  return m.apply(dd::BinOp::And, dd::code_cube(m, sg.blocks.x, code),
                 dd::code_cube(m, sg.blocks.y, z));
}

inline int64_t extract_value(const sym::SymbolicGame& sg,
                             const LayeredResult& r, dd::Ref state_cube) {
  auto& m = *sg.m;
  for (const auto& [j, layer] : r.layers)
    if (m.apply(dd::BinOp::And, layer, state_cube) != m.zero()) return j;
  return kInf;
}

// smallest encoded robot action recorded for each layered product state
inline std::map<uint32_t, uint32_t> decode_strategy(
    const ProductGame& p, const manip::AbstractedGame& abs,
    const sym::SymbolicGame& sg, const sym::SymbolicTask& task, dd::Ref winning,
    dd::Ref moves) {
  auto& m = *sg.m;
  std::map<uint32_t, uint32_t> code_of;
  for (uint32_t k = 0; k < abs.robot_states.size(); k++)
    code_of.emplace(abs.robot_states[k], k);
  std::map<uint32_t, uint32_t> out;
  std::vector<int8_t> asg(m.var_count(), 0);
  auto set_bits = [&](const std::vector<dd::VarId>& vars, uint64_t c) {
    for (size_t k = 0; k < vars.size(); k++)
      asg[vars[k]] = static_cast<int8_t>((c >> k) & 1);
  };
  for (uint32_t s = 0; s < p.size(); s++) {
    if (p.owner[s] != 0 || p.accepting[s]) continue;
    auto it = code_of.find(p.v_of[s]);
    if (it == code_of.end()) continue;
    set_bits(sg.blocks.x, it->second);
    set_bits(sg.blocks.y, p.z_of[s]);
    auto t = m.eval(winning, asg);
    if (t.is_inf || t.value == 0) continue;
    bool found = false;
    for (uint32_t a = 0; a < sg.n_robot_actions && !found; a++) {
      set_bits(sg.blocks.o, a);
      auto mv = m.eval(moves, asg);
      if (!mv.is_inf && mv.value != 0) {
        out.emplace(s, a);
        found = true;
      }
    }
    if (!found)
      throw SolverError("winning state has no recorded move");
    set_bits(sg.blocks.o, 0);
  }
  return out;
}

enum class HumanPolicy { Adversarial, Cooperative, Random, Scripted };

struct RolloutSpec {
  HumanPolicy policy = HumanPolicy::Adversarial;
  uint64_t seed = 0;
  std::vector<uint32_t> script;  // ground human actions, consumed in order
  uint32_t max_steps = 100000;
};

struct Rollout {
  std::vector<uint32_t> states;   // product ids, starts at the initial state
  std::vector<uint32_t> actions;  // ground ids, owner of states[k] moves
  int64_t payoff = 0;
  bool accepted = false;
};

// walk the product under the robot strategy; acceptance is re-derived by an
// independent monitor replay over the labels of the visited robot states
inline Rollout rollout(const ProductGame& p, const manip::Game& arena,
                       const ltlf::Dfa& dfa,
                       const std::map<uint32_t, uint32_t>& strategy,
                       const std::vector<int64_t>& values,
                       const RolloutSpec& spec) {
  Rollout r;
  uint32_t s = p.init;
  r.states.push_back(s);
  std::mt19937_64 rng(spec.seed);
  size_t script_pos = 0;
  for (uint32_t step = 0; step < spec.max_steps; step++) {
    if (p.accepting[s]) break;
    const auto& es = p.edges[s];
    if (es.empty()) break;
    const ProductGame::Edge* pick = nullptr;
    if (p.owner[s] == 0) {
      auto it = strategy.find(s);
      if (it == strategy.end())
        throw SolverError("strategy undefined at reached state " +
                          std::to_string(s));
      for (const auto& e : es)
        if (e.action == it->second) pick = &e;
      if (!pick)
        throw SolverError("strategy action inapplicable at state " +
                          std::to_string(s));
    } else {
      switch (spec.policy) {
        case HumanPolicy::Adversarial:
        case HumanPolicy::Cooperative: {
          bool adv = spec.policy == HumanPolicy::Adversarial;
          for (const auto& e : es) {
            if (!pick) {
              pick = &e;
              continue;
            }
            int64_t a = values[e.dst], b = values[pick->dst];
            if (adv ? a > b : a < b) pick = &e;
          }
          break;
        }
        case HumanPolicy::Random:
          pick = &es[rng() % es.size()];
          break;
        case HumanPolicy::Scripted: {
          if (script_pos >= spec.script.size())
            throw SolverError("human script exhausted at state " +
                              std::to_string(s));
          uint32_t want = spec.script[script_pos++];
          for (const auto& e : es)
            if (e.action == want) pick = &e;
          if (!pick)
            throw SolverError("scripted human action inapplicable at state " +
                              std::to_string(s));
          break;
        }
      }
    }
    r.actions.push_back(pick->action);
    r.payoff += pick->cost;
    s = pick->dst;
    r.states.push_back(s);
  }
  uint32_t z = dfa.init;
  for (uint32_t sid : r.states)
    if (p.owner[sid] == 0)
      z = dfa.step(z, dfa.mask_of(arena.letter(p.v_of[sid])));
  r.accepted = dfa.accepting[z];
  return r;
}

inline nlohmann::json values_json(const ProductGame& p,
                                  const std::vector<int64_t>& w) {
  nlohmann::json o = nlohmann::json::object();
  for (uint32_t s = 0; s < p.size(); s++)
    o[std::to_string(s)] =
        w[s] == kInf ? nlohmann::json("inf") : nlohmann::json(w[s]);
  return o;
}

inline nlohmann::json strategy_json(const ProductGame& p,
                                    const manip::Game& arena,
                                    const std::map<uint32_t, uint32_t>& st) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& [s, a] : st) {
    nlohmann::json row;
    row["state"] = s;
    row["game_state"] = p.v_of[s] < arena.state_names.size()
                            ? arena.state_names[p.v_of[s]]
                            : std::to_string(p.v_of[s]);
    row["task_state"] = p.z_of[s];
    row["action"] = arena.robot_action_names[a];
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::string strategy_dot(dd::Manager& m, dd::Ref moves) {
  return m.to_dot({{"moves", moves}});
}

}  // namespace symsynth::solve
