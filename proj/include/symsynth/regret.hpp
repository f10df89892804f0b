#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <json.hpp>

#include "symsynth/dd.hpp"
#include "symsynth/domain.hpp"
#include "symsynth/ltlf.hpp"
#include "symsynth/solvers.hpp"
#include "symsynth/symgame.hpp"

namespace symsynth::regret {

struct RegretError : std::runtime_error {
  explicit RegretError(const std::string& m) : std::runtime_error(m) {}
};

inline constexpr uint32_t kNoNode = 0xFFFFFFFFu;

// default budget: a quarter above the guaranteed payoff, rounded up
inline int64_t auto_budget(int64_t minmax) {
  if (minmax < 0 || minmax == solve::kInf)
    throw RegretError("no finite guaranteed payoff to derive a budget from");
  return (5 * minmax + 3) / 4;
}

// ---------------------------------------------------------------------------
// explicit pipeline

// product states annotated with the cost spent so far; accepting states stop
// the play, edges that would exceed the budget collapse into one losing sink
struct UtilityGraph {
  solve::ProductGame g;  // v_of = product state, z_of = accumulated cost
  int64_t budget = 0;
  uint32_t sink = kNoNode;
};

inline UtilityGraph build_utility_explicit(const solve::ProductGame& p,
                                           int64_t budget) {
  if (budget < 0) throw RegretError("budget must be nonnegative");
  UtilityGraph ug;
  ug.budget = budget;
  auto& g = ug.g;
  auto intern = [&](uint32_t node, int64_t u) {
    auto key = std::make_pair(node, static_cast<uint32_t>(u));
    auto it = g.index.find(key);
    if (it != g.index.end()) return it->second;
    uint32_t id = static_cast<uint32_t>(g.v_of.size());
    g.index.emplace(key, id);
    g.v_of.push_back(node);
    g.z_of.push_back(static_cast<uint32_t>(u));
    g.owner.push_back(p.owner[node]);
    g.accepting.push_back(p.accepting[node]);
    g.edges.emplace_back();
    return id;
  };
  g.init = intern(p.init, 0);
  for (uint32_t n = 0; n < g.size(); n++) {
    if (g.v_of[n] == kNoNode || g.accepting[n]) continue;
    uint32_t node = g.v_of[n];
    int64_t u = g.z_of[n];
    for (const auto& e : p.edges[node]) {
      int64_t u2 = u + e.cost;
      uint32_t dst;
      if (u2 > budget) {
        if (ug.sink == kNoNode) {
          ug.sink = static_cast<uint32_t>(g.v_of.size());
          g.v_of.push_back(kNoNode);
          g.z_of.push_back(0);
          g.owner.push_back(0);
          g.accepting.push_back(0);
          g.edges.emplace_back();
        }
        dst = ug.sink;
      } else {
        dst = intern(e.dst, u2);
      }
      g.edges[n].push_back({e.action, e.cost, dst});
    }
  }
  return ug;
}

// least final utility the pair can reach jointly from each node
inline std::vector<int64_t> cooperative_values(const UtilityGraph& ug) {
  const auto& g = ug.g;
  std::vector<int64_t> v(g.size(), solve::kInf);
  for (uint32_t n = 0; n < g.size(); n++)
    if (g.accepting[n]) v[n] = g.z_of[n];
  uint64_t cap = uint64_t(g.size()) + 2, sweeps = 0;
  for (bool changed = true; changed;) {
    changed = false;
    for (uint32_t n = 0; n < g.size(); n++) {
      if (g.accepting[n]) continue;
      int64_t best = solve::kInf;
      for (const auto& e : g.edges[n]) best = std::min(best, v[e.dst]);
      if (best < v[n]) {
        v[n] = best;
        changed = true;
      }
    }
    if (changed && ++sweeps > cap)
      throw RegretError("cooperative value iteration exceeded its sweep bound");
  }
  return v;
}

// per edge, the least final utility among its sibling edges; kInf when the
// edge has no alternative; only robot edges offer alternatives
inline std::vector<std::vector<int64_t>> best_alternates(
    const UtilityGraph& ug, const std::vector<int64_t>& cv) {
  const auto& g = ug.g;
  std::vector<std::vector<int64_t>> ba(g.size());
  for (uint32_t n = 0; n < g.size(); n++) {
    const auto& es = g.edges[n];
    if (es.empty()) continue;
    ba[n].assign(es.size(), solve::kInf);
    if (g.owner[n] != 0) continue;
    for (size_t k = 0; k < es.size(); k++) {
      int64_t b = solve::kInf;
      for (size_t j = 0; j < es.size(); j++)
        if (j != k) b = std::min(b, cv[es[j].dst]);
      ba[n][k] = b;
    }
  }
  return ba;
}

// utility graph unrolled further with the least value the robot has ever
// declined; accepting leaves score u - min(b, u)
struct BestResponseGraph {
  solve::ProductGame g;  // v_of = utility node, z_of = index into b_values
  std::vector<int64_t> b_values;  // ascending, the infinity sentinel last
  std::vector<int64_t> u_of;
  std::vector<int64_t> leaf_regret;  // kInf on non-leaves
  int64_t budget = 0;
};

inline BestResponseGraph build_best_response(
    const UtilityGraph& ug, const std::vector<std::vector<int64_t>>& ba) {
  const auto& u = ug.g;
  BestResponseGraph br;
  br.budget = ug.budget;
  std::set<int64_t> vals;
  for (const auto& row : ba)
    for (int64_t v : row)
      if (v != solve::kInf) vals.insert(v);
  br.b_values.assign(vals.begin(), vals.end());
  br.b_values.push_back(solve::kInf);
  auto idx_of = [&](int64_t v) {
    return static_cast<uint32_t>(
        std::lower_bound(br.b_values.begin(), br.b_values.end(), v) -
        br.b_values.begin());
  };
  auto& g = br.g;
  auto intern = [&](uint32_t node, uint32_t bi) {
    auto key = std::make_pair(node, bi);
    auto it = g.index.find(key);
    if (it != g.index.end()) return it->second;
    uint32_t id = static_cast<uint32_t>(g.v_of.size());
    g.index.emplace(key, id);
    g.v_of.push_back(node);
    g.z_of.push_back(bi);
    g.owner.push_back(u.owner[node]);
    g.accepting.push_back(u.accepting[node]);
    g.edges.emplace_back();
    br.u_of.push_back(int64_t(u.z_of[node]));
    br.leaf_regret.push_back(solve::kInf);
    return id;
  };
  g.init = intern(u.init, static_cast<uint32_t>(br.b_values.size() - 1));
  for (uint32_t n = 0; n < g.size(); n++) {
    uint32_t node = g.v_of[n];
    uint32_t bi = g.z_of[n];
    if (g.accepting[n]) {
      int64_t uu = br.u_of[n];
      br.leaf_regret[n] = uu - std::min(br.b_values[bi], uu);
      continue;
    }
    const auto& es = u.edges[node];
    for (size_t k = 0; k < es.size(); k++) {
      uint32_t b2 = bi;
      if (u.owner[node] == 0)
        b2 = idx_of(std::min(br.b_values[bi], ba[node][k]));
      uint32_t dst = intern(es[k].dst, b2);
      g.edges[n].push_back({es[k].action, es[k].cost, dst});
    }
  }
  return br;
}

struct RegretResult {
  int64_t regret = solve::kInf;
  bool feasible = false;
  std::vector<int64_t> values;  // kInf where the robot cannot force acceptance
  std::map<uint32_t, uint32_t> strategy;  // robot node -> action
};

// sweep the distinct leaf scores in ascending order; for each candidate the
// robot must force the play into leaves scoring at most that much, so the
// least candidate whose forced region contains a node is its value.  regions
// are monotone in the candidate, so each attractor restarts from the last.
inline RegretResult regret_vi(const BestResponseGraph& br) {
  const auto& g = br.g;
  RegretResult out;
  out.values.assign(g.size(), solve::kInf);
  std::set<int64_t> thresholds;
  for (uint32_t n = 0; n < g.size(); n++)
    if (br.leaf_regret[n] != solve::kInf) thresholds.insert(br.leaf_regret[n]);
  std::vector<uint8_t> attr(g.size(), 0);
  for (int64_t r : thresholds) {
    for (uint32_t n = 0; n < g.size(); n++)
      if (!attr[n] && br.leaf_regret[n] != solve::kInf &&
          br.leaf_regret[n] <= r) {
        attr[n] = 1;
        out.values[n] = r;
      }
    for (bool grew = true; grew;) {
      grew = false;
      std::vector<std::pair<uint32_t, uint32_t>> found;
      for (uint32_t n = 0; n < g.size(); n++) {
        if (attr[n] || g.edges[n].empty()) continue;
        if (g.owner[n] == 0) {
          for (const auto& e : g.edges[n])
            if (attr[e.dst]) {
              found.emplace_back(n, e.action);
              break;
            }
        } else {
          bool all = true;
          for (const auto& e : g.edges[n])
            if (!attr[e.dst]) {
              all = false;
              break;
            }
          if (all) found.emplace_back(n, 0);
        }
      }
      for (const auto& [n, a] : found) {
        attr[n] = 1;
        out.values[n] = r;
        if (g.owner[n] == 0) out.strategy.emplace(n, a);
        grew = true;
      }
    }
  }
  if (attr[g.init]) {
    out.feasible = true;
    out.regret = out.values[g.init];
  }
  return out;
}

struct BrgRollout {
  std::vector<uint32_t> nodes;
  std::vector<uint32_t> actions;
  int64_t payoff = 0;
  bool accepted = false;
};

// walk the best-response unrolling under a fixed robot strategy; cooperative
// and adversarial humans steer by exact payoffs of the restricted graph
inline BrgRollout rollout_brg(const BestResponseGraph& br,
                              const std::map<uint32_t, uint32_t>& strategy,
                              const solve::RolloutSpec& spec) {
  const auto& g = br.g;
  std::vector<int64_t> steer;
  bool coop = spec.policy == solve::HumanPolicy::Cooperative;
  if (coop || spec.policy == solve::HumanPolicy::Adversarial) {
    solve::ProductGame f = g;
    for (uint32_t n = 0; n < f.size(); n++) {
      if (f.owner[n] != 0 || f.accepting[n] || f.edges[n].empty()) continue;
      auto it = strategy.find(n);
      if (it == strategy.end()) {
        f.edges[n].clear();
        continue;
      }
      std::vector<solve::ProductGame::Edge> keep;
      for (const auto& e : f.edges[n])
        if (e.action == it->second) keep.push_back(e);
      f.edges[n] = std::move(keep);
    }
    if (coop) std::fill(f.owner.begin(), f.owner.end(), uint8_t(0));
    steer = solve::explicit_vi(f).values;
  }
  std::mt19937_64 rng(spec.seed);
  BrgRollout out;
  uint32_t cur = g.init;
  size_t scripted = 0;
  out.nodes.push_back(cur);
  for (uint64_t step = 0; step < spec.max_steps; step++) {
    if (g.accepting[cur] || g.edges[cur].empty()) break;
    const solve::ProductGame::Edge* pick = nullptr;
    if (g.owner[cur] == 0) {
      auto it = strategy.find(cur);
      if (it == strategy.end())
        throw RegretError("strategy undefined at reached state " +
                          std::to_string(cur));
      for (const auto& e : g.edges[cur])
        if (e.action == it->second) {
          pick = &e;
          break;
        }
      if (!pick)
        throw RegretError("strategy action inapplicable at state " +
                          std::to_string(cur));
    } else {
      const auto& es = g.edges[cur];
      size_t choice = 0;
      switch (spec.policy) {
        case solve::HumanPolicy::Adversarial: {
          int64_t best = std::numeric_limits<int64_t>::min();
          for (size_t k = 0; k < es.size(); k++)
            if (steer[es[k].dst] > best) {
              best = steer[es[k].dst];
              choice = k;
            }
          break;
        }
        case solve::HumanPolicy::Cooperative: {
          int64_t best = solve::kInf;
          for (size_t k = 0; k < es.size(); k++)
            if (steer[es[k].dst] < best) {
              best = steer[es[k].dst];
              choice = k;
            }
          break;
        }
        case solve::HumanPolicy::Random:
          choice = static_cast<size_t>(rng() % es.size());
          break;
        case solve::HumanPolicy::Scripted: {
          if (scripted >= spec.script.size())
            throw RegretError("human script exhausted at state " +
                              std::to_string(cur));
          uint32_t want = spec.script[scripted++];
          bool ok = false;
          for (size_t k = 0; k < es.size(); k++)
            if (es[k].action == want) {
              choice = k;
              ok = true;
              break;
            }
          if (!ok)
            throw RegretError("scripted human action inapplicable at state " +
                              std::to_string(cur));
          break;
        }
      }
      pick = &es[choice];
    }
    out.payoff += pick->cost;
    out.actions.push_back(pick->action);
    out.nodes.push_back(pick->dst);
    cur = pick->dst;
  }
  out.accepted = g.accepting[cur] != 0;
  return out;
}

// ---------------------------------------------------------------------------
// symbolic pipeline

// transition part with its counter update; cost-0 parts carry the counter
// bits through unchanged
struct UtilPart {
  int64_t cost = 0;
  uint32_t robot_action = 0;
  dd::Ref valid;               // (X, O, I), restricted to reachable live sources
  std::vector<dd::Ref> eta;    // next game state over (X, O, I)
  std::vector<dd::Ref> eta_u;  // next counter over (U)
};

struct SymbolicUtilityGraph {
  dd::Manager* m = nullptr;
  sym::Blocks blocks;
  std::vector<dd::Ref> zeta;  // task successor bits over (X, Y)
  dd::Ref task_accepting;     // (Y)
  uint32_t n_states = 0, n_task = 0, n_robot_actions = 0;
  int64_t budget = 0;
  std::vector<UtilPart> parts;
  dd::Ref init;      // (X, Y, U) point
  dd::Ref reach;     // (X, Y, U)
  dd::Ref enabled;   // (Y, U): not yet accepted, counter within budget
  dd::Ref terminal;  // (Y, U): accepted within budget
  dd::Ref leaves;    // reach and terminal
  dd::Ref u_value;   // ADD reading the counter
  std::vector<dd::VarId> px, py, pu;  // primed copies for the step relation
};

namespace detail {

inline std::vector<std::pair<dd::VarId, dd::Ref>> pair_sub(
    const std::vector<dd::VarId>& vars, const std::vector<dd::Ref>& fns) {
  std::vector<std::pair<dd::VarId, dd::Ref>> sub;
  sub.reserve(vars.size());
  for (size_t k = 0; k < vars.size(); k++) sub.emplace_back(vars[k], fns[k]);
  return sub;
}

// task bits evaluated at the part's successor state
inline std::vector<dd::Ref> zeta_after(dd::Manager& m,
                                       const std::vector<dd::VarId>& x,
                                       const std::vector<dd::Ref>& zeta,
                                       const std::vector<dd::Ref>& eta) {
  auto subx = pair_sub(x, eta);
  std::vector<dd::Ref> out;
  out.reserve(zeta.size());
  for (const auto& z : zeta) out.push_back(m.vector_compose(z, subx));
  return out;
}

}  // namespace detail

inline SymbolicUtilityGraph build_utility_symbolic(
    const sym::SymbolicGame& sg, const sym::SymbolicTask& task,
    const std::vector<sym::TrPart>& tr, int64_t budget) {
  if (budget < 0) throw RegretError("budget must be nonnegative");
  auto& m = *sg.m;
  SymbolicUtilityGraph ug;
  ug.m = sg.m;
  ug.blocks = sg.blocks;
  ug.zeta = task.zeta;
  ug.task_accepting = task.accepting;
  ug.n_states = sg.n_states;
  ug.n_task = task.n_states;
  ug.n_robot_actions = sg.n_robot_actions;
  ug.budget = budget;
  const auto& ub = sg.blocks.u;
  uint32_t need = dd::bits_for(uint64_t(budget) + 2);
  if (ub.size() < need)
    throw RegretError("bit budget exceeded: the counter needs " +
                      std::to_string(need) + " bits, the game allocated " +
                      std::to_string(ub.size()));
  dd::Ref ghost = m.negate(sym::lt_const(m, ub, uint64_t(budget) + 2));
  for (const auto& p : tr) {
    UtilPart up;
    up.cost = p.cost;
    up.robot_action = p.robot_action;
    up.eta = p.eta;
    up.valid = p.valid;
    if (p.cost == 0) {
      for (auto v : ub) up.eta_u.push_back(m.var(v));
    } else {
      up.eta_u.assign(ub.size(), m.zero());
      for (int64_t cu = 0; cu <= budget + 1; cu++) {
        int64_t nx =
            (cu <= budget && cu + p.cost <= budget) ? cu + p.cost : budget + 1;
        dd::Ref cc = dd::code_cube(m, ub, uint64_t(cu));
        for (size_t k = 0; k < ub.size(); k++)
          if ((uint64_t(nx) >> k) & 1)
            up.eta_u[k] = m.apply(dd::BinOp::Or, up.eta_u[k], cc);
      }
      for (size_t k = 0; k < ub.size(); k++)
        if ((uint64_t(budget + 1) >> k) & 1)
          up.eta_u[k] = m.apply(dd::BinOp::Or, up.eta_u[k], ghost);
    }
    ug.parts.push_back(std::move(up));
  }
  ug.enabled = m.apply(dd::BinOp::And, m.negate(task.accepting),
                       sym::lt_const(m, ub, uint64_t(budget) + 1));
  ug.terminal = m.apply(dd::BinOp::And, task.accepting,
                        sym::lt_const(m, ub, uint64_t(budget) + 1));
  dd::Ref uval = m.constant(0);
  for (size_t k = 0; k < ub.size(); k++)
    uval = m.apply(dd::BinOp::Plus, uval,
                   m.ite(m.var(ub[k]), m.constant(int64_t(1) << k),
                         m.constant(0)));
  ug.u_value = uval;
  // the monitor consumes the initial state's label before play starts
  std::vector<int8_t> asn(m.var_count(), 0);
  for (size_t k = 0; k < sg.blocks.x.size(); k++)
    asn[sg.blocks.x[k]] = int8_t((uint64_t(sg.init_code) >> k) & 1);
  for (size_t j = 0; j < sg.blocks.y.size(); j++)
    asn[sg.blocks.y[j]] = int8_t((uint64_t(task.init_state) >> j) & 1);
  uint64_t z0 = 0;
  for (size_t j = 0; j < sg.blocks.y.size(); j++)
    if (m.eval(task.zeta[j], asn).value) z0 |= uint64_t(1) << j;
  ug.init = m.apply(
      dd::BinOp::And,
      m.apply(dd::BinOp::And,
              dd::code_cube(m, sg.blocks.x, sg.init_code),
              dd::code_cube(m, sg.blocks.y, z0)),
      dd::code_cube(m, ub, 0));
  ug.px = m.new_vars(static_cast<uint32_t>(sg.blocks.x.size()));
  ug.py = m.new_vars(static_cast<uint32_t>(sg.blocks.y.size()));
  ug.pu = m.new_vars(static_cast<uint32_t>(ub.size()));
  sym::Relation rel;
  rel.rel = m.zero();
  for (const auto& p : ug.parts) {
    auto znext = detail::zeta_after(m, sg.blocks.x, ug.zeta, p.eta);
    dd::Ref t = m.apply(dd::BinOp::And, p.valid, ug.enabled);
    t = m.apply(dd::BinOp::And, t, sym::equiv_update(m, ug.px, p.eta));
    t = m.apply(dd::BinOp::And, t, sym::equiv_update(m, ug.py, znext));
    t = m.apply(dd::BinOp::And, t, sym::equiv_update(m, ug.pu, p.eta_u));
    rel.rel = m.apply(dd::BinOp::Or, rel.rel, t);
  }
  auto concat = [](std::vector<dd::VarId> a, const std::vector<dd::VarId>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
  };
  rel.unprimed = concat(concat(sg.blocks.x, sg.blocks.y), ub);
  rel.primed = concat(concat(ug.px, ug.py), ug.pu);
  rel.erase = concat(concat(rel.unprimed, sg.blocks.o), sg.blocks.i);
  ug.reach = sym::forward_reachable(m, ug.init, rel);
  for (auto& p : ug.parts)
    p.valid = m.apply(dd::BinOp::And, m.apply(dd::BinOp::And, p.valid, ug.enabled),
                      ug.reach);
  ug.leaves = m.apply(dd::BinOp::And, ug.reach, ug.terminal);
  return ug;
}

// least final utility from each (state, task, counter) point, as an ADD
inline dd::Ref cooperative_values(const SymbolicUtilityGraph& ug) {
  auto& m = *ug.m;
  std::vector<dd::VarId> oi = ug.blocks.o;
  oi.insert(oi.end(), ug.blocks.i.begin(), ug.blocks.i.end());
  auto suby = detail::pair_sub(ug.blocks.y, ug.zeta);
  dd::Ref w = m.ite(ug.leaves, ug.u_value, m.infinity());
  uint64_t cap = uint64_t(ug.n_states) * std::max<uint32_t>(ug.n_task, 1) *
                     uint64_t(ug.budget + 2) +
                 2;
  for (uint64_t it = 0;; it++) {
    if (it > cap)
      throw RegretError("cooperative value iteration exceeded its sweep bound");
    dd::Ref w1 = m.vector_compose(w, suby);
    dd::Ref step = m.infinity();
    for (const auto& p : ug.parts) {
      if (p.valid == m.zero()) continue;
      auto sub = detail::pair_sub(ug.blocks.x, p.eta);
      auto subu = detail::pair_sub(ug.blocks.u, p.eta_u);
      sub.insert(sub.end(), subu.begin(), subu.end());
      dd::Ref moved = m.vector_compose(w1, sub);
      dd::Ref masked = m.ite(p.valid, moved, m.infinity());
      step = m.apply(dd::BinOp::Min, step,
                     m.quantify(masked, oi, dd::Quant::MinAbstract));
    }
    dd::Ref nw =
        m.ite(ug.leaves, ug.u_value, m.apply(dd::BinOp::Min, w, step));
    if (nw == w) return w;
    w = nw;
  }
}

// alternate values per decoded (state, task, counter, action) row; rows with
// no alternative map to kInf so the unrolling below stays total
struct BaSet {
  std::map<std::tuple<uint64_t, uint64_t, uint64_t, uint32_t>, int64_t> ba;
  std::vector<int64_t> values;  // distinct finite values, ascending
};

inline BaSet best_alternates(const SymbolicUtilityGraph& ug, dd::Ref coop) {
  auto& m = *ug.m;
  const auto& bl = ug.blocks;
  auto suby = detail::pair_sub(bl.y, ug.zeta);
  dd::Ref cv1 = m.vector_compose(coop, suby);
  std::vector<dd::Ref> choice, av;
  for (const auto& p : ug.parts) {
    auto sub = detail::pair_sub(bl.x, p.eta);
    auto subu = detail::pair_sub(bl.u, p.eta_u);
    sub.insert(sub.end(), subu.begin(), subu.end());
    dd::Ref moved = m.vector_compose(cv1, sub);
    av.push_back(m.quantify(m.ite(p.valid, moved, m.infinity()), bl.i,
                            dd::Quant::MinAbstract));
    choice.push_back(m.quantify(p.valid, bl.i, dd::Quant::Exists));
  }
  dd::Ref sources = m.apply(dd::BinOp::And, ug.reach, ug.enabled);
  std::vector<dd::VarId> xyu = bl.x;
  xyu.insert(xyu.end(), bl.y.begin(), bl.y.end());
  xyu.insert(xyu.end(), bl.u.begin(), bl.u.end());
  BaSet out;
  std::set<int64_t> finite;
  std::vector<int8_t> asn;
  m.foreach_sat(sources, xyu, [&](const std::vector<uint8_t>& row) {
    uint64_t cx = dd::decode_bits(xyu, row, bl.x);
    uint64_t cy = dd::decode_bits(xyu, row, bl.y);
    uint64_t cu = dd::decode_bits(xyu, row, bl.u);
    asn.assign(m.var_count(), 0);
    for (size_t k = 0; k < bl.x.size(); k++) asn[bl.x[k]] = int8_t((cx >> k) & 1);
    for (size_t k = 0; k < bl.y.size(); k++) asn[bl.y[k]] = int8_t((cy >> k) & 1);
    for (size_t k = 0; k < bl.u.size(); k++) asn[bl.u[k]] = int8_t((cu >> k) & 1);
    std::vector<std::pair<uint32_t, int64_t>> apps;
    for (uint32_t a = 0; a < ug.n_robot_actions; a++) {
      for (size_t k = 0; k < bl.o.size(); k++)
        asn[bl.o[k]] = int8_t((uint64_t(a) >> k) & 1);
      bool app = false;
      int64_t best = solve::kInf;
      for (size_t pi = 0; pi < ug.parts.size(); pi++) {
        if (!m.eval(choice[pi], asn).value) continue;
        app = true;
        auto t = m.eval(av[pi], asn);
        if (!t.is_inf) best = std::min(best, t.value);
      }
      if (app) apps.emplace_back(a, best);
    }
    for (size_t k = 0; k < apps.size(); k++) {
      int64_t b = solve::kInf;
      for (size_t j = 0; j < apps.size(); j++)
        if (j != k) b = std::min(b, apps[j].second);
      out.ba[{cx, cy, cu, apps[k].first}] = b;
      if (b != solve::kInf) finite.insert(b);
    }
  });
  out.values.assign(finite.begin(), finite.end());
  return out;
}

struct SymbolicBestResponse {
  dd::Manager* m = nullptr;
  sym::Blocks blocks;
  std::vector<dd::VarId> b, pb;   // declined-value block and its primed copy
  std::vector<int64_t> b_values;  // ascending, the infinity sentinel last
  std::vector<dd::Ref> zeta;
  std::vector<dd::Ref> eta_b;  // next declined value over (X, Y, U, O, B)
  std::vector<UtilPart> parts;
  int64_t budget = 0;
  uint32_t n_states = 0, n_task = 0, n_robot_actions = 0;
  dd::Ref init, reach, terminal, leaves;  // over (X, Y, U, B)
  dd::Ref regret_weights;                 // ADD over (U, B)
};

inline SymbolicBestResponse build_best_response(const SymbolicUtilityGraph& ug,
                                                const BaSet& ba) {
  auto& m = *ug.m;
  const auto& bl = ug.blocks;
  SymbolicBestResponse br;
  br.m = ug.m;
  br.blocks = bl;
  br.zeta = ug.zeta;
  br.parts = ug.parts;
  br.budget = ug.budget;
  br.n_states = ug.n_states;
  br.n_task = ug.n_task;
  br.n_robot_actions = ug.n_robot_actions;
  br.terminal = ug.terminal;
  br.b_values = ba.values;
  br.b_values.push_back(solve::kInf);
  uint64_t nb = br.b_values.size();
  uint32_t bbits = dd::bits_for(nb);
  if (bbits > 30) throw RegretError("b-value set too large for bit budget");
  br.b = m.new_vars(bbits);
  br.pb = m.new_vars(bbits);
  auto idx_of = [&](int64_t v) {
    return static_cast<uint64_t>(
        std::lower_bound(br.b_values.begin(), br.b_values.end(), v) -
        br.b_values.begin());
  };
  // group rows by the alternate value they would record
  std::map<uint64_t, dd::Ref> sel;
  for (const auto& [key, v] : ba.ba) {
    const auto& [cx, cy, cu, a] = key;
    dd::Ref cell = m.apply(
        dd::BinOp::And,
        m.apply(dd::BinOp::And, dd::code_cube(m, bl.x, cx),
                dd::code_cube(m, bl.y, cy)),
        m.apply(dd::BinOp::And, dd::code_cube(m, bl.u, cu),
                dd::code_cube(m, bl.o, a)));
    uint64_t ix = idx_of(v);
    auto it = sel.find(ix);
    if (it == sel.end())
      sel.emplace(ix, cell);
    else
      it->second = m.apply(dd::BinOp::Or, it->second, cell);
  }
  // next-value bits: the index order agrees with the value order, so the
  // running minimum is an index minimum
  br.eta_b.assign(bbits, m.zero());
  for (const auto& [ix, rows] : sel) {
    std::vector<dd::Ref> bits(bbits, m.zero());
    for (uint64_t cb = 0; cb < (uint64_t(1) << bbits); cb++) {
      uint64_t nx = std::min(std::min(cb, nb - 1), ix);
      dd::Ref cc = dd::code_cube(m, br.b, cb);
      for (size_t k = 0; k < bbits; k++)
        if ((nx >> k) & 1) bits[k] = m.apply(dd::BinOp::Or, bits[k], cc);
    }
    for (size_t k = 0; k < bbits; k++)
      br.eta_b[k] = m.apply(dd::BinOp::Or, br.eta_b[k],
                            m.apply(dd::BinOp::And, rows, bits[k]));
  }
  br.init =
      m.apply(dd::BinOp::And, ug.init, dd::code_cube(m, br.b, nb - 1));
  sym::Relation rel;
  rel.rel = m.zero();
  for (const auto& p : br.parts) {
    if (p.valid == m.zero()) continue;
    auto znext = detail::zeta_after(m, bl.x, br.zeta, p.eta);
    dd::Ref t = p.valid;
    t = m.apply(dd::BinOp::And, t, sym::equiv_update(m, ug.px, p.eta));
    t = m.apply(dd::BinOp::And, t, sym::equiv_update(m, ug.py, znext));
    t = m.apply(dd::BinOp::And, t, sym::equiv_update(m, ug.pu, p.eta_u));
    t = m.apply(dd::BinOp::And, t, sym::equiv_update(m, br.pb, br.eta_b));
    rel.rel = m.apply(dd::BinOp::Or, rel.rel, t);
  }
  auto concat = [](std::vector<dd::VarId> a, const std::vector<dd::VarId>& b2) {
    a.insert(a.end(), b2.begin(), b2.end());
    return a;
  };
  rel.unprimed = concat(concat(concat(bl.x, bl.y), bl.u), br.b);
  rel.primed = concat(concat(concat(ug.px, ug.py), ug.pu), br.pb);
  rel.erase = concat(concat(rel.unprimed, bl.o), bl.i);
  br.reach = sym::forward_reachable(m, br.init, rel);
  br.leaves = m.apply(dd::BinOp::And, br.reach, br.terminal);
  dd::Ref wsum = m.constant(0);
  for (int64_t u = 0; u <= br.budget; u++)
    for (uint64_t bi = 0; bi < nb; bi++) {
      int64_t r = u - std::min(br.b_values[bi], u);
      if (r == 0) continue;
      dd::Ref cell = m.apply(dd::BinOp::And, dd::code_cube(m, bl.u, uint64_t(u)),
                             dd::code_cube(m, br.b, bi));
      wsum = m.apply(dd::BinOp::Plus, wsum,
                     m.ite(cell, m.constant(r), m.constant(0)));
    }
  br.regret_weights = wsum;
  return br;
}

struct SymbolicRegretResult {
  int64_t regret = solve::kInf;
  bool feasible = false;
  std::vector<std::pair<int64_t, dd::Ref>> layers;  // threshold, states won there
  dd::Ref winning;  // (X, Y, U, B)
  dd::Ref moves;    // (X, Y, U, B, O)
  // (state, task, counter, declined value) -> action
  std::map<std::tuple<uint64_t, uint64_t, uint64_t, int64_t>, uint32_t> strategy;
};

// same threshold sweep as the explicit solver, with forced regions computed
// as controllable preimages over the parts
inline SymbolicRegretResult regret_vi(const SymbolicBestResponse& br) {
  auto& m = *br.m;
  const auto& bl = br.blocks;
  SymbolicRegretResult out;
  out.winning = m.zero();
  out.moves = m.zero();
  std::vector<dd::VarId> xy = bl.x;
  xy.insert(xy.end(), bl.y.begin(), bl.y.end());
  dd::Ref rows = m.quantify(br.leaves, xy, dd::Quant::Exists);
  std::vector<dd::VarId> ubv = bl.u;
  ubv.insert(ubv.end(), br.b.begin(), br.b.end());
  std::map<int64_t, dd::Ref> levels;
  m.foreach_sat(rows, ubv, [&](const std::vector<uint8_t>& row) {
    uint64_t cu = dd::decode_bits(ubv, row, bl.u);
    uint64_t cb = dd::decode_bits(ubv, row, br.b);
    if (cb >= br.b_values.size()) return;
    int64_t b = br.b_values[cb];
    int64_t r = int64_t(cu) - std::min(b, int64_t(cu));
    dd::Ref cell = m.apply(dd::BinOp::And, dd::code_cube(m, bl.u, cu),
                           dd::code_cube(m, br.b, cb));
    auto it = levels.find(r);
    if (it == levels.end())
      levels.emplace(r, cell);
    else
      it->second = m.apply(dd::BinOp::Or, it->second, cell);
  });
  auto suby = detail::pair_sub(bl.y, br.zeta);
  std::vector<std::vector<std::pair<dd::VarId, dd::Ref>>> subs;
  for (const auto& p : br.parts) {
    auto sub = detail::pair_sub(bl.x, p.eta);
    auto subu = detail::pair_sub(bl.u, p.eta_u);
    auto subb = detail::pair_sub(br.b, br.eta_b);
    sub.insert(sub.end(), subu.begin(), subu.end());
    sub.insert(sub.end(), subb.begin(), subb.end());
    subs.push_back(std::move(sub));
  }
  dd::Ref acc = m.zero();
  for (const auto& [r, cells] : levels) {
    acc = m.apply(dd::BinOp::Or, acc, cells);
    dd::Ref targets = m.apply(dd::BinOp::And, br.leaves, acc);
    dd::Ref cur = m.apply(dd::BinOp::Or, out.winning, targets);
    dd::Ref moves_r = m.zero();
    for (;;) {
      dd::Ref a1 = m.vector_compose(cur, suby);
      dd::Ref good = m.zero();
      for (size_t pi = 0; pi < br.parts.size(); pi++) {
        const auto& p = br.parts[pi];
        if (p.valid == m.zero()) continue;
        dd::Ref pre = m.vector_compose(a1, subs[pi]);
        dd::Ref covered = m.apply(dd::BinOp::Or, m.negate(p.valid), pre);
        dd::Ref g = m.apply(dd::BinOp::And,
                            m.quantify(p.valid, bl.i, dd::Quant::Exists),
                            m.quantify(covered, bl.i, dd::Quant::Forall));
        good = m.apply(dd::BinOp::Or, good, g);
      }
      dd::Ref fresh = m.apply(
          dd::BinOp::And,
          m.apply(dd::BinOp::And, m.quantify(good, bl.o, dd::Quant::Exists),
                  br.reach),
          m.negate(cur));
      if (fresh == m.zero()) break;
      moves_r = m.apply(dd::BinOp::Or, moves_r,
                        m.apply(dd::BinOp::And, good, fresh));
      cur = m.apply(dd::BinOp::Or, cur, fresh);
    }
    dd::Ref gained = m.apply(dd::BinOp::And, cur, m.negate(out.winning));
    if (gained != m.zero()) {
      out.layers.emplace_back(r, gained);
      out.moves = m.apply(dd::BinOp::Or, out.moves,
                          m.apply(dd::BinOp::And, moves_r, gained));
      out.winning = m.apply(dd::BinOp::Or, out.winning, cur);
    }
  }
  if (m.apply(dd::BinOp::And, br.init, out.winning) != m.zero()) {
    out.feasible = true;
    for (const auto& [r, set] : out.layers)
      if (m.apply(dd::BinOp::And, br.init, set) != m.zero()) {
        out.regret = r;
        break;
      }
  }
  dd::Ref srcs = m.apply(dd::BinOp::And, out.winning, m.negate(br.terminal));
  std::vector<dd::VarId> all = bl.x;
  all.insert(all.end(), bl.y.begin(), bl.y.end());
  all.insert(all.end(), bl.u.begin(), bl.u.end());
  all.insert(all.end(), br.b.begin(), br.b.end());
  std::vector<int8_t> asn;
  m.foreach_sat(srcs, all, [&](const std::vector<uint8_t>& row) {
    uint64_t cx = dd::decode_bits(all, row, bl.x);
    uint64_t cy = dd::decode_bits(all, row, bl.y);
    uint64_t cu = dd::decode_bits(all, row, bl.u);
    uint64_t cb = dd::decode_bits(all, row, br.b);
    asn.assign(m.var_count(), 0);
    for (size_t k = 0; k < bl.x.size(); k++) asn[bl.x[k]] = int8_t((cx >> k) & 1);
    for (size_t k = 0; k < bl.y.size(); k++) asn[bl.y[k]] = int8_t((cy >> k) & 1);
    for (size_t k = 0; k < bl.u.size(); k++) asn[bl.u[k]] = int8_t((cu >> k) & 1);
    for (size_t k = 0; k < br.b.size(); k++) asn[br.b[k]] = int8_t((cb >> k) & 1);
    bool found = false;
    for (uint32_t a = 0; a < br.n_robot_actions && !found; a++) {
      for (size_t k = 0; k < bl.o.size(); k++)
        asn[bl.o[k]] = int8_t((uint64_t(a) >> k) & 1);
      if (m.eval(out.moves, asn).value) {
        out.strategy[{cx, cy, cu, br.b_values[cb]}] = a;
        found = true;
      }
    }
    if (!found) throw RegretError("winning state has no recorded move");
  });
  return out;
}

// ---------------------------------------------------------------------------
// ground-truth oracle

enum class AlternateMode { AllAlternates, ExcludeSelf };

struct BruteForceResult {
  int64_t regret = solve::kInf;
  bool feasible = false;
  uint64_t strategies = 0;  // strategies fully evaluated
};

// regret by direct enumeration of robot strategies over the unrolled product;
// only decision points the current partial strategy can reach are branched on
inline BruteForceResult brute_force_regret(const manip::Game& arena,
                                           const std::string& formula,
                                           int64_t budget, AlternateMode mode,
                                           uint64_t cap = uint64_t(1) << 18) {
  if (budget < 0) throw RegretError("budget must be nonnegative");
  auto dfa = ltlf::to_dfa(ltlf::parse_formula(formula));
  auto p = solve::build_product(arena, dfa);
  struct Edge {
    uint32_t action;
    int64_t cost;
    uint32_t dst;  // kNoNode marks an edge that would exceed the budget
  };
  std::map<std::pair<uint32_t, int64_t>, uint32_t> ids;
  std::vector<uint32_t> node_of;
  std::vector<int64_t> u_of;
  std::vector<uint8_t> owner, accepting;
  std::vector<std::vector<Edge>> edges;
  auto intern = [&](uint32_t node, int64_t u) {
    auto it = ids.find({node, u});
    if (it != ids.end()) return it->second;
    uint32_t id = static_cast<uint32_t>(node_of.size());
    ids.emplace(std::make_pair(node, u), id);
    node_of.push_back(node);
    u_of.push_back(u);
    owner.push_back(p.owner[node]);
    accepting.push_back(p.accepting[node]);
    edges.emplace_back();
    return id;
  };
  uint32_t init = intern(p.init, 0);
  for (uint32_t n = 0; n < node_of.size(); n++) {
    if (accepting[n]) continue;
    for (const auto& e : p.edges[node_of[n]]) {
      int64_t u2 = u_of[n] + e.cost;
      uint32_t dst = u2 > budget ? kNoNode : intern(e.dst, u2);
      edges[n].push_back({e.action, e.cost, dst});
    }
  }
  // least final utility under joint control, for scoring deviations
  std::vector<int64_t> dmin(node_of.size(), solve::kInf);
  for (uint32_t n = 0; n < node_of.size(); n++)
    if (accepting[n]) dmin[n] = u_of[n];
  for (bool changed = true; changed;) {
    changed = false;
    for (uint32_t n = 0; n < node_of.size(); n++) {
      if (accepting[n]) continue;
      int64_t best = solve::kInf;
      for (const auto& e : edges[n])
        if (e.dst != kNoNode) best = std::min(best, dmin[e.dst]);
      if (best < dmin[n]) {
        dmin[n] = best;
        changed = true;
      }
    }
  }
  std::vector<int32_t> choice(node_of.size(), -1);
  std::vector<uint8_t> color;
  std::map<std::pair<uint32_t, int64_t>, int64_t> memo;
  // a strategy is admissible when every play it allows accepts in budget
  std::function<bool(uint32_t)> admissible = [&](uint32_t n) -> bool {
    if (color[n] == 2) return true;
    if (color[n] == 1) return false;  // a cycle lets the human stall forever
    color[n] = 1;
    bool ok;
    if (accepting[n]) {
      ok = true;
    } else if (edges[n].empty()) {
      ok = false;
    } else if (owner[n] == 0) {
      const auto& e = edges[n][size_t(choice[n])];
      ok = e.dst != kNoNode && admissible(e.dst);
    } else {
      ok = true;
      for (const auto& e : edges[n])
        if (e.dst == kNoNode || !admissible(e.dst)) {
          ok = false;
          break;
        }
    }
    if (ok) color[n] = 2;
    return ok;
  };
  std::function<int64_t(uint32_t, int64_t)> score =
      [&](uint32_t n, int64_t b) -> int64_t {
    if (accepting[n]) {
      int64_t u = u_of[n];
      if (mode == AlternateMode::AllAlternates) return u - std::min(b, u);
      return b == solve::kInf ? 0 : u - b;
    }
    auto key = std::make_pair(n, b);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    int64_t v;
    if (owner[n] == 0) {
      const auto& e = edges[n][size_t(choice[n])];
      int64_t dev = solve::kInf;
      for (size_t j = 0; j < edges[n].size(); j++) {
        if (int32_t(j) == choice[n] || edges[n][j].dst == kNoNode) continue;
        dev = std::min(dev, dmin[edges[n][j].dst]);
      }
      v = score(e.dst, std::min(b, dev));
    } else {
      v = std::numeric_limits<int64_t>::min();
      for (const auto& e : edges[n]) v = std::max(v, score(e.dst, b));
    }
    memo.emplace(key, v);
    return v;
  };
  BruteForceResult out;
  uint64_t evals = 0;
  std::vector<uint32_t> order;
  std::function<void()> enumerate = [&]() {
    order.clear();
    std::vector<uint8_t> seen(node_of.size(), 0);
    order.push_back(init);
    seen[init] = 1;
    int64_t undecided = -1;
    for (size_t q = 0; q < order.size(); q++) {
      uint32_t n = order[q];
      if (accepting[n]) continue;
      if (owner[n] == 0) {
        if (choice[n] < 0) {
          if (undecided < 0) undecided = n;
          continue;
        }
        const auto& e = edges[n][size_t(choice[n])];
        if (e.dst != kNoNode && !seen[e.dst]) {
          seen[e.dst] = 1;
          order.push_back(e.dst);
        }
      } else {
        for (const auto& e : edges[n])
          if (e.dst != kNoNode && !seen[e.dst]) {
            seen[e.dst] = 1;
            order.push_back(e.dst);
          }
      }
    }
    if (undecided < 0) {
      if (++evals > cap) throw RegretError("size cap exceeded");
      color.assign(node_of.size(), 0);
      if (!admissible(init)) return;
      memo.clear();
      int64_t v = score(init, solve::kInf);
      out.strategies++;
      out.feasible = true;
      out.regret = std::min(out.regret, v);
      return;
    }
    uint32_t n = static_cast<uint32_t>(undecided);
    for (size_t k = 0; k < edges[n].size(); k++) {
      choice[n] = static_cast<int32_t>(k);
      enumerate();
    }
    choice[n] = -1;
  };
  enumerate();
  return out;
}

// ---------------------------------------------------------------------------
// end-to-end runs

struct ExplicitRegretRun {
  solve::ProductGame product;
  UtilityGraph ug;
  std::vector<int64_t> coop;
  std::vector<std::vector<int64_t>> alternates;
  BestResponseGraph brg;
  RegretResult res;
};

inline ExplicitRegretRun run_regret_explicit(const manip::Game& arena,
                                             const ltlf::Dfa& dfa,
                                             int64_t budget) {
  ExplicitRegretRun r;
  r.product = solve::build_product(arena, dfa);
  r.ug = build_utility_explicit(r.product, budget);
  r.coop = cooperative_values(r.ug);
  r.alternates = best_alternates(r.ug, r.coop);
  r.brg = build_best_response(r.ug, r.alternates);
  r.res = regret_vi(r.brg);
  return r;
}

struct SymbolicRegretRun {
  sym::SymbolicGame sg;
  sym::SymbolicTask task;
  std::vector<sym::TrPart> tr;
  SymbolicUtilityGraph ug;
  dd::Ref coop;
  BaSet ba;
  SymbolicBestResponse brg;
  SymbolicRegretResult res;
};

inline SymbolicRegretRun run_regret_symbolic(dd::Manager& m,
                                             const manip::Game& arena,
                                             const manip::AbstractedGame& abs,
                                             const ltlf::Dfa& dfa,
                                             int64_t budget, bool partitioned) {
  if (budget < 0) throw RegretError("budget must be nonnegative");
  SymbolicRegretRun r;
  auto blocks = sym::allocate_blocks(
      m, abs.robot_states.size(), dfa.n_states, uint64_t(budget) + 2,
      arena.robot_action_names.size(), arena.human_action_names.size());
  r.sg = sym::encode(m, arena, abs, blocks);
  r.task = sym::encode_task(r.sg, dfa);
  r.tr = partitioned ? sym::build_partitioned(r.sg) : sym::build_monolithic(r.sg);
  r.ug = build_utility_symbolic(r.sg, r.task, r.tr, budget);
  r.coop = cooperative_values(r.ug);
  r.ba = best_alternates(r.ug, r.coop);
  r.brg = build_best_response(r.ug, r.ba);
  r.res = regret_vi(r.brg);
  return r;
}

struct StageStats {
  uint64_t utility_points = 0;    // reachable (state, task, counter) rows
  uint64_t alternate_rows = 0;    // decoded (state, action) alternate entries
  uint64_t peak_dd_nodes = 0;
};

inline StageStats stage_stats(const SymbolicRegretRun& r) {
  StageStats s;
  auto& m = *r.ug.m;
  std::vector<dd::VarId> xyu = r.ug.blocks.x;
  xyu.insert(xyu.end(), r.ug.blocks.y.begin(), r.ug.blocks.y.end());
  xyu.insert(xyu.end(), r.ug.blocks.u.begin(), r.ug.blocks.u.end());
  s.utility_points = m.sat_count(r.ug.reach, xyu);
  s.alternate_rows = r.ba.ba.size();
  s.peak_dd_nodes = m.stats().peak_nodes;
  return s;
}

inline nlohmann::json regret_strategy_json(const ExplicitRegretRun& r,
                                           const manip::Game& arena) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& [n, a] : r.res.strategy) {
    uint32_t un = r.brg.g.v_of[n];
    uint32_t pn = r.ug.g.v_of[un];
    if (pn == kNoNode) continue;
    nlohmann::json row;
    row["state"] = pn;
    row["game_state"] = arena.state_names[r.product.v_of[pn]];
    row["task_state"] = r.product.z_of[pn];
    row["utility"] = r.brg.u_of[n];
    int64_t b = r.brg.b_values[r.brg.g.z_of[n]];
    if (b == solve::kInf)
      row["b"] = "inf";
    else
      row["b"] = b;
    row["action"] = arena.robot_action_names[a];
    rows.push_back(std::move(row));
  }
  return rows;
}

inline nlohmann::json regret_strategy_json(const SymbolicRegretRun& r,
                                           const manip::Game& arena,
                                           const manip::AbstractedGame& abs) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& [key, a] : r.res.strategy) {
    const auto& [cx, cy, cu, b] = key;
    nlohmann::json row;
    row["state"] = cx;
    row["game_state"] = arena.state_names[abs.robot_states[cx]];
    row["task_state"] = cy;
    row["utility"] = cu;
    if (b == solve::kInf)
      row["b"] = "inf";
    else
      row["b"] = b;
    row["action"] = arena.robot_action_names[a];
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace symsynth::regret
