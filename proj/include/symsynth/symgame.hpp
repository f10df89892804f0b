#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "symsynth/dd.hpp"
#include "symsynth/domain.hpp"
#include "symsynth/ltlf.hpp"

namespace symsynth::sym {

struct SymError : std::runtime_error {
  explicit SymError(const std::string& m) : std::runtime_error(m) {}
};

// true iff the code spelled by `vars` (bit k = vars[k]) is below n
inline dd::Ref lt_const(dd::Manager& m, const std::vector<dd::VarId>& vars,
                        uint64_t n) {
  dd::Ref res = m.zero();
  for (size_t k = 0; k < vars.size(); k++) {
    dd::Ref x = m.var(vars[k]);
    res = ((n >> k) & 1) ? m.ite(x, res, m.one()) : m.ite(x, m.zero(), res);
  }
  if (vars.size() < 64 && n >= (uint64_t(1) << vars.size())) return m.one();
  return res;
}

// variable blocks in fixed order: state < task < utility < robot act < human
// act; primed copies and the alternate-value block always come after these
struct Blocks {
  std::vector<dd::VarId> x, y, u, o, i;
};

inline Blocks allocate_blocks(dd::Manager& m, uint64_t n_states,
                              uint64_t n_task, uint64_t n_util,
                              uint64_t n_robot, uint64_t n_human) {
  Blocks b;
  b.x = m.new_vars(dd::bits_for(n_states));
  if (n_task > 0) b.y = m.new_vars(dd::bits_for(n_task));
  if (n_util > 0) b.u = m.new_vars(dd::bits_for(n_util));
  b.o = m.new_vars(dd::bits_for(n_robot));
  b.i = m.new_vars(dd::bits_for(n_human));
  return b;
}

struct EdgeRec {
  uint32_t src, robot_action, human_action, dst;
  int64_t cost;
};

struct SymbolicGame {
  dd::Manager* m = nullptr;
  Blocks blocks;
  uint32_t n_states = 0;
  uint32_t n_robot_actions = 0;
  uint32_t n_human_actions = 0;  // code 0 is the no-op
  uint32_t init_code = 0;
  dd::Ref valid;             // all joint edges, over (X, I, O)
  std::vector<dd::Ref> eta;  // successor state bits, over (X, I, O)
  dd::Ref states;            // X spells a code below n_states
  dd::Ref init;
  std::vector<dd::Ref> lab;  // per proposition, over X
  std::vector<std::string> props;
  std::vector<int64_t> robot_action_costs;
  std::vector<EdgeRec> edge_list;
  std::vector<dd::VarId> primed_x;  // lazily allocated by reachable()
};

namespace detail {
inline dd::Ref edge_cube(dd::Manager& m, const Blocks& b, const EdgeRec& e) {
  dd::Ref c = dd::code_cube(m, b.x, e.src);
  c = m.apply(dd::BinOp::And, c, dd::code_cube(m, b.o, e.robot_action));
  return m.apply(dd::BinOp::And, c, dd::code_cube(m, b.i, e.human_action));
}
}  // namespace detail

// state codes are positions in g.robot_states; action codes are the ground
// action ids of the arena, so the human no-op lands on the all-zero code
inline SymbolicGame encode(dd::Manager& m, const manip::Game& arena,
                           const manip::AbstractedGame& g,
                           const Blocks& blocks) {
  SymbolicGame sg;
  sg.m = &m;
  sg.blocks = blocks;
  sg.n_states = static_cast<uint32_t>(g.robot_states.size());
  sg.n_robot_actions = static_cast<uint32_t>(arena.robot_action_names.size());
  sg.n_human_actions = static_cast<uint32_t>(arena.human_action_names.size());
  sg.init_code = g.init;
  sg.props = arena.props;
  sg.robot_action_costs = arena.robot_action_costs;
  if (blocks.x.size() < dd::bits_for(sg.n_states) ||
      blocks.o.size() < dd::bits_for(sg.n_robot_actions) ||
      blocks.i.size() < dd::bits_for(sg.n_human_actions))
    throw SymError("encode: variable blocks too small for the game");

  sg.valid = m.zero();
  sg.eta.assign(blocks.x.size(), m.zero());
  for (uint32_t src = 0; src < sg.n_states; src++)
    for (const auto& e : g.edges[src]) {
      EdgeRec rec{src, e.robot_action, e.human_action, e.dst, e.cost};
      dd::Ref cube = detail::edge_cube(m, blocks, rec);
      sg.valid = m.apply(dd::BinOp::Or, sg.valid, cube);
      for (size_t k = 0; k < blocks.x.size(); k++)
        if ((e.dst >> k) & 1)
          sg.eta[k] = m.apply(dd::BinOp::Or, sg.eta[k], cube);
      sg.edge_list.push_back(rec);
    }

  sg.states = lt_const(m, blocks.x, sg.n_states);
  sg.init = dd::code_cube(m, blocks.x, g.init);
  sg.lab.assign(arena.props.size(), m.zero());
  for (uint32_t v = 0; v < sg.n_states; v++) {
    dd::Ref c = dd::code_cube(m, blocks.x, v);
    for (uint32_t p : arena.label[g.robot_states[v]])
      sg.lab[p] = m.apply(dd::BinOp::Or, sg.lab[p], c);
  }
  return sg;
}

// one slice of the transition relation in functional form
struct TrPart {
  int64_t cost = 0;
  uint32_t robot_action = manip::kNowhere;  // set for per-action slices
  dd::Ref valid;
  std::vector<dd::Ref> eta;
};

namespace detail {
inline void add_edge(dd::Manager& m, const Blocks& b, TrPart& p,
                     const EdgeRec& e) {
  dd::Ref cube = edge_cube(m, b, e);
  p.valid = m.apply(dd::BinOp::Or, p.valid, cube);
  for (size_t k = 0; k < p.eta.size(); k++)
    if ((e.dst >> k) & 1) p.eta[k] = m.apply(dd::BinOp::Or, p.eta[k], cube);
}

inline TrPart empty_part(dd::Manager& m, size_t nbits) {
  TrPart p;
  p.valid = m.zero();
  p.eta.assign(nbits, m.zero());
  return p;
}
}  // namespace detail

// one slice per distinct edge cost, ascending
inline std::vector<TrPart> build_monolithic(const SymbolicGame& sg) {
  auto& m = *sg.m;
  std::map<int64_t, TrPart> by_cost;
  for (const auto& e : sg.edge_list) {
    auto it = by_cost.find(e.cost);
    if (it == by_cost.end()) {
      it = by_cost.emplace(e.cost, detail::empty_part(m, sg.blocks.x.size()))
               .first;
      it->second.cost = e.cost;
    }
    detail::add_edge(m, sg.blocks, it->second, e);
  }
  std::vector<TrPart> parts;
  for (auto& [c, p] : by_cost) parts.push_back(std::move(p));
  return parts;
}

// one slice per ground robot action, including unused ones (empty slice)
inline std::vector<TrPart> build_partitioned(const SymbolicGame& sg) {
  auto& m = *sg.m;
  std::vector<TrPart> parts;
  parts.reserve(sg.n_robot_actions);
  for (uint32_t a = 0; a < sg.n_robot_actions; a++) {
    TrPart p = detail::empty_part(m, sg.blocks.x.size());
    p.robot_action = a;
    p.cost = sg.robot_action_costs[a];
    parts.push_back(std::move(p));
  }
  for (const auto& e : sg.edge_list)
    detail::add_edge(m, sg.blocks, parts[e.robot_action], e);
  return parts;
}

// union of slices; equals (sg.valid, sg.eta) for either decomposition
inline TrPart recompose(const SymbolicGame& sg,
                        const std::vector<TrPart>& parts) {
  auto& m = *sg.m;
  TrPart whole = detail::empty_part(m, sg.blocks.x.size());
  for (const auto& p : parts) {
    whole.valid = m.apply(dd::BinOp::Or, whole.valid, p.valid);
    for (size_t k = 0; k < whole.eta.size(); k++)
      whole.eta[k] = m.apply(dd::BinOp::Or, whole.eta[k], p.eta[k]);
  }
  return whole;
}

// edge triples of the slice whose successor satisfies omega; the raw
// substitution means nothing off the edge relation, so the guard stays on
inline dd::Ref pre_image(const SymbolicGame& sg, dd::Ref omega,
                         const TrPart& p) {
  auto& m = *sg.m;
  std::vector<std::pair<dd::VarId, dd::Ref>> sub;
  sub.reserve(sg.blocks.x.size());
  for (size_t k = 0; k < sg.blocks.x.size(); k++)
    sub.emplace_back(sg.blocks.x[k], p.eta[k]);
  return m.apply(dd::BinOp::And, p.valid, m.vector_compose(omega, sub));
}

// robot codes applicable in the slice, over (X, O)
inline dd::Ref robot_choices(const SymbolicGame& sg, const TrPart& p) {
  return sg.m->quantify(p.valid, sg.blocks.i, dd::Quant::Exists);
}

// states where some robot action keeps every human reply inside omega
inline dd::Ref controllable_pre(const SymbolicGame& sg,
                                const std::vector<TrPart>& parts,
                                dd::Ref omega) {
  auto& m = *sg.m;
  dd::Ref res = m.zero();
  for (const auto& p : parts) {
    if (p.valid == m.zero()) continue;
    dd::Ref pre = pre_image(sg, omega, p);
    dd::Ref covered = m.apply(dd::BinOp::Or, m.negate(p.valid), pre);
    dd::Ref all_replies = m.quantify(covered, sg.blocks.i, dd::Quant::Forall);
    dd::Ref good =
        m.apply(dd::BinOp::And, robot_choices(sg, p), all_replies);
    res = m.apply(dd::BinOp::Or, res,
                  m.quantify(good, sg.blocks.o, dd::Quant::Exists));
  }
  return res;
}

// min over robot codes of max over human replies of the successor values;
// w must be nonnegative (invalid replies are masked to 0 under the max)
inline dd::Ref controllable_pre_values(const SymbolicGame& sg,
                                       const std::vector<TrPart>& parts,
                                       dd::Ref w) {
  auto& m = *sg.m;
  dd::Ref res = m.infinity();
  std::vector<std::pair<dd::VarId, dd::Ref>> sub;
  for (const auto& p : parts) {
    if (p.valid == m.zero()) continue;
    sub.clear();
    for (size_t k = 0; k < sg.blocks.x.size(); k++)
      sub.emplace_back(sg.blocks.x[k], p.eta[k]);
    dd::Ref moved = m.vector_compose(w, sub);
    dd::Ref masked = m.ite(p.valid, moved, m.constant(0));
    dd::Ref worst = m.quantify(masked, sg.blocks.i, dd::Quant::MaxAbstract);
    dd::Ref guarded = m.ite(robot_choices(sg, p), worst, m.infinity());
    res = m.apply(dd::BinOp::Min, res,
                  m.quantify(guarded, sg.blocks.o, dd::Quant::MinAbstract));
  }
  return res;
}

enum class PreMode { Qual, Quant };

inline dd::Ref controllable_pre(const SymbolicGame& sg,
                                const std::vector<TrPart>& parts, dd::Ref w,
                                PreMode mode) {
  return mode == PreMode::Qual ? controllable_pre(sg, parts, w)
                               : controllable_pre_values(sg, parts, w);
}

// deterministic task monitor wired to the game labels
struct SymbolicTask {
  uint32_t n_states = 0;
  uint32_t init_state = 0;    // before consuming any label
  std::vector<dd::Ref> zeta;  // next code bits after reading L(X), over (X, Y)
  dd::Ref accepting;          // over Y
  dd::Ref states;             // Y spells a code below n_states
};

inline SymbolicTask encode_task(const SymbolicGame& sg, const ltlf::Dfa& dfa) {
  auto& m = *sg.m;
  if (sg.blocks.y.size() < dd::bits_for(dfa.n_states))
    throw SymError("encode_task: task block too small for the automaton");
  std::vector<uint32_t> atom_prop(dfa.atoms.size());
  for (size_t j = 0; j < dfa.atoms.size(); j++) {
    uint32_t id = manip::kNowhere;
    for (uint32_t p = 0; p < sg.props.size(); p++)
      if (sg.props[p] == dfa.atoms[j]) id = p;
    if (id == manip::kNowhere)
      throw SymError("task atom is not a game proposition: " + dfa.atoms[j]);
    atom_prop[j] = id;
  }

  SymbolicTask t;
  t.n_states = dfa.n_states;
  t.init_state = dfa.init;
  t.zeta.assign(sg.blocks.y.size(), m.zero());
  const uint32_t n_masks = uint32_t(1) << dfa.atoms.size();
  for (uint32_t mask = 0; mask < n_masks; mask++) {
    dd::Ref lc = sg.states;
    for (size_t j = 0; j < dfa.atoms.size(); j++) {
      dd::Ref l = sg.lab[atom_prop[j]];
      lc = m.apply(dd::BinOp::And, lc, (mask >> j) & 1 ? l : m.negate(l));
    }
    if (lc == m.zero()) continue;
    for (uint32_t z = 0; z < dfa.n_states; z++) {
      uint32_t nxt = dfa.delta[z][mask];
      if (nxt == 0) continue;
      dd::Ref zc = m.apply(dd::BinOp::And, dd::code_cube(m, sg.blocks.y, z), lc);
      for (size_t k = 0; k < sg.blocks.y.size(); k++)
        if ((nxt >> k) & 1)
          t.zeta[k] = m.apply(dd::BinOp::Or, t.zeta[k], zc);
    }
  }
  t.accepting = m.zero();
  for (uint32_t z = 0; z < dfa.n_states; z++)
    if (dfa.accepting[z])
      t.accepting = m.apply(dd::BinOp::Or, t.accepting,
                            dd::code_cube(m, sg.blocks.y, z));
  t.states = lt_const(m, sg.blocks.y, dfa.n_states);
  return t;
}

// one joint step in the product: the monitor advances on the successor's
// label, so the task substitution goes first and the state substitution
// then rewrites the state variables it introduced
inline dd::Ref product_pre(const SymbolicGame& sg, const SymbolicTask& t,
                           dd::Ref omega, const TrPart& p) {
  auto& m = *sg.m;
  std::vector<std::pair<dd::VarId, dd::Ref>> suby, subx;
  for (size_t j = 0; j < sg.blocks.y.size(); j++)
    suby.emplace_back(sg.blocks.y[j], t.zeta[j]);
  for (size_t k = 0; k < sg.blocks.x.size(); k++)
    subx.emplace_back(sg.blocks.x[k], p.eta[k]);
  dd::Ref w = m.vector_compose(omega, suby);
  w = m.vector_compose(w, subx);
  return m.apply(dd::BinOp::And, p.valid, w);
}

// forward image machinery; the only consumer of the primed relational form
struct Relation {
  dd::Ref rel;
  std::vector<dd::VarId> unprimed, primed;  // parallel, block order
  std::vector<dd::VarId> erase;             // unprimed plus action blocks
};

inline dd::Ref equiv_update(dd::Manager& m,
                            const std::vector<dd::VarId>& primed,
                            const std::vector<dd::Ref>& next) {
  dd::Ref r = m.one();
  for (size_t k = 0; k < primed.size(); k++) {
    dd::Ref eq = m.negate(m.apply(dd::BinOp::Xor, m.var(primed[k]), next[k]));
    r = m.apply(dd::BinOp::And, r, eq);
  }
  return r;
}

inline dd::Ref forward_reachable(dd::Manager& m, dd::Ref init,
                                 const Relation& rel) {
  std::vector<std::pair<dd::VarId, dd::Ref>> unprime;
  for (size_t k = 0; k < rel.primed.size(); k++)
    unprime.emplace_back(rel.primed[k], m.var(rel.unprimed[k]));
  dd::Ref reach = init;
  for (;;) {
    dd::Ref img = m.apply(dd::BinOp::And, rel.rel, reach);
    img = m.quantify(img, rel.erase, dd::Quant::Exists);
    img = m.vector_compose(img, unprime);
    dd::Ref nxt = m.apply(dd::BinOp::Or, reach, img);
    if (nxt == reach) return reach;
    reach = nxt;
  }
}

inline dd::Ref reachable(SymbolicGame& sg, dd::Ref init) {
  auto& m = *sg.m;
  if (sg.primed_x.empty())
    sg.primed_x = m.new_vars(static_cast<uint32_t>(sg.blocks.x.size()));
  Relation r;
  r.rel = m.apply(dd::BinOp::And, sg.valid, equiv_update(m, sg.primed_x, sg.eta));
  r.unprimed = sg.blocks.x;
  r.primed = sg.primed_x;
  r.erase = sg.blocks.x;
  r.erase.insert(r.erase.end(), sg.blocks.o.begin(), sg.blocks.o.end());
  r.erase.insert(r.erase.end(), sg.blocks.i.begin(), sg.blocks.i.end());
  return forward_reachable(m, init, r);
}

inline dd::Ref reachable(SymbolicGame& sg) { return reachable(sg, sg.init); }

// codes of a set over one ascending variable block
inline std::vector<uint64_t> decode_codes(dd::Manager& m, dd::Ref set,
                                          const std::vector<dd::VarId>& vars) {
  std::vector<uint64_t> out;
  m.foreach_sat(set, vars, [&](const std::vector<uint8_t>& row) {
    uint64_t c = 0;
    for (size_t k = 0; k < vars.size(); k++)
      if (row[k]) c |= uint64_t(1) << k;
    out.push_back(c);
  });
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace symsynth::sym
