#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "ltlf.hpp"

namespace symsynth::manip {

struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Region { RobotOnly, Shared, HumanReach };

inline const char* region_name(Region r) {
  switch (r) {
    case Region::RobotOnly: return "robot-only";
    case Region::Shared: return "shared";
    default: return "human-reachable";
  }
}

inline Region region_from_name(const std::string& s) {
  if (s == "robot-only") return Region::RobotOnly;
  if (s == "shared") return Region::Shared;
  if (s == "human-reachable") return Region::HumanReach;
  throw DomainError("unknown region '" + s + "'");
}

struct Location {
  std::string name;
  Region region = Region::RobotOnly;
};

struct Object {
  std::string name;
  bool movable = true;
};

inline constexpr uint32_t kNowhere = 0xFFFFFFFFu;  // placement of the held object
inline constexpr uint32_t kEmptyHand = 0xFFFFFFFEu;

struct Domain {
  std::vector<Location> locations;
  std::vector<Object> objects;
  std::vector<uint32_t> init_placement;  // per object, location id or kNowhere
  uint32_t init_gripper = kEmptyHand;    // object id or kEmptyHand
  int64_t cost_near = 1;
  int64_t cost_far = 3;
  std::map<std::string, int64_t> template_cost;  // optional per-template pin (PDDL sidecar)

  uint32_t loc_id(const std::string& n) const {
    for (uint32_t i = 0; i < locations.size(); ++i)
      if (locations[i].name == n) return i;
    throw DomainError("unknown location '" + n + "'");
  }
  uint32_t obj_id(const std::string& n) const {
    for (uint32_t i = 0; i < objects.size(); ++i)
      if (objects[i].name == n) return i;
    throw DomainError("unknown object '" + n + "'");
  }
  bool robot_reach(uint32_t l) const { return locations[l].region != Region::HumanReach; }
  bool human_reach(uint32_t l) const { return locations[l].region != Region::RobotOnly; }
  int64_t robot_cost(uint32_t l, const char* tmpl) const {
    auto it = template_cost.find(tmpl);
    if (it != template_cost.end()) return it->second;
    return locations[l].region == Region::Shared ? cost_near : cost_far;
  }
};

inline void validate(const Domain& d) {
  if (d.locations.empty()) throw DomainError("no locations");
  if (d.objects.empty()) throw DomainError("no objects");
  std::set<std::string> seen;
  for (auto& l : d.locations)
    if (!seen.insert(l.name).second) throw DomainError("duplicate location '" + l.name + "'");
  seen.clear();
  for (auto& o : d.objects)
    if (!seen.insert(o.name).second) throw DomainError("duplicate object '" + o.name + "'");
  if (d.init_placement.size() != d.objects.size())
    throw DomainError("init placement must cover every object");
  if (d.cost_near < 0 || d.cost_far < 0) throw DomainError("costs must be nonnegative");
  std::set<uint32_t> occupied;
  for (uint32_t o = 0; o < d.objects.size(); ++o) {
    uint32_t l = d.init_placement[o];
    if (l == kNowhere) {
      if (d.init_gripper != o)
        throw DomainError("object '" + d.objects[o].name + "' is placed nowhere but not held");
      continue;
    }
    if (l >= d.locations.size())
      throw DomainError("object '" + d.objects[o].name + "' placed at unknown location");
    if (!occupied.insert(l).second)
      throw DomainError("two objects share location '" + d.locations[l].name + "'");
  }
  if (d.init_gripper != kEmptyHand) {
    if (d.init_gripper >= d.objects.size()) throw DomainError("gripper holds unknown object");
    if (d.init_placement[d.init_gripper] != kNowhere)
      throw DomainError("held object must have no placement");
    if (!d.objects[d.init_gripper].movable) throw DomainError("gripper holds a fixture");
  }
}

// Placement propositions p_<obj>,<loc>, movable objects only, object-major order.
inline std::vector<std::string> placement_props(const Domain& d) {
  std::vector<std::string> ps;
  for (auto& o : d.objects) {
    if (!o.movable) continue;
    for (auto& l : d.locations) ps.push_back("p_" + o.name + "," + l.name);
  }
  return ps;
}

// Turn-based arena. Robot states own ground robot actions (grasp/release with
// region costs); human states own relocations within human reach plus no-op.
struct Game {
  struct Edge {
    uint32_t action;  // ground action id in the owner's table
    int64_t cost;     // 0 for human edges
    uint32_t dst;
  };
  uint32_t init = 0;
  std::vector<uint8_t> owner;  // 0 robot, 1 human
  std::vector<std::vector<Edge>> edges;
  std::vector<std::string> robot_action_names;
  std::vector<std::string> human_action_names;  // [0] is "noop"
  std::vector<int64_t> robot_action_costs;
  std::vector<std::string> props;
  std::vector<std::vector<uint32_t>> label;  // sorted prop ids, per state
  std::vector<std::string> state_names;

  uint32_t size() const { return static_cast<uint32_t>(owner.size()); }
  ltlf::Letter letter(uint32_t s) const {
    ltlf::Letter w;
    for (uint32_t p : label[s]) w.insert(props[p]);
    return w;
  }
};

namespace detail {

struct Config {
  std::vector<uint32_t> placement;  // per object
  uint32_t held = kEmptyHand;
  bool operator<(const Config& o) const {
    return std::tie(placement, held) < std::tie(o.placement, o.held);
  }
};

inline std::string config_name(const Domain& d, const Config& c, uint8_t turn) {
  std::string s = turn == 0 ? "R[" : "H[";
  for (uint32_t o = 0; o < d.objects.size(); ++o) {
    if (o) s += ' ';
    s += d.objects[o].name;
    s += '@';
    s += c.placement[o] == kNowhere ? std::string("hand") : d.locations[c.placement[o]].name;
  }
  s += ']';
  return s;
}

}  // namespace detail

// Ground robot actions: grasp(o,l) object-major, then release(o,l); applicability
// (region, occupancy, gripper) is checked per state. Human action 0 is noop,
// then relocate(o,from,to) in (o,from,to) order.
inline Game build_game(const Domain& d, uint32_t state_cap = 2000000) {
  validate(d);
  const uint32_t no = static_cast<uint32_t>(d.objects.size());
  const uint32_t nl = static_cast<uint32_t>(d.locations.size());

  Game g;
  g.props = placement_props(d);
  std::vector<uint32_t> prop_of(no * nl, kNowhere);
  {
    uint32_t next = 0;
    for (uint32_t o = 0; o < no; ++o) {
      if (!d.objects[o].movable) continue;
      for (uint32_t l = 0; l < nl; ++l) prop_of[o * nl + l] = next++;
    }
  }
  for (uint32_t o = 0; o < no; ++o)
    for (uint32_t l = 0; l < nl; ++l) {
      g.robot_action_names.push_back("grasp(" + d.objects[o].name + "," + d.locations[l].name + ")");
      g.robot_action_costs.push_back(d.robot_cost(l, "grasp"));
    }
  for (uint32_t o = 0; o < no; ++o)
    for (uint32_t l = 0; l < nl; ++l) {
      g.robot_action_names.push_back("release(" + d.objects[o].name + "," + d.locations[l].name + ")");
      g.robot_action_costs.push_back(d.robot_cost(l, "release"));
    }
  g.human_action_names.push_back("noop");
  for (uint32_t o = 0; o < no; ++o)
    for (uint32_t from = 0; from < nl; ++from)
      for (uint32_t to = 0; to < nl; ++to) {
        if (from == to) continue;
        g.human_action_names.push_back("relocate(" + d.objects[o].name + "," +
                                       d.locations[from].name + "," + d.locations[to].name + ")");
      }

  std::map<std::pair<detail::Config, uint8_t>, uint32_t> ids;
  std::vector<std::pair<detail::Config, uint8_t>> order;
  auto intern = [&](const detail::Config& c, uint8_t turn) {
    auto key = std::make_pair(c, turn);
    auto it = ids.find(key);
    if (it != ids.end()) return it->second;
    if (order.size() >= state_cap)
      throw DomainError("state cap exceeded: more than " + std::to_string(state_cap) +
                        " reachable states");
    uint32_t id = static_cast<uint32_t>(order.size());
    ids.emplace(key, id);
    order.push_back(key);
    g.owner.push_back(turn);
    g.edges.emplace_back();
    g.state_names.push_back(detail::config_name(d, c, turn));
    std::vector<uint32_t> lab;
    for (uint32_t o = 0; o < no; ++o)
      if (c.placement[o] != kNowhere && prop_of[o * nl + c.placement[o]] != kNowhere)
        lab.push_back(prop_of[o * nl + c.placement[o]]);
    std::sort(lab.begin(), lab.end());
    g.label.push_back(std::move(lab));
    return id;
  };

  detail::Config c0{d.init_placement, d.init_gripper};
  g.init = intern(c0, 0);

  for (uint32_t s = 0; s < order.size(); ++s) {
    auto [c, turn] = order[s];
    std::vector<char> occ(nl, 0);
    for (uint32_t o = 0; o < no; ++o)
      if (c.placement[o] != kNowhere) occ[c.placement[o]] = 1;
    if (turn == 0) {
      for (uint32_t o = 0; o < no; ++o)
        for (uint32_t l = 0; l < nl; ++l) {
          if (!d.robot_reach(l) || !d.objects[o].movable) continue;
          if (c.held != kEmptyHand || c.placement[o] != l) continue;
          detail::Config n = c;
          n.placement[o] = kNowhere;
          n.held = o;
          uint32_t dst = intern(n, 1);  // may grow g.edges
          g.edges[s].push_back({o * nl + l, d.robot_cost(l, "grasp"), dst});
        }
      for (uint32_t o = 0; o < no; ++o)
        for (uint32_t l = 0; l < nl; ++l) {
          if (!d.robot_reach(l)) continue;
          if (c.held != o || occ[l]) continue;
          detail::Config n = c;
          n.placement[o] = l;
          n.held = kEmptyHand;
          uint32_t dst = intern(n, 1);
          g.edges[s].push_back({no * nl + o * nl + l, d.robot_cost(l, "release"), dst});
        }
    } else {
      uint32_t back = intern(c, 0);
      g.edges[s].push_back({0, 0, back});
      uint32_t act = 1;
      for (uint32_t o = 0; o < no; ++o)
        for (uint32_t from = 0; from < nl; ++from)
          for (uint32_t to = 0; to < nl; ++to) {
            if (from == to) continue;
            uint32_t a = act++;
            if (!d.objects[o].movable) continue;
            if (c.placement[o] != from) continue;
            if (!d.human_reach(from) || !d.human_reach(to) || occ[to]) continue;
            detail::Config n = c;
            n.placement[o] = to;
            uint32_t dst = intern(n, 0);
            g.edges[s].push_back({a, 0, dst});
          }
    }
  }
  return g;
}

// Human turns folded away: one joint edge per (robot move, human reply) pair.
// States are the robot states of the arena, in their arena discovery order.
struct AbstractedGame {
  struct Edge {
    uint32_t robot_action;
    uint32_t human_action;
    int64_t cost;
    uint32_t dst;  // index into robot_states
  };
  uint32_t init = 0;
  std::vector<uint32_t> robot_states;  // arena state ids
  std::vector<std::vector<Edge>> edges;
};

inline AbstractedGame abstract(const Game& g) {
  AbstractedGame a;
  std::vector<uint32_t> idx(g.size(), kNowhere);
  for (uint32_t s = 0; s < g.size(); ++s)
    if (g.owner[s] == 0) {
      idx[s] = static_cast<uint32_t>(a.robot_states.size());
      a.robot_states.push_back(s);
    }
  a.init = idx[g.init];
  a.edges.resize(a.robot_states.size());
  for (uint32_t v = 0; v < a.robot_states.size(); ++v)
    for (auto& re : g.edges[a.robot_states[v]])
      for (auto& he : g.edges[re.dst])
        a.edges[v].push_back({re.action, he.action, re.cost, idx[he.dst]});
  return a;
}

// ---------------------------------------------------------------------------
// Instance = domain + LTLf task over its placement propositions.

struct Instance {
  Domain domain;
  std::string formula;
  std::map<std::string, std::string> goal_placements;  // when the task came as one
};

inline nlohmann::json instance_to_json(const Instance& inst) {
  const Domain& d = inst.domain;
  nlohmann::json j;
  j["locations"] = nlohmann::json::array();
  for (auto& l : d.locations)
    j["locations"].push_back({{"id", l.name}, {"region", region_name(l.region)}});
  j["objects"] = nlohmann::json::array();
  for (auto& o : d.objects) j["objects"].push_back({{"id", o.name}, {"movable", o.movable}});
  j["init"]["placements"] = nlohmann::json::object();
  for (uint32_t o = 0; o < d.objects.size(); ++o)
    if (d.init_placement[o] != kNowhere)
      j["init"]["placements"][d.objects[o].name] = d.locations[d.init_placement[o]].name;
  j["init"]["gripper"] =
      d.init_gripper == kEmptyHand ? nlohmann::json() : nlohmann::json(d.objects[d.init_gripper].name);
  j["costs"] = {{"near", d.cost_near}, {"far", d.cost_far}};
  std::string derived;
  if (!inst.goal_placements.empty()) {
    j["goal"]["placements"] = nlohmann::json::object();
    for (auto& [o, l] : inst.goal_placements) {
      j["goal"]["placements"][o] = l;
      if (!derived.empty()) derived += " & ";
      derived += "p_" + o + "," + l;
    }
    derived = "F(" + derived + ")";
  }
  if (inst.formula != derived) j["formula"] = inst.formula;
  return j;
}

inline Instance instance_from_json(const nlohmann::json& j) {
  Instance inst;
  Domain& d = inst.domain;
  try {
    for (auto& l : j.at("locations"))
      d.locations.push_back({l.at("id").get<std::string>(),
                             region_from_name(l.at("region").get<std::string>())});
    for (auto& o : j.at("objects"))
      d.objects.push_back({o.at("id").get<std::string>(), o.value("movable", true)});
    d.init_placement.assign(d.objects.size(), kNowhere);
    const auto& init = j.at("init");
    for (auto it = init.at("placements").begin(); it != init.at("placements").end(); ++it)
      d.init_placement[d.obj_id(it.key())] = d.loc_id(it.value().get<std::string>());
    if (init.contains("gripper") && !init.at("gripper").is_null())
      d.init_gripper = d.obj_id(init.at("gripper").get<std::string>());
    if (j.contains("costs")) {
      d.cost_near = j.at("costs").at("near").get<int64_t>();
      d.cost_far = j.at("costs").at("far").get<int64_t>();
    }
    if (j.contains("goal")) {
      // Goal placements stand for "eventually all of these at once".
      std::string f;
      const auto& goal = j.at("goal").at("placements");
      for (auto it = goal.begin(); it != goal.end(); ++it) {
        d.obj_id(it.key());
        d.loc_id(it.value().get<std::string>());
        inst.goal_placements[it.key()] = it.value().get<std::string>();
        if (!f.empty()) f += " & ";
        f += "p_" + it.key() + "," + it.value().get<std::string>();
      }
      if (f.empty()) throw DomainError("goal has no placements");
      inst.formula = "F(" + f + ")";
    }
    if (j.contains("formula")) inst.formula = j.at("formula").get<std::string>();
    if (inst.formula.empty()) throw DomainError("instance needs a goal or a formula");
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("bad instance json: ") + e.what());
  }
  validate(d);
  return inst;
}

inline Instance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DomainError("cannot parse '" + path + "': " + e.what());
  }
  return instance_from_json(j);
}

inline void save_instance(const std::string& path, const Instance& inst) {
  std::ofstream out(path);
  if (!out) throw DomainError("cannot write '" + path + "'");
  out << instance_to_json(inst).dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Generators.

// Random feasible instance: every object starts at its own robot-only location,
// the goal asks for a conjunction of moves onto distinct empty robot-only
// targets, leftover locations become shared or human-reachable clutter space.
inline Instance gen_benchmark(uint32_t n_loc, uint32_t n_obj, uint64_t seed, int64_t cost_near = 1,
                              int64_t cost_far = 3, double human_region_fraction = 0.25) {
  if (n_obj == 0) throw DomainError("need at least one object");
  if (n_loc < n_obj + 1) throw DomainError("need more locations than objects");
  std::mt19937_64 rng(seed);
  uint32_t max_goal = std::min(n_obj, n_loc - n_obj - (n_loc > n_obj + 1 ? 1 : 0));
  if (max_goal == 0) max_goal = 1;
  uint32_t k_goal = 1 + static_cast<uint32_t>(rng() % max_goal);

  Domain d;
  d.cost_near = cost_near;
  d.cost_far = cost_far;
  std::vector<Region> regions;
  for (uint32_t i = 0; i < n_obj + k_goal; ++i) regions.push_back(Region::RobotOnly);
  for (uint32_t i = n_obj + k_goal; i < n_loc; ++i) {
    double u = static_cast<double>(rng() % 1000000) / 1000000.0;
    regions.push_back(u < human_region_fraction ? Region::HumanReach : Region::Shared);
  }
  std::vector<uint32_t> pos(n_loc);
  for (uint32_t i = 0; i < n_loc; ++i) pos[i] = i;
  std::shuffle(pos.begin(), pos.end(), rng);  // declaration order of the slots
  d.locations.resize(n_loc);
  for (uint32_t i = 0; i < n_loc; ++i)
    d.locations[pos[i]] = {"l" + std::to_string(pos[i]), regions[i]};
  // pos[i] is the declared id of logical slot i: slots [0,n_obj) hold objects,
  // slots [n_obj, n_obj+k_goal) are the goal targets.
  d.init_placement.resize(n_obj);
  for (uint32_t o = 0; o < n_obj; ++o) {
    d.objects.push_back({"b" + std::to_string(o), true});
    d.init_placement[o] = pos[o];
  }
  if (n_obj >= 1 && rng() % 4 == 0) {
    d.init_gripper = 0;
    d.init_placement[0] = kNowhere;
  }
  std::string f;
  std::map<std::string, std::string> goal;
  for (uint32_t t = 0; t < k_goal; ++t) {
    if (t) f += " & ";
    f += "p_" + d.objects[t].name + "," + d.locations[pos[n_obj + t]].name;
    goal[d.objects[t].name] = d.locations[pos[n_obj + t]].name;
  }
  Instance inst{std::move(d), "F(" + f + ")", std::move(goal)};
  validate(inst.domain);
  return inst;
}

// Two-region family: the robot starts holding b0. Placing it on the shared slot
// s_t finishes the task for cost 1 but the human can steal it into h_x; the
// backup plan needs tgt0 (b0 or its stand-in bx from the shared slot s_c) plus
// one or two far moves. Min-max play stays in the robot-only region; the regret
// play risks the shared slot first.
inline Instance gen_two_region(uint64_t seed, int64_t cost_near = 1, int64_t cost_far = 3) {
  std::mt19937_64 rng(seed);
  uint32_t k = 1 + static_cast<uint32_t>(seed & 1);
  uint32_t spares = static_cast<uint32_t>(seed % 3);

  std::vector<Location> locs;
  locs.push_back({"s_t", Region::Shared});
  locs.push_back({"s_c", Region::Shared});
  locs.push_back({"h_x", Region::HumanReach});
  locs.push_back({"tgt0", Region::RobotOnly});
  for (uint32_t i = 1; i <= k; ++i) locs.push_back({"tgt" + std::to_string(i), Region::RobotOnly});
  for (uint32_t i = 1; i <= k; ++i) locs.push_back({"src" + std::to_string(i), Region::RobotOnly});
  for (uint32_t i = 0; i < spares; ++i)
    locs.push_back({"spare" + std::to_string(i), Region::RobotOnly});
  std::shuffle(locs.begin(), locs.end(), rng);

  std::vector<Object> objs;
  objs.push_back({"b0", true});
  objs.push_back({"bx", true});
  for (uint32_t i = 1; i <= k; ++i) objs.push_back({"b" + std::to_string(i), true});
  std::shuffle(objs.begin() + 1, objs.end(), rng);  // b0 stays first for readability

  Domain d;
  d.locations = std::move(locs);
  d.objects = std::move(objs);
  d.cost_near = cost_near;
  d.cost_far = cost_far;
  d.init_placement.assign(d.objects.size(), kNowhere);
  d.init_gripper = d.obj_id("b0");
  d.init_placement[d.obj_id("bx")] = d.loc_id("s_c");
  for (uint32_t i = 1; i <= k; ++i)
    d.init_placement[d.obj_id("b" + std::to_string(i))] = d.loc_id("src" + std::to_string(i));

  std::string far = "(p_b0,tgt0 | p_bx,tgt0)";
  for (uint32_t i = 1; i <= k; ++i)
    far += " & p_b" + std::to_string(i) + ",tgt" + std::to_string(i);
  // the cheap disjunct dies once b0 has ever been in the human cell, so a
  // post-theft handback cannot re-enable it
  Instance inst{std::move(d), "((!p_b0,h_x) U p_b0,s_t) | F(" + far + ")"};
  validate(inst.domain);
  return inst;
}

}  // namespace symsynth::manip
