#pragma once

#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "domain.hpp"

namespace symsynth::pddl {

struct PddlError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

struct Sx {
  bool is_atom = false;
  std::string atom;
  std::vector<Sx> kids;
  const std::string& head() const {
    if (is_atom || kids.empty() || !kids[0].is_atom) throw PddlError("expected a named form");
    return kids[0].atom;
  }
};

// PDDL is case-insensitive; identifiers become C-friendly (dashes to
// underscores) so they can appear inside proposition names.
inline std::string norm(std::string s) {
  for (char& c : s) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (c == '-') c = '_';
  }
  return s;
}

inline std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> ts;
  size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (c == ';') {
      while (i < text.size() && text[i] != '\n') ++i;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == '(' || c == ')') {
      ts.emplace_back(1, c);
      ++i;
    } else {
      size_t j = i;
      while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j])) &&
             text[j] != '(' && text[j] != ')' && text[j] != ';')
        ++j;
      ts.push_back(text.substr(i, j - i));
      i = j;
    }
  }
  return ts;
}

inline Sx parse_sx(const std::vector<std::string>& ts, size_t& i) {
  if (i >= ts.size()) throw PddlError("unexpected end of input");
  if (ts[i] == "(") {
    ++i;
    Sx s;
    while (i < ts.size() && ts[i] != ")") s.kids.push_back(parse_sx(ts, i));
    if (i >= ts.size()) throw PddlError("missing ')'");
    ++i;
    return s;
  }
  if (ts[i] == ")") throw PddlError("unexpected ')'");
  Sx s;
  s.is_atom = true;
  s.atom = ts[i++];
  return s;
}

inline Sx parse_text(const std::string& text) {
  auto ts = tokenize(text);
  size_t i = 0;
  Sx s = parse_sx(ts, i);
  if (i != ts.size()) throw PddlError("trailing tokens after top-level form");
  return s;
}

// name -> type for "?x ?y - t ?z - u" lists; untyped names get type "object".
inline std::vector<std::pair<std::string, std::string>> typed_list(const std::vector<Sx>& items,
                                                                   size_t from) {
  std::vector<std::pair<std::string, std::string>> out;
  std::vector<std::string> pending;
  for (size_t i = from; i < items.size(); ++i) {
    if (!items[i].is_atom) throw PddlError("expected a name in typed list");
    if (items[i].atom == "-") {
      if (i + 1 >= items.size() || !items[i + 1].is_atom)
        throw PddlError("missing type after '-'");
      std::string ty = norm(items[i + 1].atom);
      for (auto& n : pending) out.emplace_back(n, ty);
      pending.clear();
      ++i;
    } else {
      pending.push_back(norm(items[i].atom));
    }
  }
  for (auto& n : pending) out.emplace_back(n, "object");
  return out;
}

struct Atom {
  std::string pred;
  std::vector<std::string> args;  // normalized names or ?vars
  bool negated = false;
};

struct Action {
  std::string name;
  std::vector<std::pair<std::string, std::string>> params;
  std::vector<Atom> pre;
  std::vector<Atom> eff;
};

inline Atom parse_atom(const Sx& s, bool negated) {
  if (s.is_atom || s.kids.empty()) throw PddlError("malformed atom");
  Atom a;
  a.negated = negated;
  a.pred = norm(s.head());
  for (size_t i = 1; i < s.kids.size(); ++i) {
    if (!s.kids[i].is_atom) throw PddlError("atom arguments must be names");
    a.args.push_back(norm(s.kids[i].atom));
  }
  return a;
}

inline void parse_literals(const Sx& s, std::vector<Atom>& out, const char* where) {
  static const std::set<std::string> banned = {"or",       "exists", "forall", "when",
                                               "imply",    "=",      "increase",
                                               "decrease", "assign", "scale-up"};
  if (s.is_atom) throw PddlError(std::string("malformed ") + where);
  std::string h = s.kids.empty() ? "" : (s.kids[0].is_atom ? s.kids[0].atom : "");
  std::string hn = norm(h);
  if (banned.count(hn) || banned.count(h))
    throw PddlError("unsupported PDDL feature: " + h + " in " + where);
  if (hn == "and") {
    for (size_t i = 1; i < s.kids.size(); ++i) parse_literals(s.kids[i], out, where);
  } else if (hn == "not") {
    if (s.kids.size() != 2) throw PddlError("'not' takes one atom");
    const Sx& inner = s.kids[1];
    if (!inner.is_atom && !inner.kids.empty() && inner.kids[0].is_atom) {
      std::string ih = norm(inner.kids[0].atom);
      if (banned.count(ih) || ih == "and" || ih == "not")
        throw PddlError("unsupported PDDL feature: nested " + inner.kids[0].atom);
    }
    out.push_back(parse_atom(inner, true));
  } else {
    out.push_back(parse_atom(s, false));
  }
}

}  // namespace detail

struct PddlResult {
  manip::Instance instance;
  std::vector<std::string> robot_templates;
  std::vector<std::string> human_templates;
  // naive typed grounding: product of parameter type universe sizes
  std::map<std::string, uint64_t> template_groundings;
};

struct Caps {
  std::vector<std::string> human_actions;
  std::map<std::string, int64_t> costs;
};

inline Caps parse_caps(const nlohmann::json& j) {
  Caps c;
  try {
    if (j.contains("human_actions"))
      for (auto& a : j.at("human_actions")) c.human_actions.push_back(detail::norm(a.get<std::string>()));
    if (j.contains("costs"))
      for (auto it = j.at("costs").begin(); it != j.at("costs").end(); ++it)
        c.costs[detail::norm(it.key())] = it.value().get<int64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw PddlError(std::string("bad caps json: ") + e.what());
  }
  return c;
}

// Best-effort typed-STRIPS ingestion of pick-and-place domains. The subset is
// validated strictly (anything beyond conjunctive preconditions and add/delete
// effects fails loudly); the instance itself is recovered from the problem's
// typed objects, init atoms, and goal conjunction:
//   - objects of type "location" are slots, all others are manipulables
//   - the unique binary init predicate over (object, location) is the placement
//   - unary init atoms shared/human-reachable/robot-only tag regions
//   - unary init atoms holding/immovable set gripper and movable flags
// Robot templates must be among grasp/transit/transfer/release; the sidecar
// lists human templates and costs (special keys "near"/"far" set the region
// split, a robot template key pins that template's cost everywhere).
inline PddlResult parse_pddl(const std::string& domain_text, const std::string& problem_text,
                             const Caps& caps) {
  using detail::Sx;
  Sx dom = detail::parse_text(domain_text);
  Sx prob = detail::parse_text(problem_text);
  if (dom.is_atom || detail::norm(dom.head()) != "define") throw PddlError("domain: expected (define ...)");
  if (prob.is_atom || detail::norm(prob.head()) != "define") throw PddlError("problem: expected (define ...)");

  static const std::set<std::string> ok_reqs = {":strips", ":typing", ":negative-preconditions"};
  std::map<std::string, size_t> predicates;  // name -> arity
  std::vector<detail::Action> actions;
  std::set<std::string> type_names = {"object"};

  for (size_t i = 1; i < dom.kids.size(); ++i) {
    const Sx& sec = dom.kids[i];
    if (sec.is_atom || sec.kids.empty()) throw PddlError("domain: stray token");
    std::string h = detail::norm(sec.head());
    if (h == "domain") continue;
    if (h == ":requirements") {
      for (size_t k = 1; k < sec.kids.size(); ++k)
        if (!ok_reqs.count(sec.kids[k].atom))
          throw PddlError("unsupported PDDL feature: requirement " + sec.kids[k].atom);
    } else if (h == ":types") {
      for (auto& [n, parent] : detail::typed_list(sec.kids, 1)) {
        type_names.insert(n);
        type_names.insert(parent);
      }
    } else if (h == ":predicates") {
      for (size_t k = 1; k < sec.kids.size(); ++k) {
        const Sx& p = sec.kids[k];
        if (p.is_atom || p.kids.empty() || !p.kids[0].is_atom)
          throw PddlError("malformed predicate declaration");
        predicates[detail::norm(p.kids[0].atom)] = detail::typed_list(p.kids, 1).size();
      }
    } else if (h == ":action") {
      detail::Action a;
      if (sec.kids.size() < 2 || !sec.kids[1].is_atom) throw PddlError("action without a name");
      a.name = detail::norm(sec.kids[1].atom);
      for (size_t k = 2; k + 1 < sec.kids.size(); k += 2) {
        if (!sec.kids[k].is_atom) throw PddlError("expected :keyword in action " + a.name);
        std::string key = detail::norm(sec.kids[k].atom);
        const Sx& val = sec.kids[k + 1];
        if (key == ":parameters") {
          if (val.is_atom) throw PddlError(":parameters must be a list");
          a.params = detail::typed_list(val.kids, 0);
        } else if (key == ":precondition") {
          detail::parse_literals(val, a.pre, "precondition");
        } else if (key == ":effect") {
          detail::parse_literals(val, a.eff, "effect");
        } else {
          throw PddlError("unsupported PDDL feature: " + sec.kids[k].atom + " in action " + a.name);
        }
      }
      for (auto& p : a.params)
        if (!type_names.count(p.second)) throw PddlError("unknown type '" + p.second + "'");
      auto check = [&](const detail::Atom& at, const char* where) {
        auto it = predicates.find(at.pred);
        if (it == predicates.end()) throw PddlError("unknown predicate '" + at.pred + "'");
        if (it->second != at.args.size()) throw PddlError("arity mismatch for '" + at.pred + "'");
        for (auto& arg : at.args) {
          if (arg.empty() || arg[0] != '?') continue;
          bool found = false;
          for (auto& p : a.params) found = found || p.first == arg;
          if (!found)
            throw PddlError("ungroundable parameter " + arg + " in " + where + " of " + a.name);
        }
      };
      for (auto& at : a.pre) check(at, "precondition");
      for (auto& at : a.eff) {
        check(at, "effect");
        for (auto& arg : at.args)
          if (!arg.empty() && arg[0] != '?')
            throw PddlError("constants in effects are not supported (action " + a.name + ")");
      }
      actions.push_back(std::move(a));
    } else {
      throw PddlError("unsupported PDDL feature: section " + sec.head());
    }
  }

  std::map<std::string, std::string> obj_type;  // problem object -> type
  std::vector<std::pair<std::string, std::string>> obj_order;
  std::vector<detail::Atom> init;
  std::vector<detail::Atom> goal;
  for (size_t i = 1; i < prob.kids.size(); ++i) {
    const Sx& sec = prob.kids[i];
    if (sec.is_atom || sec.kids.empty()) throw PddlError("problem: stray token");
    std::string h = detail::norm(sec.head());
    if (h == "problem" || h == ":domain") continue;
    if (h == ":objects") {
      for (auto& [n, ty] : detail::typed_list(sec.kids, 1)) {
        if (!type_names.count(ty)) throw PddlError("unknown type '" + ty + "'");
        if (!obj_type.emplace(n, ty).second) throw PddlError("duplicate object '" + n + "'");
        obj_order.emplace_back(n, ty);
      }
    } else if (h == ":init") {
      for (size_t k = 1; k < sec.kids.size(); ++k) init.push_back(detail::parse_atom(sec.kids[k], false));
    } else if (h == ":goal") {
      if (sec.kids.size() != 2) throw PddlError(":goal takes one formula");
      detail::parse_literals(sec.kids[1], goal, "goal");
    } else {
      throw PddlError("unsupported PDDL feature: section " + sec.head());
    }
  }

  PddlResult res;
  manip::Domain& d = res.instance.domain;
  std::map<std::string, uint64_t> universe;  // type -> count
  for (auto& [n, ty] : obj_order) {
    universe[ty]++;
    if (ty == "location")
      d.locations.push_back({n, manip::Region::RobotOnly});
    else
      d.objects.push_back({n, true});
  }
  if (d.locations.empty()) throw PddlError("problem declares no objects of type location");
  if (d.objects.empty()) throw PddlError("problem declares no manipulable objects");

  auto is_loc = [&](const std::string& n) {
    auto it = obj_type.find(n);
    return it != obj_type.end() && it->second == "location";
  };
  auto is_obj = [&](const std::string& n) {
    auto it = obj_type.find(n);
    return it != obj_type.end() && it->second != "location";
  };

  std::string place_pred;
  for (auto& a : init) {
    if (a.negated) throw PddlError("negated init atoms are not supported");
    if (a.args.size() == 2 && is_obj(a.args[0]) && is_loc(a.args[1])) {
      if (place_pred.empty()) place_pred = a.pred;
      else if (place_pred != a.pred)
        throw PddlError("ambiguous placement predicate: '" + place_pred + "' vs '" + a.pred + "'");
    }
  }
  if (place_pred.empty()) throw PddlError("no placement atoms (object, location) in :init");

  d.init_placement.assign(d.objects.size(), manip::kNowhere);
  for (auto& a : init) {
    if (a.pred == place_pred && a.args.size() == 2 && is_obj(a.args[0]) && is_loc(a.args[1])) {
      uint32_t o = d.obj_id(a.args[0]);
      if (d.init_placement[o] != manip::kNowhere)
        throw PddlError("object '" + a.args[0] + "' placed twice in :init");
      d.init_placement[o] = d.loc_id(a.args[1]);
    } else if (a.args.size() == 1 && is_loc(a.args[0])) {
      if (a.pred == "shared") d.locations[d.loc_id(a.args[0])].region = manip::Region::Shared;
      else if (a.pred == "human_reachable")
        d.locations[d.loc_id(a.args[0])].region = manip::Region::HumanReach;
      else if (a.pred == "robot_only")
        d.locations[d.loc_id(a.args[0])].region = manip::Region::RobotOnly;
      // other location bookkeeping (occupied, clear, ...) is recomputed
    } else if (a.args.size() == 1 && is_obj(a.args[0])) {
      if (a.pred == "holding") d.init_gripper = d.obj_id(a.args[0]);
      else if (a.pred == "immovable" || a.pred == "fixed")
        d.objects[d.obj_id(a.args[0])].movable = false;
    }
  }

  for (auto& a : goal) {
    if (a.negated) throw PddlError("goal must be a conjunction of placement atoms");
    if (a.pred != place_pred || a.args.size() != 2 || !is_obj(a.args[0]) || !is_loc(a.args[1]))
      throw PddlError("goal must be a conjunction of placement atoms");
    res.instance.goal_placements[a.args[0]] = a.args[1];
  }
  if (res.instance.goal_placements.empty()) throw PddlError("empty goal");
  {
    std::string f;
    for (auto& [o, l] : res.instance.goal_placements) {
      if (!f.empty()) f += " & ";
      f += "p_" + o + "," + l;
    }
    res.instance.formula = "F(" + f + ")";
  }

  static const std::set<std::string> robot_ok = {"grasp", "transit", "transfer", "release"};
  std::set<std::string> human_set(caps.human_actions.begin(), caps.human_actions.end());
  for (auto& a : actions) {
    uint64_t count = 1;
    for (auto& p : a.params) count *= universe[p.second];
    res.template_groundings[a.name] = count;
    if (human_set.count(a.name)) {
      res.human_templates.push_back(a.name);
    } else if (robot_ok.count(a.name)) {
      res.robot_templates.push_back(a.name);
    } else {
      throw PddlError("action '" + a.name +
                      "' is neither a known robot template (grasp/transit/transfer/release) nor "
                      "listed in the sidecar's human_actions");
    }
  }
  for (auto& h : caps.human_actions) {
    bool found = false;
    for (auto& a : actions) found = found || a.name == h;
    if (!found) throw PddlError("sidecar human action '" + h + "' is not a domain action");
  }
  for (auto& [k, v] : caps.costs) {
    if (k == "near") d.cost_near = v;
    else if (k == "far") d.cost_far = v;
    else {
      bool found = false;
      for (auto& a : actions) found = found || a.name == k;
      if (!found) throw PddlError("sidecar cost for unknown action '" + k + "'");
      d.template_cost[k] = v;
    }
  }

  manip::validate(d);
  return res;
}

inline PddlResult load_pddl(const std::string& domain_path, const std::string& problem_path,
                            const std::string& caps_path) {
  auto slurp = [](const std::string& p) {
    std::ifstream in(p);
    if (!in) throw PddlError("cannot open '" + p + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  Caps caps;
  if (!caps_path.empty()) {
    std::ifstream in(caps_path);
    if (!in) throw PddlError("cannot open '" + caps_path + "'");
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw PddlError("cannot parse '" + caps_path + "': " + e.what());
    }
    caps = parse_caps(j);
  }
  return parse_pddl(slurp(domain_path), slurp(problem_path), caps);
}

}  // namespace symsynth::pddl
