#pragma once

// Decision diagram kernel: shared-node BDDs and ADDs over a fixed variable
// order, with hash-consing, memoized apply, quantification, composition,
// explicit mark-sweep GC and DOT/stats export. Terminals are exact int64
// values plus a distinguished infinity used by the game solvers.

#include <algorithm>
#include <array>
#include <bit>
#include <cassert>
#include <cstdint>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace symsynth::dd {

using VarId = uint32_t;

struct DdError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Ref {
  uint32_t i = 0;
  friend bool operator==(Ref a, Ref b) { return a.i == b.i; }
  friend bool operator!=(Ref a, Ref b) { return a.i != b.i; }
  friend bool operator<(Ref a, Ref b) { return a.i < b.i; }
};

struct RefHash {
  size_t operator()(Ref r) const { return std::hash<uint32_t>{}(r.i); }
};

struct Terminal {
  bool is_inf = false;
  int64_t value = 0;
  friend bool operator==(const Terminal& a, const Terminal& b) {
    return a.is_inf == b.is_inf && (a.is_inf || a.value == b.value);
  }
  friend bool operator<(const Terminal& a, const Terminal& b) {
    if (a.is_inf != b.is_inf) return !a.is_inf;  // infinity sorts last
    return !a.is_inf && a.value < b.value;
  }
};

enum class BinOp { And, Or, Xor, Plus, Min, Max, Times };
enum class Quant { Exists, Forall, MinAbstract, MaxAbstract };

struct Stats {
  uint64_t live_nodes = 0;
  uint64_t peak_nodes = 0;
  uint64_t cache_lookups = 0;
  uint64_t cache_hits = 0;
  uint64_t gc_runs = 0;
};

class Manager {
  // var field sentinels; real variables stay far below these.
  static constexpr uint32_t kTermInf = 0xFFFFFFFE;
  static constexpr uint32_t kTermFin = 0xFFFFFFFF;
  static constexpr uint32_t kFreeSlot = 0xFFFFFFFD;

  struct Node {
    uint32_t var;  // kTermFin/kTermInf for terminals, kFreeSlot when dead
    uint32_t lo;   // child, or low half of a finite terminal's value
    uint32_t hi;   // child, or high half of a finite terminal's value
  };

  struct NodeKey {
    uint32_t var, lo, hi;
    bool operator==(const NodeKey& o) const {
      return var == o.var && lo == o.lo && hi == o.hi;
    }
  };
  struct NodeKeyHash {
    size_t operator()(const NodeKey& k) const {
      uint64_t h = k.var;
      h = h * 0x9E3779B97F4A7C15ull + k.lo;
      h = h * 0x9E3779B97F4A7C15ull + k.hi;
      return static_cast<size_t>(h ^ (h >> 32));
    }
  };

  struct OpKey {
    uint32_t a, b, op;
    bool operator==(const OpKey& o) const {
      return a == o.a && b == o.b && op == o.op;
    }
  };
  struct OpKeyHash {
    size_t operator()(const OpKey& k) const {
      uint64_t h = k.op;
      h = h * 0x9E3779B97F4A7C15ull + k.a;
      h = h * 0x9E3779B97F4A7C15ull + k.b;
      return static_cast<size_t>(h ^ (h >> 32));
    }
  };

  struct IteKey {
    uint32_t f, g, h;
    bool operator==(const IteKey& o) const {
      return f == o.f && g == o.g && h == o.h;
    }
  };
  struct IteKeyHash {
    size_t operator()(const IteKey& k) const {
      uint64_t h = k.f;
      h = h * 0x9E3779B97F4A7C15ull + k.g;
      h = h * 0x9E3779B97F4A7C15ull + k.h;
      return static_cast<size_t>(h ^ (h >> 32));
    }
  };

 public:
  Manager() {
    // pinned terminals: 0, 1, infinity at fixed slots
    nodes_.push_back(make_fin_node(0));
    nodes_.push_back(make_fin_node(1));
    nodes_.push_back(Node{kTermInf, 0, 0});
    term_unique_.emplace(0, 0);
    term_unique_.emplace(1, 1);
    stats_.live_nodes = 3;
    stats_.peak_nodes = 3;
  }

  Manager(const Manager&) = delete;
  Manager& operator=(const Manager&) = delete;

  // ---- variables and constants ----

  VarId new_var() { return n_vars_++; }

  std::vector<VarId> new_vars(uint32_t n) {
    std::vector<VarId> out;
    out.reserve(n);
    for (uint32_t k = 0; k < n; k++) out.push_back(new_var());
    return out;
  }

  uint32_t var_count() const { return n_vars_; }

  Ref var(VarId v) {
    check_var(v);
    return Ref{mk(v, 0, 1)};
  }

  Ref nvar(VarId v) {
    check_var(v);
    return Ref{mk(v, 1, 0)};
  }

  Ref zero() const { return Ref{0}; }
  Ref one() const { return Ref{1}; }
  Ref infinity() const { return Ref{2}; }

  Ref constant(int64_t v) {
    auto it = term_unique_.find(v);
    if (it != term_unique_.end()) return Ref{it->second};
    uint32_t idx = alloc(make_fin_node(v));
    term_unique_.emplace(v, idx);
    return Ref{idx};
  }

  bool is_terminal(Ref r) const { return node(r.i).var >= kTermInf; }

  Terminal terminal_value(Ref r) const {
    const Node& n = node(r.i);
    if (n.var == kTermInf) return Terminal{true, 0};
    if (n.var == kTermFin) return Terminal{false, fin_value(n)};
    throw DdError("terminal_value: not a terminal");
  }

  VarId top_var(Ref r) const {
    const Node& n = node(r.i);
    if (n.var >= kTermInf) throw DdError("top_var: terminal node");
    return n.var;
  }

  // children of an internal node (lo = var false, hi = var true)
  Ref lo(Ref r) const {
    const Node& n = node(r.i);
    if (n.var >= kTermInf) throw DdError("lo: terminal node");
    return Ref{n.lo};
  }
  Ref hi(Ref r) const {
    const Node& n = node(r.i);
    if (n.var >= kTermInf) throw DdError("hi: terminal node");
    return Ref{n.hi};
  }

  // ---- core operations ----

  Ref apply(BinOp op, Ref f, Ref g) {
    if (op == BinOp::And || op == BinOp::Or || op == BinOp::Xor) {
      require_boolean(f, "apply: boolean op on non-boolean operand");
      require_boolean(g, "apply: boolean op on non-boolean operand");
    }
    return Ref{apply_rec(op, f.i, g.i)};
  }

  Ref negate(Ref f) {
    require_boolean(f, "negate: non-boolean operand");
    return Ref{apply_rec(BinOp::Xor, f.i, 1)};
  }

  Ref ite(Ref f, Ref g, Ref h) {
    require_boolean(f, "ite: non-boolean condition");
    return Ref{ite_rec(f.i, g.i, h.i)};
  }

  // substitute g for variable v in f
  Ref compose(Ref f, VarId v, Ref g) {
    check_var(v);
    require_boolean(g, "compose: non-boolean substituted function");
    std::unordered_map<uint32_t, uint32_t> memo;
    return Ref{compose_rec(f.i, v, g.i, memo)};
  }

  // simultaneous substitution; unlisted variables map to themselves
  Ref vector_compose(Ref f, const std::vector<std::pair<VarId, Ref>>& subst) {
    std::unordered_map<uint32_t, uint32_t> map;
    for (auto& [v, g] : subst) {
      check_var(v);
      require_boolean(g, "vector_compose: non-boolean substituted function");
      if (!map.emplace(v, g.i).second)
        throw DdError("vector_compose: duplicate variable in substitution");
    }
    std::unordered_map<uint32_t, uint32_t> memo;
    return Ref{vcompose_rec(f.i, map, memo)};
  }

  Ref quantify(Ref f, const std::vector<VarId>& vars, Quant q) {
    if (q == Quant::Exists || q == Quant::Forall)
      require_boolean(f, "quantify: exists/forall on non-boolean operand");
    std::vector<VarId> vs(vars);
    std::sort(vs.begin(), vs.end());
    vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
    for (VarId v : vs) check_var(v);
    BinOp combine = q == Quant::Exists      ? BinOp::Or
                    : q == Quant::Forall    ? BinOp::And
                    : q == Quant::MinAbstract ? BinOp::Min
                                              : BinOp::Max;
    std::unordered_map<uint32_t, uint32_t> memo;
    return Ref{quantify_rec(f.i, vs, combine, memo)};
  }

  Ref cofactor(Ref f, VarId v, bool val) {
    check_var(v);
    std::unordered_map<uint32_t, uint32_t> memo;
    return Ref{cofactor_rec(f.i, v, val, memo)};
  }

  // conjunction of distinct literals
  Ref cube(const std::vector<std::pair<VarId, bool>>& lits) {
    std::vector<std::pair<VarId, bool>> ls(lits);
    std::sort(ls.begin(), ls.end());
    for (size_t k = 1; k < ls.size(); k++)
      if (ls[k].first == ls[k - 1].first)
        throw DdError("cube: repeated variable");
    uint32_t acc = 1;
    for (auto it = ls.rbegin(); it != ls.rend(); ++it) {
      check_var(it->first);
      acc = it->second ? mk(it->first, 0, acc) : mk(it->first, acc, 0);
    }
    return Ref{acc};
  }

  // assignment indexed by VarId; entries must be 0 or 1 for visited vars
  Terminal eval(Ref f, const std::vector<int8_t>& assignment) const {
    uint32_t cur = f.i;
    while (node(cur).var < kTermInf) {
      const Node& n = node(cur);
      if (n.var >= assignment.size())
        throw DdError("eval: assignment misses variable " + std::to_string(n.var));
      int8_t a = assignment[n.var];
      if (a != 0 && a != 1)
        throw DdError("eval: variable " + std::to_string(n.var) + " unset");
      cur = a ? n.hi : n.lo;
    }
    return terminal_value(Ref{cur});
  }

  bool is_boolean(Ref f) {
    auto it = bool_memo_.find(f.i);
    if (it != bool_memo_.end()) return it->second;
    bool r;
    const Node& n = node(f.i);
    if (n.var == kTermInf) {
      r = false;
    } else if (n.var == kTermFin) {
      r = f.i == 0 || f.i == 1;
    } else {
      r = is_boolean(Ref{n.lo}) && is_boolean(Ref{n.hi});
    }
    bool_memo_.emplace(f.i, r);
    return r;
  }

  // ---- inspection ----

  uint64_t node_count(Ref f) const {
    std::vector<uint32_t> seen;
    collect(f.i, seen);
    return seen.size();
  }

  std::vector<Terminal> terminals(Ref f) const {
    std::vector<uint32_t> seen;
    collect(f.i, seen);
    std::vector<Terminal> out;
    for (uint32_t idx : seen)
      if (node(idx).var >= kTermInf) out.push_back(terminal_value(Ref{idx}));
    std::sort(out.begin(), out.end());
    return out;
  }

  std::vector<VarId> support(Ref f) const {
    std::vector<uint32_t> seen;
    collect(f.i, seen);
    std::vector<VarId> out;
    for (uint32_t idx : seen)
      if (node(idx).var < kTermInf) out.push_back(node(idx).var);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  // enumerate satisfying assignments of a boolean f over `universe`
  // (ascending var order, must cover support(f)); the callback receives
  // one 0/1 vector parallel to `universe` per assignment.
  void foreach_sat(Ref f, const std::vector<VarId>& universe,
                   const std::function<void(const std::vector<uint8_t>&)>& cb) {
    require_boolean(f, "foreach_sat: non-boolean operand");
    check_universe(f, universe);
    std::vector<uint8_t> asg(universe.size(), 0);
    fsat_rec(f.i, universe, 0, asg, cb);
  }

  uint64_t sat_count(Ref f, const std::vector<VarId>& universe) {
    require_boolean(f, "sat_count: non-boolean operand");
    check_universe(f, universe);
    if (universe.size() > 62) throw DdError("sat_count: universe too large");
    std::unordered_map<uint64_t, uint64_t> memo;
    return scount_rec(f.i, universe, 0, memo);
  }

  // ---- memory management ----

  void gc(const std::vector<Ref>& roots) {
    std::vector<uint8_t> mark(nodes_.size(), 0);
    mark[0] = mark[1] = mark[2] = 1;
    std::vector<uint32_t> stack;
    for (Ref r : roots) {
      if (r.i >= nodes_.size() || node(r.i).var == kFreeSlot)
        throw DdError("gc: invalid root");
      stack.push_back(r.i);
    }
    while (!stack.empty()) {
      uint32_t cur = stack.back();
      stack.pop_back();
      if (mark[cur]) continue;
      mark[cur] = 1;
      const Node& n = node(cur);
      if (n.var < kTermInf) {
        stack.push_back(n.lo);
        stack.push_back(n.hi);
      }
    }
    for (uint32_t idx = 0; idx < nodes_.size(); idx++) {
      Node& n = nodes_[idx];
      if (mark[idx] || n.var == kFreeSlot) continue;
      if (n.var == kTermFin) {
        term_unique_.erase(fin_value(n));
      } else if (n.var < kTermInf) {
        unique_.erase(NodeKey{n.var, n.lo, n.hi});
      }
      n.var = kFreeSlot;
      free_.push_back(idx);
      stats_.live_nodes--;
    }
    op_cache_.clear();
    ite_cache_.clear();
    bool_memo_.clear();
    stats_.gc_runs++;
  }

  void set_cache_enabled(bool on) {
    cache_on_ = on;
    if (!on) {
      op_cache_.clear();
      ite_cache_.clear();
    }
  }
  bool cache_enabled() const { return cache_on_; }

  const Stats& stats() const { return stats_; }

  // ---- export ----

  std::string to_dot(const std::vector<std::pair<std::string, Ref>>& roots) const {
    std::ostringstream os;
    os << "digraph dd {\n";
    std::vector<uint32_t> seen;
    for (auto& [name, r] : roots) collect(r.i, seen);
    std::sort(seen.begin(), seen.end());
    seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
    for (uint32_t idx : seen) {
      const Node& n = node(idx);
      if (n.var >= kTermInf) {
        std::string label =
            n.var == kTermInf ? "inf" : std::to_string(fin_value(n));
        os << "  n" << idx << " [shape=box,label=\"" << label << "\"];\n";
      } else {
        os << "  n" << idx << " [shape=circle,label=\"x" << n.var << "\"];\n";
        os << "  n" << idx << " -> n" << n.hi << ";\n";
        os << "  n" << idx << " -> n" << n.lo << " [style=dashed];\n";
      }
    }
    for (size_t k = 0; k < roots.size(); k++) {
      os << "  r" << k << " [shape=plaintext,label=\"" << roots[k].first
         << "\"];\n";
      os << "  r" << k << " -> n" << roots[k].second.i << ";\n";
    }
    os << "}\n";
    return os.str();
  }

  std::string stats_json() const {
    double rate = stats_.cache_lookups
                      ? double(stats_.cache_hits) / double(stats_.cache_lookups)
                      : 0.0;
    std::ostringstream os;
    os << "{\"live_nodes\":" << stats_.live_nodes
       << ",\"peak_nodes\":" << stats_.peak_nodes
       << ",\"vars\":" << n_vars_
       << ",\"cache_lookups\":" << stats_.cache_lookups
       << ",\"cache_hits\":" << stats_.cache_hits
       << ",\"cache_hit_rate\":" << rate
       << ",\"gc_runs\":" << stats_.gc_runs << "}";
    return os.str();
  }

 private:
  std::vector<Node> nodes_;
  std::vector<uint32_t> free_;
  std::unordered_map<NodeKey, uint32_t, NodeKeyHash> unique_;
  std::unordered_map<int64_t, uint32_t> term_unique_;
  std::unordered_map<OpKey, uint32_t, OpKeyHash> op_cache_;
  std::unordered_map<IteKey, uint32_t, IteKeyHash> ite_cache_;
  std::unordered_map<uint32_t, bool> bool_memo_;
  uint32_t n_vars_ = 0;
  bool cache_on_ = true;
  Stats stats_;

  static Node make_fin_node(int64_t v) {
    uint64_t u = std::bit_cast<uint64_t>(v);
    return Node{kTermFin, static_cast<uint32_t>(u),
                static_cast<uint32_t>(u >> 32)};
  }

  static int64_t fin_value(const Node& n) {
    uint64_t u = uint64_t(n.lo) | (uint64_t(n.hi) << 32);
    return std::bit_cast<int64_t>(u);
  }

  const Node& node(uint32_t i) const {
    assert(i < nodes_.size());
    return nodes_[i];
  }

  void check_var(VarId v) const {
    if (v >= n_vars_)
      throw DdError("unknown variable " + std::to_string(v));
  }

  void require_boolean(Ref f, const char* msg) {
    if (!is_boolean(f)) throw DdError(msg);
  }

  void check_universe(Ref f, const std::vector<VarId>& universe) const {
    for (size_t k = 1; k < universe.size(); k++)
      if (universe[k] <= universe[k - 1])
        throw DdError("universe must be strictly ascending");
    auto sup = support(f);
    size_t j = 0;
    for (VarId v : sup) {
      while (j < universe.size() && universe[j] < v) j++;
      if (j == universe.size() || universe[j] != v)
        throw DdError("universe does not cover support");
    }
  }

  uint32_t alloc(const Node& n) {
    uint32_t idx;
    if (!free_.empty()) {
      idx = free_.back();
      free_.pop_back();
      nodes_[idx] = n;
    } else {
      idx = static_cast<uint32_t>(nodes_.size());
      nodes_.push_back(n);
    }
    stats_.live_nodes++;
    stats_.peak_nodes = std::max(stats_.peak_nodes, stats_.live_nodes);
    return idx;
  }

  uint32_t mk(uint32_t var, uint32_t lo, uint32_t hi) {
    if (lo == hi) return lo;
    assert(var < node(lo).var && var < node(hi).var);
    NodeKey key{var, lo, hi};
    auto it = unique_.find(key);
    if (it != unique_.end()) return it->second;
    uint32_t idx = alloc(Node{var, lo, hi});
    unique_.emplace(key, idx);
    return idx;
  }

  uint32_t term_apply(BinOp op, uint32_t a, uint32_t b) {
    bool ainf = node(a).var == kTermInf;
    bool binf = node(b).var == kTermInf;
    int64_t av = ainf ? 0 : fin_value(node(a));
    int64_t bv = binf ? 0 : fin_value(node(b));
    switch (op) {
      case BinOp::And:
        return (av && bv) ? 1u : 0u;
      case BinOp::Or:
        return (av || bv) ? 1u : 0u;
      case BinOp::Xor:
        return (av != bv) ? 1u : 0u;
      case BinOp::Plus: {
        if (ainf || binf) return 2;
        int64_t r;
        if (__builtin_add_overflow(av, bv, &r))
          throw DdError("PLUS: int64 overflow");
        return constant(r).i;
      }
      case BinOp::Min:
        if (ainf) return b;
        if (binf) return a;
        return constant(std::min(av, bv)).i;
      case BinOp::Max:
        if (ainf || binf) return 2;
        return constant(std::max(av, bv)).i;
      case BinOp::Times: {
        if (ainf || binf) throw DdError("TIMES: infinity operand");
        int64_t r;
        if (__builtin_mul_overflow(av, bv, &r))
          throw DdError("TIMES: int64 overflow");
        return constant(r).i;
      }
    }
    throw DdError("unreachable");
  }

  uint32_t apply_rec(BinOp op, uint32_t f, uint32_t g) {
    // symmetric-op normalization plus cheap absorptions
    switch (op) {
      case BinOp::And:
        if (f == g) return f;
        if (f == 0 || g == 0) return 0;
        if (f == 1) return g;
        if (g == 1) return f;
        break;
      case BinOp::Or:
        if (f == g) return f;
        if (f == 1 || g == 1) return 1;
        if (f == 0) return g;
        if (g == 0) return f;
        break;
      case BinOp::Xor:
        if (f == g) return 0;
        if (f == 0) return g;
        if (g == 0) return f;
        break;
      case BinOp::Plus:
        if (f == 2 || g == 2) return 2;
        if (f == 0) return g;
        if (g == 0) return f;
        break;
      case BinOp::Min:
        if (f == g) return f;
        if (f == 2) return g;
        if (g == 2) return f;
        break;
      case BinOp::Max:
        if (f == g) return f;
        if (f == 2 || g == 2) return 2;
        break;
      case BinOp::Times:
        // no identity shortcuts: recursion must reach terminal pairs so an
        // infinity operand reliably errors
        break;
    }
    const Node nf = node(f);  // by value: mk below may grow the node pool
    const Node ng = node(g);
    if (nf.var >= kTermInf && ng.var >= kTermInf) return term_apply(op, f, g);

    uint32_t a = f, b = g;
    if (a > b) std::swap(a, b);  // all seven ops are commutative
    OpKey key{a, b, static_cast<uint32_t>(op)};
    if (cache_on_) {
      stats_.cache_lookups++;
      auto it = op_cache_.find(key);
      if (it != op_cache_.end()) {
        stats_.cache_hits++;
        return it->second;
      }
    }
    uint32_t v = std::min(nf.var, ng.var);
    uint32_t f0 = nf.var == v ? nf.lo : f;
    uint32_t f1 = nf.var == v ? nf.hi : f;
    uint32_t g0 = ng.var == v ? ng.lo : g;
    uint32_t g1 = ng.var == v ? ng.hi : g;
    uint32_t r = mk(v, apply_rec(op, f0, g0), apply_rec(op, f1, g1));
    if (cache_on_) op_cache_.emplace(key, r);
    return r;
  }

  uint32_t ite_rec(uint32_t f, uint32_t g, uint32_t h) {
    if (f == 1) return g;
    if (f == 0) return h;
    if (g == h) return g;
    if (g == 1 && h == 0) return f;
    IteKey key{f, g, h};
    if (cache_on_) {
      stats_.cache_lookups++;
      auto it = ite_cache_.find(key);
      if (it != ite_cache_.end()) {
        stats_.cache_hits++;
        return it->second;
      }
    }
    const Node nf = node(f);  // by value: mk below may grow the node pool
    const Node ng = node(g);
    const Node nh = node(h);
    uint32_t v = std::min(nf.var, std::min(ng.var, nh.var));
    uint32_t f0 = nf.var == v ? nf.lo : f;
    uint32_t f1 = nf.var == v ? nf.hi : f;
    uint32_t g0 = ng.var == v ? ng.lo : g;
    uint32_t g1 = ng.var == v ? ng.hi : g;
    uint32_t h0 = nh.var == v ? nh.lo : h;
    uint32_t h1 = nh.var == v ? nh.hi : h;
    uint32_t r = mk(v, ite_rec(f0, g0, h0), ite_rec(f1, g1, h1));
    if (cache_on_) ite_cache_.emplace(key, r);
    return r;
  }

  uint32_t compose_rec(uint32_t f, VarId v, uint32_t g,
                       std::unordered_map<uint32_t, uint32_t>& memo) {
    const Node n = node(f);  // by value: mk below may grow the node pool
    if (n.var >= kTermInf || n.var > v) return f;
    if (n.var == v) return ite_rec(g, n.hi, n.lo);
    if (cache_on_) {
      auto it = memo.find(f);
      if (it != memo.end()) return it->second;
    }
    // substitution may pull g's variables above n.var, so rebuild via ite
    uint32_t lit = mk(n.var, 0, 1);
    uint32_t r = ite_rec(lit, compose_rec(n.hi, v, g, memo),
                         compose_rec(n.lo, v, g, memo));
    if (cache_on_) memo.emplace(f, r);
    return r;
  }

  uint32_t vcompose_rec(uint32_t f,
                        const std::unordered_map<uint32_t, uint32_t>& map,
                        std::unordered_map<uint32_t, uint32_t>& memo) {
    const Node n = node(f);  // by value: mk below may grow the node pool
    if (n.var >= kTermInf) return f;
    if (cache_on_) {
      auto it = memo.find(f);
      if (it != memo.end()) return it->second;
    }
    auto sub = map.find(n.var);
    uint32_t cond = sub != map.end() ? sub->second : mk(n.var, 0, 1);
    uint32_t r = ite_rec(cond, vcompose_rec(n.hi, map, memo),
                         vcompose_rec(n.lo, map, memo));
    if (cache_on_) memo.emplace(f, r);
    return r;
  }

  uint32_t quantify_rec(uint32_t f, const std::vector<VarId>& vs, BinOp combine,
                        std::unordered_map<uint32_t, uint32_t>& memo) {
    const Node n = node(f);  // by value: mk below may grow the node pool
    if (n.var >= kTermInf || (!vs.empty() && n.var > vs.back())) return f;
    if (cache_on_) {
      auto it = memo.find(f);
      if (it != memo.end()) return it->second;
    }
    uint32_t l = quantify_rec(n.lo, vs, combine, memo);
    uint32_t h = quantify_rec(n.hi, vs, combine, memo);
    uint32_t r = std::binary_search(vs.begin(), vs.end(), n.var)
                     ? apply_rec(combine, l, h)
                     : mk(n.var, l, h);  // abstraction never raises variables
    if (cache_on_) memo.emplace(f, r);
    return r;
  }

  uint32_t cofactor_rec(uint32_t f, VarId v, bool val,
                        std::unordered_map<uint32_t, uint32_t>& memo) {
    const Node n = node(f);  // by value: mk below may grow the node pool
    if (n.var >= kTermInf || n.var > v) return f;
    if (n.var == v) return val ? n.hi : n.lo;
    if (cache_on_) {
      auto it = memo.find(f);
      if (it != memo.end()) return it->second;
    }
    uint32_t r = mk(n.var, cofactor_rec(n.lo, v, val, memo),
                    cofactor_rec(n.hi, v, val, memo));
    if (cache_on_) memo.emplace(f, r);
    return r;
  }

  void collect(uint32_t f, std::vector<uint32_t>& seen) const {
    std::vector<uint32_t> stack{f};
    std::unordered_map<uint32_t, bool> vis;
    for (uint32_t idx : seen) vis.emplace(idx, true);
    while (!stack.empty()) {
      uint32_t cur = stack.back();
      stack.pop_back();
      if (vis.count(cur)) continue;
      vis.emplace(cur, true);
      seen.push_back(cur);
      const Node& n = node(cur);
      if (n.var < kTermInf) {
        stack.push_back(n.lo);
        stack.push_back(n.hi);
      }
    }
  }

  void fsat_rec(uint32_t f, const std::vector<VarId>& universe, size_t i,
                std::vector<uint8_t>& asg,
                const std::function<void(const std::vector<uint8_t>&)>& cb) {
    if (f == 0) return;
    if (i == universe.size()) {
      assert(f == 1);
      cb(asg);
      return;
    }
    const Node& n = node(f);
    uint32_t l = f, h = f;
    if (n.var < kTermInf && n.var == universe[i]) {
      l = n.lo;
      h = n.hi;
    }
    asg[i] = 0;
    fsat_rec(l, universe, i + 1, asg, cb);
    asg[i] = 1;
    fsat_rec(h, universe, i + 1, asg, cb);
  }

  uint64_t scount_rec(uint32_t f, const std::vector<VarId>& universe, size_t i,
                      std::unordered_map<uint64_t, uint64_t>& memo) {
    if (f == 0) return 0;
    if (i == universe.size()) {
      assert(f == 1);
      return 1;
    }
    uint64_t key = (uint64_t(f) << 8) | uint64_t(i);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    const Node& n = node(f);
    uint32_t l = f, h = f;
    if (n.var < kTermInf && n.var == universe[i]) {
      l = n.lo;
      h = n.hi;
    }
    uint64_t r = scount_rec(l, universe, i + 1, memo) +
                 scount_rec(h, universe, i + 1, memo);
    memo.emplace(key, r);
    return r;
  }
};

// bits needed to hold codes 0..n-1 (at least one)
inline uint32_t bits_for(uint64_t n) {
  uint32_t b = 1;
  while ((uint64_t(1) << b) < n) b++;
  return b;
}

// conjunction asserting that `vars` (bit k = vars[k]) spell out `code`
inline Ref code_cube(Manager& m, const std::vector<VarId>& vars,
                     uint64_t code) {
  std::vector<std::pair<VarId, bool>> lits;
  lits.reserve(vars.size());
  for (size_t k = 0; k < vars.size(); k++)
    lits.emplace_back(vars[k], (code >> k) & 1);
  return m.cube(lits);
}

// value of the `vars` bits in a sat assignment row parallel to `universe`
inline uint64_t decode_bits(const std::vector<VarId>& universe,
                            const std::vector<uint8_t>& row,
                            const std::vector<VarId>& vars) {
  uint64_t code = 0;
  for (size_t k = 0; k < vars.size(); k++) {
    auto it = std::lower_bound(universe.begin(), universe.end(), vars[k]);
    if (it == universe.end() || *it != vars[k])
      throw DdError("decode_bits: variable not in universe");
    if (row[size_t(it - universe.begin())]) code |= uint64_t(1) << k;
  }
  return code;
}

}  // namespace symsynth::dd
