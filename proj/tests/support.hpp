#pragma once

// Shared test machinery: truth-table mirrors of diagram operations, random
// table generators, and independent pointwise oracles the kernel is checked
// against. Everything here is deliberately naive (exponential in vars).

#include <symsynth/dd.hpp>
#include <symsynth/ltlf.hpp>

#include <algorithm>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace testsupport {

using symsynth::dd::BinOp;
using symsynth::dd::Manager;
using symsynth::dd::Quant;
using symsynth::dd::Ref;
using symsynth::dd::Terminal;
using symsynth::dd::VarId;

using Rng = std::mt19937_64;

inline Terminal fin(int64_t x) { return Terminal{false, x}; }
inline Terminal inf() { return Terminal{true, 0}; }

// function table over nvars variables; index bit j = value of the j-th var
struct Table {
  uint32_t nvars = 0;
  std::vector<Terminal> v;
};

inline Table random_table(Rng& rng, uint32_t nvars,
                          const std::vector<Terminal>& pool) {
  Table t{nvars, {}};
  t.v.resize(size_t(1) << nvars);
  std::uniform_int_distribution<size_t> pick(0, pool.size() - 1);
  for (auto& x : t.v) x = pool[pick(rng)];
  return t;
}

inline const std::vector<Terminal>& bool_pool() {
  static const std::vector<Terminal> p{fin(0), fin(1)};
  return p;
}

inline const std::vector<Terminal>& mixed_pool() {
  static const std::vector<Terminal> p{fin(0),  fin(1), fin(2), fin(3),
                                       fin(5),  fin(-2), inf()};
  return p;
}

inline bool table_is_bool(const Table& t) {
  return std::all_of(t.v.begin(), t.v.end(), [](const Terminal& x) {
    return !x.is_inf && (x.value == 0 || x.value == 1);
  });
}

// Shannon construction: canonicity makes this the reference reduced form
inline Ref build_dd(Manager& m, const std::vector<VarId>& vars,
                    const Table& t) {
  std::function<Ref(uint32_t, size_t)> rec = [&](uint32_t level,
                                                 size_t idx) -> Ref {
    if (level == t.nvars) {
      const Terminal& x = t.v[idx];
      return x.is_inf ? m.infinity() : m.constant(x.value);
    }
    Ref l = rec(level + 1, idx);
    Ref h = rec(level + 1, idx | (size_t(1) << level));
    return m.ite(m.var(vars[level]), h, l);
  };
  return rec(0, 0);
}

// independent construction: shuffled sum of weighted minterms
inline Ref build_dd_minterms(Manager& m, const std::vector<VarId>& vars,
                             const Table& t, Rng& rng) {
  std::vector<size_t> order(t.v.size());
  std::iota(order.begin(), order.end(), size_t(0));
  std::shuffle(order.begin(), order.end(), rng);
  Ref acc = m.constant(0);
  for (size_t idx : order) {
    const Terminal& x = t.v[idx];
    if (!x.is_inf && x.value == 0) continue;
    std::vector<std::pair<VarId, bool>> lits;
    for (uint32_t j = 0; j < t.nvars; j++)
      lits.emplace_back(vars[j], (idx >> j) & 1);
    Ref val = x.is_inf ? m.infinity() : m.constant(x.value);
    acc = m.apply(BinOp::Plus, acc, m.ite(m.cube(lits), val, m.constant(0)));
  }
  return acc;
}

// pointwise apply; nullopt means the kernel must throw
inline std::optional<Table> table_apply(BinOp op, const Table& f,
                                        const Table& g) {
  bool boolean_op = op == BinOp::And || op == BinOp::Or || op == BinOp::Xor;
  if (boolean_op && (!table_is_bool(f) || !table_is_bool(g)))
    return std::nullopt;
  Table r{f.nvars, {}};
  r.v.resize(f.v.size());
  for (size_t i = 0; i < f.v.size(); i++) {
    Terminal a = f.v[i], b = g.v[i];
    switch (op) {
      case BinOp::And:
        r.v[i] = fin(a.value && b.value);
        break;
      case BinOp::Or:
        r.v[i] = fin(a.value || b.value);
        break;
      case BinOp::Xor:
        r.v[i] = fin(a.value != b.value);
        break;
      case BinOp::Plus:
        r.v[i] = (a.is_inf || b.is_inf) ? inf() : fin(a.value + b.value);
        break;
      case BinOp::Min:
        if (a.is_inf)
          r.v[i] = b;
        else if (b.is_inf)
          r.v[i] = a;
        else
          r.v[i] = fin(std::min(a.value, b.value));
        break;
      case BinOp::Max:
        r.v[i] = (a.is_inf || b.is_inf) ? inf() : fin(std::max(a.value, b.value));
        break;
      case BinOp::Times:
        if (a.is_inf || b.is_inf) return std::nullopt;
        r.v[i] = fin(a.value * b.value);
        break;
    }
  }
  return r;
}

inline Table table_ite(const Table& c, const Table& g, const Table& h) {
  Table r{c.nvars, {}};
  r.v.resize(c.v.size());
  for (size_t i = 0; i < c.v.size(); i++) r.v[i] = c.v[i].value ? g.v[i] : h.v[i];
  return r;
}

inline Table table_cofactor(const Table& t, uint32_t j, bool val) {
  Table r{t.nvars, {}};
  r.v.resize(t.v.size());
  for (size_t i = 0; i < t.v.size(); i++) {
    size_t src = val ? (i | (size_t(1) << j)) : (i & ~(size_t(1) << j));
    r.v[i] = t.v[src];
  }
  return r;
}

inline std::optional<Table> table_quantify(const Table& t,
                                           const std::vector<uint32_t>& js,
                                           Quant q) {
  if ((q == Quant::Exists || q == Quant::Forall) && !table_is_bool(t))
    return std::nullopt;
  BinOp combine = q == Quant::Exists      ? BinOp::Or
                  : q == Quant::Forall    ? BinOp::And
                  : q == Quant::MinAbstract ? BinOp::Min
                                            : BinOp::Max;
  Table cur = t;
  for (uint32_t j : js) {
    auto r = table_apply(combine, table_cofactor(cur, j, false),
                         table_cofactor(cur, j, true));
    if (!r) return std::nullopt;
    cur = *r;
  }
  return cur;
}

// simultaneous substitution: position j receives bool table subst[j] if set
inline Table table_vector_compose(
    const Table& t, const std::vector<std::optional<Table>>& subst) {
  Table r{t.nvars, {}};
  r.v.resize(t.v.size());
  for (size_t i = 0; i < t.v.size(); i++) {
    size_t src = i;
    for (uint32_t j = 0; j < t.nvars; j++) {
      if (!subst[j]) continue;
      bool bit = subst[j]->v[i].value != 0;
      src = bit ? (src | (size_t(1) << j)) : (src & ~(size_t(1) << j));
    }
    r.v[i] = t.v[src];
  }
  return r;
}

inline Terminal table_eval(const Table& t, size_t idx) { return t.v[idx]; }

inline uint64_t table_sat_count(const Table& t) {
  uint64_t n = 0;
  for (auto& x : t.v)
    if (!x.is_inf && x.value == 1) n++;
  return n;
}

// assignment vector for Manager::eval from a table row index
inline std::vector<int8_t> row_assignment(const Manager& m,
                                          const std::vector<VarId>& vars,
                                          uint32_t nvars, size_t idx) {
  std::vector<int8_t> asg(m.var_count(), -1);
  for (uint32_t j = 0; j < nvars; j++) asg[vars[j]] = (idx >> j) & 1;
  return asg;
}

// ---- random temporal formulas and traces ----

inline symsynth::ltlf::Ptr random_formula(
    Rng& rng, const std::vector<std::string>& pool, int depth) {
  using namespace symsynth::ltlf;
  auto leaf = [&]() -> Ptr {
    std::uniform_int_distribution<int> d(0, 9);
    int r = d(rng);
    if (r == 0) return mk_true();
    if (r == 1) return mk_false();
    std::uniform_int_distribution<size_t> p(0, pool.size() - 1);
    return mk_atom(pool[p(rng)]);
  };
  if (depth <= 0) return leaf();
  std::uniform_int_distribution<int> d(0, 7);
  switch (d(rng)) {
    case 0:
      return leaf();
    case 1:
      return mk_not(random_formula(rng, pool, depth - 1));
    case 2:
      return mk_and({random_formula(rng, pool, depth - 1),
                     random_formula(rng, pool, depth - 1)});
    case 3:
      return mk_or({random_formula(rng, pool, depth - 1),
                    random_formula(rng, pool, depth - 1)});
    case 4:
      return mk_next(random_formula(rng, pool, depth - 1));
    case 5:
      return mk_until(random_formula(rng, pool, depth - 1),
                      random_formula(rng, pool, depth - 1));
    case 6:
      return mk_eventually(random_formula(rng, pool, depth - 1));
    default:
      return mk_always(random_formula(rng, pool, depth - 1));
  }
}

inline symsynth::ltlf::Letter random_letter(
    Rng& rng, const std::vector<std::string>& pool) {
  symsynth::ltlf::Letter l;
  for (auto& a : pool)
    if (rng() & 1) l.insert(a);
  return l;
}

inline symsynth::ltlf::Trace random_trace(
    Rng& rng, const std::vector<std::string>& pool, size_t max_len) {
  std::uniform_int_distribution<size_t> ld(0, max_len);
  symsynth::ltlf::Trace tr(ld(rng));
  for (auto& l : tr) l = random_letter(rng, pool);
  return tr;
}

}  // namespace testsupport
