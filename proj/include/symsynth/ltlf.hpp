#pragma once

// Finite-trace linear temporal logic: parser, trace evaluation, formula
// progression, and translation to a minimal deterministic automaton whose
// states are progression residues deduplicated by propositional fingerprint.

#include "dd.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

namespace symsynth::ltlf {

struct LtlfError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Kind { True, False, Atom, Not, And, Or, Next, Until };

struct Formula;
using Ptr = std::shared_ptr<const Formula>;

struct Formula {
  Kind kind;
  std::string atom;       // Atom only
  std::vector<Ptr> kids;  // Not/Next: 1, Until: 2, And/Or: 2+
};

using Letter = std::set<std::string>;
using Trace = std::vector<Letter>;

// structural total order; 0 means structurally equal
inline int cmp(const Ptr& a, const Ptr& b) {
  if (a == b) return 0;
  if (a->kind != b->kind) return a->kind < b->kind ? -1 : 1;
  if (a->kind == Kind::Atom) {
    int r = a->atom.compare(b->atom);
    return r < 0 ? -1 : r > 0 ? 1 : 0;
  }
  if (a->kids.size() != b->kids.size())
    return a->kids.size() < b->kids.size() ? -1 : 1;
  for (size_t k = 0; k < a->kids.size(); k++) {
    int r = cmp(a->kids[k], b->kids[k]);
    if (r) return r;
  }
  return 0;
}

struct StructLess {
  bool operator()(const Ptr& a, const Ptr& b) const { return cmp(a, b) < 0; }
};

inline Ptr mk_true() {
  static const Ptr t = std::make_shared<Formula>(Formula{Kind::True, {}, {}});
  return t;
}

inline Ptr mk_false() {
  static const Ptr f = std::make_shared<Formula>(Formula{Kind::False, {}, {}});
  return f;
}

inline bool valid_atom_name(const std::string& s) {
  if (s.empty()) return false;
  if (!(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_'))
    return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == ','))
      return false;
  return true;
}

inline Ptr mk_atom(const std::string& name) {
  if (!valid_atom_name(name)) throw LtlfError("bad atom name: " + name);
  return std::make_shared<Formula>(Formula{Kind::Atom, name, {}});
}

inline Ptr mk_not(const Ptr& f);
inline Ptr mk_and(std::vector<Ptr> kids);
inline Ptr mk_or(std::vector<Ptr> kids);

namespace detail {

// flatten, sort, dedup; returns nullopt-style flags via out params
inline Ptr nary(Kind kind, std::vector<Ptr> kids) {
  Kind absorb = kind == Kind::And ? Kind::False : Kind::True;
  Kind neutral = kind == Kind::And ? Kind::True : Kind::False;
  std::vector<Ptr> flat;
  for (auto& k : kids) {
    if (k->kind == kind) {
      flat.insert(flat.end(), k->kids.begin(), k->kids.end());
    } else {
      flat.push_back(k);
    }
  }
  std::vector<Ptr> out;
  for (auto& k : flat) {
    if (k->kind == absorb) return absorb == Kind::False ? mk_false() : mk_true();
    if (k->kind == neutral) continue;
    out.push_back(k);
  }
  std::sort(out.begin(), out.end(), StructLess{});
  out.erase(std::unique(out.begin(), out.end(),
                        [](const Ptr& a, const Ptr& b) { return cmp(a, b) == 0; }),
            out.end());
  for (auto& k : out) {
    if (k->kind != Kind::Not) continue;
    if (std::binary_search(out.begin(), out.end(), k->kids[0], StructLess{}))
      return absorb == Kind::False ? mk_false() : mk_true();
  }
  if (out.empty()) return neutral == Kind::True ? mk_true() : mk_false();
  if (out.size() == 1) return out[0];
  return std::make_shared<Formula>(Formula{kind, {}, std::move(out)});
}

}  // namespace detail

inline Ptr mk_and(std::vector<Ptr> kids) {
  return detail::nary(Kind::And, std::move(kids));
}

inline Ptr mk_or(std::vector<Ptr> kids) {
  return detail::nary(Kind::Or, std::move(kids));
}

// negation stays on atoms and temporal operators, pushes through booleans
inline Ptr mk_not(const Ptr& f) {
  switch (f->kind) {
    case Kind::True:
      return mk_false();
    case Kind::False:
      return mk_true();
    case Kind::Not:
      return f->kids[0];
    case Kind::And: {
      std::vector<Ptr> ks;
      for (auto& k : f->kids) ks.push_back(mk_not(k));
      return mk_or(std::move(ks));
    }
    case Kind::Or: {
      std::vector<Ptr> ks;
      for (auto& k : f->kids) ks.push_back(mk_not(k));
      return mk_and(std::move(ks));
    }
    default:
      return std::make_shared<Formula>(Formula{Kind::Not, {}, {f}});
  }
}

inline Ptr mk_next(const Ptr& f) {
  if (f->kind == Kind::False) return mk_false();
  return std::make_shared<Formula>(Formula{Kind::Next, {}, {f}});
}

inline Ptr mk_until(const Ptr& f, const Ptr& g) {
  if (g->kind == Kind::False) return mk_false();
  if (f->kind == Kind::False) return g;
  if (g->kind == Kind::True && f->kind != Kind::True)
    return mk_until(mk_true(), mk_true());
  return std::make_shared<Formula>(Formula{Kind::Until, {}, {f, g}});
}

// "at least one more position": progression residue of a strict next
inline Ptr alive() { return mk_until(mk_true(), mk_true()); }

inline Ptr mk_eventually(const Ptr& f) { return mk_until(mk_true(), f); }

inline Ptr mk_always(const Ptr& f) {
  return mk_not(mk_until(mk_true(), mk_not(f)));
}

inline std::string to_string(const Ptr& f) {
  switch (f->kind) {
    case Kind::True:
      return "true";
    case Kind::False:
      return "false";
    case Kind::Atom:
      return f->atom;
    case Kind::Not:
      return "!" + to_string(f->kids[0]);
    case Kind::Next:
      return "X(" + to_string(f->kids[0]) + ")";
    case Kind::Until:
      return "(" + to_string(f->kids[0]) + " U " + to_string(f->kids[1]) + ")";
    case Kind::And:
    case Kind::Or: {
      std::string sep = f->kind == Kind::And ? " & " : " | ";
      std::string out = "(";
      for (size_t k = 0; k < f->kids.size(); k++) {
        if (k) out += sep;
        out += to_string(f->kids[k]);
      }
      return out + ")";
    }
  }
  return "?";
}

inline void collect_atoms(const Ptr& f, std::set<std::string>& out) {
  if (f->kind == Kind::Atom) out.insert(f->atom);
  for (auto& k : f->kids) collect_atoms(k, out);
}

inline std::vector<std::string> atoms(const Ptr& f) {
  std::set<std::string> s;
  collect_atoms(f, s);
  return {s.begin(), s.end()};
}

// ---- parsing ----
// precedence, loose to tight: U (right assoc), |, &, unary {!, X, F, G}

namespace detail {

struct Parser {
  const std::string& src;
  size_t pos = 0;

  explicit Parser(const std::string& s) : src(s) {}

  void skip_ws() {
    while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos])))
      pos++;
  }

  [[noreturn]] void fail(const std::string& msg) {
    throw LtlfError(msg + " at offset " + std::to_string(pos));
  }

  bool eat(char c) {
    skip_ws();
    if (pos < src.size() && src[pos] == c) {
      pos++;
      return true;
    }
    return false;
  }

  std::string peek_ident() {
    skip_ws();
    size_t p = pos;
    if (p >= src.size() ||
        !(std::isalpha(static_cast<unsigned char>(src[p])) || src[p] == '_'))
      return {};
    size_t q = p;
    while (q < src.size() &&
           (std::isalnum(static_cast<unsigned char>(src[q])) ||
            src[q] == '_' || src[q] == ','))
      q++;
    return src.substr(p, q - p);
  }

  void take_ident(const std::string& id) { skip_ws(); pos += id.size(); }

  Ptr parse_until() {
    Ptr lhs = parse_or();
    std::string id = peek_ident();
    if (id == "U") {
      take_ident(id);
      return mk_until(lhs, parse_until());
    }
    return lhs;
  }

  Ptr parse_or() {
    Ptr lhs = parse_and();
    while (eat('|')) lhs = mk_or({lhs, parse_and()});
    return lhs;
  }

  Ptr parse_and() {
    Ptr lhs = parse_unary();
    while (eat('&')) lhs = mk_and({lhs, parse_unary()});
    return lhs;
  }

  Ptr parse_unary() {
    if (eat('!')) return mk_not(parse_unary());
    std::string id = peek_ident();
    if (id == "X") {
      take_ident(id);
      return mk_next(parse_unary());
    }
    if (id == "F") {
      take_ident(id);
      return mk_eventually(parse_unary());
    }
    if (id == "G") {
      take_ident(id);
      return mk_always(parse_unary());
    }
    return parse_primary();
  }

  Ptr parse_primary() {
    if (eat('(')) {
      Ptr f = parse_until();
      if (!eat(')')) fail("expected ')'");
      return f;
    }
    std::string id = peek_ident();
    if (id.empty()) fail("expected formula");
    if (id == "U") fail("misplaced 'U'");
    take_ident(id);
    if (id == "true") return mk_true();
    if (id == "false") return mk_false();
    return mk_atom(id);
  }
};

}  // namespace detail

inline Ptr parse_formula(const std::string& s) {
  detail::Parser p(s);
  Ptr f = p.parse_until();
  p.skip_ws();
  if (p.pos != s.size())
    throw LtlfError("trailing input at offset " + std::to_string(p.pos));
  return f;
}

// ---- semantics ----

// acceptance when no positions remain: all obligations are unmet
inline bool final_eval(const Ptr& f) {
  switch (f->kind) {
    case Kind::True:
      return true;
    case Kind::False:
    case Kind::Atom:
    case Kind::Next:
    case Kind::Until:
      return false;
    case Kind::Not:
      return !final_eval(f->kids[0]);
    case Kind::And:
      return std::all_of(f->kids.begin(), f->kids.end(), final_eval);
    case Kind::Or:
      return std::any_of(f->kids.begin(), f->kids.end(), final_eval);
  }
  return false;
}

namespace detail {

inline bool holds(const Ptr& f, const Trace& tr, size_t i) {
  switch (f->kind) {
    case Kind::True:
      return true;
    case Kind::False:
      return false;
    case Kind::Atom:
      return tr[i].count(f->atom) > 0;
    case Kind::Not:
      return !holds(f->kids[0], tr, i);
    case Kind::And:
      for (auto& k : f->kids)
        if (!holds(k, tr, i)) return false;
      return true;
    case Kind::Or:
      for (auto& k : f->kids)
        if (holds(k, tr, i)) return true;
      return false;
    case Kind::Next:
      return i + 1 < tr.size() && holds(f->kids[0], tr, i + 1);
    case Kind::Until:
      for (size_t j = i; j < tr.size(); j++) {
        if (holds(f->kids[1], tr, j)) return true;
        if (!holds(f->kids[0], tr, j)) return false;
      }
      return false;
  }
  return false;
}

}  // namespace detail

// direct positional semantics; the reference the automaton is checked against
inline bool evaluate(const Ptr& f, const Trace& tr) {
  return tr.empty() ? final_eval(f) : detail::holds(f, tr, 0);
}

// one-letter progression: residue that the remaining trace must satisfy
inline Ptr progress(const Ptr& f, const Letter& letter) {
  switch (f->kind) {
    case Kind::True:
    case Kind::False:
      return f;
    case Kind::Atom:
      return letter.count(f->atom) ? mk_true() : mk_false();
    case Kind::Not:
      return mk_not(progress(f->kids[0], letter));
    case Kind::And: {
      std::vector<Ptr> ks;
      for (auto& k : f->kids) ks.push_back(progress(k, letter));
      return mk_and(std::move(ks));
    }
    case Kind::Or: {
      std::vector<Ptr> ks;
      for (auto& k : f->kids) ks.push_back(progress(k, letter));
      return mk_or(std::move(ks));
    }
    case Kind::Next:
      // strict next: some successor position must exist
      return mk_and({f->kids[0], alive()});
    case Kind::Until:
      return mk_or({progress(f->kids[1], letter),
                    mk_and({progress(f->kids[0], letter), f})});
  }
  return mk_false();
}

// ---- deterministic automaton ----

struct Dfa {
  uint32_t n_states = 0;
  uint32_t init = 0;
  std::vector<bool> accepting;
  std::vector<std::string> atoms;            // sorted; letter bit j = atoms[j]
  std::vector<std::vector<uint32_t>> delta;  // [state][letter mask]

  uint32_t step(uint32_t z, uint32_t mask) const { return delta[z][mask]; }

  uint32_t mask_of(const Letter& l) const {
    uint32_t m = 0;
    for (size_t j = 0; j < atoms.size(); j++)
      if (l.count(atoms[j])) m |= uint32_t(1) << j;
    return m;
  }

  bool accepts(const Trace& tr) const {
    uint32_t z = init;
    for (auto& l : tr) z = step(z, mask_of(l));
    return accepting[z];
  }
};

namespace detail {

// propositional fingerprint: atoms and temporal subterms become variables
// in a private manager, interned in first-seen order
struct Fingerprinter {
  dd::Manager mgr;
  std::map<Ptr, dd::VarId, StructLess> leaves;

  dd::Ref fp(const Ptr& f) {
    switch (f->kind) {
      case Kind::True:
        return mgr.one();
      case Kind::False:
        return mgr.zero();
      case Kind::Not:
        return mgr.negate(fp(f->kids[0]));
      case Kind::And: {
        dd::Ref r = mgr.one();
        for (auto& k : f->kids) r = mgr.apply(dd::BinOp::And, r, fp(k));
        return r;
      }
      case Kind::Or: {
        dd::Ref r = mgr.zero();
        for (auto& k : f->kids) r = mgr.apply(dd::BinOp::Or, r, fp(k));
        return r;
      }
      default: {
        auto it = leaves.find(f);
        if (it == leaves.end())
          it = leaves.emplace(f, mgr.new_var()).first;
        return mgr.var(it->second);
      }
    }
  }
};

inline Dfa minimize(const Dfa& in) {
  uint32_t n = in.n_states;
  size_t n_letters = in.delta.empty() ? 0 : in.delta[0].size();
  std::vector<uint32_t> block(n);
  for (uint32_t s = 0; s < n; s++) block[s] = in.accepting[s] ? 1 : 0;
  for (;;) {
    std::map<std::vector<uint32_t>, uint32_t> sig_ids;
    std::vector<uint32_t> next(n);
    for (uint32_t s = 0; s < n; s++) {
      std::vector<uint32_t> sig{block[s]};
      for (size_t l = 0; l < n_letters; l++) sig.push_back(block[in.delta[s][l]]);
      auto it = sig_ids.find(sig);
      if (it == sig_ids.end()) it = sig_ids.emplace(sig, uint32_t(sig_ids.size())).first;
      next[s] = it->second;
    }
    bool changed = false;
    for (uint32_t s = 0; s < n; s++) changed |= next[s] != block[s];
    block = std::move(next);
    if (!changed) break;
  }
  // renumber blocks by their smallest original state, ascending
  std::map<uint32_t, uint32_t> first_of;  // block -> smallest state
  for (uint32_t s = n; s-- > 0;) first_of[block[s]] = s;
  std::vector<std::pair<uint32_t, uint32_t>> order;  // (smallest state, block)
  for (auto& [b, s] : first_of) order.emplace_back(s, b);
  std::sort(order.begin(), order.end());
  std::vector<uint32_t> renum(first_of.size());
  for (uint32_t k = 0; k < order.size(); k++) renum[order[k].second] = k;

  Dfa out;
  out.n_states = uint32_t(order.size());
  out.atoms = in.atoms;
  out.init = renum[block[in.init]];
  out.accepting.assign(out.n_states, false);
  out.delta.assign(out.n_states, std::vector<uint32_t>(n_letters, 0));
  for (uint32_t k = 0; k < order.size(); k++) {
    uint32_t rep = order[k].first;
    out.accepting[k] = in.accepting[rep];
    for (size_t l = 0; l < n_letters; l++)
      out.delta[k][l] = renum[block[in.delta[rep][l]]];
  }
  return out;
}

}  // namespace detail

inline constexpr uint32_t kMaxDfaAtoms = 12;

inline Dfa to_dfa(const Ptr& formula) {
  Dfa dfa;
  dfa.atoms = atoms(formula);
  if (dfa.atoms.size() > kMaxDfaAtoms)
    throw LtlfError("formula has more than " +
                    std::to_string(kMaxDfaAtoms) + " atoms");
  size_t n_letters = size_t(1) << dfa.atoms.size();

  detail::Fingerprinter fpr;
  std::map<uint32_t, uint32_t> state_of;  // fingerprint handle -> state
  std::vector<Ptr> rep;                   // state -> residue formula

  auto intern = [&](const Ptr& f) -> uint32_t {
    dd::Ref h = fpr.fp(f);
    auto it = state_of.find(h.i);
    if (it != state_of.end()) return it->second;
    uint32_t id = uint32_t(rep.size());
    state_of.emplace(h.i, id);
    rep.push_back(f);
    dfa.accepting.push_back(final_eval(f));
    dfa.delta.emplace_back(n_letters, 0);
    return id;
  };

  dfa.init = intern(formula);
  for (uint32_t s = 0; s < rep.size(); s++) {
    Ptr cur = rep[s];
    for (size_t mask = 0; mask < n_letters; mask++) {
      Letter l;
      for (size_t j = 0; j < dfa.atoms.size(); j++)
        if (mask & (size_t(1) << j)) l.insert(dfa.atoms[j]);
      uint32_t t = intern(progress(cur, l));
      dfa.delta[s][mask] = t;
    }
  }
  dfa.n_states = uint32_t(rep.size());
  return detail::minimize(dfa);
}

// ---- symbolic transition encoding ----

struct SymbolicDfa {
  uint32_t z_bits = 0;
  std::vector<dd::Ref> next_bits;  // z' bit functions over (z vars, letter vars)
  dd::Ref accepting;               // over z vars
  dd::Ref valid_codes;             // over z vars
};

// letter_vars[j] carries the truth of dfa.atoms[j]
inline SymbolicDfa encode_dfa(const Dfa& dfa, dd::Manager& m,
                              const std::vector<dd::VarId>& z_vars,
                              const std::vector<dd::VarId>& letter_vars) {
  if (letter_vars.size() != dfa.atoms.size())
    throw LtlfError("encode_dfa: letter variable count mismatch");
  if (z_vars.size() < dd::bits_for(dfa.n_states))
    throw LtlfError("encode_dfa: too few state variables");
  SymbolicDfa out;
  out.z_bits = uint32_t(z_vars.size());
  out.next_bits.assign(z_vars.size(), m.zero());
  out.accepting = m.zero();
  out.valid_codes = m.zero();
  for (uint32_t s = 0; s < dfa.n_states; s++) {
    dd::Ref sc = dd::code_cube(m, z_vars, s);
    out.valid_codes = m.apply(dd::BinOp::Or, out.valid_codes, sc);
    if (dfa.accepting[s])
      out.accepting = m.apply(dd::BinOp::Or, out.accepting, sc);
    for (size_t mask = 0; mask < dfa.delta[s].size(); mask++) {
      dd::Ref lc = dd::code_cube(m, letter_vars, mask);
      dd::Ref edge = m.apply(dd::BinOp::And, sc, lc);
      uint32_t t = dfa.delta[s][mask];
      for (size_t k = 0; k < z_vars.size(); k++)
        if (t & (uint32_t(1) << k))
          out.next_bits[k] = m.apply(dd::BinOp::Or, out.next_bits[k], edge);
    }
  }
  return out;
}

}  // namespace symsynth::ltlf
