#pragma once

// Test-only oracles and generators. Everything here is independent of the
// implementation paths it is used to check: the reference distance goes
// through the coincidence depth of the two trees rather than the metric
// recursion, and the generators build their invariants by construction.

#include "termlim/termlim.hpp"

#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

namespace testutil {

using namespace termlim;

inline Signature abfg_signature() {
    Signature sig;
    sig.add_function("a", 0);
    sig.add_function("b", 0);
    sig.add_function("f", 1);
    sig.add_function("g", 2);
    return sig;
}

/// Every ground term of depth <= bound over {a/0, b/0, f/1, g/2}.
inline std::vector<Term> enumerate_terms(std::uint64_t bound) {
    return herbrand_universe(abfg_signature(), bound);
}

/// Greatest depth to which two trees coincide; "infinite" for equal terms.
inline std::uint64_t coincide_depth(const Term& s, const Term& t) {
    constexpr std::uint64_t kInf = std::numeric_limits<std::uint64_t>::max() / 2;
    if (s == t) return kInf;
    if (s.is_var() != t.is_var() || s.symbol() != t.symbol() || s.arity() != t.arity()) return 0;
    std::uint64_t worst = kInf;
    for (std::size_t i = 0; i < s.arity(); ++i)
        worst = std::min(worst, coincide_depth(s.args()[i], t.args()[i]));
    return worst + 1;
}

/// Reference metric: 1/(d+1) where d is the coincidence depth.
inline Distance ref_distance(const Term& s, const Term& t) {
    if (s == t) return Distance::zero();
    return Distance::recip(coincide_depth(s, t) + 1);
}

inline std::uint64_t pick(std::mt19937_64& rng, std::uint64_t n) { return rng() % n; }

/// Random ground term over {a/0, b/0, f/1, g/2} of depth <= budget.
inline Term random_ground(std::mt19937_64& rng, std::uint64_t budget) {
    if (budget <= 1) return Term::app(pick(rng, 2) ? "a" : "b");
    switch (pick(rng, 4)) {
    case 0: return Term::app("a");
    case 1: return Term::app("b");
    case 2: return Term::app("f", {random_ground(rng, budget - 1)});
    default:
        return Term::app("g", {random_ground(rng, budget - 1), random_ground(rng, budget - 1)});
    }
}

/// Random term template over the same signature with X leaves; retries
/// until X actually occurs.
inline Term random_template(std::mt19937_64& rng, std::uint64_t budget) {
    struct Build {
        std::mt19937_64& rng;
        Term operator()(std::uint64_t depth_left) {
            if (depth_left <= 1) {
                switch (pick(rng, 3)) {
                case 0: return Term::app("a");
                case 1: return Term::app("b");
                default: return Term::var("X");
                }
            }
            switch (pick(rng, 5)) {
            case 0: return Term::app("a");
            case 1: return Term::var("X");
            case 2: return Term::app("f", {(*this)(depth_left - 1)});
            default: return Term::app("g", {(*this)(depth_left - 1), (*this)(depth_left - 1)});
            }
        }
    };
    Build build{rng};
    for (;;) {
        Term t = build(budget);
        if (least_var_depth(t, "X")) return t;
    }
}

/// Clause generator for the non-expansiveness law: the head embeds every
/// body argument verbatim (optionally under one extra wrap), so every body
/// term occurs in the head at the same depth or deeper and the
/// body-subterm hypothesis holds by construction.
inline Clause random_lipschitz_clause(std::mt19937_64& rng) {
    std::size_t body_atoms = 1 + pick(rng, 2);
    std::vector<Atom> body;
    std::vector<Term> head_args;
    for (std::size_t i = 0; i < body_atoms; ++i) {
        Term arg = random_template(rng, 1 + pick(rng, 3));
        body.push_back(Atom(pick(rng, 2) ? "q" : "r", {arg}));
        head_args.push_back(pick(rng, 2) ? Term::app("f", {arg}) : arg);
    }
    if (pick(rng, 2)) head_args.push_back(random_ground(rng, 2));
    return Clause{Atom("p", std::move(head_args)), std::move(body)};
}

/// Random program over constants {a,b}, f/1 and predicates {p,q}: a few
/// ground facts plus rules from a small pool. The signature is pinned so
/// the depth-3 ground base always has exactly 12 atoms.
inline Program random_horn_program(std::mt19937_64& rng) {
    static const std::vector<std::string> rules = {
        "p(f(X)) :- p(X).", "q(X) :- p(X).", "p(X) :- q(X).",
        "q(f(X)) :- q(X), p(X).", "p(a) :- q(b).",
    };
    std::string text;
    for (const std::string& r : rules)
        if (pick(rng, 2)) text += r + "\n";
    const char* facts[] = {"p(a).", "p(b).", "q(a).", "q(b).", "p(f(a)).", "q(f(b))."};
    for (const char* f : facts)
        if (pick(rng, 3) == 0) text += std::string(f) + "\n";
    if (text.empty()) text = "p(a).\n";
    Program prog = parse_program(text);
    prog.signature.add_function("a", 0);
    prog.signature.add_function("b", 0);
    prog.signature.add_function("f", 1);
    prog.signature.add_predicate("p", 1);
    prog.signature.add_predicate("q", 1);
    return prog;
}

/// Brute-force least model: enumerate every subset of the ground base as a
/// bitmask, keep those closed under all ground clause instances (heads
/// beyond the depth bound are exempt), and intersect. Independent of the
/// fixpoint iteration it is used to check.
inline std::set<Atom> brute_force_least(const Program& prog, std::uint64_t depth_bound) {
    std::vector<Atom> base = herbrand_base(prog.signature, depth_bound);
    if (base.size() > 20) throw std::runtime_error("ground base too large for brute force");
    std::vector<Term> universe = herbrand_universe(prog.signature, depth_bound);
    auto index_of = [&](const Atom& a) {
        auto it = std::lower_bound(base.begin(), base.end(), a);
        return static_cast<std::uint32_t>(it - base.begin());
    };

    struct GroundClause {
        std::uint32_t body = 0;
        std::int32_t head = -1;
    };
    std::vector<GroundClause> ground;
    for (const Clause& c : prog.clauses) {
        std::set<std::string> var_set;
        collect_vars(c.head, var_set);
        for (const Atom& b : c.body) collect_vars(b, var_set);
        std::vector<std::string> vars(var_set.begin(), var_set.end());
        std::vector<std::size_t> idx(vars.size(), 0);
        for (;;) {
            Substitution theta;
            for (std::size_t i = 0; i < vars.size(); ++i) theta.bind(vars[i], universe[idx[i]]);
            GroundClause gc;
            for (const Atom& b : c.body) gc.body |= 1u << index_of(apply_substitution(b, theta));
            Atom head = apply_substitution(c.head, theta);
            if (head.depth() <= depth_bound) gc.head = static_cast<std::int32_t>(index_of(head));
            ground.push_back(gc);
            std::size_t i = 0;
            for (; i < vars.size(); ++i) {
                if (++idx[i] < universe.size()) break;
                idx[i] = 0;
            }
            if (vars.empty() || i == vars.size()) break;
        }
    }

    std::uint32_t intersection = (1u << base.size()) - 1;
    for (std::uint32_t mask = 0; mask < (1u << base.size()); ++mask) {
        bool closed = true;
        for (const GroundClause& gc : ground) {
            if ((gc.body & mask) != gc.body) continue;
            if (gc.head >= 0 && !(mask & (1u << gc.head))) {
                closed = false;
                break;
            }
        }
        if (closed) intersection &= mask;
    }

    std::set<Atom> out;
    for (std::size_t i = 0; i < base.size(); ++i)
        if (intersection & (1u << i)) out.insert(base[i]);
    return out;
}

/// Family generator for the end-to-end convergence criterion: a sampled
/// index-free rule set (each rule valid for the body-subterm hypothesis,
/// with at most one head wrap so depth truncation stays below the asserted
/// precision) plus the moving fact stream p(iter(f, @k, a)).
inline ProgramFamily random_convergent_family(std::mt19937_64& rng) {
    static const std::vector<std::string> pool = {
        "p(f(X)) :- p(X).",
        "q(X) :- p(X).",
        "q(f(X)) :- p(X).",
        "q(f(X)) :- q(X).",
        "r(X) :- q(X), p(X).",
        "r(a).",
    };
    std::string text;
    for (const std::string& rule : pool)
        if (pick(rng, 2)) text += rule + "\n";
    text += "p(iter(f, @k, a)).\n";
    return parse_family(text);
}

} // namespace testutil
