#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "parse.hpp"
#include "term.hpp"

namespace termlim {

/// Horn clause: one head atom, a possibly empty body (a fact).
struct Clause {
    Atom head;
    std::vector<Atom> body;

    bool is_fact() const { return body.empty(); }

    std::string str() const {
        std::string out = head.str();
        if (!body.empty()) {
            out += " :- ";
            for (std::size_t i = 0; i < body.size(); ++i) {
                if (i) out += ", ";
                out += body[i].str();
            }
        }
        out += '.';
        return out;
    }

    static int compare(const Clause& a, const Clause& b) {
        if (int c = Atom::compare(a.head, b.head); c != 0) return c;
        std::size_t n = std::min(a.body.size(), b.body.size());
        for (std::size_t i = 0; i < n; ++i)
            if (int c = Atom::compare(a.body[i], b.body[i]); c != 0) return c;
        if (a.body.size() != b.body.size()) return a.body.size() < b.body.size() ? -1 : 1;
        return 0;
    }
    friend bool operator==(const Clause& a, const Clause& b) { return compare(a, b) == 0; }
    friend bool operator!=(const Clause& a, const Clause& b) { return compare(a, b) != 0; }
    friend bool operator<(const Clause& a, const Clause& b) { return compare(a, b) < 0; }
};

struct Program {
    std::vector<Clause> clauses;
    Signature signature;

    std::string str() const {
        std::string out;
        for (const Clause& c : clauses) {
            out += c.str();
            out += '\n';
        }
        return out;
    }
};

inline Program parse_program(std::string_view text) {
    ParsedFamily parsed = Parser::parse_clauses(text, false);
    Program p;
    p.signature = parsed.signature;
    for (const ClauseTemplate& ct : parsed.clauses) {
        Clause c{ct.head.instantiate(std::nullopt), {}};
        for (const AtomTemplate& a : ct.body) c.body.push_back(a.instantiate(std::nullopt));
        p.clauses.push_back(std::move(c));
    }
    return p;
}

/// Depth-truncated Herbrand interpretation: a finite set of ground atoms
/// whose argument terms stay within the depth bound.
class Interpretation {
public:
    explicit Interpretation(std::uint64_t depth_bound) : bound_(depth_bound) {}
    Interpretation(std::set<Atom> atoms, std::uint64_t depth_bound)
        : atoms_(std::move(atoms)), bound_(depth_bound) {
        for (const Atom& a : atoms_) assert(a.is_ground() && a.depth() <= bound_);
    }

    bool insert(const Atom& a) {
        assert(a.is_ground() && a.depth() <= bound_);
        return atoms_.insert(a).second;
    }

    bool contains(const Atom& a) const { return atoms_.count(a) > 0; }
    std::size_t size() const { return atoms_.size(); }
    bool empty() const { return atoms_.empty(); }
    const std::set<Atom>& atoms() const { return atoms_; }
    std::uint64_t depth_bound() const { return bound_; }

    bool subset_of(const Interpretation& other) const {
        for (const Atom& a : atoms_)
            if (!other.contains(a)) return false;
        return true;
    }

    /// One atom per line, sorted lexicographically.
    std::string str() const {
        std::string out;
        for (const Atom& a : atoms_) {
            out += a.str();
            out += '\n';
        }
        return out;
    }

    friend bool operator==(const Interpretation& a, const Interpretation& b) {
        return a.atoms_ == b.atoms_;
    }
    friend bool operator!=(const Interpretation& a, const Interpretation& b) { return !(a == b); }

private:
    std::set<Atom> atoms_;
    std::uint64_t bound_;
};

/// Ground terms over the signature up to the depth bound, breadth-first by
/// depth, lexicographic within a depth layer.
inline std::vector<Term> herbrand_universe(const Signature& sig, std::uint64_t depth_bound) {
    constexpr std::size_t kMaxUniverse = 1u << 21;
    std::vector<Term> out;
    std::set<Term> seen;
    for (std::uint64_t d = 1; d <= depth_bound; ++d) {
        std::set<Term> layer;
        if (d == 1) {
            for (const auto& [sym, arity] : sig.functions())
                if (arity == 0) layer.insert(Term::app(sym));
        } else if (!out.empty()) {
            // one fresh application over everything already produced
            for (const auto& [sym, arity] : sig.functions()) {
                if (arity == 0) continue;
                std::vector<std::size_t> idx(arity, 0);
                for (;;) {
                    std::vector<Term> args;
                    args.reserve(arity);
                    for (std::size_t i = 0; i < arity; ++i) args.push_back(out[idx[i]]);
                    Term t = Term::app(sym, std::move(args));
                    if (t.depth() == d) layer.insert(t);
                    std::size_t i = 0;
                    for (; i < arity; ++i) {
                        if (++idx[i] < out.size()) break;
                        idx[i] = 0;
                    }
                    if (i == arity) break;
                }
            }
        }
        for (const Term& t : layer)
            if (seen.insert(t).second) out.push_back(t);
        if (out.size() > kMaxUniverse)
            throw std::runtime_error("herbrand universe exceeds " + std::to_string(kMaxUniverse) +
                                     " terms at depth " + std::to_string(d));
    }
    return out;
}

/// Ground atoms over the signature whose arguments stay within the bound.
inline std::vector<Atom> herbrand_base(const Signature& sig, std::uint64_t depth_bound) {
    std::vector<Term> universe = herbrand_universe(sig, depth_bound);
    std::vector<Atom> out;
    for (const auto& [pred, arity] : sig.predicates()) {
        if (arity == 0) {
            out.push_back(Atom(pred));
            continue;
        }
        if (universe.empty()) continue;
        std::vector<std::size_t> idx(arity, 0);
        for (;;) {
            std::vector<Term> args;
            args.reserve(arity);
            for (std::size_t i = 0; i < arity; ++i) args.push_back(universe[idx[i]]);
            out.push_back(Atom(pred, std::move(args)));
            std::size_t i = 0;
            for (; i < arity; ++i) {
                if (++idx[i] < universe.size()) break;
                idx[i] = 0;
            }
            if (i == arity) break;
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

namespace detail {

inline void collect_clause_vars(const Clause& c, std::set<std::string>& vars) {
    collect_vars(c.head, vars);
    for (const Atom& a : c.body) collect_vars(a, vars);
}

/// Calls fn once per assignment of the given variables to universe terms.
template <class Fn>
void for_each_ground_substitution(const std::vector<std::string>& vars,
                                  const std::vector<Term>& universe, Fn&& fn) {
    if (vars.empty()) {
        fn(Substitution{});
        return;
    }
    if (universe.empty()) return;
    std::vector<std::size_t> idx(vars.size(), 0);
    for (;;) {
        Substitution theta;
        for (std::size_t i = 0; i < vars.size(); ++i) theta.bind(vars[i], universe[idx[i]]);
        fn(theta);
        std::size_t i = 0;
        for (; i < vars.size(); ++i) {
            if (++idx[i] < universe.size()) break;
            idx[i] = 0;
        }
        if (i == vars.size()) break;
    }
}

} // namespace detail

struct TpResult {
    Interpretation next;
    std::size_t overflow; // distinct derivable heads dropped for exceeding the depth bound
};

/// One application of the immediate-consequence operator: all ground head
/// instances whose instantiated bodies are contained in the input, with
/// substitutions ranging over the depth-bounded Herbrand universe.
inline TpResult tp_step(const Program& prog, const Interpretation& interp) {
    std::vector<Term> universe = herbrand_universe(prog.signature, interp.depth_bound());
    Interpretation next(interp.depth_bound());
    std::set<Atom> dropped;
    for (const Clause& c : prog.clauses) {
        std::set<std::string> var_set;
        detail::collect_clause_vars(c, var_set);
        std::vector<std::string> vars(var_set.begin(), var_set.end());
        detail::for_each_ground_substitution(vars, universe, [&](const Substitution& theta) {
            for (const Atom& b : c.body)
                if (!interp.contains(apply_substitution(b, theta))) return;
            Atom head = apply_substitution(c.head, theta);
            if (head.depth() <= interp.depth_bound())
                next.insert(head);
            else
                dropped.insert(head);
        });
    }
    return {std::move(next), dropped.size()};
}

struct LeastModelResult {
    Interpretation model;
    bool fixpoint;      // false when the step bound ran out first
    std::size_t steps;  // applications of the consequence operator performed
    std::size_t overflow;
};

/// Iterates the consequence operator from the empty interpretation until a
/// fixpoint within the depth bound, or until the step bound is exhausted.
inline LeastModelResult least_model(const Program& prog, std::uint64_t depth_bound,
                                    std::uint64_t step_bound) {
    assert(depth_bound >= 1 && step_bound >= 1);
    Interpretation current(depth_bound);
    std::size_t overflow = 0;
    for (std::uint64_t step = 1; step <= step_bound; ++step) {
        TpResult r = tp_step(prog, current);
        overflow = r.overflow;
        if (r.next == current) return {std::move(current), true, step, overflow};
        current = std::move(r.next);
    }
    return {std::move(current), false, step_bound, overflow};
}

struct SatisfiesResult {
    bool holds;
    std::optional<std::string> counterexample; // violated ground clause instance
};

/// Model check: every ground clause instance with body inside the
/// interpretation must have its head inside too. Head instances deeper
/// than the depth bound are vacuously satisfied, so truncation cannot
/// manufacture counterexamples.
inline SatisfiesResult satisfies(const Interpretation& interp, const Program& prog) {
    Signature sig = prog.signature;
    for (const Atom& a : interp.atoms()) {
        sig.add_predicate(a.predicate(), a.arity());
        for (const Term& t : a.args()) sig.observe_term(t);
    }
    std::vector<Term> universe = herbrand_universe(sig, interp.depth_bound());
    for (const Clause& c : prog.clauses) {
        std::set<std::string> var_set;
        detail::collect_clause_vars(c, var_set);
        std::vector<std::string> vars(var_set.begin(), var_set.end());
        std::optional<std::string> bad;
        detail::for_each_ground_substitution(vars, universe, [&](const Substitution& theta) {
            if (bad) return;
            for (const Atom& b : c.body)
                if (!interp.contains(apply_substitution(b, theta))) return;
            Atom head = apply_substitution(c.head, theta);
            if (head.depth() > interp.depth_bound()) return;
            if (!interp.contains(head)) {
                Clause ground{head, {}};
                for (const Atom& b : c.body) ground.body.push_back(apply_substitution(b, theta));
                bad = ground.str();
            }
        });
        if (bad) return {false, bad};
    }
    return {true, std::nullopt};
}

struct BodySubtermReport {
    bool holds;
    std::vector<Clause> offenders;
};

namespace detail {

inline void collect_subterms(const Term& t, std::set<Term>& out) {
    out.insert(t);
    for (const Term& a : t.args()) collect_subterms(a, out);
}

} // namespace detail

/// Checks that every term occurring in a clause body also occurs as a
/// subterm of some head argument; variables count as terms. This is the
/// hypothesis under which clause application is non-expansive.
inline BodySubtermReport validate_body_subterm_property(const Program& prog) {
    BodySubtermReport report{true, {}};
    for (const Clause& c : prog.clauses) {
        std::set<Term> head_terms;
        for (const Term& t : c.head.args()) detail::collect_subterms(t, head_terms);
        bool ok = true;
        for (const Atom& b : c.body) {
            std::set<Term> body_terms;
            for (const Term& t : b.args()) detail::collect_subterms(t, body_terms);
            for (const Term& t : body_terms)
                if (!head_terms.count(t)) {
                    ok = false;
                    break;
                }
            if (!ok) break;
        }
        if (!ok) {
            report.holds = false;
            report.offenders.push_back(c);
        }
    }
    return report;
}

} // namespace termlim
