#pragma once

#include <cassert>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "distance.hpp"

namespace termlim {

/// First-order term: a variable leaf or an application f(t1,...,tn).
/// Constants are 0-ary applications. Nodes are immutable and shared, so
/// copies are cheap and terms are safe to read from any thread.
class Term {
public:
    static Term var(std::string name) {
        return Term(std::make_shared<const Node>(Node{true, std::move(name), {}, 1}));
    }

    static Term app(std::string head, std::vector<Term> args = {}) {
        std::uint64_t d = 0;
        for (const Term& a : args) d = std::max(d, a.depth());
        return Term(std::make_shared<const Node>(Node{false, std::move(head), std::move(args), d + 1}));
    }

    bool is_var() const { return node_->is_var; }
    bool is_app() const { return !node_->is_var; }

    /// Variable name or application head symbol.
    const std::string& symbol() const { return node_->sym; }

    const std::vector<Term>& args() const { return node_->args; }
    std::size_t arity() const { return node_->args.size(); }

    /// Leaves (variables and constants) have depth 1.
    std::uint64_t depth() const { return node_->depth; }

    bool is_ground() const {
        if (is_var()) return false;
        for (const Term& a : args())
            if (!a.is_ground()) return false;
        return true;
    }

    std::string str() const {
        std::string out;
        print(out);
        return out;
    }

    friend bool operator==(const Term& a, const Term& b) {
        if (a.node_ == b.node_) return true;
        if (a.is_var() != b.is_var() || a.symbol() != b.symbol()) return false;
        if (a.arity() != b.arity()) return false;
        for (std::size_t i = 0; i < a.arity(); ++i)
            if (!(a.args()[i] == b.args()[i])) return false;
        return true;
    }
    friend bool operator!=(const Term& a, const Term& b) { return !(a == b); }

    /// Three-way order. For symbols over [A-Za-z0-9_] this coincides with
    /// lexicographic order of the rendered strings, which is what all
    /// serialized listings sort by.
    static int compare(const Term& a, const Term& b) {
        if (a.node_ == b.node_) return 0;
        if (int c = a.symbol().compare(b.symbol()); c != 0) return c < 0 ? -1 : 1;
        if (a.is_var() != b.is_var()) return a.is_var() ? -1 : 1;
        std::size_t n = std::min(a.arity(), b.arity());
        for (std::size_t i = 0; i < n; ++i)
            if (int c = compare(a.args()[i], b.args()[i]); c != 0) return c;
        if (a.arity() != b.arity()) return a.arity() < b.arity() ? -1 : 1;
        return 0;
    }

    friend bool operator<(const Term& a, const Term& b) { return compare(a, b) < 0; }

private:
    struct Node {
        bool is_var;
        std::string sym;
        std::vector<Term> args;
        std::uint64_t depth;
    };

    explicit Term(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

    void print(std::string& out) const {
        out += symbol();
        if (!node_->args.empty()) {
            out += '(';
            for (std::size_t i = 0; i < node_->args.size(); ++i) {
                if (i) out += ',';
                node_->args[i].print(out);
            }
            out += ')';
        }
    }

    std::shared_ptr<const Node> node_;
};

/// Atom p(t1,...,tn). Predicate symbols live in a lexical class of their
/// own, disjoint from function symbols and variables.
class Atom {
public:
    explicit Atom(std::string pred, std::vector<Term> args = {})
        : pred_(std::move(pred)), args_(std::move(args)) {}

    const std::string& predicate() const { return pred_; }
    const std::vector<Term>& args() const { return args_; }
    std::size_t arity() const { return args_.size(); }

    /// Depth of the deepest argument term; 0 for a 0-ary atom. Depth
    /// bounds on interpretations are stated against this value.
    std::uint64_t depth() const {
        std::uint64_t d = 0;
        for (const Term& t : args_) d = std::max(d, t.depth());
        return d;
    }

    bool is_ground() const {
        for (const Term& t : args_)
            if (!t.is_ground()) return false;
        return true;
    }

    std::string str() const {
        std::string out = pred_;
        if (!args_.empty()) {
            out += '(';
            for (std::size_t i = 0; i < args_.size(); ++i) {
                if (i) out += ',';
                out += args_[i].str();
            }
            out += ')';
        }
        return out;
    }

    static int compare(const Atom& a, const Atom& b) {
        if (int c = a.pred_.compare(b.pred_); c != 0) return c < 0 ? -1 : 1;
        std::size_t n = std::min(a.arity(), b.arity());
        for (std::size_t i = 0; i < n; ++i)
            if (int c = Term::compare(a.args_[i], b.args_[i]); c != 0) return c;
        if (a.arity() != b.arity()) return a.arity() < b.arity() ? -1 : 1;
        return 0;
    }

    friend bool operator==(const Atom& a, const Atom& b) { return compare(a, b) == 0; }
    friend bool operator!=(const Atom& a, const Atom& b) { return compare(a, b) != 0; }
    friend bool operator<(const Atom& a, const Atom& b) { return compare(a, b) < 0; }

private:
    std::string pred_;
    std::vector<Term> args_;
};

/// Finite map from variable names to terms. Identity bindings are dropped
/// on insertion, so the domain never contains x -> x.
class Substitution {
public:
    Substitution() = default;
    Substitution(std::initializer_list<std::pair<std::string, Term>> items) {
        for (auto& [v, t] : items) bind(v, t);
    }

    void bind(const std::string& var, Term value) {
        if (value.is_var() && value.symbol() == var) {
            bindings_.erase(var);
            return;
        }
        bindings_.insert_or_assign(var, std::move(value));
    }

    const Term* lookup(const std::string& var) const {
        auto it = bindings_.find(var);
        return it == bindings_.end() ? nullptr : &it->second;
    }

    bool empty() const { return bindings_.empty(); }
    std::size_t size() const { return bindings_.size(); }
    const std::map<std::string, Term>& bindings() const { return bindings_; }

private:
    std::map<std::string, Term> bindings_;
};

struct SignatureError : std::runtime_error {
    explicit SignatureError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Session-wide symbol table. Each function or predicate symbol has exactly
/// one arity, and the two classes are disjoint.
class Signature {
public:
    void add_function(const std::string& sym, std::size_t arity) {
        if (preds_.count(sym))
            throw SignatureError("symbol '" + sym + "' already used as a predicate");
        auto [it, fresh] = funcs_.emplace(sym, arity);
        if (!fresh && it->second != arity)
            throw SignatureError("arity conflict for '" + sym + "': " +
                                 std::to_string(it->second) + " vs " + std::to_string(arity));
    }

    void add_predicate(const std::string& sym, std::size_t arity) {
        if (funcs_.count(sym))
            throw SignatureError("symbol '" + sym + "' already used as a function");
        auto [it, fresh] = preds_.emplace(sym, arity);
        if (!fresh && it->second != arity)
            throw SignatureError("arity conflict for predicate '" + sym + "': " +
                                 std::to_string(it->second) + " vs " + std::to_string(arity));
    }

    std::optional<std::size_t> function_arity(const std::string& sym) const {
        auto it = funcs_.find(sym);
        if (it == funcs_.end()) return std::nullopt;
        return it->second;
    }

    std::optional<std::size_t> predicate_arity(const std::string& sym) const {
        auto it = preds_.find(sym);
        if (it == preds_.end()) return std::nullopt;
        return it->second;
    }

    const std::map<std::string, std::size_t>& functions() const { return funcs_; }
    const std::map<std::string, std::size_t>& predicates() const { return preds_; }

    /// Registers every function symbol occurring in t.
    void observe_term(const Term& t) {
        if (t.is_var()) return;
        add_function(t.symbol(), t.arity());
        for (const Term& a : t.args()) observe_term(a);
    }

    void observe_atom(const Atom& a) {
        add_predicate(a.predicate(), a.arity());
        for (const Term& t : a.args()) observe_term(t);
    }

    void merge(const Signature& other) {
        for (auto& [s, n] : other.funcs_) add_function(s, n);
        for (auto& [s, n] : other.preds_) add_predicate(s, n);
    }

private:
    std::map<std::string, std::size_t> funcs_;
    std::map<std::string, std::size_t> preds_;
};

inline std::uint64_t depth(const Term& t) { return t.depth(); }

/// Tree ultrametric. Roots that differ in symbol, arity, or kind are at
/// distance 1; equal roots recurse with D -> D/(D+1) on the child maximum.
/// Distinct variables, and a variable against any application, count as
/// differing roots.
inline Distance distance(const Term& s, const Term& t) {
    if (s.is_var() || t.is_var()) {
        if (s.is_var() && t.is_var() && s.symbol() == t.symbol()) return Distance::zero();
        return Distance::recip(1);
    }
    if (s.symbol() != t.symbol() || s.arity() != t.arity()) return Distance::recip(1);
    Distance worst = Distance::zero();
    for (std::size_t i = 0; i < s.arity(); ++i)
        worst = max(worst, distance(s.args()[i], t.args()[i]));
    return worst.wrapped();
}

/// True iff the trees of s and t coincide on every node at depth <= m.
/// Equivalent to distance(s,t) being zero or at most 1/(m+1).
inline bool same_to_depth(const Term& s, const Term& t, std::uint64_t m) {
    if (m == 0) return true;
    if (s.is_var() || t.is_var()) return s == t;
    if (s.symbol() != t.symbol() || s.arity() != t.arity()) return false;
    for (std::size_t i = 0; i < s.arity(); ++i)
        if (!same_to_depth(s.args()[i], t.args()[i], m - 1)) return false;
    return true;
}

/// Simultaneous replacement of bound variables.
inline Term apply_substitution(const Term& t, const Substitution& theta) {
    if (t.is_var()) {
        if (const Term* v = theta.lookup(t.symbol())) return *v;
        return t;
    }
    if (theta.empty()) return t;
    std::vector<Term> args;
    args.reserve(t.arity());
    for (const Term& a : t.args()) args.push_back(apply_substitution(a, theta));
    return Term::app(t.symbol(), std::move(args));
}

inline Atom apply_substitution(const Atom& a, const Substitution& theta) {
    std::vector<Term> args;
    args.reserve(a.arity());
    for (const Term& t : a.args()) args.push_back(apply_substitution(t, theta));
    return Atom(a.predicate(), std::move(args));
}

/// Least depth offset below the root at which variable x occurs; for
/// t = f(x) this is 1, for t = x it is 0. Empty when x does not occur.
inline std::optional<std::uint64_t> least_var_depth(const Term& t, const std::string& x) {
    if (t.is_var()) {
        if (t.symbol() == x) return 0;
        return std::nullopt;
    }
    std::optional<std::uint64_t> best;
    for (const Term& a : t.args())
        if (auto d = least_var_depth(a, x))
            if (!best || *d + 1 < *best) best = *d + 1;
    return best;
}

/// Ultrametric on atoms: the predicate symbol acts as a root head.
inline Distance atom_distance(const Atom& p, const Atom& q) {
    if (p.predicate() != q.predicate() || p.arity() != q.arity()) return Distance::recip(1);
    Distance worst = Distance::zero();
    for (std::size_t i = 0; i < p.arity(); ++i)
        worst = max(worst, distance(p.args()[i], q.args()[i]));
    return worst.wrapped();
}

/// All distinct variable names occurring in t, sorted.
inline void collect_vars(const Term& t, std::set<std::string>& out) {
    if (t.is_var()) {
        out.insert(t.symbol());
        return;
    }
    for (const Term& a : t.args()) collect_vars(a, out);
}

inline void collect_vars(const Atom& a, std::set<std::string>& out) {
    for (const Term& t : a.args()) collect_vars(t, out);
}

} // namespace termlim
