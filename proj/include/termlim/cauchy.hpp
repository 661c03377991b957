#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "term.hpp"

namespace termlim {

/// Finite-horizon answer to a convergence question. Cauchy-ness of a
/// black-box stream is not decidable, so every answer names the evidence:
/// a witness index, a violating pair, or an exhausted horizon.
struct Verdict {
    enum class Kind { Converged, Refuted, Unknown };

    Kind kind = Kind::Unknown;
    std::uint64_t precision = 0; // m, meaning 1/m
    std::uint64_t witness = 0;   // K with all sampled pairs beyond it below 1/m
    std::uint64_t index_k = 0;   // violating pair for Refuted
    std::uint64_t index_j = 0;
    std::string observed;        // rendered distance of the violating pair
    std::uint64_t horizon = 0;
    std::string note;

    bool converged() const { return kind == Kind::Converged; }
    bool refuted() const { return kind == Kind::Refuted; }

    static Verdict converged_up_to(std::uint64_t m, std::uint64_t K) {
        Verdict v;
        v.kind = Kind::Converged;
        v.precision = m;
        v.witness = K;
        return v;
    }
    static Verdict refuted_at(std::uint64_t k, std::uint64_t j, std::string observed) {
        Verdict v;
        v.kind = Kind::Refuted;
        v.index_k = k;
        v.index_j = j;
        v.observed = std::move(observed);
        return v;
    }
    static Verdict unknown(std::uint64_t H, std::string note = "") {
        Verdict v;
        v.kind = Kind::Unknown;
        v.horizon = H;
        v.note = std::move(note);
        return v;
    }

    std::string str() const {
        switch (kind) {
        case Kind::Converged:
            return "ConvergedUpTo(m=" + std::to_string(precision) + ", K=" + std::to_string(witness) + ")";
        case Kind::Refuted:
            return "RefutedAt(k=" + std::to_string(index_k) + ", j=" + std::to_string(index_j) +
                   ", rho=" + observed + ")";
        case Kind::Unknown:
            return note.empty() ? "Unknown(H=" + std::to_string(horizon) + ")"
                                : "Unknown(H=" + std::to_string(horizon) + "): " + note;
        }
        return "";
    }
};

namespace detail {

/// Shared convergence sweep over an indexed sequence with an exact metric.
///
/// Adjacent pairs bound all pairs under an ultrametric, so the candidate
/// witness is one past the last violating adjacent pair; the (K,H) pair and
/// 64 seeded random tail pairs are then re-sampled as a consistency check.
/// A witness deeper than the window midpoint is rejected: violations that
/// persist into the far tail refute the stream at this precision, and an
/// inconsistent re-sample (possible for non-ultrametric or impure sources)
/// yields Unknown.
template <class DistFn, class ViolatesFn, class RenderFn>
Verdict cauchy_sweep(std::uint64_t lo, std::uint64_t hi, std::uint64_t m,
                     DistFn&& dist, ViolatesFn&& violates, RenderFn&& render) {
    if (m < 1) return Verdict::unknown(hi, "precision must be at least 1");
    if (hi < lo + 2) return Verdict::unknown(hi, "window too small");

    std::optional<std::uint64_t> last_violation;
    for (std::uint64_t k = lo; k < hi; ++k) {
        auto d = dist(k, k + 1);
        if (violates(d)) last_violation = k;
    }
    std::uint64_t candidate = last_violation ? *last_violation + 1 : lo;
    std::uint64_t cap = lo + (hi - lo + 1) / 2;
    if (candidate > cap) {
        auto d = dist(*last_violation, *last_violation + 1);
        return Verdict::refuted_at(*last_violation, *last_violation + 1, render(d));
    }

    auto check_pair = [&](std::uint64_t k, std::uint64_t j) -> std::optional<Verdict> {
        auto d = dist(k, j);
        if (!violates(d)) return std::nullopt;
        if (k >= lo + (hi - lo) / 2) return Verdict::refuted_at(k, j, render(d));
        return Verdict::unknown(hi, "sampled pair (" + std::to_string(k) + "," + std::to_string(j) +
                                        ") at " + render(d) + " contradicts adjacent-pair scan");
    };

    if (auto bad = check_pair(candidate, hi)) return *bad;
    std::mt19937_64 rng(0x746c696dULL ^ (m * 0x9e3779b97f4a7c15ULL) ^ hi);
    for (int i = 0; i < 64; ++i) {
        std::uint64_t span = hi - candidate;
        std::uint64_t k = candidate + rng() % (span + 1);
        std::uint64_t j = candidate + rng() % (span + 1);
        if (k == j) continue;
        if (k > j) std::swap(k, j);
        if (auto bad = check_pair(k, j)) return *bad;
    }
    return Verdict::converged_up_to(m, candidate);
}

} // namespace detail

/// Infinitary term, represented intensionally: a total generator from the
/// index k to the k-th finite approximant, never materialized as a whole.
/// An optional modulus maps a precision m to an index K past which all
/// pairwise distances stay below 1/m. Approximants are memoized; the memo
/// is shared between copies and synchronized, so a stream may be evaluated
/// from several threads as long as the generator itself is pure.
class InfTerm {
public:
    using Generator = std::function<Term(std::uint64_t)>;
    using Modulus = std::function<std::uint64_t(std::uint64_t)>;

    InfTerm(Generator gen, std::optional<Modulus> modulus = std::nullopt,
            std::string label = "stream", bool verified_continuity = false)
        : st_(std::make_shared<State>(std::move(gen), std::move(modulus), std::move(label),
                                      verified_continuity)) {}

    Term at(std::uint64_t k) const {
        std::lock_guard<std::mutex> lock(st_->mu);
        auto it = st_->memo.find(k);
        if (it != st_->memo.end()) return it->second;
        Term t = st_->gen(k);
        st_->memo.emplace(k, t);
        return t;
    }

    bool has_modulus() const { return st_->modulus.has_value(); }

    /// Witness index for precision m; only valid when has_modulus().
    std::uint64_t modulus(std::uint64_t m) const { return (*st_->modulus)(m); }

    const std::string& label() const { return st_->label; }

    /// True when the stream was produced by constructions whose Lipschitz
    /// bound is known (fixed-point streams, symbol wraps, template
    /// substitution); false for arbitrary user maps, which reports flag
    /// as "unverified continuity".
    bool verified_continuity() const { return st_->verified; }

private:
    struct State {
        State(Generator g, std::optional<Modulus> m, std::string l, bool v)
            : gen(std::move(g)), modulus(std::move(m)), label(std::move(l)), verified(v) {}
        Generator gen;
        std::optional<Modulus> modulus;
        std::mutex mu;
        std::map<std::uint64_t, Term> memo;
        std::string label;
        bool verified;
    };
    std::shared_ptr<State> st_;
};

/// The stream f(seed), f(f(seed)), ... whose limit is a fixed point of f:
/// wrapping the stream in f again yields an equivalent stream.
inline InfTerm make_fix(const std::string& f, const Term& seed) {
    Term base = seed;
    std::string fn = f;
    return InfTerm(
        [fn, base](std::uint64_t k) {
            Term t = Term::app(fn, {base});
            for (std::uint64_t i = 0; i < k; ++i) t = Term::app(fn, {t});
            return t;
        },
        [](std::uint64_t m) { return m; }, "fix(" + f + "," + seed.str() + ")", true);
}

/// Searches for a witness K <= H past which all sampled pairs of
/// approximants are closer than 1/m.
inline Verdict check_cauchy(const InfTerm& t, std::uint64_t m, std::uint64_t H) {
    Distance bound = Distance::recip(m);
    return detail::cauchy_sweep(
        0, H, m, [&](std::uint64_t k, std::uint64_t j) { return distance(t.at(k), t.at(j)); },
        [&](Distance d) { return d >= bound; }, [](Distance d) { return d.str(); });
}

struct InfDistanceResult {
    std::optional<Distance> approx; // empty when a stream failed its check
    Verdict verdict;
};

/// Distance approximant between two streams at precision m: the pointwise
/// distance at the larger of the two witnesses. When the approximant
/// exceeds 1/m the ultrametric makes it exactly the limit distance;
/// otherwise the limit lies within 2/m of it.
inline InfDistanceResult inf_distance(const InfTerm& s, const InfTerm& t, std::uint64_t m,
                                      std::uint64_t H) {
    Verdict vs = check_cauchy(s, m, H);
    if (!vs.converged()) return {std::nullopt, vs};
    Verdict vt = check_cauchy(t, m, H);
    if (!vt.converged()) return {std::nullopt, vt};
    std::uint64_t K = std::max(vs.witness, vt.witness);
    return {distance(s.at(K), t.at(K)), Verdict::converged_up_to(m, K)};
}

/// Converged verdict iff the streams are equivalent up to precision m,
/// i.e. their distance approximant is below 1/m.
inline Verdict equivalent(const InfTerm& s, const InfTerm& t, std::uint64_t m, std::uint64_t H) {
    InfDistanceResult r = inf_distance(s, t, m, H);
    if (!r.approx) return r.verdict;
    if (*r.approx < Distance::recip(m)) return r.verdict;
    return Verdict::refuted_at(r.verdict.witness, r.verdict.witness, r.approx->str());
}

/// Term-to-term map for pointwise application to streams. Maps built by
/// the named constructors are non-expansive (Lipschitz constant 1) by
/// construction and preserve the modulus; arbitrary maps run unchecked.
struct TermMap {
    std::function<Term(const Term&)> fn;
    bool lipschitz1 = false;
    std::string label;

    static TermMap identity() {
        return {[](const Term& t) { return t; }, true, "id"};
    }

    /// t -> f(t) for a unary symbol f.
    static TermMap wrap(const std::string& f) {
        std::string fn = f;
        return {[fn](const Term& t) { return Term::app(fn, {t}); }, true, "wrap(" + f + ")"};
    }

    /// t -> template[x := t]. Non-expansive because the occurrence depth of
    /// x only adds to the denominator of the substitution distance law.
    static TermMap substitute_into(const Term& tmpl, const std::string& x) {
        Term pattern = tmpl;
        std::string var = x;
        return {[pattern, var](const Term& t) {
                    Substitution theta;
                    theta.bind(var, t);
                    return apply_substitution(pattern, theta);
                },
                true, "subst(" + tmpl.str() + ", " + x + ")"};
    }

    static TermMap unchecked(std::function<Term(const Term&)> fn, std::string label) {
        return {std::move(fn), false, std::move(label)};
    }
};

/// Pointwise application of a map to a stream. The modulus carries over
/// only for Lipschitz-1 maps; anything else must be re-checked at use
/// sites via check_cauchy and is flagged as unverified.
inline InfTerm map_continuous(const TermMap& phi, const InfTerm& t) {
    auto fn = phi.fn;
    InfTerm source = t;
    std::optional<InfTerm::Modulus> modulus;
    if (phi.lipschitz1 && t.has_modulus())
        modulus = [source](std::uint64_t m) { return source.modulus(m); };
    return InfTerm([fn, source](std::uint64_t k) { return fn(source.at(k)); }, std::move(modulus),
                   phi.label + " . " + t.label(), phi.lipschitz1 && t.verified_continuity());
}

/// Stream obtained by substituting the k-th substitution into a fixed
/// template. No modulus can be derived from an opaque substitution
/// sequence; use the binding-stream overload for that.
inline InfTerm subst_sequence(const Term& tmpl, std::function<Substitution(std::uint64_t)> thetas) {
    Term pattern = tmpl;
    return InfTerm([pattern, thetas](std::uint64_t k) { return apply_substitution(pattern, thetas(k)); },
                   std::nullopt, "subst-seq(" + tmpl.str() + ")", false);
}

/// Substitution sequence given as one value stream per variable. When
/// every stream bound to an occurring variable carries a modulus, the
/// result does too: a variable at least occurrence depth d only needs its
/// values at precision m-d, by the exact substitution distance law.
inline InfTerm subst_sequence(const Term& tmpl, const std::map<std::string, InfTerm>& bindings) {
    Term pattern = tmpl;
    auto bound = std::make_shared<const std::map<std::string, InfTerm>>(bindings);

    struct Occurring {
        InfTerm stream;
        std::uint64_t least_depth;
    };
    auto occurring = std::make_shared<std::vector<Occurring>>();
    bool all_have_modulus = true;
    bool all_verified = true;
    for (const auto& [var, stream] : *bound) {
        if (auto d = least_var_depth(tmpl, var)) {
            occurring->push_back({stream, *d});
            all_have_modulus = all_have_modulus && stream.has_modulus();
            all_verified = all_verified && stream.verified_continuity();
        }
    }

    std::optional<InfTerm::Modulus> modulus;
    if (occurring->empty()) {
        modulus = [](std::uint64_t) { return std::uint64_t{0}; };
    } else if (all_have_modulus) {
        modulus = [occurring](std::uint64_t m) {
            std::uint64_t K = 0;
            for (const Occurring& o : *occurring) {
                std::uint64_t need = o.least_depth >= m ? 1 : m - o.least_depth;
                K = std::max(K, o.stream.modulus(need));
            }
            return K;
        };
    }

    return InfTerm(
        [pattern, bound](std::uint64_t k) {
            Substitution theta;
            for (const auto& [var, stream] : *bound) theta.bind(var, stream.at(k));
            return apply_substitution(pattern, theta);
        },
        std::move(modulus), "subst-seq(" + tmpl.str() + ")", all_verified || occurring->empty());
}

} // namespace termlim
