#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "cauchy.hpp"
#include "horn.hpp"
#include "parse.hpp"
#include "term.hpp"

namespace termlim {

/// Program template indexed by a natural parameter: clauses may mention
/// the placeholder @k inside iter counts, so one file denotes the whole
/// sequence of programs.
struct ProgramFamily {
    std::vector<ClauseTemplate> templates;
    Signature signature;
};

inline ProgramFamily parse_family(std::string_view text) {
    ParsedFamily parsed = Parser::parse_clauses(text, true);
    return {std::move(parsed.clauses), std::move(parsed.signature)};
}

inline Clause instantiate_clause(const ClauseTemplate& ct, std::optional<std::uint64_t> k) {
    Clause c{ct.head.instantiate(k), {}};
    for (const AtomTemplate& a : ct.body) c.body.push_back(a.instantiate(k));
    return c;
}

inline Program family_instantiate(const ProgramFamily& fam, std::uint64_t k) {
    assert(k >= 1);
    Program p;
    p.signature = fam.signature;
    for (const ClauseTemplate& ct : fam.templates) p.clauses.push_back(instantiate_clause(ct, k));
    return p;
}

struct ProgramLimit {
    enum class Outcome { Converged, Diverged, Unknown };

    std::vector<Clause> liminf; // clauses eventually in every member
    std::vector<Clause> limsup; // clauses recurring past every index
    Outcome outcome = Outcome::Unknown;
    std::uint64_t horizon = 0;
    std::string diagnostics;

    bool converged() const { return outcome == Outcome::Converged; }

    Program limit_program(const Signature& sig) const {
        Program p;
        p.signature = sig;
        p.clauses = liminf;
        return p;
    }

    std::string outcome_str() const {
        switch (outcome) {
        case Outcome::Converged: return "ConvergedUpTo(H=" + std::to_string(horizon) + ")";
        case Outcome::Diverged: return "Diverged";
        case Outcome::Unknown: return "Unknown: " + diagnostics;
        }
        return "";
    }
};

/// Set-theoretic limit of the clause sets over a finite window [1..H].
///
/// Classification is symbolic per template clause: index-free clauses sit
/// in both limits; indexed clauses are classified by how their instances
/// recur over the window (eventually constant -> both, recurring in both
/// window halves -> upper limit only, one-shot or first-half-only ->
/// neither). The windowed set formulas cross-check the symbolic answer;
/// any disagreement demotes the verdict to Unknown.
inline ProgramLimit program_limit(const ProgramFamily& fam, std::uint64_t H) {
    assert(H >= 4);
    ProgramLimit out;
    out.horizon = H;
    std::uint64_t half = H / 2;

    // instance lists per template over the window (1-based index k)
    std::vector<std::vector<Clause>> inst(fam.templates.size());
    for (std::size_t t = 0; t < fam.templates.size(); ++t) {
        inst[t].reserve(H);
        for (std::uint64_t k = 1; k <= H; ++k) inst[t].push_back(instantiate_clause(fam.templates[t], k));
    }

    std::set<Clause> sym_inf, sym_sup, transient;
    std::vector<Clause> inf_order, sup_order;
    auto add_inf = [&](const Clause& c) {
        if (sym_inf.insert(c).second) inf_order.push_back(c);
    };
    auto add_sup = [&](const Clause& c) {
        if (sym_sup.insert(c).second) sup_order.push_back(c);
    };

    for (std::size_t t = 0; t < fam.templates.size(); ++t) {
        if (!fam.templates[t].has_placeholder()) {
            add_inf(inst[t][0]);
            add_sup(inst[t][0]);
            continue;
        }
        std::map<Clause, std::vector<std::uint64_t>> where; // instance -> indices k of occurrence
        for (std::uint64_t k = 1; k <= H; ++k) where[inst[t][k - 1]].push_back(k);
        for (const auto& [clause, ks] : where) {
            bool tail_run = true; // constant from some i0 <= H/2 onwards
            std::uint64_t run_start = H + 1;
            for (std::uint64_t k = H; k >= 1; --k) {
                if (inst[t][k - 1] == clause)
                    run_start = k;
                else
                    break;
            }
            tail_run = run_start <= half;
            bool in_first_half = ks.front() <= half;
            bool in_second_half = ks.back() > half;
            if (tail_run) {
                add_inf(clause);
                add_sup(clause);
            } else if (ks.size() == 1 || !in_second_half) {
                transient.insert(clause);
            } else if (in_first_half && in_second_half) {
                add_sup(clause);
            } else {
                out.outcome = ProgramLimit::Outcome::Unknown;
                out.diagnostics = "instance '" + clause.str() +
                                  "' recurs only in the tail half of the window; horizon too small";
                return out;
            }
        }
    }

    // windowed formulas on the instantiated programs
    std::vector<std::set<Clause>> gamma(H);
    for (std::uint64_t k = 1; k <= H; ++k)
        for (std::size_t t = 0; t < fam.templates.size(); ++t) gamma[k - 1].insert(inst[t][k - 1]);

    std::set<Clause> window_inf, window_sup;
    bool sup_started = false;
    for (std::uint64_t i = 1; i <= half; ++i) {
        std::set<Clause> tail_inter = gamma[i - 1];
        std::set<Clause> tail_union;
        for (std::uint64_t j = i; j <= H; ++j) {
            std::set<Clause> keep;
            for (const Clause& c : tail_inter)
                if (gamma[j - 1].count(c)) keep.insert(c);
            tail_inter = std::move(keep);
            tail_union.insert(gamma[j - 1].begin(), gamma[j - 1].end());
        }
        window_inf.insert(tail_inter.begin(), tail_inter.end());
        if (!sup_started) {
            window_sup = std::move(tail_union);
            sup_started = true;
        } else {
            std::set<Clause> keep;
            for (const Clause& c : window_sup)
                if (tail_union.count(c)) keep.insert(c);
            window_sup = std::move(keep);
        }
    }

    if (window_inf != sym_inf) {
        out.outcome = ProgramLimit::Outcome::Unknown;
        out.diagnostics = "windowed lower-limit set disagrees with the symbolic classification";
        return out;
    }
    for (const Clause& c : sym_sup)
        if (!window_sup.count(c)) {
            out.outcome = ProgramLimit::Outcome::Unknown;
            out.diagnostics = "symbolic upper limit contains '" + c.str() +
                              "' missing from the windowed upper limit";
            return out;
        }
    for (const Clause& c : window_sup)
        if (!sym_sup.count(c) && !transient.count(c)) {
            out.outcome = ProgramLimit::Outcome::Unknown;
            out.diagnostics = "windowed upper limit contains unclassified instance '" + c.str() + "'";
            return out;
        }

    out.liminf = std::move(inf_order);
    out.limsup = std::move(sup_order);
    out.outcome = (sym_inf == sym_sup) ? ProgramLimit::Outcome::Converged
                                       : ProgramLimit::Outcome::Diverged;
    return out;
}

/// Hausdorff lift of the atom ultrametric to finite atom sets, with
/// rho(empty, empty) = 0 and rho(empty, nonempty) = 1.
inline Distance model_distance(const Interpretation& a, const Interpretation& b) {
    if (a.empty() && b.empty()) return Distance::zero();
    if (a.empty() || b.empty()) return Distance::recip(1);
    auto directed = [](const Interpretation& from, const Interpretation& to) {
        Distance worst = Distance::zero();
        for (const Atom& x : from.atoms()) {
            Distance best = Distance::recip(1);
            for (const Atom& y : to.atoms()) {
                Distance d = atom_distance(x, y);
                if (d < best) best = d;
                if (best.is_zero()) break;
            }
            worst = max(worst, best);
        }
        return worst;
    };
    return max(directed(a, b), directed(b, a));
}

struct ModelSequence {
    std::vector<Interpretation> models; // models[i] is M_{i+1}
    std::uint64_t depth_bound = 0;
    std::uint64_t step_bound = 0;
    std::vector<std::string> warnings;

    std::uint64_t horizon() const { return models.size(); }
    const Interpretation& at(std::uint64_t k) const { return models[k - 1]; } // 1-based
};

/// Least models of the family members for k = 1..H. Hypothesis failures
/// and exhausted step bounds are recorded as warnings, not errors.
inline ModelSequence model_sequence(const ProgramFamily& fam, std::uint64_t H,
                                    std::uint64_t depth_bound, std::uint64_t step_bound) {
    ModelSequence seq;
    seq.depth_bound = depth_bound;
    seq.step_bound = step_bound;
    for (std::uint64_t k = 1; k <= H; ++k) {
        Program p = family_instantiate(fam, k);
        if (k == 1) {
            BodySubtermReport rep = validate_body_subterm_property(p);
            if (!rep.holds)
                seq.warnings.push_back("body-subterm hypothesis fails for clause '" +
                                       rep.offenders.front().str() + "'");
        }
        LeastModelResult r = least_model(p, depth_bound, step_bound);
        if (!r.fixpoint)
            seq.warnings.push_back("k=" + std::to_string(k) + ": no fixpoint within " +
                                   std::to_string(step_bound) + " steps");
        seq.models.push_back(std::move(r.model));
    }
    return seq;
}

/// Cauchy check on the model sequence, sampled exactly like check_cauchy
/// but over the Hausdorff model distance; indices are 1-based.
inline Verdict check_model_cauchy(const ModelSequence& seq, std::uint64_t m) {
    if (seq.models.empty()) return Verdict::unknown(0, "empty model sequence");
    Distance bound = Distance::recip(m);
    return detail::cauchy_sweep(
        1, seq.horizon(), m,
        [&](std::uint64_t k, std::uint64_t j) { return model_distance(seq.at(k), seq.at(j)); },
        [&](Distance d) { return d >= bound; }, [](Distance d) { return d.str(); });
}

struct AtomChain {
    std::vector<Atom> atoms; // selection p_k in M_k, k = 1..H
    Atom representative;     // deepest atom of the merged class
    std::uint64_t witness;   // adjacent distances are below 1/m from here on
};

struct LimitModelApprox {
    std::vector<AtomChain> chains;       // one per precision-m equivalence class
    std::set<Atom> stable_endpoints;     // final atoms of every stable chain, pre-merge
    std::uint64_t precision = 0;
    std::string diagnostics;

    std::set<Atom> representatives() const {
        std::set<Atom> out;
        for (const AtomChain& c : chains) out.insert(c.representative);
        return out;
    }
};

/// Finite-precision stand-in for the limit of the model sequence: greedy
/// backward chains seeded from the final model, kept when their adjacent
/// distances settle below 1/m, then merged into classes that are pairwise
/// indistinguishable at precision m (the ultrametric makes this an
/// equivalence). Each class reports its deepest atom as representative.
inline LimitModelApprox limit_model(const ModelSequence& seq, std::uint64_t m) {
    LimitModelApprox out;
    out.precision = m;
    if (m < 1) {
        out.diagnostics = "precision must be at least 1";
        return out;
    }
    std::uint64_t H = seq.horizon();
    if (H == 0 || seq.at(H).empty()) {
        out.diagnostics = "final model is empty; no chains to extend";
        return out;
    }
    Distance bound = Distance::recip(m);

    std::vector<AtomChain> stable;
    for (const Atom& seed : seq.at(H).atoms()) {
        std::vector<Atom> chain(H, seed);
        for (std::uint64_t k = H - 1; k >= 1; --k) {
            const Atom& next = chain[k]; // chain entry for k+1
            std::optional<Atom> best;
            Distance best_d = Distance::recip(1);
            for (const Atom& cand : seq.at(k).atoms()) {
                Distance d = atom_distance(next, cand);
                if (!best || d < best_d || (d == best_d && cand < *best)) {
                    best = cand;
                    best_d = d;
                }
            }
            if (!best) { // empty model inside the window: chain cannot be extended
                best = next;
            }
            chain[k - 1] = *best;
        }
        // witness: one past the last adjacent violation (1-based index)
        std::uint64_t witness = 1;
        bool broken = false;
        for (std::uint64_t k = 1; k < H; ++k) {
            if (seq.at(k).empty()) broken = true;
            Distance d = atom_distance(chain[k - 1], chain[k]);
            if (d >= bound) witness = k + 1;
        }
        if (broken) continue;
        if (witness <= 1 + (H - 1 + 1) / 2) {
            out.stable_endpoints.insert(seed);
            stable.push_back({std::move(chain), seed, witness});
        }
    }
    if (stable.empty()) {
        out.diagnostics = "no chain keeps its adjacent distances below 1/" + std::to_string(m);
        return out;
    }

    // merge chains whose representatives are within 1/m of each other
    std::vector<std::size_t> cls(stable.size());
    for (std::size_t i = 0; i < stable.size(); ++i) cls[i] = i;
    std::function<std::size_t(std::size_t)> find = [&](std::size_t i) {
        return cls[i] == i ? i : cls[i] = find(cls[i]);
    };
    for (std::size_t i = 0; i < stable.size(); ++i)
        for (std::size_t j = i + 1; j < stable.size(); ++j)
            if (atom_distance(stable[i].representative, stable[j].representative) < bound)
                cls[find(i)] = find(j);

    std::map<std::size_t, std::size_t> keeper; // class root -> index of deepest member
    for (std::size_t i = 0; i < stable.size(); ++i) {
        std::size_t root = find(i);
        auto it = keeper.find(root);
        if (it == keeper.end()) {
            keeper[root] = i;
            continue;
        }
        const Atom& incumbent = stable[it->second].representative;
        const Atom& challenger = stable[i].representative;
        if (challenger.depth() > incumbent.depth() ||
            (challenger.depth() == incumbent.depth() && challenger < incumbent))
            it->second = i;
    }
    for (const auto& [root, idx] : keeper) out.chains.push_back(stable[idx]);
    std::sort(out.chains.begin(), out.chains.end(),
              [](const AtomChain& a, const AtomChain& b) { return a.representative < b.representative; });
    return out;
}

/// Four-part verification that the limit of the least-model sequence
/// models the limit program, checked at finite depth and precision:
///   (a) the program sequence has a set-theoretic limit over the window,
///   (b) the model sequence is Cauchy at precision m,
///   (c) the distances from M_k to the limit representatives shrink
///       monotonically below 1/m,
///   (d) the stable chain endpoints, together with the atoms common to
///       every window model, satisfy the limit program.
struct VerificationReport {
    bool hypothesis_ok = false;
    std::vector<std::string> hypothesis_offenders;

    ProgramLimit limit;
    Verdict model_cauchy;
    std::vector<Distance> trace; // rho(M_k, representative set), k = 1..H
    bool trace_ok = false;
    bool satisfied = false;
    std::optional<std::string> counterexample;

    LimitModelApprox approx;
    ModelSequence sequence;

    bool passed = false;
    std::string culprit;
};

inline VerificationReport verify_limit_model(const ProgramFamily& fam, std::uint64_t H,
                                             std::uint64_t depth_bound, std::uint64_t step_bound,
                                             std::uint64_t m) {
    VerificationReport report;

    report.hypothesis_ok = true;
    for (std::uint64_t k = 1; k <= H; ++k) {
        BodySubtermReport rep = validate_body_subterm_property(family_instantiate(fam, k));
        if (!rep.holds) {
            report.hypothesis_ok = false;
            for (const Clause& c : rep.offenders) {
                std::string line = "k=" + std::to_string(k) + ": " + c.str();
                if (report.hypothesis_offenders.empty() || report.hypothesis_offenders.back() != line)
                    report.hypothesis_offenders.push_back(line);
            }
            break;
        }
    }
    if (!report.hypothesis_ok) {
        report.culprit = "body-subterm hypothesis";
        return report;
    }

    report.limit = program_limit(fam, H);
    report.sequence = model_sequence(fam, H, depth_bound, step_bound);
    report.model_cauchy = check_model_cauchy(report.sequence, m);
    report.approx = limit_model(report.sequence, m);

    std::set<Atom> rep_atoms = report.approx.representatives();
    Interpretation limit_interp(depth_bound);
    for (const Atom& a : rep_atoms) limit_interp.insert(a);

    report.trace.reserve(H);
    for (std::uint64_t k = 1; k <= H; ++k)
        report.trace.push_back(model_distance(report.sequence.at(k), limit_interp));
    report.trace_ok = !report.trace.empty();
    for (std::size_t i = 0; i + 1 < report.trace.size(); ++i)
        if (report.trace[i] < report.trace[i + 1]) report.trace_ok = false;
    if (report.trace_ok && !(report.trace.back() < Distance::recip(m))) report.trace_ok = false;

    // every stable chain endpoint plus atoms present in every window model;
    // merged class representatives alone would drop endpoints that
    // non-deepening rules map onto
    Interpretation check_interp = limit_interp;
    for (const Atom& a : report.approx.stable_endpoints) check_interp.insert(a);
    if (!report.sequence.models.empty()) {
        for (const Atom& a : report.sequence.at(1).atoms()) {
            bool everywhere = true;
            for (std::uint64_t k = 2; k <= H && everywhere; ++k)
                everywhere = report.sequence.at(k).contains(a);
            if (everywhere) check_interp.insert(a);
        }
    }
    Program limit_prog = report.limit.limit_program(fam.signature);
    SatisfiesResult sat = satisfies(check_interp, limit_prog);
    report.satisfied = sat.holds;
    report.counterexample = sat.counterexample;

    if (!report.limit.converged())
        report.culprit = "program limit: " + report.limit.outcome_str();
    else if (!report.model_cauchy.converged())
        report.culprit = "model sequence: " + report.model_cauchy.str();
    else if (!report.trace_ok)
        report.culprit = "limit trace not non-increasing below 1/" + std::to_string(m);
    else if (!report.satisfied)
        report.culprit = "limit model violates '" + *report.counterexample + "'";
    report.passed = report.culprit.empty();
    return report;
}

/// CSV rows (k, rho(M_k, M_{k+1}), rho(M_k, limit)); the adjacent column
/// is empty on the last row.
inline void write_model_csv(std::ostream& os, const ModelSequence& seq,
                            const std::vector<Distance>& to_limit) {
    os << "k,rho_adjacent,rho_to_limit\n";
    for (std::uint64_t k = 1; k <= seq.horizon(); ++k) {
        os << k << ',';
        if (k < seq.horizon()) os << model_distance(seq.at(k), seq.at(k + 1)).str();
        os << ',';
        if (k <= to_limit.size()) os << to_limit[k - 1].str();
        os << '\n';
    }
}

} // namespace termlim
