#pragma once

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cauchy.hpp"
#include "horn.hpp"
#include "limits.hpp"
#include "parse.hpp"
#include "ring.hpp"
#include "term.hpp"

namespace termlim {

namespace cli_detail {

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline Term atom_as_term(const Atom& a) { return Term::app(a.predicate(), a.args()); }

} // namespace cli_detail

/// Builds a stream from a CLI descriptor:
///   fix(f,a)            built-in fixed-point stream
///   file:<path>         one term per line = approximants (clamped at EOF)
///   family-atom:<path>  first stable chain of the family's model sequence
inline InfTerm stream_from_descriptor(const std::string& desc, std::uint64_t horizon,
                                      std::uint64_t depth_bound, std::uint64_t step_bound,
                                      std::uint64_t precision) {
    if (desc.rfind("file:", 0) == 0) {
        std::string path = desc.substr(5);
        std::istringstream in(cli_detail::read_file(path));
        std::vector<Term> approximants;
        std::string line;
        while (std::getline(in, line)) {
            auto cut = line.find('%');
            if (cut != std::string::npos) line = line.substr(0, cut);
            auto begin = line.find_first_not_of(" \t\r");
            if (begin == std::string::npos) continue;
            auto end = line.find_last_not_of(" \t\r");
            approximants.push_back(parse_term(line.substr(begin, end - begin + 1)));
        }
        if (approximants.empty()) throw std::runtime_error("stream file '" + path + "' has no terms");
        auto data = std::make_shared<const std::vector<Term>>(std::move(approximants));
        return InfTerm(
            [data](std::uint64_t k) { return (*data)[std::min<std::size_t>(k, data->size() - 1)]; },
            std::nullopt, desc, false);
    }
    if (desc.rfind("family-atom:", 0) == 0) {
        std::string path = desc.substr(12);
        ProgramFamily fam = parse_family(cli_detail::read_file(path));
        ModelSequence seq = model_sequence(fam, std::max<std::uint64_t>(horizon, 3), depth_bound,
                                           step_bound);
        LimitModelApprox approx = limit_model(seq, precision);
        if (approx.chains.empty())
            throw std::runtime_error("family '" + path + "' yields no stable chain: " +
                                     approx.diagnostics);
        auto chain = std::make_shared<const std::vector<Atom>>(approx.chains.front().atoms);
        return InfTerm(
            [chain](std::uint64_t k) {
                return cli_detail::atom_as_term((*chain)[std::min<std::size_t>(k, chain->size() - 1)]);
            },
            std::nullopt, desc, false);
    }
    Term t = parse_term(desc);
    if (t.is_app() && t.symbol() == "fix" && t.arity() == 2 && t.args()[0].is_app() &&
        t.args()[0].arity() == 0)
        return make_fix(t.args()[0].symbol(), t.args()[1]);
    throw std::runtime_error("unknown stream descriptor '" + desc + "'");
}

namespace cli_detail {

inline int cmd_dist(const std::string& a, const std::string& b, std::ostream& out) {
    Signature sig;
    Term s = parse_term(a, sig);
    Term t = parse_term(b, sig);
    out << distance(s, t).str() << '\n';
    return 0;
}

inline int cmd_model(const std::string& path, std::uint64_t depth, std::uint64_t steps,
                     std::ostream& out) {
    Program prog = parse_program(read_file(path));
    LeastModelResult r = least_model(prog, depth, steps);
    out << r.model.str();
    return r.fixpoint ? 0 : 3;
}

inline void print_clauses(const std::vector<Clause>& clauses, std::ostream& out,
                          const char* indent = "") {
    for (const Clause& c : clauses) out << indent << c.str() << '\n';
}

inline int cmd_family_limit(const ProgramFamily& fam, std::uint64_t horizon, std::ostream& out) {
    ProgramLimit lim = program_limit(fam, horizon);
    switch (lim.outcome) {
    case ProgramLimit::Outcome::Converged:
        print_clauses(lim.liminf, out);
        out << "% verdict: " << lim.outcome_str() << '\n';
        return 0;
    case ProgramLimit::Outcome::Diverged:
        out << "% verdict: Diverged\n% liminf:\n";
        print_clauses(lim.liminf, out);
        out << "% limsup:\n";
        print_clauses(lim.limsup, out);
        return 0;
    case ProgramLimit::Outcome::Unknown:
        out << "% verdict: " << lim.outcome_str() << '\n';
        return 0;
    }
    return 0;
}

inline void write_csv_file(const std::string& path, const ModelSequence& seq,
                           const std::vector<Distance>& to_limit) {
    std::ofstream csv(path, std::ios::binary);
    if (!csv) throw std::runtime_error("cannot write '" + path + "'");
    write_model_csv(csv, seq, to_limit);
}

inline int cmd_family_models(const ProgramFamily& fam, std::uint64_t horizon, std::uint64_t depth,
                             std::uint64_t steps, std::uint64_t precision,
                             const std::string& csv_path, std::ostream& out) {
    ModelSequence seq = model_sequence(fam, horizon, depth, steps);
    for (const std::string& w : seq.warnings) out << "% warning: " << w << '\n';
    for (std::uint64_t k = 1; k <= seq.horizon(); ++k) {
        out << "% k=" << k << " (" << seq.at(k).size() << " atoms)\n";
        out << seq.at(k).str();
    }
    for (std::uint64_t k = 1; k + 1 <= seq.horizon(); ++k)
        out << "% rho(M_" << k << ",M_" << k + 1 << ") = "
            << model_distance(seq.at(k), seq.at(k + 1)).str() << '\n';
    Verdict verdict = check_model_cauchy(seq, precision);
    out << "% cauchy: " << verdict.str() << '\n';
    if (!csv_path.empty()) {
        LimitModelApprox approx = limit_model(seq, precision);
        Interpretation reps(depth);
        for (const Atom& a : approx.representatives()) reps.insert(a);
        std::vector<Distance> to_limit;
        for (std::uint64_t k = 1; k <= seq.horizon(); ++k)
            to_limit.push_back(model_distance(seq.at(k), reps));
        write_csv_file(csv_path, seq, to_limit);
    }
    return 0;
}

inline int cmd_family_verify(const ProgramFamily& fam, std::uint64_t horizon, std::uint64_t depth,
                             std::uint64_t steps, std::uint64_t precision,
                             const std::string& csv_path, std::ostream& out) {
    VerificationReport report = verify_limit_model(fam, horizon, depth, steps, precision);
    if (!report.hypothesis_ok) {
        out << "hypothesis: FAILED\n";
        for (const std::string& line : report.hypothesis_offenders) out << "    " << line << '\n';
        out << "result: FAILED (" << report.culprit << ")\n";
        return 4;
    }
    out << "hypothesis: ok\n";
    for (const std::string& w : report.sequence.warnings) out << "% warning: " << w << '\n';
    out << "[a] program limit: " << report.limit.outcome_str() << '\n';
    print_clauses(report.limit.liminf, out, "    ");
    out << "[b] model sequence: " << report.model_cauchy.str() << '\n';
    out << "[c] trace:";
    for (const Distance& d : report.trace) out << ' ' << d.str();
    out << " -> " << (report.trace_ok ? "ok" : "FAILED") << '\n';
    out << "[d] satisfaction: "
        << (report.satisfied ? "ok" : "FAILED (" + *report.counterexample + ")") << '\n';
    out << "representatives:\n";
    for (const Atom& a : report.approx.representatives()) out << "    " << a.str() << '\n';
    if (!csv_path.empty()) write_csv_file(csv_path, report.sequence, report.trace);
    if (report.passed) {
        out << "result: PASS\n";
        return 0;
    }
    out << "result: FAILED (" << report.culprit << ")\n";
    return 5;
}

inline int cmd_fix_check(const std::string& stream_desc, std::uint64_t precision,
                         std::uint64_t horizon, std::uint64_t depth, std::uint64_t steps,
                         std::ostream& out) {
    if (!stream_desc.empty()) {
        std::uint64_t H = horizon ? horizon : 4 * precision;
        InfTerm stream = stream_from_descriptor(stream_desc, H, depth, steps, precision);
        out << "stream: " << stream.label() << '\n';
        out << "continuity: " << (stream.verified_continuity() ? "verified" : "unverified") << '\n';
        Verdict v = check_cauchy(stream, precision, H);
        out << "m=" << precision << ": " << v.str() << '\n';
        return v.converged() ? 0 : 5;
    }
    InfTerm fix = make_fix("f", Term::app("a"));
    InfTerm wrapped = map_continuous(TermMap::wrap("f"), fix);
    out << fix.label() << " vs " << wrapped.label() << '\n';
    bool all_ok = true;
    for (std::uint64_t m : {1, 2, 4, 8, 16, 32}) {
        std::uint64_t H = 4 * m;
        InfDistanceResult r = inf_distance(fix, wrapped, m, H);
        Verdict v = equivalent(fix, wrapped, m, H);
        out << "m=" << m;
        if (r.approx)
            out << " K=" << r.verdict.witness << " rho=" << r.approx->str();
        out << ' ' << (v.converged() ? "equivalent" : "NOT equivalent: " + v.str()) << '\n';
        all_ok = all_ok && v.converged();
    }
    out << "result: " << (all_ok ? "PASS" : "FAILED") << '\n';
    return all_ok ? 0 : 5;
}

inline int cmd_exp(const std::string& literal, std::uint64_t precision, std::uint64_t horizon,
                   std::ostream& out) {
    Rational x = parse_rational(literal);
    CauchyReal stream = exp_real(CauchyReal::constant(x));
    EvalResult r = eval(stream, precision, horizon);
    if (!r.approx) {
        out << "% " << r.verdict.str() << '\n';
        return 5;
    }
    out << rational_str(*r.approx) << '\n';
    out << "% K=" << r.verdict.witness << ' ' << r.verdict.str() << '\n';
    return 0;
}

} // namespace cli_detail

/// Entry point shared by the binary and the tests. Exit codes: 0 success,
/// 2 usage/parse/file errors, 3 step-bound exhaustion, 4 hypothesis
/// failure, 5 verification failure.
inline int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"ultrametric term spaces, Cauchy term streams, and limits of Horn programs"};
    app.name("termlim");
    app.require_subcommand(1);

    std::string term1, term2;
    CLI::App* dist = app.add_subcommand("dist", "distance between two terms");
    dist->add_option("term1", term1)->required();
    dist->add_option("term2", term2)->required();

    std::string model_path;
    std::uint64_t model_depth = 8, model_steps = 32;
    CLI::App* model = app.add_subcommand("model", "depth-bounded least model of a program");
    model->add_option("program", model_path)->required();
    model->add_option("--depth", model_depth, "depth bound");
    model->add_option("--steps", model_steps, "step bound");

    std::string family_path, csv_path;
    std::uint64_t horizon = 8, depth = 8, steps = 32, precision = 4;
    CLI::App* family = app.add_subcommand("family", "operations on indexed program families");
    family->require_subcommand(1);
    CLI::App* fam_limit = family->add_subcommand("limit", "set-theoretic program limit");
    CLI::App* fam_models = family->add_subcommand("models", "per-index least models and distances");
    CLI::App* fam_verify = family->add_subcommand("verify", "verify that the limit of the models satisfies the limit program");
    for (CLI::App* sub : {fam_limit, fam_models, fam_verify}) {
        sub->add_option("family", family_path)->required();
        sub->add_option("--horizon", horizon, "window size H");
    }
    for (CLI::App* sub : {fam_models, fam_verify}) {
        sub->add_option("--depth", depth, "depth bound");
        sub->add_option("--steps", steps, "step bound");
        sub->add_option("--precision", precision, "precision m, meaning 1/m");
        sub->add_option("--csv", csv_path, "write (k, rho_adjacent, rho_to_limit) rows");
    }

    std::string stream_desc;
    std::uint64_t fx_precision = 4, fx_horizon = 0, fx_depth = 8, fx_steps = 32;
    CLI::App* fix_check = app.add_subcommand("fix-check", "fixed-point equivalence demo / stream Cauchy check");
    fix_check->add_option("--stream", stream_desc, "stream descriptor: fix(f,a), file:<path>, family-atom:<path>");
    fix_check->add_option("--precision", fx_precision, "precision m for --stream mode");
    fix_check->add_option("--horizon", fx_horizon, "horizon (default 4m)");
    fix_check->add_option("--depth", fx_depth, "depth bound for family-atom streams");
    fix_check->add_option("--steps", fx_steps, "step bound for family-atom streams");

    std::string exp_literal;
    std::uint64_t exp_precision = 1000000, exp_horizon = 30;
    CLI::App* exp_cmd = app.add_subcommand("exp", "rational approximant of e^x");
    exp_cmd->add_option("x", exp_literal, "rational p/q or decimal literal")->required();
    exp_cmd->add_option("--precision", exp_precision, "precision m, meaning 1/m");
    exp_cmd->add_option("--horizon", exp_horizon, "horizon");

    try {
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return 0;
        }
        err << "error: " << e.what() << '\n';
        return 2;
    }

    try {
        if (*dist) return cli_detail::cmd_dist(term1, term2, out);
        if (*model) {
            if (model_depth < 1 || model_steps < 1)
                throw std::runtime_error("--depth and --steps must be at least 1");
            return cli_detail::cmd_model(model_path, model_depth, model_steps, out);
        }
        if (*family) {
            if (*fam_limit) {
                if (horizon < 4) throw std::runtime_error("family limit needs --horizon >= 4");
                ProgramFamily fam = parse_family(cli_detail::read_file(family_path));
                return cli_detail::cmd_family_limit(fam, horizon, out);
            }
            if (precision < 1 || precision + 2 > depth)
                throw std::runtime_error("precision must satisfy 1 <= m <= depth - 2");
            ProgramFamily fam = parse_family(cli_detail::read_file(family_path));
            if (*fam_models)
                return cli_detail::cmd_family_models(fam, horizon, depth, steps, precision,
                                                     csv_path, out);
            if (horizon < 4) throw std::runtime_error("family verify needs --horizon >= 4");
            return cli_detail::cmd_family_verify(fam, horizon, depth, steps, precision, csv_path,
                                                 out);
        }
        if (*fix_check)
            return cli_detail::cmd_fix_check(stream_desc, fx_precision, fx_horizon, fx_depth,
                                             fx_steps, out);
        if (*exp_cmd) return cli_detail::cmd_exp(exp_literal, exp_precision, exp_horizon, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}

} // namespace termlim
