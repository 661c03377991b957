#pragma once

#include <cctype>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "term.hpp"

namespace termlim {

struct ParseError : std::runtime_error {
    std::size_t offset;
    std::size_t line;
    ParseError(const std::string& msg, std::size_t offset_, std::size_t line_)
        : std::runtime_error(msg + " at offset " + std::to_string(offset_) +
                             " (line " + std::to_string(line_) + ")"),
          offset(offset_), line(line_) {}
};

/// Count expression inside an iter macro: naturals and the index
/// placeholder @k combined with + - * mod. Evaluated per family index.
class CountExpr {
public:
    static CountExpr literal(std::int64_t n) { return CountExpr{{Item{Op::Push, n, false}}}; }

    bool has_placeholder() const {
        for (const Item& it : items_)
            if (it.placeholder) return true;
        return false;
    }

    std::int64_t evaluate(std::optional<std::uint64_t> k) const {
        std::vector<std::int64_t> stack;
        for (const Item& it : items_) {
            switch (it.op) {
            case Op::Push:
                stack.push_back(it.placeholder ? static_cast<std::int64_t>(*k) : it.value);
                break;
            case Op::Add: apply(stack, [](auto a, auto b) { return a + b; }); break;
            case Op::Sub: apply(stack, [](auto a, auto b) { return a - b; }); break;
            case Op::Mul: apply(stack, [](auto a, auto b) { return a * b; }); break;
            case Op::Mod:
                apply(stack, [](std::int64_t a, std::int64_t b) {
                    if (b == 0) throw std::domain_error("mod by zero in iteration count");
                    std::int64_t r = a % b;
                    return r < 0 ? r + (b < 0 ? -b : b) : r;
                });
                break;
            }
        }
        assert(stack.size() == 1);
        return stack.back();
    }

private:
    enum class Op { Push, Add, Sub, Mul, Mod };
    struct Item {
        Op op;
        std::int64_t value = 0;
        bool placeholder = false;
    };

    explicit CountExpr(std::vector<Item> items) : items_(std::move(items)) {}

    template <class F>
    static void apply(std::vector<std::int64_t>& stack, F f) {
        assert(stack.size() >= 2);
        std::int64_t b = stack.back();
        stack.pop_back();
        stack.back() = f(stack.back(), b);
    }

    std::vector<Item> items_;
    friend class Parser;
};

/// Term with unexpanded iter macros; iter counts may mention @k.
class TermTemplate {
public:
    static TermTemplate var(std::string name) {
        TermTemplate t;
        t.kind_ = Kind::Var;
        t.sym_ = std::move(name);
        return t;
    }
    static TermTemplate app(std::string head, std::vector<TermTemplate> args) {
        TermTemplate t;
        t.kind_ = Kind::App;
        t.sym_ = std::move(head);
        t.args_ = std::move(args);
        return t;
    }
    static TermTemplate iter(std::string fn, CountExpr count, TermTemplate arg) {
        TermTemplate t;
        t.kind_ = Kind::Iter;
        t.sym_ = std::move(fn);
        t.count_ = std::move(count);
        t.args_.push_back(std::move(arg));
        return t;
    }

    bool has_placeholder() const {
        if (count_ && count_->has_placeholder()) return true;
        for (const TermTemplate& a : args_)
            if (a.has_placeholder()) return true;
        return false;
    }

    /// Expands iter macros; k supplies the placeholder value.
    Term instantiate(std::optional<std::uint64_t> k) const {
        switch (kind_) {
        case Kind::Var:
            return Term::var(sym_);
        case Kind::App: {
            std::vector<Term> args;
            args.reserve(args_.size());
            for (const TermTemplate& a : args_) args.push_back(a.instantiate(k));
            return Term::app(sym_, std::move(args));
        }
        case Kind::Iter: {
            std::int64_t n = count_->evaluate(k);
            if (n < 0)
                throw std::domain_error("negative iteration count " + std::to_string(n) +
                                        " in iter(" + sym_ + ",...)");
            Term t = args_[0].instantiate(k);
            for (std::int64_t i = 0; i < n; ++i) t = Term::app(sym_, {t});
            return t;
        }
        }
        throw std::logic_error("unreachable");
    }

    /// Function symbols the expansion will use, independent of k.
    void observe(Signature& sig) const {
        switch (kind_) {
        case Kind::Var:
            return;
        case Kind::App:
            sig.add_function(sym_, args_.size());
            break;
        case Kind::Iter:
            sig.add_function(sym_, 1);
            break;
        }
        for (const TermTemplate& a : args_) a.observe(sig);
    }

private:
    enum class Kind { Var, App, Iter };
    TermTemplate() = default;

    Kind kind_ = Kind::Var;
    std::string sym_;
    std::optional<CountExpr> count_;
    std::vector<TermTemplate> args_;
};

struct AtomTemplate {
    std::string pred;
    std::vector<TermTemplate> args;

    bool has_placeholder() const {
        for (const TermTemplate& a : args)
            if (a.has_placeholder()) return true;
        return false;
    }

    Atom instantiate(std::optional<std::uint64_t> k) const {
        std::vector<Term> out;
        out.reserve(args.size());
        for (const TermTemplate& a : args) out.push_back(a.instantiate(k));
        return Atom(pred, std::move(out));
    }

    void observe(Signature& sig) const {
        sig.add_predicate(pred, args.size());
        for (const TermTemplate& a : args) a.observe(sig);
    }
};

struct ClauseTemplate {
    AtomTemplate head;
    std::vector<AtomTemplate> body;

    bool has_placeholder() const {
        if (head.has_placeholder()) return true;
        for (const AtomTemplate& a : body)
            if (a.has_placeholder()) return true;
        return false;
    }
};

struct ParsedFamily {
    std::vector<ClauseTemplate> clauses;
    Signature signature;
};

/// Recursive-descent parser for the term and clause grammars.
///
///   term   := var | sym | sym "(" term ("," term)* ")"
///           | "iter" "(" sym "," count "," term ")"
///   clause := atom "." | atom ":-" atom ("," atom)* "."
///
/// Variables begin uppercase, symbols lowercase; whitespace is
/// insignificant; "%" starts a comment running to end of line (clause
/// input only). In family mode iter counts may be expressions over @k.
class Parser {
public:
    explicit Parser(std::string_view text, bool allow_placeholder, bool allow_comments)
        : text_(text), placeholders_(allow_placeholder), comments_(allow_comments) {}

    static Term parse_term(std::string_view text, Signature& sig) {
        Parser p(text, false, false);
        TermTemplate t = p.term();
        p.expect_end();
        t.observe(sig);
        return t.instantiate(std::nullopt);
    }

    static Term parse_term(std::string_view text) {
        Signature sig;
        return parse_term(text, sig);
    }

    static ParsedFamily parse_clauses(std::string_view text, bool allow_placeholder) {
        Parser p(text, allow_placeholder, true);
        ParsedFamily out;
        p.skip_ws();
        while (!p.at_end()) {
            std::size_t clause_offset = p.pos_, clause_line = p.line_;
            ClauseTemplate c = p.clause();
            try {
                c.head.observe(out.signature);
                for (const AtomTemplate& a : c.body) a.observe(out.signature);
            } catch (const SignatureError& e) {
                throw ParseError(e.what(), clause_offset, clause_line);
            }
            out.clauses.push_back(std::move(c));
            p.skip_ws();
        }
        return out;
    }

private:
    bool at_end() const { return pos_ >= text_.size(); }

    char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

    void advance() {
        if (text_[pos_] == '\n') ++line_;
        ++pos_;
    }

    void skip_ws() {
        while (!at_end()) {
            char c = peek();
            if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else if (c == '%' && comments_) {
                while (!at_end() && peek() != '\n') advance();
            } else {
                break;
            }
        }
    }

    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos_, line_); }

    void expect(char c, const char* what) {
        skip_ws();
        if (peek() != c) fail(std::string("expected ") + what);
        advance();
    }

    void expect_end() {
        skip_ws();
        if (!at_end()) fail("unexpected trailing input");
    }

    std::string ident() {
        std::string out;
        while (!at_end()) {
            char c = peek();
            if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
                out += c;
                advance();
            } else {
                break;
            }
        }
        return out;
    }

    std::uint64_t natural() {
        skip_ws();
        if (!std::isdigit(static_cast<unsigned char>(peek()))) fail("expected a number");
        std::uint64_t n = 0;
        while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) {
            n = n * 10 + static_cast<std::uint64_t>(peek() - '0');
            advance();
        }
        return n;
    }

    // count := cterm (("+"|"-") cterm)*
    // cterm := cfactor (("*"|"mod") cfactor)*
    // cfactor := nat | "-" nat | "@k"
    CountExpr count_expr() {
        std::vector<CountExpr::Item> items;
        count_term(items);
        for (;;) {
            skip_ws();
            if (peek() == '+') {
                advance();
                count_term(items);
                items.push_back({CountExpr::Op::Add, 0, false});
            } else if (peek() == '-') {
                advance();
                count_term(items);
                items.push_back({CountExpr::Op::Sub, 0, false});
            } else {
                break;
            }
        }
        return CountExpr{std::move(items)};
    }

    void count_term(std::vector<CountExpr::Item>& items) {
        count_factor(items);
        for (;;) {
            skip_ws();
            if (peek() == '*') {
                advance();
                count_factor(items);
                items.push_back({CountExpr::Op::Mul, 0, false});
            } else if (lookahead_word("mod")) {
                count_factor(items);
                items.push_back({CountExpr::Op::Mod, 0, false});
            } else {
                break;
            }
        }
    }

    void count_factor(std::vector<CountExpr::Item>& items) {
        skip_ws();
        if (peek() == '@') {
            advance();
            std::string name = ident();
            if (name != "k") fail("unknown placeholder @" + name);
            if (!placeholders_) fail("index placeholder @k is only allowed in family files");
            items.push_back({CountExpr::Op::Push, 0, true});
            return;
        }
        if (peek() == '-') {
            advance();
            std::int64_t n = static_cast<std::int64_t>(natural());
            items.push_back({CountExpr::Op::Push, -n, false});
            return;
        }
        if (!std::isdigit(static_cast<unsigned char>(peek()))) fail("expected an iteration count");
        items.push_back({CountExpr::Op::Push, static_cast<std::int64_t>(natural()), false});
    }

    bool lookahead_word(std::string_view word) {
        std::size_t save = pos_, save_line = line_;
        std::string id = ident();
        if (id == word) return true;
        pos_ = save;
        line_ = save_line;
        return false;
    }

    TermTemplate term() {
        skip_ws();
        char c = peek();
        if (c == '@') fail("index placeholder @k is only allowed inside iter counts");
        if (std::isupper(static_cast<unsigned char>(c))) {
            return TermTemplate::var(ident());
        }
        if (!std::isalpha(static_cast<unsigned char>(c)))
            fail("expected a term");
        std::string sym = ident();
        if (sym == "iter") {
            expect('(', "'(' after iter");
            skip_ws();
            if (!std::islower(static_cast<unsigned char>(peek()))) fail("expected a function symbol");
            std::string fn = ident();
            expect(',', "','");
            CountExpr count = count_expr();
            expect(',', "','");
            TermTemplate arg = term();
            expect(')', "')'");
            return TermTemplate::iter(std::move(fn), std::move(count), std::move(arg));
        }
        skip_ws();
        if (peek() != '(') return TermTemplate::app(std::move(sym), {});
        advance();
        std::vector<TermTemplate> args;
        args.push_back(term());
        for (;;) {
            skip_ws();
            if (peek() == ',') {
                advance();
                args.push_back(term());
            } else if (peek() == ')') {
                advance();
                break;
            } else {
                fail("expected ',' or ')'");
            }
        }
        return TermTemplate::app(std::move(sym), std::move(args));
    }

    AtomTemplate atom() {
        skip_ws();
        if (!std::islower(static_cast<unsigned char>(peek()))) fail("expected an atom");
        std::string pred = ident();
        if (pred == "iter") fail("iter is reserved and cannot be a predicate");
        AtomTemplate out{std::move(pred), {}};
        skip_ws();
        if (peek() != '(') return out;
        advance();
        out.args.push_back(term());
        for (;;) {
            skip_ws();
            if (peek() == ',') {
                advance();
                out.args.push_back(term());
            } else if (peek() == ')') {
                advance();
                break;
            } else {
                fail("expected ',' or ')'");
            }
        }
        return out;
    }

    ClauseTemplate clause() {
        ClauseTemplate c{atom(), {}};
        skip_ws();
        if (peek() == ':') {
            advance();
            if (peek() != '-') fail("expected ':-'");
            advance();
            c.body.push_back(atom());
            for (;;) {
                skip_ws();
                if (peek() == ',') {
                    advance();
                    c.body.push_back(atom());
                } else {
                    break;
                }
            }
        }
        expect('.', "'.' at end of clause");
        return c;
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    bool placeholders_;
    bool comments_;
};

/// Parses one term; iter counts must be concrete.
inline Term parse_term(std::string_view text) { return Parser::parse_term(text); }
inline Term parse_term(std::string_view text, Signature& sig) { return Parser::parse_term(text, sig); }

} // namespace termlim
