#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "cauchy.hpp"

namespace termlim {

using BigInt = boost::multiprecision::cpp_int;

/// Exact rational, always reduced with a positive denominator.
using Rational = boost::multiprecision::cpp_rational;

inline std::string rational_str(const Rational& q) {
    return numerator(q).str() + "/" + denominator(q).str();
}

/// Accepts "p/q", integers, and decimal literals (converted exactly).
inline Rational parse_rational(std::string_view text) {
    auto bad = [&]() -> std::runtime_error {
        return std::runtime_error("cannot parse rational '" + std::string(text) + "'");
    };
    if (text.empty()) throw bad();
    std::string s(text);
    auto slash = s.find('/');
    try {
        if (slash != std::string::npos) {
            BigInt num(s.substr(0, slash));
            BigInt den(s.substr(slash + 1));
            if (den == 0) throw bad();
            return Rational(num, den);
        }
        auto dot = s.find('.');
        if (dot == std::string::npos) return Rational(BigInt(s));
        std::string digits = s.substr(0, dot) + s.substr(dot + 1);
        std::size_t frac_len = s.size() - dot - 1;
        if (frac_len == 0 || digits.empty()) throw bad();
        BigInt den = 1;
        for (std::size_t i = 0; i < frac_len; ++i) den *= 10;
        return Rational(BigInt(digits), den);
    } catch (const std::exception&) {
        throw bad();
    }
}

/// Exact partial sum 1 + x + x^2/2! + ... + x^n/n!, computed by the
/// running-term recursion; no floating point anywhere.
inline Rational exp_partial(std::uint64_t n, const Rational& x) {
    Rational sum = 1;
    Rational term = 1;
    for (std::uint64_t i = 1; i <= n; ++i) {
        term *= x;
        term /= i;
        sum += term;
    }
    return sum;
}

/// Cauchy real: a total generator of rational approximants with an
/// optional modulus of convergence. Same sharing and memoization rules as
/// InfTerm.
class CauchyReal {
public:
    using Generator = std::function<Rational(std::uint64_t)>;
    using Modulus = std::function<std::uint64_t(std::uint64_t)>;

    CauchyReal(Generator gen, std::optional<Modulus> modulus = std::nullopt,
               std::string label = "real")
        : st_(std::make_shared<State>(std::move(gen), std::move(modulus), std::move(label))) {}

    static CauchyReal constant(Rational q) {
        std::string name = rational_str(q);
        return CauchyReal([q](std::uint64_t) { return q; },
                          [](std::uint64_t) { return std::uint64_t{0}; }, name);
    }

    Rational at(std::uint64_t k) const {
        std::lock_guard<std::mutex> lock(st_->mu);
        auto it = st_->memo.find(k);
        if (it != st_->memo.end()) return it->second;
        Rational q = st_->gen(k);
        st_->memo.emplace(k, q);
        return q;
    }

    bool has_modulus() const { return st_->modulus.has_value(); }
    std::uint64_t modulus(std::uint64_t m) const { return (*st_->modulus)(m); }
    const std::string& label() const { return st_->label; }

private:
    struct State {
        State(Generator g, std::optional<Modulus> m, std::string l)
            : gen(std::move(g)), modulus(std::move(m)), label(std::move(l)) {}
        Generator gen;
        std::optional<Modulus> modulus;
        std::mutex mu;
        std::map<std::uint64_t, Rational> memo;
        std::string label;
    };
    std::shared_ptr<State> st_;
};

/// Rational map with an optional declared modulus of continuity:
/// continuity(m) = m' such that inputs within 1/m' map to outputs within
/// 1/m. Lifted results carry a modulus only when the map declares one.
struct RationalMap {
    std::function<Rational(const Rational&)> fn;
    std::optional<std::function<std::uint64_t(std::uint64_t)>> continuity;
    std::string label;

    static RationalMap identity() {
        return {[](const Rational& q) { return q; },
                [](std::uint64_t m) { return m; }, "id"};
    }
};

/// Pointwise lift of a rational map to Cauchy reals.
inline CauchyReal lift(const RationalMap& phi, const CauchyReal& x) {
    auto fn = phi.fn;
    CauchyReal source = x;
    std::optional<CauchyReal::Modulus> modulus;
    if (phi.continuity && x.has_modulus()) {
        auto cont = *phi.continuity;
        modulus = [source, cont](std::uint64_t m) { return source.modulus(cont(m)); };
    }
    return CauchyReal([fn, source](std::uint64_t k) { return fn(source.at(k)); }, std::move(modulus),
                      phi.label + " . " + x.label());
}

/// Diagonal lift y_n = phi(n, x_n) for index-dependent maps; no modulus
/// can be carried over.
inline CauchyReal lift_diagonal(std::function<Rational(std::uint64_t, const Rational&)> phi,
                                const CauchyReal& x, std::string label) {
    CauchyReal source = x;
    return CauchyReal([phi, source](std::uint64_t k) { return phi(k, source.at(k)); }, std::nullopt,
                      std::move(label));
}

/// The exponential as a computable function on Cauchy reals: the n-th
/// approximant is the n-term partial sum evaluated at the n-th input
/// approximant.
inline CauchyReal exp_real(const CauchyReal& x) {
    return lift_diagonal([](std::uint64_t n, const Rational& q) { return exp_partial(n, q); }, x,
                         "exp(" + x.label() + ")");
}

struct EvalResult {
    std::optional<Rational> approx;
    Verdict verdict;
};

/// Returns the approximant at the first witness index whose sampled tail
/// oscillation stays below 1/m within the horizon. Rational sequences are
/// not ultrametric, so the sampled (K,H) and random pairs genuinely matter
/// here: drift that adjacent differences miss shows up there and demotes
/// the candidate.
inline EvalResult eval(const CauchyReal& x, std::uint64_t m, std::uint64_t H) {
    if (m < 1) return {std::nullopt, Verdict::unknown(H, "precision must be at least 1")};
    if (H < 2) return {std::nullopt, Verdict::unknown(H, "window too small")};
    Rational bound(1, m);
    auto gap = [&](std::uint64_t k, std::uint64_t j) {
        Rational d = x.at(k) - x.at(j);
        return d < 0 ? Rational(-d) : d;
    };

    std::uint64_t cap = H / 2;
    std::optional<Verdict> tail_refutation;
    for (std::uint64_t K = 0; K <= cap; ++K) {
        bool ok = true;
        std::optional<std::pair<std::uint64_t, std::uint64_t>> violation;
        for (std::uint64_t k = K; k < H && ok; ++k)
            if (gap(k, k + 1) >= bound) {
                ok = false;
                violation = {k, k + 1};
            }
        if (ok && gap(K, H) >= bound) {
            ok = false;
            violation = {K, H};
        }
        if (ok) {
            std::mt19937_64 rng(0x72696e67ULL ^ (m * 0x9e3779b97f4a7c15ULL) ^ H);
            for (int i = 0; i < 64 && ok; ++i) {
                std::uint64_t span = H - K;
                std::uint64_t k = K + rng() % (span + 1);
                std::uint64_t j = K + rng() % (span + 1);
                if (k == j) continue;
                if (k > j) std::swap(k, j);
                if (gap(k, j) >= bound) {
                    ok = false;
                    violation = {k, j};
                }
            }
        }
        if (ok) return {x.at(K), Verdict::converged_up_to(m, K)};
        if (violation && violation->first >= H / 2)
            tail_refutation = Verdict::refuted_at(violation->first, violation->second,
                                                  rational_str(gap(violation->first, violation->second)));
    }
    if (tail_refutation) return {std::nullopt, *tail_refutation};
    return {std::nullopt, Verdict::unknown(H, "no witness within the half-window cap")};
}

} // namespace termlim
