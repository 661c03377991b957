#pragma once

#include <cassert>
#include <cstdint>
#include <ostream>
#include <string>

namespace termlim {

/// Metric value over terms: exactly zero or 1/m for a positive integer m.
/// No other rationals are representable, so all metric arithmetic stays
/// symbolic on m and never touches floating point.
class Distance {
public:
    constexpr Distance() = default;

    static constexpr Distance zero() { return Distance{}; }

    static Distance recip(std::uint64_t m) {
        assert(m >= 1 && "reciprocal distance needs a positive denominator");
        return Distance{m};
    }

    constexpr bool is_zero() const { return m_ == 0; }

    /// Denominator m of a value 1/m; 0 encodes the zero distance.
    constexpr std::uint64_t denom() const { return m_; }

    /// Numeric order: 0 < 1/m for every m, and 1/m < 1/n iff m > n.
    friend constexpr bool operator==(Distance a, Distance b) { return a.m_ == b.m_; }
    friend constexpr bool operator!=(Distance a, Distance b) { return a.m_ != b.m_; }
    friend constexpr bool operator<(Distance a, Distance b) {
        if (a.m_ == b.m_) return false;
        if (a.m_ == 0) return true;
        if (b.m_ == 0) return false;
        return a.m_ > b.m_;
    }
    friend constexpr bool operator<=(Distance a, Distance b) { return a == b || a < b; }
    friend constexpr bool operator>(Distance a, Distance b) { return b < a; }
    friend constexpr bool operator>=(Distance a, Distance b) { return b <= a; }

    /// D/(D+1): zero stays zero, 1/m becomes 1/(m+1).
    constexpr Distance wrapped() const { return is_zero() ? Distance{} : Distance{m_ + 1}; }

    std::string str() const { return is_zero() ? "0" : "1/" + std::to_string(m_); }

    friend std::ostream& operator<<(std::ostream& os, Distance d) { return os << d.str(); }

private:
    constexpr explicit Distance(std::uint64_t m) : m_(m) {}
    std::uint64_t m_ = 0;
};

constexpr Distance max(Distance a, Distance b) { return a < b ? b : a; }

} // namespace termlim
