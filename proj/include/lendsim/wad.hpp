#pragma once

// 18-decimal fixed-point numbers. All protocol state (balances, prices,
// rates, factors) is held in Wad so conservation checks are exact.

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace lendsim {

using int128 = __int128;
using uint128 = unsigned __int128;

class Wad {
  public:
    static constexpr int128 kScale = 1'000'000'000'000'000'000;

    constexpr Wad() = default;

    static constexpr Wad from_raw(int128 raw) {
        Wad w;
        w.raw_ = raw;
        return w;
    }
    static constexpr Wad zero() { return Wad{}; }
    static constexpr Wad one() { return from_raw(kScale); }

    static Wad from_int(std::int64_t value);
    // Shortest round-trip decimal form of `value`, truncated to 18 places.
    static Wad from_double(double value);
    // Accepts [-]digits[.digits][e[+-]digits]. Digits past the 18th decimal
    // place are truncated toward zero.
    static Wad parse(std::string_view text);

    constexpr int128 raw() const { return raw_; }
    double to_double() const;
    // Canonical text: no exponent, trailing fractional zeros trimmed.
    std::string to_string() const;

    constexpr bool is_zero() const { return raw_ == 0; }
    constexpr bool is_negative() const { return raw_ < 0; }
    constexpr bool is_positive() const { return raw_ > 0; }

    friend Wad operator+(Wad a, Wad b);
    friend Wad operator-(Wad a, Wad b);
    Wad operator-() const;
    Wad& operator+=(Wad other) { return *this = *this + other; }
    Wad& operator-=(Wad other) { return *this = *this - other; }

    // Exact integer scaling, checked.
    Wad times(std::int64_t n) const;
    // Truncating division by an integer.
    Wad div_int(std::int64_t n) const;

    friend constexpr auto operator<=>(Wad, Wad) = default;

  private:
    int128 raw_ = 0;
};

/// a*b, truncated toward zero. Throws Errc::Overflow if the result does not fit.
Wad wad_mul(Wad a, Wad b);
/// a/b, truncated toward zero.
Wad wad_div(Wad a, Wad b);
/// a*b/c with a 256-bit intermediate, truncated toward zero.
Wad wad_mul_div(Wad a, Wad b, Wad c);
/// Raw integer helper: floor(a*b/c) for non-negative operands, 256-bit intermediate.
int128 mul_div_raw(int128 a, int128 b, int128 c);

inline Wad wad(std::string_view text) { return Wad::parse(text); }

Wad min(Wad a, Wad b);
Wad max(Wad a, Wad b);

std::string int128_to_string(int128 value);

}  // namespace lendsim
