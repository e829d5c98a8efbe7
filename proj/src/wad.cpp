#include "lendsim/wad.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include <boost/multiprecision/cpp_int.hpp>

#include "lendsim/error.hpp"

namespace lendsim {

namespace {

using boost::multiprecision::uint256_t;

constexpr int128 kInt128Max = static_cast<int128>(~uint128{0} >> 1);
constexpr uint128 kScaleU = static_cast<uint128>(Wad::kScale);

uint128 magnitude(int128 v) {
    return v < 0 ? uint128(0) - static_cast<uint128>(v) : static_cast<uint128>(v);
}

uint256_t widen(uint128 v) {
    uint256_t out = static_cast<std::uint64_t>(v >> 64);
    out <<= 64;
    out |= static_cast<std::uint64_t>(v);
    return out;
}

uint128 narrow(const uint256_t& v) {
    const uint256_t limit = widen(static_cast<uint128>(kInt128Max));
    if (v > limit) throw Error(Errc::Overflow, "fixed-point result overflows 128 bits");
    const auto lo = static_cast<std::uint64_t>(v & std::numeric_limits<std::uint64_t>::max());
    const auto hi = static_cast<std::uint64_t>(v >> 64);
    return (static_cast<uint128>(hi) << 64) | lo;
}

int128 apply_sign(uint128 mag, bool negative) {
    if (mag > static_cast<uint128>(kInt128Max)) throw Error(Errc::Overflow, "fixed-point result overflows 128 bits");
    const auto v = static_cast<int128>(mag);
    return negative ? -v : v;
}

// floor(a*b/c) on magnitudes.
uint128 mul_div_u(uint128 a, uint128 b, uint128 c) {
    if (c == 0) throw Error(Errc::DivisionByZero, "fixed-point division by zero");
    uint128 prod = 0;
    if (!__builtin_mul_overflow(a, b, &prod)) return prod / c;
    return narrow(widen(a) * widen(b) / widen(c));
}

}  // namespace

Wad Wad::from_int(std::int64_t value) {
    int128 out = 0;
    if (__builtin_mul_overflow(static_cast<int128>(value), kScale, &out)) {
        throw Error(Errc::Overflow, "integer too large for Wad");
    }
    return from_raw(out);
}

Wad Wad::from_double(double value) {
    if (!std::isfinite(value)) throw Error(Errc::InvalidArgument, "non-finite value cannot be a Wad");
    char buf[512];
    auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::fixed);
    if (res.ec != std::errc{}) throw Error(Errc::Overflow, "double too large for Wad");
    return parse(std::string_view(buf, static_cast<std::size_t>(res.ptr - buf)));
}

Wad Wad::parse(std::string_view text) {
    auto fail = [&](const char* why) {
        return Error(Errc::InvalidArgument, std::string("cannot parse '") + std::string(text) + "' as Wad: " + why);
    };
    std::size_t i = 0;
    bool negative = false;
    if (i < text.size() && (text[i] == '-' || text[i] == '+')) {
        negative = text[i] == '-';
        ++i;
    }
    std::string digits;
    int exponent = 0;
    bool seen_point = false;
    bool any_digit = false;
    for (; i < text.size(); ++i) {
        const char c = text[i];
        if (c >= '0' && c <= '9') {
            any_digit = true;
            if (digits.empty() && c == '0') {
                if (seen_point) --exponent;
                continue;
            }
            digits.push_back(c);
            if (seen_point) --exponent;
        } else if (c == '.' && !seen_point) {
            seen_point = true;
        } else if (c == 'e' || c == 'E') {
            int e = 0;
            auto r = std::from_chars(text.data() + i + 1 + (i + 1 < text.size() && text[i + 1] == '+'),
                                     text.data() + text.size(), e);
            if (r.ec != std::errc{} || r.ptr != text.data() + text.size()) throw fail("bad exponent");
            exponent += e;
            i = text.size();
            break;
        } else {
            throw fail("unexpected character");
        }
    }
    if (!any_digit) throw fail("no digits");
    // value = digits * 10^exponent; raw = digits * 10^(exponent + 18)
    const int shift = exponent + 18;
    if (shift < 0) {
        const auto drop = static_cast<std::size_t>(-shift);
        if (drop >= digits.size()) return Wad{};
        digits.resize(digits.size() - drop);
    } else {
        if (digits.size() + static_cast<std::size_t>(shift) > 40) throw Error(Errc::Overflow, "value too large for Wad");
        digits.append(static_cast<std::size_t>(shift), '0');
    }
    uint128 mag = 0;
    for (char c : digits) {
        if (__builtin_mul_overflow(mag, uint128{10}, &mag) || __builtin_add_overflow(mag, uint128(c - '0'), &mag)) {
            throw Error(Errc::Overflow, "value too large for Wad");
        }
    }
    return from_raw(apply_sign(mag, negative));
}

double Wad::to_double() const {
    const uint128 mag = magnitude(raw_);
    const uint128 whole = mag / kScaleU;
    const uint128 frac = mag % kScaleU;
    const double v = static_cast<double>(whole) + static_cast<double>(frac) / 1e18;
    return raw_ < 0 ? -v : v;
}

std::string int128_to_string(int128 value) {
    if (value == 0) return "0";
    uint128 mag = magnitude(value);
    std::string out;
    while (mag > 0) {
        out.push_back(static_cast<char>('0' + static_cast<int>(mag % 10)));
        mag /= 10;
    }
    if (value < 0) out.push_back('-');
    std::reverse(out.begin(), out.end());
    return out;
}

std::string Wad::to_string() const {
    const uint128 mag = magnitude(raw_);
    std::string out = raw_ < 0 ? "-" : "";
    out += int128_to_string(static_cast<int128>(mag / kScaleU));
    uint128 frac = mag % kScaleU;
    if (frac != 0) {
        std::string f(18, '0');
        for (int i = 17; i >= 0; --i) {
            f[static_cast<std::size_t>(i)] = static_cast<char>('0' + static_cast<int>(frac % 10));
            frac /= 10;
        }
        while (!f.empty() && f.back() == '0') f.pop_back();
        out += '.';
        out += f;
    }
    return out;
}

Wad operator+(Wad a, Wad b) {
    int128 out = 0;
    if (__builtin_add_overflow(a.raw_, b.raw_, &out)) throw Error(Errc::Overflow, "Wad addition overflow");
    return Wad::from_raw(out);
}

Wad operator-(Wad a, Wad b) {
    int128 out = 0;
    if (__builtin_sub_overflow(a.raw_, b.raw_, &out)) throw Error(Errc::Overflow, "Wad subtraction overflow");
    return Wad::from_raw(out);
}

Wad Wad::operator-() const { return Wad{} - *this; }

Wad Wad::times(std::int64_t n) const {
    int128 out = 0;
    if (__builtin_mul_overflow(raw_, static_cast<int128>(n), &out)) throw Error(Errc::Overflow, "Wad scaling overflow");
    return from_raw(out);
}

Wad Wad::div_int(std::int64_t n) const {
    if (n == 0) throw Error(Errc::DivisionByZero, "Wad division by zero");
    return from_raw(raw_ / n);
}

Wad wad_mul(Wad a, Wad b) {
    const bool negative = (a.raw() < 0) != (b.raw() < 0);
    return Wad::from_raw(apply_sign(mul_div_u(magnitude(a.raw()), magnitude(b.raw()), kScaleU), negative));
}

Wad wad_div(Wad a, Wad b) {
    if (b.is_zero()) throw Error(Errc::DivisionByZero, "Wad division by zero");
    const bool negative = (a.raw() < 0) != (b.raw() < 0);
    return Wad::from_raw(apply_sign(mul_div_u(magnitude(a.raw()), kScaleU, magnitude(b.raw())), negative));
}

Wad wad_mul_div(Wad a, Wad b, Wad c) {
    if (c.is_zero()) throw Error(Errc::DivisionByZero, "Wad division by zero");
    const bool negative = ((a.raw() < 0) != (b.raw() < 0)) != (c.raw() < 0);
    return Wad::from_raw(apply_sign(mul_div_u(magnitude(a.raw()), magnitude(b.raw()), magnitude(c.raw())), negative));
}

int128 mul_div_raw(int128 a, int128 b, int128 c) {
    if (a < 0 || b < 0 || c <= 0) {
        if (c == 0) throw Error(Errc::DivisionByZero, "division by zero");
        throw Error(Errc::InvalidArgument, "mul_div_raw expects non-negative operands");
    }
    return apply_sign(mul_div_u(static_cast<uint128>(a), static_cast<uint128>(b), static_cast<uint128>(c)), false);
}

Wad min(Wad a, Wad b) { return a < b ? a : b; }
Wad max(Wad a, Wad b) { return a < b ? b : a; }

}  // namespace lendsim
