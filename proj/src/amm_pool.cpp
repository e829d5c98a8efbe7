#include "lendsim/amm_pool.hpp"

#include <cmath>
#include <limits>

#include <boost/multiprecision/cpp_int.hpp>

#include "lendsim/error.hpp"

namespace lendsim {

namespace {

using boost::multiprecision::uint256_t;

uint256_t widen(Wad w) {
    const auto v = static_cast<uint128>(w.raw());
    uint256_t out = static_cast<std::uint64_t>(v >> 64);
    out <<= 64;
    out |= static_cast<std::uint64_t>(v);
    return out;
}

Wad narrow(const uint256_t& v) {
    const uint256_t limit = widen(Wad::from_raw(static_cast<int128>(~uint128{0} >> 1)));
    if (v > limit) throw Error(Errc::Overflow, "AMM value overflows 128 bits");
    const auto lo = static_cast<std::uint64_t>(v & std::numeric_limits<std::uint64_t>::max());
    const auto hi = static_cast<std::uint64_t>(v >> 64);
    return Wad::from_raw(static_cast<int128>((static_cast<uint128>(hi) << 64) | lo));
}

// Relative mismatch allowed between the two sides of a liquidity add.
constexpr int128 kProportionTolerance = 1'000'000'000;  // 1 part in 1e9

}  // namespace

AmmPool::AmmPool(TokenId token_x, TokenId token_y, Wad reserve_x, Wad reserve_y, Wad fee)
    : token_x_(token_x), token_y_(token_y), reserve_x_(reserve_x), reserve_y_(reserve_y), fee_(fee) {
    if (token_x == token_y) throw Error(Errc::InvalidArgument, "AMM pair needs two distinct tokens");
    if (!reserve_x.is_positive() || !reserve_y.is_positive()) {
        throw Error(Errc::InvalidArgument, "AMM reserves must be positive");
    }
    if (fee.is_negative() || fee >= Wad::one()) throw Error(Errc::InvalidArgument, "AMM fee must be in [0, 1)");
    lp_supply_ = narrow(boost::multiprecision::sqrt(widen(reserve_x) * widen(reserve_y)));
}

Wad AmmPool::reserve_of(TokenId token) const {
    if (token == token_x_) return reserve_x_;
    if (token == token_y_) return reserve_y_;
    throw Error(Errc::InvalidArgument, "token not in AMM pair");
}

TokenId AmmPool::other(TokenId token) const {
    if (token == token_x_) return token_y_;
    if (token == token_y_) return token_x_;
    throw Error(Errc::InvalidArgument, "token not in AMM pair");
}

Wad AmmPool::spot_price() const {
    if (!reserve_x_.is_positive() || !reserve_y_.is_positive()) throw Error(Errc::EmptyPool, "AMM pool is empty");
    return wad_div(reserve_y_, reserve_x_);
}

Wad AmmPool::quote_exact_in(TokenId token_in, Wad amount_in) const {
    if (!amount_in.is_positive()) throw Error(Errc::ZeroAmount, "swap input must be positive");
    if (!reserve_x_.is_positive() || !reserve_y_.is_positive()) throw Error(Errc::EmptyPool, "AMM pool is empty");
    const Wad reserve_in = reserve_of(token_in);
    const Wad reserve_out = reserve_of(other(token_in));
    const Wad effective = wad_mul(amount_in, Wad::one() - fee_);
    if (effective.is_zero()) throw Error(Errc::OutputZero, "swap output rounds to zero");
    const Wad out = wad_mul_div(reserve_out, effective, reserve_in + effective);
    if (out.is_zero()) throw Error(Errc::OutputZero, "swap output rounds to zero");
    return out;
}

Wad AmmPool::swap_exact_in(TokenId token_in, Wad amount_in) {
    const Wad out = quote_exact_in(token_in, amount_in);
    if (token_in == token_x_) {
        reserve_x_ += amount_in;
        reserve_y_ -= out;
    } else {
        reserve_y_ += amount_in;
        reserve_x_ -= out;
    }
    return out;
}

Wad AmmPool::add_liquidity(Wad amount_x, Wad amount_y) {
    if (!amount_x.is_positive() || !amount_y.is_positive()) throw Error(Errc::ZeroAmount, "liquidity must be positive");
    if (!reserve_x_.is_positive() || !lp_supply_.is_positive()) throw Error(Errc::EmptyPool, "AMM pool is empty");
    const Wad lp_from_x = wad_mul_div(amount_x, lp_supply_, reserve_x_);
    const Wad lp_from_y = wad_mul_div(amount_y, lp_supply_, reserve_y_);
    const Wad lo = min(lp_from_x, lp_from_y);
    const Wad hi = max(lp_from_x, lp_from_y);
    if ((hi - lo).raw() > hi.raw() / kProportionTolerance + 1) {
        throw Error(Errc::Disproportionate, "liquidity must be added in proportion to reserves");
    }
    reserve_x_ += amount_x;
    reserve_y_ += amount_y;
    lp_supply_ += lo;
    return lo;
}

std::pair<Wad, Wad> AmmPool::remove_liquidity(Wad lp_tokens) {
    if (lp_tokens.is_negative()) throw Error(Errc::InvalidArgument, "negative LP burn");
    if (lp_tokens > lp_supply_) throw Error(Errc::ExcessBurn, "LP burn exceeds supply");
    if (lp_tokens.is_zero()) return {Wad::zero(), Wad::zero()};
    Wad out_x = reserve_x_;
    Wad out_y = reserve_y_;
    if (lp_tokens < lp_supply_) {
        out_x = wad_mul_div(reserve_x_, lp_tokens, lp_supply_);
        out_y = wad_mul_div(reserve_y_, lp_tokens, lp_supply_);
    }
    reserve_x_ -= out_x;
    reserve_y_ -= out_y;
    lp_supply_ -= lp_tokens;
    return {out_x, out_y};
}

std::pair<Wad, Wad> AmmPool::rebalance_to_price(Wad target) {
    if (!target.is_positive()) throw Error(Errc::InvalidArgument, "target price must be positive");
    spot_price();  // throws on an empty pool
    const uint256_t scale = widen(Wad::one());
    const uint256_t k = widen(reserve_x_) * widen(reserve_y_);  // scale 1e36
    // x'^2 = k / p  (raw: x.raw * y.raw * 1e18 / p.raw)
    const Wad new_x = narrow(boost::multiprecision::sqrt(k * scale / widen(target)));
    if (!new_x.is_positive()) throw Error(Errc::OutputZero, "rebalance empties the pool");
    // round y' up so k never shrinks
    const Wad new_y = narrow((k + widen(new_x) - 1) / widen(new_x));
    const std::pair<Wad, Wad> delta{new_x - reserve_x_, new_y - reserve_y_};
    reserve_x_ = new_x;
    reserve_y_ = new_y;
    return delta;
}

double divergent_loss(double price_ratio) {
    if (!(price_ratio > 0.0) || !std::isfinite(price_ratio)) {
        throw Error(Errc::InvalidArgument, "price ratio must be positive");
    }
    return 2.0 * std::sqrt(price_ratio) / (1.0 + price_ratio) - 1.0;
}

}  // namespace lendsim
