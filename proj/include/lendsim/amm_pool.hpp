#pragma once

#include <utility>

#include "lendsim/types.hpp"
#include "lendsim/wad.hpp"

namespace lendsim {

/// Two-token constant-product pool (x * y = k). Swap fees stay in the pool,
/// so k never decreases.
class AmmPool {
  public:
    AmmPool(TokenId token_x, TokenId token_y, Wad reserve_x, Wad reserve_y, Wad fee = wad("0.003"));

    TokenId token_x() const { return token_x_; }
    TokenId token_y() const { return token_y_; }
    Wad reserve_x() const { return reserve_x_; }
    Wad reserve_y() const { return reserve_y_; }
    Wad reserve_of(TokenId token) const;
    Wad fee() const { return fee_; }
    Wad lp_supply() const { return lp_supply_; }
    bool holds(TokenId token) const { return token == token_x_ || token == token_y_; }
    TokenId other(TokenId token) const;

    /// y per x.
    Wad spot_price() const;

    Wad quote_exact_in(TokenId token_in, Wad amount_in) const;
    /// out = reserve_out * eff / (reserve_in + eff), eff = amount_in * (1 - fee).
    Wad swap_exact_in(TokenId token_in, Wad amount_in);

    /// Proportional deposit; returns LP tokens minted.
    Wad add_liquidity(Wad amount_x, Wad amount_y);
    /// Burns LP tokens; returns (x, y) paid out.
    std::pair<Wad, Wad> remove_liquidity(Wad lp_tokens);

    /// Fee-free arbitrage that moves the spot price to `target` (y per x).
    /// Returns the signed reserve changes (dx, dy) it made.
    std::pair<Wad, Wad> rebalance_to_price(Wad target);

  private:
    TokenId token_x_;
    TokenId token_y_;
    Wad reserve_x_;
    Wad reserve_y_;
    Wad fee_;
    Wad lp_supply_;
};

/// LP value relative to holding after the external price ratio moves by
/// `price_ratio`: 2*sqrt(r)/(1+r) - 1. Always <= 0.
double divergent_loss(double price_ratio);

}  // namespace lendsim
