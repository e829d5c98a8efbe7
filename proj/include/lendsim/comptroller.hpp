#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "lendsim/ctoken_pool.hpp"
#include "lendsim/types.hpp"
#include "lendsim/wad.hpp"

namespace lendsim {

struct CollateralConfig {
    Wad haircut = wad("0.25");  // gamma; collateral factor is 1 - gamma
    bool accepted_as_collateral = true;

    Wad collateral_factor() const { return accepted_as_collateral ? Wad::one() - haircut : Wad::zero(); }
    void validate() const;
};

struct LiquidationConfig {
    Wad close_factor = wad("0.5");
    Wad incentive = wad("0.08");

    // Also checks (1 - gamma)(1 + incentive) < 1 for every accepted collateral.
    void validate(std::span<const CollateralConfig> collateral) const;
};

struct LiquiditySummary {
    Wad collateral_usd;    // sum of P * Q over supplied markets
    Wad borrow_limit_usd;  // sum of (1 - gamma) * P * Q
    Wad debt_usd;          // sum of P * L
    Wad liquidity;         // borrow_limit_usd - debt_usd; negative means liquidatable

    bool liquidatable() const { return liquidity.is_negative(); }
};

/// Account liquidity across all markets. `positions`, `pools` and `collateral`
/// are parallel arrays indexed by market; `prices` is indexed by TokenId and a
/// non-positive entry counts as missing (only for markets the account uses).
LiquiditySummary account_liquidity(std::span<const AccountPosition> positions, std::span<const LendingPool> pools,
                                   std::span<const CollateralConfig> collateral, std::span<const Wad> prices);

/// Weak inequality: an action may use the account's liquidity down to exactly zero.
bool check_borrow_allowed(Wad liquidity, Wad extra_debt_usd);

/// Most a single liquidation may repay against `debt`.
Wad max_close_amount(Wad debt, const LiquidationConfig& config);

struct SeizeQuote {
    Wad repay_usd;
    Wad seize_usd;
    Wad seize_underlying;
    Wad seize_ctokens;
};

/// seize cTokens = repay * P_repay * (1 + incentive) / (P_seize * exchange_rate_seize),
/// every step truncated so the borrower is never over-seized.
SeizeQuote quote_seize(Wad repay_amount, Wad repay_price, Wad seize_price, Wad seize_exchange_rate, Wad incentive);

/// Pro-rata reward emission with lazily materialised per-account balances.
///
/// Each market carries a supply-side and a borrow-side index (reward per unit
/// of weight, scaled by 1e27). Half of `speed * elapsed` goes to each side; a
/// side with zero total weight has its half withheld. The remainder of each
/// index division is tracked as dust so emission balances exactly:
///   emitted = materialised + pending + withheld + index_dust + truncation,
/// where truncation is at most one raw unit per materialisation or pending
/// query, plus one for the dust itself.
class RewardDistributor {
  public:
    using Index = boost::multiprecision::int256_t;
    static constexpr int128 kIndexScale = static_cast<int128>(1'000'000'000) * Wad::kScale;

    RewardDistributor() = default;
    explicit RewardDistributor(std::vector<Wad> speeds);

    std::size_t market_count() const { return markets_.size(); }
    Wad speed(std::size_t market) const { return markets_.at(market).speed; }
    void set_speed(std::size_t market, Wad speed);

    void accrue(std::size_t market, std::int64_t elapsed_blocks, Wad total_supply_weight, Wad total_borrow_weight);

    // Settle one account's share in one market. Must be called before the
    // account's weight in that market changes. Returns the newly accrued amount.
    Wad materialize(AddressId address, std::size_t market, Wad supply_weight, Wad borrow_weight);
    Wad pending(AddressId address, std::size_t market, Wad supply_weight, Wad borrow_weight) const;

    Wad accrued(AddressId address) const;
    Wad claimed(AddressId address) const;
    // Moves everything accrued to claimed. Throws Errc::NothingAccrued when empty.
    Wad claim(AddressId address);

    Wad emitted() const;
    Wad withheld() const;
    Wad index_dust() const;
    std::uint64_t materializations() const { return materializations_; }
    std::size_t address_capacity() const { return accounts_.size(); }

  private:
    struct Market {
        Wad speed;
        Index supply_index = 0;
        Index borrow_index = 0;
        Wad emitted;
        Wad withheld;
        Index dust_scaled = 0;  // index remainders, in raw units times kIndexScale
    };
    struct Account {
        std::vector<Index> supply_index;
        std::vector<Index> borrow_index;
        Wad accrued;
        Wad claimed;
    };

    Account& account(AddressId address);
    Wad side_delta(Wad weight, const Index& now, const Index& then) const;

    std::vector<Market> markets_;
    std::vector<Account> accounts_;
    std::uint64_t materializations_ = 0;
};

struct NetRates {
    Wad supply_rate;
    Wad borrow_rate;
    std::optional<Wad> supply_reward_apy;
    std::optional<Wad> borrow_reward_apy;
    Wad net_supply_rate;  // supply rate plus reward APY
    Wad net_borrow_rate;  // borrow rate minus reward APY; may be negative
};

/// Interest rates adjusted by the reward yield on each side. A side whose USD
/// total is zero has no reward APY.
NetRates net_rates(const LendingPool& pool, Wad reward_speed, Wad reward_price, Wad token_price,
                   std::int64_t blocks_per_year);

}  // namespace lendsim
