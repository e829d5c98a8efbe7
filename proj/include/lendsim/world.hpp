#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lendsim/amm_pool.hpp"
#include "lendsim/comptroller.hpp"
#include "lendsim/ctoken_pool.hpp"
#include "lendsim/ledger.hpp"
#include "lendsim/types.hpp"

namespace lendsim {

struct Account {
    AddressId id;
    AgentCategory category = AgentCategory::UnidentifiedContract;
    std::vector<Wad> wallet;                 // by TokenId
    std::vector<AccountPosition> positions;  // by market index
};

struct LiquidationRecord {
    std::int64_t block = 0;
    AddressId liquidator;
    AddressId borrower;
    TokenId repay_token;
    TokenId seize_token;
    Wad repay_amount;
    Wad repay_usd;
    Wad debt_before;
    Wad close_factor_cap;
    Wad seize_ctokens;
    Wad seize_underlying;
    Wad seize_usd;
    Wad liquidity_before;
    Wad liquidity_after;
    int wave = 0;  // 1 for shock-driven; n+1 when caused by wave-n fire sales
};

struct MarketConfig {
    CollateralConfig collateral;
    Wad reward_speed;
};

/// Full protocol state for one run: markets, accounts, AMM venues, prices and
/// the event ledger. Every mutating action validates first, so a rejected
/// action (an Error) leaves the state untouched.
class World {
  public:
    World(TokenTable tokens, std::vector<LendingPool> pools, std::vector<MarketConfig> markets,
          LiquidationConfig liquidation, std::optional<TokenId> reward_token, std::vector<AmmPool> amms,
          BlockClock clock);

    const TokenTable& tokens() const { return tokens_; }
    std::span<const LendingPool> pools() const { return pools_; }
    const LendingPool& pool(std::size_t market) const { return pools_.at(market); }
    std::optional<std::size_t> market_of(TokenId token) const;
    std::span<const CollateralConfig> collateral() const { return collateral_; }
    const LiquidationConfig& liquidation_config() const { return liquidation_; }
    const RewardDistributor& rewards() const { return rewards_; }
    std::optional<TokenId> reward_token() const { return reward_token_; }
    std::span<const AmmPool> amms() const { return amms_; }
    const BlockClock& clock() const { return clock_; }
    const Ledger& ledger() const { return ledger_; }
    Ledger take_ledger() { return std::move(ledger_); }
    std::span<const Account> accounts() const { return accounts_; }
    const Account& account(AddressId id) const { return accounts_.at(id.value); }
    std::span<const LiquidationRecord> liquidations() const { return liquidations_; }

    // Accounts get dense ids in creation order.
    AddressId add_account(AgentCategory category);

    std::span<const Wad> prices() const { return prices_; }
    Wad price(TokenId token) const;
    void set_prices(std::vector<Wad> prices);

    void advance_to(std::int64_t block);

    /// Mints tokens into a wallet (agent capital, claimed rewards).
    void inject(AddressId to, TokenId token, Wad amount);
    Wad injected(TokenId token) const { return injected_.at(token.value); }
    /// Wallets + pool cash + AMM reserves.
    Wad circulating(TokenId token) const;

    Wad deposit(AddressId who, TokenId token, Wad amount);
    Wad withdraw(AddressId who, TokenId token, Wad ctokens);
    void borrow(AddressId who, TokenId token, Wad amount);
    Wad repay(AddressId who, TokenId token, Wad amount);
    LiquidationRecord liquidate(AddressId liquidator, AddressId borrower, TokenId repay_token, Wad repay_amount,
                                TokenId seize_token, int wave = 1);
    Wad swap(AddressId who, std::size_t amm, TokenId token_in, Wad amount_in);
    Wad claim_rewards(AddressId who);
    /// Fee-free arbitrage of an AMM to `target` by `arbitrageur`, minting any
    /// shortfall into its wallet so supply accounting stays exact. Returns the
    /// token and amount paid into the pool, unrecorded (see log_swap).
    std::optional<std::pair<TokenId, Wad>> arbitrage_amm(AddressId arbitrageur, std::size_t amm, Wad target);
    /// Records a Swap event valued at the current price.
    void log_swap(AddressId who, TokenId token_in, Wad amount_in);

    std::vector<AccrualRecord> accrue_pools();
    void accrue_rewards();
    void set_reward_speed(std::size_t market, Wad speed) { rewards_.set_speed(market, speed); }
    /// Materialises every account's rewards and records RewardAccrue events.
    void settle_all_rewards();

    LiquiditySummary liquidity(AddressId who) const;
    Wad debt(AddressId who, TokenId token) const;
    Wad supplied_ctokens(AddressId who, TokenId token) const;
    // Largest borrow of `token` the account can make right now.
    Wad max_borrow(AddressId who, TokenId token) const;
    // Largest cToken redemption the account can make right now.
    Wad max_withdraw_ctokens(AddressId who, TokenId token) const;
    // Accrued plus not-yet-materialised rewards.
    Wad reward_balance(AddressId who) const;
    Wad total_borrow_weight(std::size_t market) const { return borrow_weight_.at(market); }

  private:
    std::size_t require_market(TokenId token) const;
    Account& mut_account(AddressId id) { return accounts_.at(id.value); }
    void settle_rewards(AddressId who, std::size_t market);
    void set_borrow_weight(std::size_t market, Wad before, Wad after);
    LiquiditySummary liquidity_with(const Account& acct, std::span<const AccountPosition> positions) const;
    void record(AddressId who, EventKind kind, TokenId token, Wad amount, std::optional<AddressId> counterparty = {},
                std::optional<Wad> debt_after = {});

    TokenTable tokens_;
    std::vector<LendingPool> pools_;
    std::vector<CollateralConfig> collateral_;
    std::vector<std::optional<std::size_t>> market_by_token_;
    LiquidationConfig liquidation_;
    RewardDistributor rewards_;
    std::optional<TokenId> reward_token_;
    std::vector<AmmPool> amms_;
    BlockClock clock_;
    std::int64_t last_reward_block_ = 0;
    std::vector<Wad> borrow_weight_;
    std::vector<Account> accounts_;
    std::vector<Wad> prices_;
    std::vector<Wad> injected_;
    Ledger ledger_;
    std::vector<LiquidationRecord> liquidations_;
};

}  // namespace lendsim
