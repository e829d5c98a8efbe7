#pragma once

#include <cstdint>

#include "lendsim/interest_model.hpp"
#include "lendsim/types.hpp"
#include "lendsim/wad.hpp"

namespace lendsim {

enum class UtilizationConvention {
    CashPlusBorrows,       // borrows / (cash + borrows)
    DepositsPlusReserves,  // borrows / (supplier claims + reserves)
};

/// One account's stake in one market.
struct AccountPosition {
    Wad ctoken_balance;
    Wad borrow_principal;
    Wad borrow_index_snapshot = Wad::one();

    bool has_debt() const { return borrow_principal.is_positive(); }
    friend bool operator==(const AccountPosition&, const AccountPosition&) = default;
};

struct PoolState {
    TokenId token;
    Wad total_cash;
    Wad total_borrows;
    Wad total_reserves;
    Wad ctoken_supply;
    Wad borrow_index = Wad::one();
    std::int64_t last_accrual_block = 0;
    RegimeSchedule schedule;
    // Underlying per cToken before the first mint.
    Wad initial_exchange_rate = Wad::one();
    UtilizationConvention convention = UtilizationConvention::CashPlusBorrows;
};

/// What one accrual step did. Reserves grow by exactly wad_mul(interest, reserve_factor).
struct AccrualRecord {
    std::int64_t block = 0;
    std::int64_t elapsed_blocks = 0;
    Wad rate_per_block;
    Wad interest;
    Wad reserve_delta;
    Wad reserve_factor;
    Wad borrows_before;
    Wad reserves_before;
};

/// A cToken market. Deposits mint cTokens at the current exchange rate
/// (underlying per cToken, non-decreasing), withdrawals redeem them, borrows
/// draw cash and repayments restore it. Rounding always favours the pool.
///
/// The pool does not know about collateral; callers check account liquidity
/// before borrow and withdraw.
class LendingPool {
  public:
    explicit LendingPool(PoolState state);
    LendingPool(TokenId token, RegimeSchedule schedule, Wad initial_exchange_rate = Wad::one(),
                UtilizationConvention convention = UtilizationConvention::CashPlusBorrows);

    const PoolState& state() const { return state_; }
    TokenId token() const { return state_.token; }

    Wad exchange_rate() const;
    Wad utilization() const;
    const InterestParams& params_at(std::int64_t block) const { return state_.schedule.active_params(block); }
    // Annual rates under the regime active at the last accrual block.
    Wad borrow_rate() const;
    Wad supply_rate() const;
    // Underlying owed to all cToken holders.
    Wad total_supplied() const;

    AccrualRecord accrue(const BlockClock& clock);

    // Returns cTokens minted. Requires amount > 0.
    Wad deposit(AccountPosition& position, Wad amount);
    Wad redeem_value(Wad ctokens) const;
    // Returns underlying paid out. Zero cTokens is a no-op.
    Wad withdraw(AccountPosition& position, Wad ctokens);
    void borrow(AccountPosition& position, Wad amount);
    // Returns the remaining debt.
    Wad repay(AccountPosition& position, Wad amount);
    void transfer_ctokens(AccountPosition& from, AccountPosition& to, Wad ctokens);

    Wad debt_of(const AccountPosition& position) const;
    Wad underlying_of(const AccountPosition& position) const;
    // Debt normalised by the borrow index; pro-rata weight for borrow rewards.
    Wad borrow_weight(const AccountPosition& position) const;

  private:
    void refresh_rate_floor();

    PoolState state_;
    Wad rate_floor_;
};

}  // namespace lendsim
