#include "lendsim/ctoken_pool.hpp"

#include "lendsim/error.hpp"

namespace lendsim {

LendingPool::LendingPool(PoolState state) : state_(std::move(state)) {
    if (!state_.initial_exchange_rate.is_positive()) {
        throw Error(Errc::InvalidArgument, "initial exchange rate must be positive");
    }
    if (state_.total_cash.is_negative() || state_.total_borrows.is_negative() ||
        state_.total_reserves.is_negative() || state_.ctoken_supply.is_negative()) {
        throw Error(Errc::InvalidArgument, "pool balances must be non-negative");
    }
    rate_floor_ = state_.initial_exchange_rate;
    refresh_rate_floor();
}

LendingPool::LendingPool(TokenId token, RegimeSchedule schedule, Wad initial_exchange_rate,
                         UtilizationConvention convention)
    : LendingPool(PoolState{.token = token,
                            .schedule = std::move(schedule),
                            .initial_exchange_rate = initial_exchange_rate,
                            .convention = convention}) {}

void LendingPool::refresh_rate_floor() {
    if (!state_.ctoken_supply.is_positive()) return;
    const Wad equity = state_.total_cash + state_.total_borrows - state_.total_reserves;
    if (!equity.is_positive()) return;
    rate_floor_ = max(rate_floor_, wad_div(equity, state_.ctoken_supply));
}

Wad LendingPool::exchange_rate() const { return rate_floor_; }

Wad LendingPool::total_supplied() const { return wad_mul(state_.ctoken_supply, exchange_rate()); }

Wad LendingPool::utilization() const {
    const Wad borrows = state_.total_borrows;
    if (borrows.is_zero()) return Wad::zero();
    Wad denom = state_.convention == UtilizationConvention::CashPlusBorrows
                    ? state_.total_cash + borrows
                    : total_supplied() + state_.total_reserves;
    if (!denom.is_positive()) return Wad::zero();
    return min(wad_div(borrows, denom), Wad::one());
}

Wad LendingPool::borrow_rate() const {
    return lendsim::borrow_rate(params_at(state_.last_accrual_block), utilization());
}

Wad LendingPool::supply_rate() const {
    return lendsim::supply_rate(params_at(state_.last_accrual_block), utilization());
}

AccrualRecord LendingPool::accrue(const BlockClock& clock) {
    const std::int64_t block = clock.block();
    if (block < state_.last_accrual_block) throw Error(Errc::OutOfOrder, "clock is behind the last accrual");
    AccrualRecord rec;
    rec.block = block;
    rec.elapsed_blocks = block - state_.last_accrual_block;
    rec.borrows_before = state_.total_borrows;
    rec.reserves_before = state_.total_reserves;
    const InterestParams& params = params_at(block);
    rec.reserve_factor = params.reserve_factor;
    if (rec.elapsed_blocks == 0) return rec;

    const Wad annual = lendsim::borrow_rate(params, utilization());
    rec.rate_per_block = annual.div_int(clock.blocks_per_year());
    const Wad simple_factor = rec.rate_per_block.times(rec.elapsed_blocks);
    rec.interest = wad_mul(state_.total_borrows, simple_factor);
    rec.reserve_delta = wad_mul(rec.interest, params.reserve_factor);

    state_.total_borrows += rec.interest;
    state_.total_reserves += rec.reserve_delta;
    if (state_.total_borrows.is_positive()) state_.borrow_index += wad_mul(state_.borrow_index, simple_factor);
    state_.last_accrual_block = block;
    refresh_rate_floor();
    return rec;
}

Wad LendingPool::deposit(AccountPosition& position, Wad amount) {
    if (!amount.is_positive()) throw Error(Errc::ZeroAmount, "deposit amount must be positive");
    const Wad minted = wad_div(amount, exchange_rate());
    if (minted.is_zero()) throw Error(Errc::OutputZero, "deposit too small to mint any cTokens");
    state_.total_cash += amount;
    state_.ctoken_supply += minted;
    position.ctoken_balance += minted;
    refresh_rate_floor();
    return minted;
}

Wad LendingPool::redeem_value(Wad ctokens) const { return wad_mul(ctokens, exchange_rate()); }

Wad LendingPool::withdraw(AccountPosition& position, Wad ctokens) {
    if (ctokens.is_negative()) throw Error(Errc::InvalidArgument, "negative redemption");
    if (ctokens.is_zero()) return Wad::zero();
    if (ctokens > position.ctoken_balance) throw Error(Errc::InsufficientBalance, "insufficient cToken balance");
    const Wad returned = redeem_value(ctokens);
    if (returned > state_.total_cash) throw Error(Errc::InsufficientCash, "insufficient pool cash for redemption");
    state_.total_cash -= returned;
    state_.ctoken_supply -= ctokens;
    position.ctoken_balance -= ctokens;
    refresh_rate_floor();
    return returned;
}

void LendingPool::borrow(AccountPosition& position, Wad amount) {
    if (!amount.is_positive()) throw Error(Errc::ZeroAmount, "borrow amount must be positive");
    if (amount > state_.total_cash) throw Error(Errc::InsufficientCash, "insufficient pool cash for borrow");
    const Wad debt = debt_of(position) + amount;
    position.borrow_principal = debt;
    position.borrow_index_snapshot = state_.borrow_index;
    state_.total_cash -= amount;
    state_.total_borrows += amount;
}

Wad LendingPool::repay(AccountPosition& position, Wad amount) {
    if (!amount.is_positive()) throw Error(Errc::ZeroAmount, "repay amount must be positive");
    const Wad debt = debt_of(position);
    if (amount > debt) throw Error(Errc::Overpayment, "repayment exceeds outstanding debt");
    const Wad remaining = debt - amount;
    position.borrow_principal = remaining;
    position.borrow_index_snapshot = state_.borrow_index;
    state_.total_cash += amount;
    // Per-account truncation can leave the sum of debts a few units above
    // total_borrows; saturate rather than go negative.
    state_.total_borrows = max(Wad::zero(), state_.total_borrows - amount);
    refresh_rate_floor();
    return remaining;
}

void LendingPool::transfer_ctokens(AccountPosition& from, AccountPosition& to, Wad ctokens) {
    if (ctokens.is_negative()) throw Error(Errc::InvalidArgument, "negative transfer");
    if (ctokens > from.ctoken_balance) throw Error(Errc::InsufficientBalance, "insufficient cToken balance");
    from.ctoken_balance -= ctokens;
    to.ctoken_balance += ctokens;
}

Wad LendingPool::debt_of(const AccountPosition& position) const {
    if (position.borrow_principal.is_zero()) return Wad::zero();
    return wad_mul_div(position.borrow_principal, state_.borrow_index, position.borrow_index_snapshot);
}

Wad LendingPool::underlying_of(const AccountPosition& position) const { return redeem_value(position.ctoken_balance); }

Wad LendingPool::borrow_weight(const AccountPosition& position) const {
    if (position.borrow_principal.is_zero()) return Wad::zero();
    return wad_div(position.borrow_principal, position.borrow_index_snapshot);
}

}  // namespace lendsim
