#include "lendsim/world.hpp"

#include <string>

#include "lendsim/error.hpp"

namespace lendsim {

namespace {

constexpr Wad kRoundingMargin = Wad::from_raw(4);

std::vector<Wad> speeds_of(const std::vector<MarketConfig>& markets) {
    std::vector<Wad> out;
    out.reserve(markets.size());
    for (const auto& m : markets) out.push_back(m.reward_speed);
    return out;
}

}  // namespace

World::World(TokenTable tokens, std::vector<LendingPool> pools, std::vector<MarketConfig> markets,
             LiquidationConfig liquidation, std::optional<TokenId> reward_token, std::vector<AmmPool> amms,
             BlockClock clock)
    : tokens_(std::move(tokens)),
      pools_(std::move(pools)),
      liquidation_(liquidation),
      rewards_(speeds_of(markets)),
      reward_token_(reward_token),
      amms_(std::move(amms)),
      clock_(clock),
      last_reward_block_(clock.block()) {
    if (pools_.size() != markets.size()) throw Error(Errc::InvalidArgument, "one market config per pool required");
    market_by_token_.assign(tokens_.size(), std::nullopt);
    for (std::size_t m = 0; m < pools_.size(); ++m) {
        const auto t = pools_[m].token().value;
        if (t >= tokens_.size()) throw Error(Errc::InvalidArgument, "pool references unknown token");
        if (market_by_token_[t]) throw Error(Errc::InvalidArgument, "two pools for one token");
        market_by_token_[t] = m;
        markets[m].collateral.validate();
        collateral_.push_back(markets[m].collateral);
    }
    liquidation_.validate(collateral_);
    for (const auto& a : amms_) {
        if (a.token_x().value >= tokens_.size() || a.token_y().value >= tokens_.size()) {
            throw Error(Errc::InvalidArgument, "AMM references unknown token");
        }
    }
    if (reward_token_ && reward_token_->value >= tokens_.size()) {
        throw Error(Errc::InvalidArgument, "unknown reward token");
    }
    borrow_weight_.assign(pools_.size(), Wad::zero());
    prices_.assign(tokens_.size(), Wad::zero());
    injected_.assign(tokens_.size(), Wad::zero());
    for (const auto& a : amms_) {
        injected_[a.token_x().value] += a.reserve_x();
        injected_[a.token_y().value] += a.reserve_y();
    }
}

std::optional<std::size_t> World::market_of(TokenId token) const {
    if (token.value >= market_by_token_.size()) return std::nullopt;
    return market_by_token_[token.value];
}

std::size_t World::require_market(TokenId token) const {
    auto m = market_of(token);
    if (!m) throw Error(Errc::InvalidArgument, "no lending market for token " + std::to_string(token.value));
    return *m;
}

AddressId World::add_account(AgentCategory category) {
    Account acct;
    acct.id = AddressId{static_cast<std::uint32_t>(accounts_.size())};
    acct.category = category;
    acct.wallet.assign(tokens_.size(), Wad::zero());
    acct.positions.assign(pools_.size(), AccountPosition{});
    accounts_.push_back(std::move(acct));
    return accounts_.back().id;
}

Wad World::price(TokenId token) const {
    if (token.value >= prices_.size() || !prices_[token.value].is_positive()) {
        throw Error(Errc::MissingPrice, "no price for token " + std::to_string(token.value));
    }
    return prices_[token.value];
}

void World::set_prices(std::vector<Wad> prices) {
    if (prices.size() != tokens_.size()) throw Error(Errc::InvalidArgument, "one price per token required");
    prices_ = std::move(prices);
}

void World::advance_to(std::int64_t block) { clock_.advance_to(block); }

void World::inject(AddressId to, TokenId token, Wad amount) {
    if (amount.is_negative()) throw Error(Errc::InvalidArgument, "negative injection");
    mut_account(to).wallet.at(token.value) += amount;
    injected_.at(token.value) += amount;
}

Wad World::circulating(TokenId token) const {
    Wad total;
    for (const auto& a : accounts_) total += a.wallet[token.value];
    if (auto m = market_of(token)) total += pools_[*m].state().total_cash;
    for (const auto& a : amms_) {
        if (a.holds(token)) total += a.reserve_of(token);
    }
    return total;
}

void World::record(AddressId who, EventKind kind, TokenId token, Wad amount, std::optional<AddressId> counterparty,
                   std::optional<Wad> debt_after) {
    Event e;
    e.block = clock_.block();
    e.address = who;
    e.kind = kind;
    e.token = token;
    e.amount = amount;
    e.usd_value = wad_mul(amount, price(token));
    e.counterparty = counterparty;
    e.debt_after = debt_after;
    ledger_.append(e);
}

void World::settle_rewards(AddressId who, std::size_t market) {
    const Account& acct = account(who);
    const auto& pos = acct.positions[market];
    rewards_.materialize(who, market, pos.ctoken_balance, pools_[market].borrow_weight(pos));
}

void World::set_borrow_weight(std::size_t market, Wad before, Wad after) {
    borrow_weight_[market] = borrow_weight_[market] - before + after;
}

LiquiditySummary World::liquidity_with(const Account&, std::span<const AccountPosition> positions) const {
    return account_liquidity(positions, pools_, collateral_, prices_);
}

LiquiditySummary World::liquidity(AddressId who) const {
    const Account& acct = account(who);
    return liquidity_with(acct, acct.positions);
}

Wad World::debt(AddressId who, TokenId token) const {
    const std::size_t m = require_market(token);
    return pools_[m].debt_of(account(who).positions[m]);
}

Wad World::supplied_ctokens(AddressId who, TokenId token) const {
    return account(who).positions[require_market(token)].ctoken_balance;
}

Wad World::deposit(AddressId who, TokenId token, Wad amount) {
    const std::size_t m = require_market(token);
    if (!amount.is_positive()) throw Error(Errc::ZeroAmount, "deposit amount must be positive");
    Account& acct = mut_account(who);
    if (acct.wallet[token.value] < amount) throw Error(Errc::InsufficientBalance, "wallet balance below deposit");
    price(token);
    settle_rewards(who, m);
    const Wad minted = pools_[m].deposit(acct.positions[m], amount);
    acct.wallet[token.value] -= amount;
    record(who, EventKind::Deposit, token, amount);
    return minted;
}

Wad World::withdraw(AddressId who, TokenId token, Wad ctokens) {
    const std::size_t m = require_market(token);
    if (ctokens.is_negative()) throw Error(Errc::InvalidArgument, "negative redemption");
    if (ctokens.is_zero()) return Wad::zero();
    Account& acct = mut_account(who);
    LendingPool& pool = pools_[m];
    if (ctokens > acct.positions[m].ctoken_balance) throw Error(Errc::InsufficientBalance, "insufficient cTokens");
    if (pool.redeem_value(ctokens) > pool.state().total_cash) {
        throw Error(Errc::InsufficientCash, "insufficient pool cash for redemption");
    }
    price(token);
    std::vector<AccountPosition> after = acct.positions;
    after[m].ctoken_balance -= ctokens;
    if (liquidity_with(acct, after).liquidity.is_negative()) {
        throw Error(Errc::Undercollateralized, "withdrawal would leave the account undercollateralized");
    }
    settle_rewards(who, m);
    const Wad returned = pool.withdraw(acct.positions[m], ctokens);
    acct.wallet[token.value] += returned;
    record(who, EventKind::Withdraw, token, returned);
    return returned;
}

void World::borrow(AddressId who, TokenId token, Wad amount) {
    const std::size_t m = require_market(token);
    if (!amount.is_positive()) throw Error(Errc::ZeroAmount, "borrow amount must be positive");
    Account& acct = mut_account(who);
    LendingPool& pool = pools_[m];
    if (amount > pool.state().total_cash) throw Error(Errc::InsufficientCash, "insufficient pool cash for borrow");
    const Wad p = price(token);
    const LiquiditySummary now = liquidity_with(acct, acct.positions);
    std::vector<AccountPosition> after = acct.positions;
    after[m].borrow_principal = pool.debt_of(after[m]) + amount;
    after[m].borrow_index_snapshot = pool.state().borrow_index;
    if (!check_borrow_allowed(now.liquidity, wad_mul(amount, p)) ||
        liquidity_with(acct, after).liquidity.is_negative()) {
        throw Error(Errc::BorrowLimit, "borrow would exceed the account's borrow limit");
    }
    settle_rewards(who, m);
    const Wad w_before = pool.borrow_weight(acct.positions[m]);
    pool.borrow(acct.positions[m], amount);
    set_borrow_weight(m, w_before, pool.borrow_weight(acct.positions[m]));
    acct.wallet[token.value] += amount;
    record(who, EventKind::Borrow, token, amount, std::nullopt, pool.debt_of(acct.positions[m]));
}

Wad World::repay(AddressId who, TokenId token, Wad amount) {
    const std::size_t m = require_market(token);
    if (!amount.is_positive()) throw Error(Errc::ZeroAmount, "repay amount must be positive");
    Account& acct = mut_account(who);
    LendingPool& pool = pools_[m];
    if (amount > pool.debt_of(acct.positions[m])) throw Error(Errc::Overpayment, "repayment exceeds debt");
    if (acct.wallet[token.value] < amount) throw Error(Errc::InsufficientBalance, "wallet balance below repayment");
    price(token);
    settle_rewards(who, m);
    const Wad w_before = pool.borrow_weight(acct.positions[m]);
    const Wad remaining = pool.repay(acct.positions[m], amount);
    set_borrow_weight(m, w_before, pool.borrow_weight(acct.positions[m]));
    acct.wallet[token.value] -= amount;
    record(who, EventKind::Repay, token, amount, std::nullopt, remaining);
    return remaining;
}

LiquidationRecord World::liquidate(AddressId liquidator, AddressId borrower, TokenId repay_token, Wad repay_amount,
                                   TokenId seize_token, int wave) {
    if (liquidator == borrower) throw Error(Errc::InvalidArgument, "self-liquidation is not allowed");
    const std::size_t mr = require_market(repay_token);
    const std::size_t ms = require_market(seize_token);
    if (!repay_amount.is_positive()) throw Error(Errc::ZeroAmount, "repay amount must be positive");
    Account& liq = mut_account(liquidator);
    Account& bor = mut_account(borrower);
    const Wad p_repay = price(repay_token);
    const Wad p_seize = price(seize_token);

    LiquidationRecord rec;
    rec.block = clock_.block();
    rec.liquidator = liquidator;
    rec.borrower = borrower;
    rec.repay_token = repay_token;
    rec.seize_token = seize_token;
    rec.repay_amount = repay_amount;
    rec.wave = wave;
    rec.liquidity_before = liquidity_with(bor, bor.positions).liquidity;
    if (!rec.liquidity_before.is_negative()) throw Error(Errc::NotLiquidatable, "account liquidity is not negative");
    LendingPool& rpool = pools_[mr];
    LendingPool& spool = pools_[ms];
    rec.debt_before = rpool.debt_of(bor.positions[mr]);
    rec.close_factor_cap = max_close_amount(rec.debt_before, liquidation_);
    if (repay_amount > rec.close_factor_cap) throw Error(Errc::ExceedsCloseFactor, "repay exceeds close factor");
    if (liq.wallet[repay_token.value] < repay_amount) {
        throw Error(Errc::InsufficientBalance, "liquidator cannot cover the repayment");
    }
    const SeizeQuote q =
        quote_seize(repay_amount, p_repay, p_seize, spool.exchange_rate(), liquidation_.incentive);
    if (q.seize_ctokens > bor.positions[ms].ctoken_balance) {
        throw Error(Errc::InsufficientCollateral, "borrower lacks the collateral to seize");
    }
    rec.repay_usd = q.repay_usd;
    rec.seize_ctokens = q.seize_ctokens;
    rec.seize_underlying = spool.redeem_value(q.seize_ctokens);
    rec.seize_usd = wad_mul(rec.seize_underlying, p_seize);

    settle_rewards(borrower, mr);
    if (ms != mr) settle_rewards(borrower, ms);
    settle_rewards(liquidator, ms);
    const Wad w_before = rpool.borrow_weight(bor.positions[mr]);
    const Wad remaining = rpool.repay(bor.positions[mr], repay_amount);
    set_borrow_weight(mr, w_before, rpool.borrow_weight(bor.positions[mr]));
    liq.wallet[repay_token.value] -= repay_amount;
    spool.transfer_ctokens(bor.positions[ms], liq.positions[ms], q.seize_ctokens);

    record(borrower, EventKind::LiquidateRepay, repay_token, repay_amount, liquidator, remaining);
    record(borrower, EventKind::LiquidateSeize, seize_token, rec.seize_underlying, liquidator);
    rec.liquidity_after = liquidity_with(bor, bor.positions).liquidity;
    liquidations_.push_back(rec);
    return rec;
}

Wad World::swap(AddressId who, std::size_t amm, TokenId token_in, Wad amount_in) {
    AmmPool& pool = amms_.at(amm);
    Account& acct = mut_account(who);
    if (!pool.holds(token_in)) throw Error(Errc::InvalidArgument, "token not in AMM pair");
    if (!amount_in.is_positive()) throw Error(Errc::ZeroAmount, "swap input must be positive");
    if (acct.wallet[token_in.value] < amount_in) throw Error(Errc::InsufficientBalance, "wallet below swap input");
    price(token_in);
    const TokenId token_out = pool.other(token_in);
    const Wad out = pool.swap_exact_in(token_in, amount_in);
    acct.wallet[token_in.value] -= amount_in;
    acct.wallet[token_out.value] += out;
    record(who, EventKind::Swap, token_in, amount_in);
    return out;
}

std::optional<std::pair<TokenId, Wad>> World::arbitrage_amm(AddressId arbitrageur, std::size_t amm, Wad target) {
    AmmPool& pool = amms_.at(amm);
    const auto [dx, dy] = pool.rebalance_to_price(target);
    Account& acct = mut_account(arbitrageur);
    auto settle = [&](TokenId token, Wad delta) {
        Wad& bal = acct.wallet[token.value];
        if (delta.is_positive()) {
            if (bal < delta) {
                injected_[token.value] += delta - bal;
                bal = delta;
            }
            bal -= delta;
        } else {
            bal -= delta;
        }
    };
    settle(pool.token_x(), dx);
    settle(pool.token_y(), dy);
    if (dx.is_positive()) return std::pair{pool.token_x(), dx};
    if (dy.is_positive()) return std::pair{pool.token_y(), dy};
    return std::nullopt;
}

void World::log_swap(AddressId who, TokenId token_in, Wad amount_in) {
    account(who);
    record(who, EventKind::Swap, token_in, amount_in);
}

Wad World::claim_rewards(AddressId who) {
    for (std::size_t m = 0; m < pools_.size(); ++m) settle_rewards(who, m);
    if (!reward_token_) throw Error(Errc::NothingAccrued, "no reward token configured");
    price(*reward_token_);
    const Wad amount = rewards_.claim(who);
    inject(who, *reward_token_, amount);
    record(who, EventKind::ClaimReward, *reward_token_, amount);
    return amount;
}

std::vector<AccrualRecord> World::accrue_pools() {
    std::vector<AccrualRecord> out;
    out.reserve(pools_.size());
    for (auto& p : pools_) out.push_back(p.accrue(clock_));
    return out;
}

void World::accrue_rewards() {
    const std::int64_t elapsed = clock_.block() - last_reward_block_;
    if (elapsed <= 0) return;
    for (std::size_t m = 0; m < pools_.size(); ++m) {
        rewards_.accrue(m, elapsed, pools_[m].state().ctoken_supply, borrow_weight_[m]);
    }
    last_reward_block_ = clock_.block();
}

void World::settle_all_rewards() {
    for (const auto& acct : accounts_) {
        const Wad before = rewards_.accrued(acct.id);
        for (std::size_t m = 0; m < pools_.size(); ++m) settle_rewards(acct.id, m);
        const Wad gained = rewards_.accrued(acct.id) - before;
        if (gained.is_positive() && reward_token_ && prices_[reward_token_->value].is_positive()) {
            record(acct.id, EventKind::RewardAccrue, *reward_token_, rewards_.accrued(acct.id));
        }
    }
}

Wad World::max_borrow(AddressId who, TokenId token) const {
    const std::size_t m = require_market(token);
    const Wad liq = liquidity(who).liquidity - kRoundingMargin;
    if (!liq.is_positive()) return Wad::zero();
    return min(wad_div(liq, price(token)), pools_[m].state().total_cash);
}

Wad World::max_withdraw_ctokens(AddressId who, TokenId token) const {
    const std::size_t m = require_market(token);
    const Account& acct = account(who);
    const LendingPool& pool = pools_[m];
    const Wad balance = acct.positions[m].ctoken_balance;
    if (balance.is_zero()) return Wad::zero();
    const Wad by_cash = wad_div(pool.state().total_cash, pool.exchange_rate());
    Wad cap = min(balance, by_cash);
    const Wad cf = collateral_[m].collateral_factor();
    const LiquiditySummary now = liquidity(who);
    if (now.debt_usd.is_positive() && cf.is_positive()) {
        const Wad slack = now.liquidity - kRoundingMargin;
        if (!slack.is_positive()) return Wad::zero();
        const Wad per_ctoken = wad_mul(wad_mul(pool.exchange_rate(), price(token)), cf);
        if (per_ctoken.is_positive()) cap = min(cap, wad_div(slack, per_ctoken));
    }
    if (cap.is_zero()) return cap;
    std::vector<AccountPosition> after = acct.positions;
    after[m].ctoken_balance -= cap;
    if (liquidity_with(acct, after).liquidity.is_negative()) return Wad::zero();
    return cap;
}

Wad World::reward_balance(AddressId who) const {
    const Account& acct = account(who);
    Wad total = rewards_.accrued(who);
    for (std::size_t m = 0; m < pools_.size(); ++m) {
        const auto& pos = acct.positions[m];
        total += rewards_.pending(who, m, pos.ctoken_balance, pools_[m].borrow_weight(pos));
    }
    return total;
}

}  // namespace lendsim
