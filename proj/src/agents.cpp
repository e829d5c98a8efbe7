#include "lendsim/agents.hpp"

#include <algorithm>
#include <cmath>

#include "lendsim/comptroller.hpp"
#include "lendsim/error.hpp"

namespace lendsim {

std::string_view to_string(Strategy strategy) {
    switch (strategy) {
        case Strategy::HoldDeposit: return "hold_deposit";
        case Strategy::BorrowAndHold: return "borrow_and_hold";
        case Strategy::LeverageLoop: return "leverage_loop";
        case Strategy::LiquidatorBot: return "liquidator_bot";
        case Strategy::MicroAirdrop: return "micro_airdrop";
        case Strategy::RateChaser: return "rate_chaser";
    }
    return "unknown";
}

std::optional<Strategy> parse_strategy(std::string_view text) {
    for (auto s : {Strategy::HoldDeposit, Strategy::BorrowAndHold, Strategy::LeverageLoop, Strategy::LiquidatorBot,
                   Strategy::MicroAirdrop, Strategy::RateChaser}) {
        if (to_string(s) == text) return s;
    }
    return std::nullopt;
}

std::string_view to_string(IntentKind kind) {
    switch (kind) {
        case IntentKind::Deposit: return "deposit";
        case IntentKind::DepositAll: return "deposit_all";
        case IntentKind::WithdrawAll: return "withdraw_all";
        case IntentKind::Borrow: return "borrow";
        case IntentKind::BorrowFraction: return "borrow_fraction";
        case IntentKind::RepayAll: return "repay_all";
        case IntentKind::Claim: return "claim";
        case IntentKind::Liquidate: return "liquidate";
        case IntentKind::Swap: return "swap";
    }
    return "unknown";
}

void GasModel::validate() const {
    for (Wad c : {deposit, withdraw, borrow, repay, liquidate, claim, swap}) {
        if (c.is_negative()) throw Error(Errc::InvalidArgument, "gas costs must be >= 0");
    }
}

Wad gas_cost(const GasModel& gas, IntentKind kind) {
    switch (kind) {
        case IntentKind::Deposit:
        case IntentKind::DepositAll: return gas.deposit;
        case IntentKind::WithdrawAll: return gas.withdraw;
        case IntentKind::Borrow:
        case IntentKind::BorrowFraction: return gas.borrow;
        case IntentKind::RepayAll: return gas.repay;
        case IntentKind::Claim: return gas.claim;
        case IntentKind::Liquidate: return gas.liquidate;
        case IntentKind::Swap: return gas.swap;
    }
    return Wad::zero();
}

double CapitalSpec::sample(std::mt19937_64& rng) const {
    switch (dist) {
        case CapitalDist::Fixed: return a;
        case CapitalDist::Uniform: return std::uniform_real_distribution<double>(a, b)(rng);
        case CapitalDist::LogNormal: return std::lognormal_distribution<double>(std::log(a), b)(rng);
        case CapitalDist::Pareto: {
            const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
            return a / std::pow(1.0 - u, 1.0 / b);
        }
    }
    return 0.0;
}

void CapitalSpec::validate() const {
    const bool ok = [&] {
        switch (dist) {
            case CapitalDist::Fixed: return a >= 0.0;
            case CapitalDist::Uniform: return a >= 0.0 && b >= a;
            case CapitalDist::LogNormal: return a > 0.0 && b >= 0.0;
            case CapitalDist::Pareto: return a > 0.0 && b > 0.0;
        }
        return false;
    }();
    if (!ok || !std::isfinite(a) || !std::isfinite(b)) throw Error(Errc::InvalidArgument, "invalid capital distribution");
}

bool should_claim(Wad reward_value_usd, Wad claim_gas_usd, Wad threshold) {
    return reward_value_usd.is_positive() && reward_value_usd >= wad_mul(threshold, claim_gas_usd);
}

void fund_agent(World& world, AgentState& agent) {
    if (!(agent.capital_usd > 0.0)) return;
    const Wad usd = Wad::from_double(agent.capital_usd);
    if (!usd.is_positive() || !agent.params.token) return;
    const TokenId token = *agent.params.token;
    world.inject(agent.id, token, wad_div(usd, world.price(token)));
    agent.injected_usd += usd;
    if (agent.strategy == Strategy::BorrowAndHold && agent.params.borrow_token) {
        const Wad buffer = wad_mul(usd, agent.params.repay_buffer);
        if (buffer.is_positive()) {
            world.inject(agent.id, *agent.params.borrow_token, wad_div(buffer, world.price(*agent.params.borrow_token)));
            agent.injected_usd += buffer;
        }
    }
}

namespace {

Intent make(IntentKind kind, TokenId token, Wad amount = Wad::zero()) {
    Intent i;
    i.kind = kind;
    i.token = token;
    i.amount = amount;
    return i;
}

Intent redeposit(TokenId token) {
    Intent i = make(IntentKind::Deposit, token);
    i.use_previous = true;
    return i;
}

double uniform(std::mt19937_64& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

Wad wallet_of(const World& world, AddressId who, TokenId token) { return world.account(who).wallet.at(token.value); }

void maybe_claim(const AgentState& agent, const World& world, const GasModel& gas, std::vector<Intent>& out) {
    const auto reward = world.reward_token();
    if (!reward || agent.params.claim_interval <= 0) return;
    if (world.clock().block() % agent.params.claim_interval != 0) return;
    const Wad balance = world.reward_balance(agent.id);
    if (!balance.is_positive()) return;
    const Wad value = wad_mul(balance, world.price(*reward));
    if (should_claim(value, gas.claim, agent.params.claim_threshold)) out.push_back(make(IntentKind::Claim, *reward));
}

void step_hold(AgentState& agent, const World& world, bool first, std::vector<Intent>& out) {
    const TokenId t = *agent.params.token;
    if (first) {
        if (wallet_of(world, agent.id, t).is_positive()) out.push_back(make(IntentKind::DepositAll, t));
        return;
    }
    const double u = uniform(agent.rng);
    if (world.supplied_ctokens(agent.id, t).is_positive()) {
        if (u < agent.params.exit_prob) out.push_back(make(IntentKind::WithdrawAll, t));
    } else if (wallet_of(world, agent.id, t).is_positive() && u < agent.params.reenter_prob) {
        out.push_back(make(IntentKind::DepositAll, t));
    }
}

void open_loan(AgentState& agent, std::vector<Intent>& out) {
    const TokenId b = *agent.params.borrow_token;
    out.push_back(make(IntentKind::BorrowFraction, b, agent.params.borrow_fraction));
    if (uniform(agent.rng) < agent.params.redeposit_prob) out.push_back(redeposit(b));
}

void step_borrow_and_hold(AgentState& agent, const World& world, bool first, std::vector<Intent>& out) {
    const TokenId t = *agent.params.token;
    const TokenId b = *agent.params.borrow_token;
    if (first) {
        if (!wallet_of(world, agent.id, t).is_positive()) return;
        out.push_back(make(IntentKind::DepositAll, t));
        open_loan(agent, out);
        return;
    }
    const double u = uniform(agent.rng);
    if (world.debt(agent.id, b).is_positive()) {
        if (u < agent.params.repay_prob) {
            if (b != t && world.supplied_ctokens(agent.id, b).is_positive()) {
                out.push_back(make(IntentKind::WithdrawAll, b));
            }
            out.push_back(make(IntentKind::RepayAll, b));
        }
    } else if (u < agent.params.reborrow_prob && world.supplied_ctokens(agent.id, t).is_positive()) {
        open_loan(agent, out);
    }
}

void step_loop(AgentState& agent, const World& world, const GasModel& gas, bool first, std::vector<Intent>& out) {
    if (!first) return;
    const TokenId t = *agent.params.token;
    const Wad capital = wallet_of(world, agent.id, t);
    if (!capital.is_positive()) return;
    const auto market = world.market_of(t);
    if (!market) return;
    const auto plan = leverage_loop_plan(capital, world.collateral()[*market].haircut, agent.params.loop_fraction,
                                         agent.params.loop_rounds);
    const Wad price = world.price(t);
    const Wad round_gas = gas.borrow + gas.deposit;
    out.push_back(make(IntentKind::Deposit, t, plan.front().deposit));
    for (const auto& round : plan) {
        if (!round.borrow.is_positive()) break;
        if (wad_mul(round.borrow, price) < round_gas) break;
        Intent borrow = make(IntentKind::Borrow, t, round.borrow);
        borrow.clamp = true;
        out.push_back(borrow);
        out.push_back(redeposit(t));
    }
}

void step_rate_chaser(AgentState& agent, const World& world, std::vector<Intent>& out) {
    const TokenId t = *agent.params.token;
    if (uniform(agent.rng) >= agent.params.reaction_prob) return;
    const auto market = world.market_of(t);
    if (!market) return;
    const auto reward = world.reward_token();
    const Wad reward_price = reward ? world.prices()[reward->value] : Wad::zero();
    const NetRates rates = net_rates(world.pool(*market), world.rewards().speed(*market), reward_price, world.price(t),
                                     world.clock().blocks_per_year());
    const bool in = world.supplied_ctokens(agent.id, t).is_positive();
    if (!in && wallet_of(world, agent.id, t).is_positive() && rates.net_supply_rate > agent.params.rate_threshold) {
        out.push_back(make(IntentKind::DepositAll, t));
    } else if (in && rates.net_supply_rate < agent.params.rate_threshold - agent.params.rate_hysteresis) {
        out.push_back(make(IntentKind::WithdrawAll, t));
    }
}

}  // namespace

std::vector<Intent> step_agent(AgentState& agent, const World& world, const GasModel& gas) {
    std::vector<Intent> out;
    if (world.clock().block() < agent.start_block || !agent.params.token) return out;
    const bool first = !agent.started;
    agent.started = true;
    if (first && !(agent.capital_usd > 0.0)) return out;
    switch (agent.strategy) {
        case Strategy::HoldDeposit: step_hold(agent, world, first, out); break;
        case Strategy::BorrowAndHold: step_borrow_and_hold(agent, world, first, out); break;
        case Strategy::LeverageLoop: step_loop(agent, world, gas, first, out); break;
        case Strategy::RateChaser: step_rate_chaser(agent, world, out); break;
        case Strategy::MicroAirdrop:
            if (first) out.push_back(make(IntentKind::DepositAll, *agent.params.token));
            return out;
        case Strategy::LiquidatorBot: break;
    }
    maybe_claim(agent, world, gas, out);
    return out;
}

Wad execute_intent(World& world, AddressId who, const Intent& intent, Wad previous) {
    const TokenId t = intent.token;
    switch (intent.kind) {
        case IntentKind::Deposit: {
            const Wad amount = intent.use_previous ? previous : intent.amount;
            world.deposit(who, t, amount);
            return amount;
        }
        case IntentKind::DepositAll: {
            const Wad amount = world.account(who).wallet.at(t.value);
            world.deposit(who, t, amount);
            return amount;
        }
        case IntentKind::WithdrawAll: {
            const Wad ctokens = world.max_withdraw_ctokens(who, t);
            if (!ctokens.is_positive()) throw Error(Errc::InsufficientBalance, "nothing withdrawable");
            return world.withdraw(who, t, ctokens);
        }
        case IntentKind::Borrow: {
            Wad amount = intent.use_previous ? previous : intent.amount;
            if (intent.clamp) amount = min(amount, world.max_borrow(who, t));
            world.borrow(who, t, amount);
            return amount;
        }
        case IntentKind::BorrowFraction: {
            const LiquiditySummary s = world.liquidity(who);
            const Wad room = wad_mul(s.borrow_limit_usd, intent.amount) - s.debt_usd;
            if (!room.is_positive()) throw Error(Errc::BorrowLimit, "already at the target borrow level");
            const Wad amount = min(wad_div(room, world.price(t)), world.max_borrow(who, t));
            world.borrow(who, t, amount);
            return amount;
        }
        case IntentKind::RepayAll: {
            const Wad amount = min(world.debt(who, t), world.account(who).wallet.at(t.value));
            world.repay(who, t, amount);
            return amount;
        }
        case IntentKind::Claim: return world.claim_rewards(who);
        case IntentKind::Liquidate:
            world.liquidate(who, intent.borrower, t, intent.amount, intent.seize_token);
            return intent.amount;
        case IntentKind::Swap: {
            const Wad amount = intent.use_previous ? previous : intent.amount;
            return world.swap(who, intent.amm, t, amount);
        }
    }
    return Wad::zero();
}

std::vector<LoopRound> leverage_loop_plan(Wad capital, Wad haircut, Wad fraction, int rounds) {
    if (rounds < 0) throw Error(Errc::InvalidArgument, "loop rounds must be >= 0");
    if (capital.is_negative()) throw Error(Errc::InvalidArgument, "capital must be >= 0");
    if (fraction.is_negative() || fraction > Wad::one() - haircut) {
        throw Error(Errc::InvalidArgument, "loop fraction exceeds the collateral factor");
    }
    std::vector<LoopRound> plan;
    plan.reserve(static_cast<std::size_t>(rounds) + 1);
    Wad d = capital;
    for (int k = 0; k <= rounds; ++k) {
        const Wad b = k < rounds ? wad_mul(d, fraction) : Wad::zero();
        plan.push_back({d, b});
        d = b;
    }
    return plan;
}

std::vector<Intent> liquidator_scan(const World& world, const GasModel& gas, AddressId liquidator) {
    const auto& cfg = world.liquidation_config();
    const Wad premium = Wad::one() + cfg.incentive;
    const auto& wallet = world.account(liquidator).wallet;
    const auto pools = world.pools();
    std::vector<Intent> out;
    for (const Account& acct : world.accounts()) {
        if (acct.id == liquidator) continue;
        if (std::none_of(acct.positions.begin(), acct.positions.end(),
                         [](const AccountPosition& p) { return p.has_debt(); })) {
            continue;
        }
        if (!world.liquidity(acct.id).liquidatable()) continue;
        std::optional<Intent> best;
        for (std::size_t i = 0; i < pools.size(); ++i) {
            const TokenId ti = pools[i].token();
            const Wad debt = pools[i].debt_of(acct.positions[i]);
            const Wad held = wallet[ti.value];
            if (!debt.is_positive() || !held.is_positive()) continue;
            const Wad pi = world.price(ti);
            const Wad cap = min(max_close_amount(debt, cfg), held);
            for (std::size_t j = 0; j < pools.size(); ++j) {
                const auto& pos = acct.positions[j];
                if (!pos.ctoken_balance.is_positive()) continue;
                const TokenId tj = pools[j].token();
                const Wad pj = world.price(tj);
                const Wad available = pools[j].underlying_of(pos);
                Wad repay = min(cap, wad_div(wad_mul(available, pj), wad_mul(pi, premium)));
                for (int tries = 0; tries < 4 && repay.is_positive(); ++tries) {
                    const SeizeQuote q = quote_seize(repay, pi, pj, pools[j].exchange_rate(), cfg.incentive);
                    if (q.seize_ctokens <= pos.ctoken_balance) break;
                    repay -= Wad::from_raw(repay.raw() / 1'000'000'000 + 1);
                }
                if (!repay.is_positive()) continue;
                const Wad profit = wad_mul(wad_mul(repay, pi), cfg.incentive) - gas.liquidate;
                if (!best || profit > best->profit_usd) {
                    Intent it = make(IntentKind::Liquidate, ti, repay);
                    it.borrower = acct.id;
                    it.seize_token = tj;
                    it.profit_usd = profit;
                    best = it;
                }
            }
        }
        if (best && !best->profit_usd.is_negative()) out.push_back(*best);
    }
    std::stable_sort(out.begin(), out.end(), [](const Intent& a, const Intent& b) {
        if (a.profit_usd != b.profit_usd) return a.profit_usd > b.profit_usd;
        return a.borrower < b.borrower;
    });
    return out;
}

std::vector<AgentSpec> micro_airdrop_wave(int count, double deposit_usd, TokenId token, const TokenTable& tokens,
                                          std::int64_t start_block) {
    if (count < 0) throw Error(Errc::InvalidArgument, "wave count must be >= 0");
    if (token.value >= tokens.size() || !tokens[token].is_stablecoin) {
        throw Error(Errc::InvalidArgument, "micro deposits must be in a stablecoin");
    }
    if (!(deposit_usd > 0.0) || deposit_usd > 3.0) {
        throw Error(Errc::InvalidArgument, "micro deposits must be in (0, 3] USD");
    }
    if (count == 0) return {};
    AgentSpec spec;
    spec.category = AgentCategory::MicroAddress;
    spec.count = count;
    spec.capital = CapitalSpec{CapitalDist::Fixed, deposit_usd, 0.0};
    spec.strategy = Strategy::MicroAirdrop;
    spec.params.token = token;
    spec.start_block = start_block;
    return {spec};
}

}  // namespace lendsim
