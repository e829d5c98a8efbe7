#include "lendsim/engine.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

namespace lendsim {

double BlockLiquidation::share() const {
    if (!outstanding_usd.is_positive()) return 0.0;
    return repay_usd.to_double() / outstanding_usd.to_double();
}

std::vector<PriceSeries> build_price_series(const Scenario& s) {
    const std::int64_t h = s.horizon_blocks;
    std::vector<std::optional<PriceSeries>> out(s.tokens.size());
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
        const TokenId t{static_cast<std::uint32_t>(i)};
        const OracleSpec& o = s.oracles[i];
        if (std::find(s.correlated.begin(), s.correlated.end(), t) != s.correlated.end()) continue;
        switch (o.source) {
            case PriceSource::Constant:
            case PriceSource::AmmCoupled: out[i] = constant_series(t, o.price, h); break;
            case PriceSource::Scripted: out[i] = scripted_series(t, o.points, h); break;
            case PriceSource::GBM:
                out[i] = generate_gbm(t, derive_seed(s.seed, i), o.gbm, h, s.seconds_per_block);
                break;
            case PriceSource::File: {
                std::ifstream in(o.file);
                if (!in) throw Error(Errc::Io, "cannot open price file '" + o.file.string() + "'");
                out[i] = load_price_csv(in, t, h, s.seconds_per_block);
                break;
            }
        }
    }
    if (!s.correlated.empty()) {
        std::vector<GbmParams> params;
        for (TokenId t : s.correlated) params.push_back(s.oracles[t.value].gbm);
        auto paths = generate_correlated_gbm(s.correlated, derive_seed(s.seed, 500'000), params, s.correlation, h,
                                             s.seconds_per_block);
        for (auto& p : paths) out[p.token().value] = std::move(p);
    }
    for (const auto& shock : s.shocks) {
        out[shock.token.value] = apply_shock(*out[shock.token.value], shock.block, shock.multiplier);
    }
    std::vector<PriceSeries> series;
    series.reserve(out.size());
    for (auto& p : out) series.push_back(std::move(*p));
    return series;
}

namespace {

World make_world(const Scenario& s) {
    std::vector<LendingPool> pools;
    std::vector<MarketConfig> markets;
    for (const auto& p : s.pools) {
        pools.emplace_back(p.token, p.schedule, p.initial_exchange_rate, s.convention);
        markets.push_back({p.collateral, p.reward_start_block == 0 ? p.reward_speed : Wad::zero()});
    }
    std::vector<AmmPool> amms;
    for (const auto& a : s.amms) amms.emplace_back(a.token_x, a.token_y, a.reserve_x, a.reserve_y, a.fee);
    return World(s.tokens, std::move(pools), std::move(markets), s.liquidation, s.reward_token, std::move(amms),
                 BlockClock(s.seconds_per_block, 0));
}

}  // namespace

Simulation::Simulation(Scenario scenario)
    : scenario_(std::move(scenario)), series_(build_price_series(scenario_)), world_(make_world(scenario_)) {
    // Address layout: agent blocks by first_address when given, else in file order.
    std::vector<std::size_t> order(scenario_.agents.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scenario_.agents[a].first_address.value_or(0) < scenario_.agents[b].first_address.value_or(0);
    });
    for (std::size_t spec_index : order) {
        const AgentSpec& spec = scenario_.agents[spec_index];
        for (int k = 0; k < spec.count; ++k) {
            AgentState a;
            a.id = world_.add_account(spec.category);
            a.spec_index = spec_index;
            a.category = spec.category;
            a.strategy = spec.strategy;
            a.params = spec.params;
            a.start_block = spec.start_block;
            a.rng.seed(derive_seed(scenario_.seed, 1'000'000 + a.id.value));
            a.capital_usd = spec.capital.sample(a.rng);
            agent_by_address_.push_back(agents_.size());
            agents_.push_back(std::move(a));
        }
    }
    if (scenario_.oracle_amm_coupling && !scenario_.amms.empty()) {
        arbitrageur_ = world_.add_account(AgentCategory::DecentralizedExchange);
    }
}

void Simulation::update_oracle(std::int64_t t) {
    std::vector<Wad> prices(series_.size());
    for (std::size_t i = 0; i < series_.size(); ++i) prices[i] = series_[i].price_at(t);
    std::vector<std::pair<TokenId, Wad>> swaps;
    if (arbitrageur_) {
        for (std::size_t a = 0; a < scenario_.amms.size(); ++a) {
            const AmmSpec& spec = scenario_.amms[a];
            const auto& x_series = series_[spec.token_x.value];
            std::optional<Wad> target;
            if (t == 0) {
                target = wad_div(x_series.price_at(0), prices[spec.token_y.value]);
            } else {
                const Wad ratio = wad_div(x_series.price_at(t), x_series.price_at(t - 1));
                if (ratio != Wad::one()) target = wad_mul(world_.amms()[a].spot_price(), ratio);
            }
            if (target && target->is_positive()) {
                if (auto paid = world_.arbitrage_amm(*arbitrageur_, a, *target)) swaps.push_back(*paid);
            }
            const Wad coupled = wad_mul(world_.amms()[a].spot_price(), prices[spec.token_y.value]);
            prices[spec.token_x.value] = coupled.is_positive() ? coupled : Wad::from_raw(1);
        }
    }
    world_.set_prices(std::move(prices));
    for (const auto& [token, amount] : swaps) world_.log_swap(*arbitrageur_, token, amount);
}

void Simulation::reject(std::int64_t t, AddressId who, const Intent& intent, const Error& e) {
    rejections_.push_back({t, who, intent.kind, intent.token, intent.amount, e.code(), e.what()});
}

void Simulation::step_agents(std::int64_t t) {
    for (AgentState& agent : agents_) {
        if (t < agent.start_block) continue;
        if (t == agent.start_block && !agent.started) fund_agent(world_, agent);
        const auto intents = step_agent(agent, world_, scenario_.gas);
        Wad previous;
        for (const Intent& intent : intents) {
            try {
                const Wad moved = execute_intent(world_, agent.id, intent, previous);
                previous = moved;
                agent.gas_usd += gas_cost(scenario_.gas, intent.kind);
                switch (intent.kind) {
                    case IntentKind::Deposit:
                    case IntentKind::DepositAll: agent.deposited_usd += wad_mul(moved, world_.price(intent.token)); break;
                    case IntentKind::Borrow:
                    case IntentKind::BorrowFraction: agent.borrowed_usd += wad_mul(moved, world_.price(intent.token)); break;
                    case IntentKind::Claim: agent.reward_claimed += moved; break;
                    default: break;
                }
            } catch (const Error& e) {
                previous = Wad::zero();
                reject(t, agent.id, intent, e);
            }
        }
    }
}

void Simulation::fire_sale(AgentState& bot, TokenId token, std::int64_t t, bool& coupled_sale) {
    Intent withdraw;
    withdraw.kind = IntentKind::WithdrawAll;
    withdraw.token = token;
    Wad received;
    try {
        received = execute_intent(world_, bot.id, withdraw, Wad::zero());
        bot.gas_usd += scenario_.gas.withdraw;
    } catch (const Error& e) {
        reject(t, bot.id, withdraw, e);
        return;
    }
    const auto amms = world_.amms();
    for (std::size_t a = 0; a < amms.size(); ++a) {
        if (!amms[a].holds(token)) continue;
        Intent swap;
        swap.kind = IntentKind::Swap;
        swap.token = token;
        swap.amount = received;
        swap.amm = a;
        try {
            execute_intent(world_, bot.id, swap, Wad::zero());
            bot.gas_usd += scenario_.gas.swap;
            if (arbitrageur_ && scenario_.amms[a].token_x == token) coupled_sale = true;
        } catch (const Error& e) {
            reject(t, bot.id, swap, e);
        }
        return;
    }
}

void Simulation::run_liquidations(std::int64_t t) {
    BlockLiquidation block;
    block.block = t;
    for (const auto& pool : world_.pools()) {
        block.outstanding_usd += wad_mul(pool.state().total_borrows, world_.price(pool.token()));
    }
    block.wave = prev_fire_sale_ ? prev_wave_ + 1 : 1;
    std::set<std::uint32_t> liquidated;
    bool coupled_sale = false;
    for (AgentState& bot : agents_) {
        if (bot.strategy != Strategy::LiquidatorBot || t < bot.start_block) continue;
        const auto intents = liquidator_scan(world_, scenario_.gas, bot.id);
        std::set<std::uint32_t> seized_tokens;
        for (const Intent& intent : intents) {
            if (liquidated.count(intent.borrower.value)) continue;
            try {
                const LiquidationRecord rec =
                    world_.liquidate(bot.id, intent.borrower, intent.token, intent.amount, intent.seize_token, block.wave);
                liquidated.insert(intent.borrower.value);
                bot.gas_usd += scenario_.gas.liquidate;
                block.repay_usd += rec.repay_usd;
                ++block.count;
                seized_tokens.insert(intent.seize_token.value);
                if (intent.borrower.value < agent_by_address_.size()) {
                    ++agents_[agent_by_address_[intent.borrower.value]].liquidated_count;
                }
            } catch (const Error& e) {
                reject(t, bot.id, intent, e);
            }
        }
        if (bot.params.fire_sale) {
            for (std::uint32_t tok : seized_tokens) fire_sale(bot, TokenId{tok}, t, coupled_sale);
        }
    }
    if (block.count > 0) {
        liquidation_blocks_.push_back(block);
        prev_wave_ = block.wave;
    } else {
        prev_wave_ = 0;
    }
    prev_fire_sale_ = coupled_sale;
}

void Simulation::take_snapshot(std::int64_t t) {
    for (const auto& pool : world_.pools()) {
        const PoolState& st = pool.state();
        snapshots_.push_back({t, pool.token(), st.total_cash, st.total_borrows, st.total_reserves, st.ctoken_supply,
                              pool.exchange_rate(), pool.utilization(), pool.borrow_rate(), pool.supply_rate()});
    }
    for (const Account& acct : world_.accounts()) {
        const bool has_debt = std::any_of(acct.positions.begin(), acct.positions.end(),
                                          [](const AccountPosition& p) { return p.has_debt(); });
        if (!has_debt) continue;
        const LiquiditySummary s = world_.liquidity(acct.id);
        risk_.push_back({t, acct.id, s.liquidity, s.collateral_usd, s.debt_usd});
    }
    for (std::size_t i = 0; i < world_.prices().size(); ++i) {
        prices_.push_back({t, TokenId{static_cast<std::uint32_t>(i)}, world_.prices()[i]});
    }
    const auto amms = world_.amms();
    for (std::size_t a = 0; a < amms.size(); ++a) {
        amm_.push_back({t, a, amms[a].reserve_x(), amms[a].reserve_y(), amms[a].spot_price(), amms[a].lp_supply()});
    }
}

void Simulation::step() {
    if (done()) throw Error(Errc::OutOfRange, "simulation already finished");
    const std::int64_t t = next_block_;
    if (t > 0) world_.advance_to(t);
    update_oracle(t);
    last_accruals_ = world_.accrue_pools();
    for (std::size_t m = 0; m < scenario_.pools.size(); ++m) {
        if (t > 0 && scenario_.pools[m].reward_start_block == t) world_.set_reward_speed(m, scenario_.pools[m].reward_speed);
    }
    world_.accrue_rewards();
    step_agents(t);
    run_liquidations(t);
    if (t % scenario_.snapshot_interval == 0 || t + 1 == scenario_.horizon_blocks) take_snapshot(t);
    ++next_block_;
}

RunOutput Simulation::finish() {
    while (!done()) step();
    world_.settle_all_rewards();

    RunOutput out;
    out.tokens = world_.tokens();
    out.seconds_per_block = scenario_.seconds_per_block;

    const auto reward = world_.reward_token();
    const Wad reward_price = reward ? world_.prices()[reward->value] : Wad::zero();
    for (const Account& acct : world_.accounts()) {
        AgentSummary row;
        row.address = acct.id;
        row.category = acct.category;
        Wad value;
        for (std::size_t t = 0; t < acct.wallet.size(); ++t) {
            value += wad_mul(acct.wallet[t], world_.prices()[t]);
        }
        for (std::size_t m = 0; m < world_.pools().size(); ++m) {
            const auto& pool = world_.pool(m);
            const Wad p = world_.prices()[pool.token().value];
            value += wad_mul(pool.underlying_of(acct.positions[m]), p);
            value -= wad_mul(pool.debt_of(acct.positions[m]), p);
        }
        value += wad_mul(world_.rewards().accrued(acct.id), reward_price);
        if (acct.id.value < agent_by_address_.size()) {
            const AgentState& a = agents_[agent_by_address_[acct.id.value]];
            row.total_deposited = a.deposited_usd;
            row.total_borrowed = a.borrowed_usd;
            row.reward_claimed = a.reward_claimed;
            row.liquidated_count = a.liquidated_count;
            row.pnl_usd = value - a.injected_usd - a.gas_usd;
        } else {
            row.pnl_usd = Wad::zero();
        }
        out.agents.push_back(row);
        out.rewards.push_back({acct.id, world_.rewards().accrued(acct.id), world_.rewards().claimed(acct.id)});
    }

    out.liquidations.assign(world_.liquidations().begin(), world_.liquidations().end());
    out.ledger = world_.take_ledger();
    out.snapshots = std::move(snapshots_);
    out.risk = std::move(risk_);
    out.prices = std::move(prices_);
    out.amm = std::move(amm_);
    out.rejections = std::move(rejections_);
    out.liquidation_blocks = std::move(liquidation_blocks_);

    RunSummary& s = out.summary;
    s.seed = scenario_.seed;
    s.horizon_blocks = scenario_.horizon_blocks;
    s.events = out.ledger.size();
    s.liquidations = out.liquidations.size();
    for (const auto& b : out.liquidation_blocks) {
        s.liquidation_usd += b.repay_usd;
        s.max_block_liquidated_share = std::max(s.max_block_liquidated_share, b.share());
        s.cascade_waves = std::max(s.cascade_waves, b.wave);
    }
    s.rejected_intents = out.rejections.size();
    for (const auto& pool : world_.pools()) {
        s.final_borrows_usd += wad_mul(pool.state().total_borrows, world_.prices()[pool.token().value]);
    }
    s.reward_emitted = world_.rewards().emitted();
    return out;
}

RunOutput run(const Scenario& scenario) {
    Simulation sim(scenario);
    return sim.finish();
}

namespace {

template <typename Fn>
void parallel_for(std::size_t n, int parallelism, Fn&& fn) {
    const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(parallelism, 1)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        threads.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& t : threads) t.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace

std::vector<CrashRun> run_crash_experiment(const Scenario& scenario, TokenId token, std::int64_t shock_block,
                                           std::span<const Wad> multipliers, int parallelism) {
    if (token.value >= scenario.tokens.size()) throw Error(Errc::InvalidArgument, "unknown shock token");
    if (shock_block < 0 || shock_block >= scenario.horizon_blocks) {
        throw Error(Errc::OutOfRange, "shock block outside the horizon");
    }
    for (Wad m : multipliers) {
        if (!m.is_positive() || m > Wad::one()) throw Error(Errc::InvalidArgument, "crash multipliers must be in (0, 1]");
    }
    std::vector<CrashRun> runs(multipliers.size());
    parallel_for(multipliers.size(), parallelism, [&](std::size_t i) {
        Scenario s = scenario;
        s.shocks.push_back({token, shock_block, multipliers[i]});
        Simulation sim(std::move(s));
        Wad outstanding;
        while (!sim.done() && sim.next_block() < shock_block) sim.step();
        for (const auto& pool : sim.world().pools()) {
            const Wad p = sim.world().prices().empty() ? Wad::zero() : sim.world().prices()[pool.token().value];
            outstanding += wad_mul(pool.state().total_borrows, p);
        }
        const RunOutput out = sim.finish();
        CrashRun& r = runs[i];
        r.multiplier = multipliers[i];
        r.liquidations = out.liquidations.size();
        r.per_block = out.liquidation_blocks;
        r.records = out.liquidations;
        r.cascade_waves = out.summary.cascade_waves;
        r.liquidation_usd = out.summary.liquidation_usd;
        r.outstanding_usd_at_shock = outstanding;
        if (r.outstanding_usd_at_shock.is_positive()) {
            r.liquidated_fraction = r.liquidation_usd.to_double() / r.outstanding_usd_at_shock.to_double();
        }
    });
    return runs;
}

std::vector<SweepPoint> sweep(const nlohmann::json& scenario, const std::filesystem::path& base_dir,
                              const std::string& parameter_path, const std::vector<nlohmann::json>& values,
                              int parallelism, const std::function<void(std::size_t, const RunOutput&)>& on_run) {
    if (values.empty()) throw ValidationError("values", "sweep needs at least one value");
    std::vector<Scenario> scenarios;
    scenarios.reserve(values.size());
    for (const auto& v : values) {
        nlohmann::json doc = scenario;
        apply_override(doc, parameter_path, v);
        scenarios.push_back(parse_scenario(doc, base_dir));
    }
    std::vector<SweepPoint> points(values.size());
    parallel_for(values.size(), parallelism, [&](std::size_t i) {
        const RunOutput out = run(scenarios[i]);
        points[i] = {values[i], out.summary};
        if (on_run) on_run(i, out);
    });
    return points;
}

}  // namespace lendsim
