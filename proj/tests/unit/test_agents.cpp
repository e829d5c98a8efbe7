#include <doctest.h>

#include <cmath>

#include "gen.hpp"
#include "lendsim/agents.hpp"
#include "lendsim/error.hpp"
#include "world_fixture.hpp"

using namespace lendsim;

namespace {

AgentState make_agent(World& world, AgentCategory cat, Strategy strategy, TokenId token, double capital) {
    AgentState a;
    a.id = world.add_account(cat);
    a.category = cat;
    a.strategy = strategy;
    a.params.token = token;
    a.capital_usd = capital;
    a.rng.seed(a.id.value);
    fund_agent(world, a);
    return a;
}

// Executes a plan the way the engine does, feeding each result forward.
void execute(World& world, AddressId who, const std::vector<Intent>& plan) {
    Wad previous;
    for (const auto& intent : plan) previous = execute_intent(world, who, intent, previous);
}

Wad sum_deposits(const std::vector<LoopRound>& plan) {
    Wad s;
    for (const auto& r : plan) s += r.deposit;
    return s;
}

Wad sum_borrows(const std::vector<LoopRound>& plan) {
    Wad s;
    for (const auto& r : plan) s += r.borrow;
    return s;
}

}  // namespace

TEST_CASE("hold deposit and zero capital") {
    fixture::TwoTokenWorld f;
    GasModel gas;
    auto holder = make_agent(f.world, AgentCategory::LargeAddress, Strategy::HoldDeposit, f.dai, 5000.0);
    const auto plan = step_agent(holder, f.world, gas);
    REQUIRE(plan.size() == 1);
    CHECK(plan[0].kind == IntentKind::DepositAll);
    execute(f.world, holder.id, plan);
    CHECK(f.world.supplied_ctokens(holder.id, f.dai) == Wad::from_int(5000));

    auto broke = make_agent(f.world, AgentCategory::SmallAddress, Strategy::HoldDeposit, f.dai, 0.0);
    CHECK(step_agent(broke, f.world, gas).empty());
    CHECK(step_agent(broke, f.world, gas).empty());
}

TEST_CASE("leverage loop plan") {
    const Wad gamma = wad("0.25"), f = wad("0.75");
    const auto zero = leverage_loop_plan(Wad::from_int(100), gamma, f, 0);
    REQUIRE(zero.size() == 1);
    CHECK(zero[0].deposit == Wad::from_int(100));
    CHECK(zero[0].borrow == Wad::zero());

    const auto one = leverage_loop_plan(Wad::one(), gamma, f, 1);
    CHECK(sum_deposits(one) == wad("1.75"));
    CHECK(sum_borrows(one) == wad("0.75"));

    const auto many = leverage_loop_plan(Wad::one(), gamma, f, 200);
    CHECK(std::abs(sum_deposits(many).to_double() - 4.0) < 1e-12);
    CHECK(std::abs(sum_borrows(many).to_double() - 3.0) < 1e-12);

    CHECK_THROWS_AS(leverage_loop_plan(Wad::one(), gamma, wad("0.76"), 3), Error);
    CHECK_THROWS_AS(leverage_loop_plan(Wad::one(), gamma, f, -1), Error);
}

TEST_CASE("property: loop supply stays under the geometric cap") {
    gen::Gen g(51);
    for (int i = 0; i < 500; ++i) {
        const Wad gamma = max(g.wad_in(0, 1, 3), wad("0.05"));
        const Wad frac = wad_mul(Wad::one() - gamma, g.fraction(6));
        const int rounds = static_cast<int>(g.int_in(0, 60));
        const auto plan = leverage_loop_plan(Wad::from_int(1000), gamma, frac, rounds);
        const double cap = 1000.0 / gamma.to_double();
        CHECK(sum_deposits(plan).to_double() <= cap * (1.0 + 1e-12));
        // Geometric-series oracle for the chosen fraction.
        const double q = frac.to_double();
        const double want = 1000.0 * (1.0 - std::pow(q, rounds + 1)) / (1.0 - q);
        CHECK(std::abs(sum_deposits(plan).to_double() - want) <= 1e-9 * want);
    }
}

TEST_CASE("property: a single-token loop is never liquidatable") {
    gen::Gen g(52);
    GasModel gas;
    for (int i = 0; i < 100; ++i) {
        fixture::TwoTokenWorld f(min(max(g.wad_in(0, 1, 2), wad("0.1")), wad("0.9")));
        const AddressId lender = f.funded(AgentCategory::OnRamp, f.eth, Wad::from_int(100'000));
        f.world.deposit(lender, f.eth, Wad::from_int(100'000));
        auto looper = make_agent(f.world, AgentCategory::YieldAggregator, Strategy::LeverageLoop, f.eth,
                                 g.real_in(1000.0, 1e6));
        looper.params.loop_fraction = Wad::one() - f.world.collateral()[1].haircut;
        looper.params.loop_rounds = static_cast<int>(g.int_in(1, 30));
        execute(f.world, looper.id, step_agent(looper, f.world, gas));
        CHECK(f.world.debt(looper.id, f.eth).is_positive());
        for (int k = 0; k < 50; ++k) {
            f.set_eth(g.wad_in(0, 1'000'000, 6) + wad("0.000001"));
            CHECK_FALSE(f.world.liquidity(looper.id).liquidatable());
        }
    }
}

TEST_CASE("liquidator scan profit rule") {
    const auto setup = [](Wad liquidator_dai, GasModel gas) {
        fixture::TwoTokenWorld f;
        auto& w = f.world;
        const AddressId lender = f.funded(AgentCategory::OnRamp, f.dai, Wad::from_int(10'000));
        const AddressId borrower = f.funded(AgentCategory::SmallAddress, f.eth, Wad::one());
        const AddressId bot = f.funded(AgentCategory::LiquidatorBot, f.dai, liquidator_dai);
        w.deposit(lender, f.dai, Wad::from_int(10'000));
        w.deposit(borrower, f.eth, Wad::one());
        w.borrow(borrower, f.dai, Wad::from_int(1000));
        const bool healthy = liquidator_scan(w, gas, bot).empty();
        f.set_eth(Wad::from_int(1200));
        return std::pair{healthy, liquidator_scan(w, gas, bot)};
    };
    GasModel gas;
    gas.liquidate = Wad::from_int(20);

    const auto [healthy, big] = setup(Wad::from_int(500), gas);
    CHECK(healthy);
    REQUIRE(big.size() == 1);
    CHECK(big[0].kind == IntentKind::Liquidate);
    CHECK(big[0].amount == Wad::from_int(500));
    CHECK(big[0].profit_usd == Wad::from_int(20));

    const auto [_, small] = setup(Wad::from_int(100), gas);
    CHECK(small.empty());
}

TEST_CASE("property: liquidator scan never lists a loss") {
    gen::Gen g(53);
    for (int i = 0; i < 60; ++i) {
        fixture::TwoTokenWorld f;
        auto& w = f.world;
        GasModel gas;
        gas.liquidate = g.wad_in(0, 200);
        const AddressId lender = f.funded(AgentCategory::OnRamp, f.dai, Wad::from_int(1'000'000));
        w.deposit(lender, f.dai, Wad::from_int(1'000'000));
        for (int b = 0; b < 8; ++b) {
            const Wad eth = g.wad_in(0, 20, 4) + wad("0.01");
            const AddressId who = f.funded(AgentCategory::SmallAddress, f.eth, eth);
            w.deposit(who, f.eth, eth);
            w.borrow(who, f.dai, max(wad_mul(w.max_borrow(who, f.dai), g.fraction(3)), wad("0.001")));
        }
        const AddressId bot = f.funded(AgentCategory::LiquidatorBot, f.dai, g.wad_in(0, 50'000));
        f.set_eth(wad_mul(Wad::from_int(2000), g.wad_in(0, 1, 3) + wad("0.2")));
        const auto intents = liquidator_scan(w, gas, bot);
        for (std::size_t k = 0; k < intents.size(); ++k) {
            const auto& it = intents[k];
            CHECK_FALSE(it.profit_usd.is_negative());
            CHECK(it.profit_usd == wad_mul(wad_mul(it.amount, w.price(it.token)), wad("0.08")) - gas.liquidate);
            if (k > 0) CHECK(intents[k - 1].profit_usd >= it.profit_usd);
            CHECK(w.liquidity(it.borrower).liquidatable());
        }
        for (const auto& it : intents) {
            try {
                const auto rec = w.liquidate(bot, it.borrower, it.token, it.amount, it.seize_token);
                CHECK(rec.liquidity_after > rec.liquidity_before);
            } catch (const Error& e) {
                // An earlier liquidation in the batch can drain the bot's wallet.
                CHECK(e.code() == Errc::InsufficientBalance);
            }
        }
    }
}

TEST_CASE("micro airdrop wave") {
    const auto tokens = fixture::TwoTokenWorld::tokens();
    const auto wave = micro_airdrop_wave(1000, 3.0, TokenId{0}, tokens);
    REQUIRE(wave.size() == 1);
    CHECK(wave[0].count == 1000);
    CHECK(wave[0].strategy == Strategy::MicroAirdrop);
    CHECK(wave[0].category == AgentCategory::MicroAddress);
    CHECK(wave[0].capital.a == 3.0);
    CHECK(micro_airdrop_wave(0, 3.0, TokenId{0}, tokens).empty());
    CHECK_THROWS_AS(micro_airdrop_wave(10, 5.0, TokenId{0}, tokens), Error);
    CHECK_THROWS_AS(micro_airdrop_wave(10, 3.0, TokenId{1}, tokens), Error);

    fixture::TwoTokenWorld f;
    GasModel gas;
    auto micro = make_agent(f.world, AgentCategory::MicroAddress, Strategy::MicroAirdrop, f.dai, 3.0);
    const auto first = step_agent(micro, f.world, gas);
    REQUIRE(first.size() == 1);
    execute(f.world, micro.id, first);
    for (std::int64_t b = 1; b < 100; ++b) {
        f.world.advance_to(b);
        CHECK(step_agent(micro, f.world, gas).empty());
    }
    CHECK(f.world.ledger().size() == 1);
}

TEST_CASE("gas model and capital specs") {
    GasModel gas{Wad::from_int(1), Wad::from_int(2), Wad::from_int(3), Wad::from_int(4), Wad::from_int(5),
                 Wad::from_int(6), Wad::from_int(7)};
    CHECK(gas_cost(gas, IntentKind::Deposit) == Wad::from_int(1));
    CHECK(gas_cost(gas, IntentKind::Liquidate) == Wad::from_int(5));
    CHECK(gas_cost(gas, IntentKind::Swap) == Wad::from_int(7));
    gas.claim = -Wad::one();
    CHECK_THROWS_AS(gas.validate(), Error);

    std::mt19937_64 rng(1);
    CapitalSpec fixed{CapitalDist::Fixed, 100.0, 0.0};
    CHECK(fixed.sample(rng) == 100.0);
    CapitalSpec uni{CapitalDist::Uniform, 10.0, 20.0};
    for (int i = 0; i < 100; ++i) {
        const double v = uni.sample(rng);
        CHECK(v >= 10.0);
        CHECK(v <= 20.0);
    }
    CapitalSpec pareto{CapitalDist::Pareto, 50.0, 1.16};
    for (int i = 0; i < 100; ++i) CHECK(pareto.sample(rng) >= 50.0);
    CHECK_THROWS_AS((CapitalSpec{CapitalDist::Uniform, 20.0, 10.0}.validate()), Error);
    for (int s = 0; s <= static_cast<int>(Strategy::RateChaser); ++s) {
        CHECK(parse_strategy(to_string(static_cast<Strategy>(s))) == static_cast<Strategy>(s));
    }
}
