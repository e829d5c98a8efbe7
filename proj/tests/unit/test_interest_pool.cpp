#include <doctest.h>

#include <cmath>

#include "gen.hpp"
#include "lendsim/ctoken_pool.hpp"
#include "lendsim/error.hpp"
#include "lendsim/interest_model.hpp"

using namespace lendsim;

namespace {

InterestParams example_params(Wad reserve_factor = wad("0.1")) {
    return {wad("0.02"), wad("0.20"), wad("2.00"), wad("0.80"), reserve_factor};
}

InterestParams flat(Wad rate, Wad reserve_factor) {
    return {rate, Wad::zero(), Wad::zero(), wad("0.8"), reserve_factor};
}

// Piecewise form evaluated in doubles.
double rate_oracle(const InterestParams& p, double u) {
    const double a = p.base_rate.to_double(), b = p.slope_low.to_double(), c = p.slope_high.to_double();
    const double k = p.kink.to_double();
    return u <= k ? a + b * u : a + b * k + c * (u - k);
}

Errc code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return Errc::Validation;
}

}  // namespace

TEST_CASE("kink model examples") {
    const auto p = example_params();
    CHECK(borrow_rate(p, Wad::zero()) == wad("0.02"));
    CHECK(borrow_rate(p, wad("0.8")) == wad("0.18"));
    CHECK(borrow_rate(p, wad("0.9")) == wad("0.38"));
    CHECK(supply_rate(p, Wad::zero()) == Wad::zero());
    CHECK(supply_rate(p, wad("0.5")) == wad("0.054"));
    InterestParams full{wad("0.02"), wad("0.2"), wad("2"), Wad::one(), Wad::zero()};
    CHECK(supply_rate(full, Wad::one()) == borrow_rate(full, Wad::one()));
}

TEST_CASE("kink model validation") {
    CHECK_NOTHROW(InterestParams::defaults().validate());
    CHECK(InterestParams::defaults() == example_params());
    auto bad = example_params();
    bad.slope_high = wad("0.1");
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = example_params();
    bad.kink = Wad::zero();
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = example_params();
    bad.base_rate = wad("-0.01");
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = example_params();
    bad.reserve_factor = Wad::one();
    CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("property: kink model continuity, monotonicity and spread") {
    gen::Gen g(21);
    for (int i = 0; i < 300; ++i) {
        const auto p = g.params();
        REQUIRE_NOTHROW(p.validate());
        const Wad at_kink_low = p.base_rate + wad_mul(p.slope_low, p.kink);
        CHECK(borrow_rate(p, p.kink) == at_kink_low);
        Wad prev = borrow_rate(p, Wad::zero());
        for (int k = 1; k <= 1000; k += 7) {
            const Wad u = Wad::from_int(k).div_int(1000);
            const Wad r = borrow_rate(p, u);
            CHECK(r >= prev);
            CHECK(std::abs(r.to_double() - rate_oracle(p, u.to_double())) < 1e-12);
            if (p.reserve_factor.is_positive() && u < Wad::one() && r.is_positive()) {
                CHECK(supply_rate(p, u) < r);
            }
            prev = r;
        }
    }
}

TEST_CASE("regime schedule lookup") {
    const auto p0 = example_params();
    auto p1 = example_params();
    p1.base_rate = wad("0.05");
    RegimeSchedule s({{0, p0}, {100, p1}});
    CHECK(s.active_params(0) == p0);
    CHECK(s.active_params(99) == p0);
    CHECK(s.active_params(100) == p1);
    CHECK(s.active_params(250) == p1);
    CHECK(s.regime_index(250) == 1);
    CHECK_THROWS_AS(RegimeSchedule({{5, p0}}), Error);
    CHECK_THROWS_AS(RegimeSchedule({{0, p0}, {100, p1}, {100, p0}}), Error);
}

TEST_CASE("accrual: one year of simple interest") {
    LendingPool pool(TokenId{0}, RegimeSchedule(flat(wad("0.10"), wad("0.1"))));
    AccountPosition lender, borrower;
    pool.deposit(lender, Wad::from_int(2000));
    pool.borrow(borrower, Wad::from_int(1000));
    const BlockClock clock(13, 2'425'846);
    CHECK(clock.blocks_per_year() == 2'425'846);
    const AccrualRecord rec = pool.accrue(clock);
    CHECK(rec.elapsed_blocks == 2'425'846);
    CHECK(std::abs(rec.interest.to_double() - 100.0) < 1e-8);
    CHECK(rec.interest <= Wad::from_int(100));
    CHECK(rec.reserve_delta == wad_mul(rec.interest, wad("0.1")));
    CHECK(pool.state().total_reserves == rec.reserve_delta);
    CHECK(pool.state().total_borrows == Wad::from_int(1000) + rec.interest);
    CHECK(std::abs(pool.debt_of(borrower).to_double() - 1100.0) < 1e-8);

    const Wad owed = pool.debt_of(borrower);
    CHECK(pool.repay(borrower, owed) == Wad::zero());
    CHECK_FALSE(borrower.has_debt());
}

TEST_CASE("accrual with no elapsed blocks or no borrows") {
    LendingPool pool(TokenId{0}, RegimeSchedule());
    AccountPosition lender;
    pool.deposit(lender, Wad::from_int(50));
    const PoolState before = pool.state();
    pool.accrue(BlockClock(13, 0));
    CHECK(pool.state().total_cash == before.total_cash);
    const auto rec = pool.accrue(BlockClock(13, 500));
    CHECK(rec.interest == Wad::zero());
    CHECK(pool.state().last_accrual_block == 500);
    CHECK(pool.state().total_borrows == Wad::zero());
    CHECK_THROWS_AS(pool.accrue(BlockClock(13, 10)), Error);
}

TEST_CASE("utilization conventions") {
    LendingPool pool(TokenId{0}, RegimeSchedule());
    CHECK(pool.utilization() == Wad::zero());
    AccountPosition lender, borrower;
    pool.deposit(lender, Wad::from_int(100));
    pool.borrow(borrower, Wad::from_int(50));
    CHECK(pool.utilization() == wad("0.5"));
    pool.borrow(borrower, Wad::from_int(30));
    CHECK(pool.utilization() == wad("0.8"));

    LendingPool alt(TokenId{0}, RegimeSchedule(flat(wad("0.1"), wad("0.5"))), Wad::one(),
                    UtilizationConvention::DepositsPlusReserves);
    AccountPosition l2, b2;
    alt.deposit(l2, Wad::from_int(100));
    alt.borrow(b2, Wad::from_int(50));
    alt.accrue(BlockClock(3600, 8760));
    const auto& s = alt.state();
    const Wad expect = wad_div(s.total_borrows, alt.total_supplied() + s.total_reserves);
    CHECK(alt.utilization() == expect);
}

TEST_CASE("deposit mints at the exchange rate") {
    const Wad rate = wad_div(Wad::one(), wad("46.2896"));
    LendingPool pool(TokenId{0}, RegimeSchedule(), rate);
    AccountPosition a;
    const Wad minted = pool.deposit(a, Wad::one());
    CHECK(std::abs(minted.to_double() - 46.2896) < 1e-12);
    CHECK(code_of([&] { pool.deposit(a, Wad::zero()); }) == Errc::ZeroAmount);

    LendingPool unit(TokenId{0}, RegimeSchedule());
    AccountPosition b;
    CHECK(unit.deposit(b, Wad::from_int(100)) == Wad::from_int(100));
}

TEST_CASE("redemption after the exchange rate moves") {
    // cTokens per underlying 46.2896 at deposit, 46.2859 one day later.
    PoolState s;
    s.token = TokenId{0};
    s.ctoken_supply = wad("46.2896");
    s.total_cash = wad_div(wad("46.2896"), wad("46.2859"));
    s.initial_exchange_rate = wad_div(Wad::one(), wad("46.2896"));
    LendingPool pool(s);
    AccountPosition a{wad("46.2896")};
    const Wad out = pool.withdraw(a, a.ctoken_balance);
    CHECK(std::abs(out.to_double() - 46.2896 / 46.2859) < 1e-12);
    CHECK(pool.withdraw(a, Wad::zero()) == Wad::zero());
}

TEST_CASE("withdraw and repay errors") {
    LendingPool pool(TokenId{0}, RegimeSchedule());
    AccountPosition lender, borrower;
    pool.deposit(lender, Wad::from_int(100));
    pool.borrow(borrower, Wad::from_int(90));
    CHECK(code_of([&] { pool.withdraw(lender, Wad::from_int(11)); }) == Errc::InsufficientCash);
    CHECK(code_of([&] { pool.withdraw(lender, Wad::from_int(101)); }) == Errc::InsufficientBalance);
    CHECK(code_of([&] { pool.borrow(borrower, Wad::from_int(11)); }) == Errc::InsufficientCash);
    CHECK(code_of([&] { pool.borrow(borrower, Wad::zero()); }) == Errc::ZeroAmount);
    CHECK(pool.repay(borrower, Wad::from_int(40)) == Wad::from_int(50));
    CHECK(code_of([&] { pool.repay(borrower, Wad::from_int(51)); }) == Errc::Overpayment);
    CHECK(pool.repay(borrower, Wad::from_int(50)) == Wad::zero());
}

TEST_CASE("property: random pool operations keep the books") {
    gen::Gen g(22);
    for (int round = 0; round < 40; ++round) {
        auto params = g.params();
        LendingPool pool(TokenId{0}, RegimeSchedule(params), g.wad_in(0, 2, 6) + wad("0.01"));
        std::vector<AccountPosition> acct(5);
        Wad cash_from_flows;
        Wad prev_rate = pool.exchange_rate();
        std::int64_t block = 0;
        for (int step = 0; step < 200; ++step) {
            block += g.int_in(0, 5000);
            const AccrualRecord rec = pool.accrue(BlockClock(13, block));
            CHECK(pool.state().total_reserves - rec.reserves_before == wad_mul(rec.interest, rec.reserve_factor));
            CHECK(pool.state().total_borrows - rec.borrows_before == rec.interest);
            auto& a = acct[static_cast<std::size_t>(g.int_in(0, 4))];
            const PoolState before = pool.state();
            const AccountPosition pos_before = a;
            try {
                switch (g.int_in(0, 3)) {
                    case 0: {
                        const Wad amt = g.wad_in(0, 1000);
                        pool.deposit(a, amt);
                        cash_from_flows += amt;
                        break;
                    }
                    case 1: {
                        const Wad ct = wad_mul(a.ctoken_balance, g.fraction());
                        cash_from_flows -= pool.withdraw(a, ct);
                        break;
                    }
                    case 2: {
                        const Wad amt = g.wad_in(0, 500);
                        pool.borrow(a, amt);
                        cash_from_flows -= amt;
                        break;
                    }
                    default: {
                        const Wad amt = wad_mul(pool.debt_of(a), g.fraction());
                        pool.repay(a, amt);
                        cash_from_flows += amt;
                        break;
                    }
                }
            } catch (const Error&) {
                CHECK(pool.state().total_cash == before.total_cash);
                CHECK(pool.state().ctoken_supply == before.ctoken_supply);
                CHECK(a == pos_before);
            }
            const auto& s = pool.state();
            CHECK(s.total_cash == cash_from_flows);
            CHECK_FALSE(s.total_cash.is_negative());
            CHECK_FALSE(s.total_borrows.is_negative());
            CHECK_FALSE(s.total_reserves.is_negative());
            CHECK(pool.exchange_rate() >= prev_rate);
            prev_rate = pool.exchange_rate();
        }
    }
}
