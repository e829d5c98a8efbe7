#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "gen.hpp"
#include "lendsim/analytics/features.hpp"
#include "lendsim/analytics/flows.hpp"
#include "lendsim/analytics/loans.hpp"
#include "lendsim/analytics/regression.hpp"
#include "lendsim/analytics/summary.hpp"
#include "lendsim/error.hpp"
#include "oracles.hpp"
#include "world_fixture.hpp"

using namespace lendsim;
using namespace lendsim::analytics;

namespace {

constexpr std::int64_t kSpb = 60;  // 1440 blocks per day
constexpr std::int64_t kDay = 1440;

struct Book {
    Ledger ledger;
    Book& add(std::int64_t block, std::uint32_t who, EventKind kind, std::uint32_t token, double usd,
              std::optional<double> debt_after = std::nullopt, std::optional<std::uint32_t> counterparty = {}) {
        Event e;
        e.block = block;
        e.address = AddressId{who};
        e.kind = kind;
        e.token = TokenId{token};
        e.amount = Wad::from_double(usd);
        e.usd_value = Wad::from_double(usd);
        if (debt_after) e.debt_after = Wad::from_double(*debt_after);
        if (counterparty) e.counterparty = AddressId{*counterparty};
        ledger.append(e);
        return *this;
    }
};

std::vector<MarketDay> market_days(int n, auto&& price) {
    std::vector<MarketDay> days(static_cast<std::size_t>(n));
    for (int d = 0; d < n; ++d) {
        MarketDay& m = days[static_cast<std::size_t>(d)];
        m.day = d;
        m.post = d >= 20;
        m.supply_rate = 1.0 + 0.05 * d;
        m.borrow_rate = 3.0 + 0.07 * d;
        m.supply_reward = m.post ? 2.0 + 0.01 * d : 0.0;
        m.borrow_reward = m.post ? 4.0 - 0.01 * d : 0.0;
        m.deposits_usd_m = 100.0 + d;
        m.loans_usd_m = 40.0 + 0.5 * d;
        m.price = price(d);
        m.net_deposits_usd_m = std::sin(d);
        m.new_loans_usd_m = 1.0 + std::cos(d) * 0.5;
    }
    return days;
}

oracle::Mat to_mat(const Matrix& m) {
    oracle::Mat out = oracle::zeros(m.rows, m.cols);
    for (std::size_t r = 0; r < m.rows; ++r)
        for (std::size_t c = 0; c < m.cols; ++c) out[r][c] = m(r, c);
    return out;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST_CASE("a 31-day loan") {
    Book b;
    b.add(0, 1, EventKind::Borrow, 0, 100).add(31 * kDay, 1, EventKind::Repay, 0, 100);
    const LoanBook book = reconstruct_loans(b.ledger, kSpb);
    REQUIRE(book.closed.size() == 1);
    CHECK(book.open.empty());
    const Loan& l = book.closed[0];
    CHECK(l.duration_days == 31.0);
    CHECK(l.open_block == 0);
    CHECK(l.close_block == 31 * kDay);
    CHECK(l.drawn_usd == Wad::from_int(100));
}

TEST_CASE("multi-draw loans, recorded debt and liquidations") {
    Book b;
    b.add(10, 1, EventKind::Borrow, 0, 50)
        .add(20, 1, EventKind::Borrow, 0, 30)
        .add(30, 1, EventKind::Repay, 0, 40)
        .add(40, 1, EventKind::Repay, 0, 40)
        .add(50, 2, EventKind::Borrow, 0, 100, 100.0)
        .add(60, 2, EventKind::Repay, 0, 100, 2.0)
        .add(70, 3, EventKind::Borrow, 1, 10)
        .add(80, 2, EventKind::Repay, 0, 2, 0.0)
        .add(90, 3, EventKind::LiquidateRepay, 1, 5, std::nullopt, 4)
        .add(90, 3, EventKind::LiquidateSeize, 0, 5.4, std::nullopt, 4)
        .add(100, 9, EventKind::Repay, 0, 5);
    const LoanBook book = reconstruct_loans(b.ledger, kSpb);
    REQUIRE(book.closed.size() == 2);
    const Loan& first = book.closed[0];
    CHECK(first.address == AddressId{1});
    CHECK(first.draw_events == 2);
    CHECK(first.repay_events == 2);
    CHECK(first.drawn_usd == Wad::from_int(80));
    CHECK(first.peak_debt_usd == Wad::from_int(80));
    CHECK(first.borrow_seqs == std::vector<std::uint64_t>{0, 1});
    const Loan& interest = book.closed[1];
    CHECK(interest.address == AddressId{2});
    CHECK(interest.repay_events == 2);
    CHECK(interest.close_block == 80);
    REQUIRE(book.open.size() == 1);
    CHECK(book.open[0].address == AddressId{3});
    CHECK(book.open[0].liquidation_events == 1);
    CHECK(book.open[0].duration_days == doctest::Approx(30.0 / kDay));
}

TEST_CASE("property: loan cycles partition the borrows") {
    gen::Gen g(61);
    for (int round = 0; round < 50; ++round) {
        Book b;
        std::map<std::pair<int, int>, double> debt;
        std::int64_t block = 0;
        std::size_t borrows = 0;
        for (int i = 0; i < 300; ++i) {
            block += g.int_in(0, 200);
            const int who = static_cast<int>(g.int_in(0, 5));
            const int tok = static_cast<int>(g.int_in(0, 1));
            double& d = debt[{who, tok}];
            if (d == 0.0 || g.coin()) {
                const double amt = static_cast<double>(g.int_in(1, 100));
                d += amt;
                b.add(block, static_cast<std::uint32_t>(who), EventKind::Borrow, static_cast<std::uint32_t>(tok), amt);
                ++borrows;
            } else {
                const double amt = g.coin() ? d : std::floor(d / 2.0);
                if (amt <= 0.0) continue;
                d -= amt;
                b.add(block, static_cast<std::uint32_t>(who), EventKind::Repay, static_cast<std::uint32_t>(tok), amt);
            }
        }
        const LoanBook book = reconstruct_loans(b.ledger, kSpb);
        std::vector<std::uint64_t> seqs;
        std::map<std::pair<std::uint32_t, std::uint32_t>, std::int64_t> last_close;
        for (const Loan& l : book.closed) {
            seqs.insert(seqs.end(), l.borrow_seqs.begin(), l.borrow_seqs.end());
            CHECK(l.close_block >= l.open_block);
            const auto key = std::pair{l.address.value, l.token.value};
            if (last_close.count(key)) CHECK(l.open_block >= last_close[key]);
            last_close[key] = l.close_block;
        }
        std::size_t open_keys = 0;
        for (const Loan& l : book.open) {
            seqs.insert(seqs.end(), l.borrow_seqs.begin(), l.borrow_seqs.end());
            CHECK(debt[{static_cast<int>(l.address.value), static_cast<int>(l.token.value)}] > 0.0);
            ++open_keys;
        }
        std::size_t owing = 0;
        for (const auto& [k, d] : debt) owing += d > 0.0 ? 1 : 0;
        CHECK(open_keys == owing);
        std::sort(seqs.begin(), seqs.end());
        CHECK(seqs.size() == borrows);
        CHECK(std::adjacent_find(seqs.begin(), seqs.end()) == seqs.end());
    }
}

TEST_CASE("redeposit detection") {
    Book b;
    // Borrow at 23:00 on day 0, deposit at 02:00 on day 1.
    b.add(23 * 60, 1, EventKind::Borrow, 0, 100)
        .add(kDay + 2 * 60, 1, EventKind::Deposit, 0, 100)
        // Same-day redeposit.
        .add(2 * kDay + 60, 2, EventKind::Borrow, 0, 50)
        .add(2 * kDay + 120, 2, EventKind::Deposit, 0, 50)
        // Deposit before the draw and in another token.
        .add(3 * kDay, 3, EventKind::Deposit, 0, 10)
        .add(3 * kDay + 1, 3, EventKind::Borrow, 0, 10)
        .add(3 * kDay + 2, 3, EventKind::Deposit, 1, 10);
    const auto days = detect_redeposits(b.ledger, kSpb);
    REQUIRE(days.size() == 3);
    CHECK(days[0].address == AddressId{1});
    CHECK_FALSE(days[0].redeposited_same_day);
    CHECK(days[0].redeposited_within_window);
    CHECK(days[1].redeposited_same_day);
    CHECK(days[1].redeposited_within_window);
    CHECK_FALSE(days[2].redeposited_same_day);
    CHECK_FALSE(days[2].redeposited_within_window);
    const auto narrow = detect_redeposits(b.ledger, kSpb, 3600);
    CHECK_FALSE(narrow[0].redeposited_within_window);
    CHECK(narrow[1].redeposited_within_window);
}

TEST_CASE("property: a wider window never unflags a loan day") {
    gen::Gen g(62);
    for (int round = 0; round < 30; ++round) {
        Book b;
        std::int64_t block = 0;
        for (int i = 0; i < 200; ++i) {
            block += g.int_in(0, 400);
            b.add(block, static_cast<std::uint32_t>(g.int_in(0, 4)), g.coin() ? EventKind::Borrow : EventKind::Deposit,
                  static_cast<std::uint32_t>(g.int_in(0, 1)), static_cast<double>(g.int_in(1, 1000)));
        }
        std::vector<LoanDay> prev;
        for (std::int64_t w : {0, 600, 3600, 86400, 7 * 86400}) {
            const auto cur = detect_redeposits(b.ledger, kSpb, w);
            if (!prev.empty()) {
                REQUIRE(cur.size() == prev.size());
                for (std::size_t i = 0; i < cur.size(); ++i) {
                    if (prev[i].redeposited_within_window) CHECK(cur[i].redeposited_within_window);
                    CHECK(cur[i].redeposited_same_day == prev[i].redeposited_same_day);
                }
            }
            if (w == 86400) {
                for (const auto& d : cur) {
                    if (d.redeposited_same_day) CHECK(d.redeposited_within_window);
                }
            }
            prev = cur;
        }
    }
}

TEST_CASE("concentration") {
    Book b;
    b.add(0, 1, EventKind::Deposit, 0, 75).add(1, 2, EventKind::Deposit, 0, 15).add(2, 3, EventKind::Deposit, 0, 10);
    b.add(3, 1, EventKind::Borrow, 0, 5);
    CHECK(concentration(b.ledger, Side::Deposits, 1) == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(concentration(b.ledger, Side::Deposits, 2) == doctest::Approx(0.90).epsilon(1e-15));
    CHECK(concentration(b.ledger, Side::Deposits, 10) == 1.0);
    CHECK(concentration(b.ledger, Side::Loans, 1) == 1.0);
    CHECK_THROWS_AS(concentration(b.ledger, Side::Deposits, 0), Error);
    CHECK_THROWS_AS(concentration(Ledger{}, Side::Loans, 1), Error);
}

TEST_CASE("property: concentration matches a sort oracle and is scale invariant") {
    std::mt19937_64 rng(63);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int round = 0; round < 50; ++round) {
        const int n = 5 + static_cast<int>(u(rng) * 200);
        Book plain, scaled;
        std::map<std::uint32_t, double> vol;
        for (int i = 0; i < 3 * n; ++i) {
            const auto who = static_cast<std::uint32_t>(u(rng) * n);
            const double usd = std::round(10.0 / std::pow(1.0 - u(rng), 1.0 / 1.16) * 1e6) / 1e6;
            plain.add(i, who, EventKind::Deposit, 0, usd);
            scaled.add(i, who, EventKind::Deposit, 0, usd * 8.0);
            vol[who] += usd;
        }
        std::vector<double> v;
        double total = 0.0;
        for (const auto& [a, x] : vol) {
            v.push_back(x);
            total += x;
        }
        std::sort(v.rbegin(), v.rend());
        for (std::size_t k : {1u, 3u, 10u, 1000u}) {
            double top = 0.0;
            for (std::size_t i = 0; i < std::min(k, v.size()); ++i) top += v[i];
            const double c = concentration(plain.ledger, Side::Deposits, k);
            CHECK(std::abs(c - top / total) < 1e-9);
            CHECK(std::abs(concentration(scaled.ledger, Side::Deposits, k) - c) < 1e-15);
        }
    }
}

TEST_CASE("micro filter") {
    const TokenTable tokens = fixture::TwoTokenWorld::tokens();
    Book b;
    b.add(0, 1, EventKind::Deposit, 0, 3)     // kept
        .add(0, 2, EventKind::Deposit, 0, 3.01)  // too large
        .add(0, 3, EventKind::Deposit, 1, 1)     // not a stablecoin
        .add(1, 4, EventKind::Deposit, 0, 2)     // second event follows
        .add(2, 4, EventKind::Withdraw, 0, 2)
        .add(3, 5, EventKind::Deposit, 0, 1)  // later named as a counterparty
        .add(4, 6, EventKind::LiquidateRepay, 0, 1, std::nullopt, 5)
        .add(4, 6, EventKind::LiquidateSeize, 1, 1, std::nullopt, 5)
        .add(5, 7, EventKind::Borrow, 0, 1);
    CHECK(micro_filter(b.ledger, tokens) == std::set<std::uint32_t>{1});
    CHECK(micro_filter(Ledger{}, tokens).empty());
}

TEST_CASE("flow network") {
    const TokenTable tokens = fixture::TwoTokenWorld::tokens();
    CategoryMap cats(8);
    cats[1] = AgentCategory::SmallAddress;
    cats[2] = AgentCategory::LiquidatorBot;
    cats[3] = AgentCategory::OnRamp;
    Book b;
    b.add(0, 1, EventKind::Deposit, 0, 100)
        .add(1, 1, EventKind::Deposit, 1, 5000)
        .add(2, 3, EventKind::Borrow, 0, 40)
        .add(3, 3, EventKind::Repay, 0, 10)
        .add(4, 1, EventKind::Swap, 0, 7)
        .add(5, 3, EventKind::LiquidateRepay, 0, 20, std::nullopt, 2)
        .add(5, 3, EventKind::LiquidateSeize, 0, 21.6, std::nullopt, 2)
        .add(6, 1, EventKind::RewardAccrue, 0, 1);
    const FlowNetwork net = flow_network(b.ledger, cats, tokens);
    CHECK(net.nodes.size() == kAgentCategoryCount + 2);
    CHECK(net.nodes.back() == kAmmNode);
    CHECK(net.weight("SmallAddress", kPoolNode) == Wad::from_int(100));
    CHECK(net.weight(kPoolNode, "OnRamp") == Wad::from_int(40));
    CHECK(net.weight("OnRamp", kPoolNode) == Wad::from_int(10));
    CHECK(net.weight("SmallAddress", kAmmNode) == Wad::from_int(7));
    CHECK(net.weight("LiquidatorBot", kPoolNode) == Wad::from_int(20));
    CHECK(net.weight("OnRamp", "LiquidatorBot") == wad("21.6"));
    CHECK(net.edges.size() == 6);
    for (std::size_t i = 1; i < net.edges.size(); ++i) {
        const auto pos = [&](const std::string& s) { return std::find(net.nodes.begin(), net.nodes.end(), s); };
        const auto a = std::pair{pos(net.edges[i - 1].source), pos(net.edges[i - 1].target)};
        const auto c = std::pair{pos(net.edges[i].source), pos(net.edges[i].target)};
        CHECK(a < c);
    }
    Book stray;
    stray.add(0, 7, EventKind::Deposit, 0, 1);
    CHECK_THROWS_AS(flow_network(stray.ledger, cats, tokens), Error);
}

TEST_CASE("liquidation matrix") {
    Book b;
    b.add(0, 1, EventKind::LiquidateRepay, 0, 100, 50.0, 9)
        .add(0, 1, EventKind::LiquidateSeize, 1, 108, std::nullopt, 9)
        .add(1, 2, EventKind::LiquidateRepay, 1, 30, 0.0, 9)
        .add(1, 2, EventKind::LiquidateSeize, 1, 32.4, std::nullopt, 9)
        .add(2, 3, EventKind::LiquidateRepay, 0, 5, 0.0, 9)
        .add(2, 3, EventKind::LiquidateSeize, 1, 5.4, std::nullopt, 9);
    const LiquidationMatrix m = liquidation_matrix(b.ledger, 2);
    CHECK(m.at(0, 1) == Wad::from_int(105));
    CHECK(m.at(1, 1) == Wad::from_int(30));
    CHECK(m.at(0, 0) == Wad::zero());
    CHECK(m.row_sums[0] == Wad::from_int(105));
    CHECK(m.col_sums[1] == Wad::from_int(135));
    CHECK(m.total == Wad::from_int(135));

    Book lone;
    lone.add(0, 1, EventKind::LiquidateRepay, 0, 1, 0.0, 9);
    CHECK_THROWS_AS(liquidation_matrix(lone.ledger, 2), Error);
    Book seize;
    seize.add(0, 1, EventKind::LiquidateSeize, 0, 1, std::nullopt, 9);
    CHECK_THROWS_AS(liquidation_matrix(seize.ledger, 2), Error);
    Book mismatch;
    mismatch.add(0, 1, EventKind::LiquidateRepay, 0, 1, 0.0, 9).add(0, 1, EventKind::LiquidateSeize, 1, 1, std::nullopt, 8);
    CHECK_THROWS_AS(liquidation_matrix(mismatch.ledger, 2), Error);
}

TEST_CASE("describe") {
    const Describe d = describe({5, 1, 4, 2, 3});
    CHECK(d.count == 5);
    CHECK(d.mean == 3.0);
    CHECK(d.sd == doctest::Approx(std::sqrt(2.5)));
    CHECK(d.min == 1.0);
    CHECK(d.max == 5.0);
    CHECK(d.p50 == 3.0);
    CHECK(d.p5 == doctest::Approx(1.2));
    CHECK(d.p95 == doctest::Approx(4.8));
    const Describe e = describe({});
    CHECK(e.count == 0);
    CHECK(e.mean == 0.0);
    CHECK(describe({7}).sd == 0.0);
}

TEST_CASE("summary tables") {
    const TokenTable tokens = fixture::TwoTokenWorld::tokens();
    CategoryMap cats(4);
    cats[1] = AgentCategory::SmallAddress;
    cats[2] = AgentCategory::LargeAddress;
    const SummaryReport empty = summary_tables(Ledger{}, tokens, cats, kSpb);
    REQUIRE(empty.daily.size() == 2);
    CHECK(empty.daily[0].symbol == "DAI");
    CHECK(empty.daily[0].net_deposits_usd.count == 0);
    CHECK(empty.loans.size() == kAgentCategoryCount);
    CHECK(empty.redeposits.loan_days == 0);
    CHECK(empty.redeposits.same_day_share == 0.0);
    CHECK(empty.liquidations.loans == 0);
    const auto j = to_json(empty);
    CHECK(j.contains("daily_net_deposits"));
    CHECK(j.contains("liquidations"));

    Book b;
    b.add(0, 1, EventKind::Deposit, 0, 100)
        .add(10, 1, EventKind::Borrow, 0, 40)
        .add(20, 1, EventKind::Deposit, 0, 40)
        .add(kDay, 2, EventKind::Withdraw, 0, 30)
        .add(2 * kDay, 1, EventKind::Repay, 0, 40)
        .add(2 * kDay, 2, EventKind::Borrow, 1, 10, 10.0)
        .add(2 * kDay + 5, 2, EventKind::LiquidateRepay, 1, 5, 5.0, 3)
        .add(2 * kDay + 5, 2, EventKind::LiquidateSeize, 0, 5.4, std::nullopt, 3);
    const SummaryReport r = summary_tables(b.ledger, tokens, cats, kSpb);
    CHECK(r.daily[0].net_deposits_usd.count == 3);
    CHECK(r.daily[0].net_deposits_usd.max == doctest::Approx(140.0));
    CHECK(r.daily[0].net_deposits_usd.min == doctest::Approx(-30.0));
    const auto& small = r.loans[static_cast<std::size_t>(AgentCategory::SmallAddress)];
    CHECK(small.closed_loans == 1);
    CHECK(small.mean_duration_days == doctest::Approx((2.0 * kDay - 10) / kDay));
    CHECK(r.redeposits.loan_days == 2);
    CHECK(r.redeposits.same_day == 1);
    CHECK(r.redeposits.same_day_usd_share == doctest::Approx(0.8));
    CHECK(r.liquidations.loans == 2);
    CHECK(r.liquidations.liquidated_loans == 1);
    CHECK(r.liquidations.usd_share == doctest::Approx(0.2));
}

TEST_CASE("daily regressors against a hand computation") {
    const auto days = market_days(40, [](int d) { return 100.0 * std::exp(0.01 * d + 0.03 * std::sin(d)); });
    for (Equation eq : {Equation::NetDeposits, Equation::Loans}) {
        const FeatureMatrix fm = build_features(days, eq);
        const bool supply = eq == Equation::NetDeposits;
        REQUIRE(fm.x.rows == 10);
        REQUIRE(fm.x.cols == 9);
        CHECK(fm.columns[0] == "const");
        for (std::size_t r = 0; r < fm.x.rows; ++r) {
            const int d = 30 + static_cast<int>(r);
            const MarketDay& lag = days[static_cast<std::size_t>(d - 1)];
            const MarketDay& cur = days[static_cast<std::size_t>(d)];
            CHECK(fm.days[r] == d);
            const double post = cur.post ? 1.0 : 0.0;
            const double rate = supply ? lag.supply_rate : lag.borrow_rate;
            CHECK(fm.x(r, 0) == 1.0);
            CHECK(fm.x(r, 1) == post);
            CHECK(fm.x(r, 2) == rate);
            CHECK(fm.x(r, 3) == post * rate);
            CHECK(fm.x(r, 4) == (supply ? lag.supply_reward : lag.borrow_reward));
            CHECK(fm.x(r, 5) == doctest::Approx(std::log(supply ? lag.deposits_usd_m : lag.loans_usd_m)));
            const auto price = [&](int k) { return days[static_cast<std::size_t>(k)].price; };
            CHECK(fm.x(r, 6) == doctest::Approx(100.0 * (price(d) / price(d - 1) - 1.0)));
            CHECK(fm.x(r, 7) == doctest::Approx(100.0 * (price(d) / price(d - 7) - 1.0)));
            long double sum = 0, sum2 = 0;
            for (int k = d - 29; k <= d; ++k) {
                const long double ret = price(k) / price(k - 1) - 1.0L;
                sum += ret;
                sum2 += ret * ret;
            }
            const long double var = (sum2 - sum * sum / 30.0L) / 29.0L;
            CHECK(fm.x(r, 8) == doctest::Approx(static_cast<double>(100.0L * std::sqrt(var))).epsilon(1e-9));
            CHECK(fm.y[r] == doctest::Approx(supply ? cur.net_deposits_usd_m : std::log1p(cur.new_loans_usd_m)));
        }
    }
}

TEST_CASE("regressor edge cases") {
    const auto flat = market_days(35, [](int) { return 7.0; });
    const FeatureMatrix fm = build_features(flat, Equation::NetDeposits);
    for (std::size_t r = 0; r < fm.x.rows; ++r) {
        CHECK(fm.x(r, 6) == 0.0);
        CHECK(fm.x(r, 7) == 0.0);
        CHECK(fm.x(r, 8) == 0.0);
    }
    auto gap = flat;
    gap[34].day = 40;
    CHECK_THROWS_AS(build_features(gap, Equation::NetDeposits), Error);
    CHECK_THROWS_AS(build_features(market_days(30, [](int) { return 1.0; }), Equation::Loans), Error);
    auto thin = flat;
    thin[31].deposits_usd_m = 0.0;
    CHECK(build_features(thin, Equation::NetDeposits).x.rows == fm.x.rows - 1);
}

TEST_CASE("OLS recovers an exact line") {
    Matrix x(20, 2);
    std::vector<double> y(20);
    for (std::size_t i = 0; i < 20; ++i) {
        x(i, 0) = 1.0;
        x(i, 1) = static_cast<double>(i) * 0.5;
        y[i] = 2.0 * x(i, 1) + 1.0;
    }
    const auto r = ols_newey_west(x, y, 1, {"const", "x"});
    CHECK(r.coef[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.coef[1] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(r.r_squared == doctest::Approx(1.0));
    for (double e : r.residuals) CHECK(std::abs(e) < 1e-10);
    CHECK(r.observations == 20);
    CHECK(r.names[1] == "x");
}

TEST_CASE("property: OLS and Newey-West match the reference") {
    std::mt19937_64 rng(64);
    std::normal_distribution<double> n01;
    for (int round = 0; round < 30; ++round) {
        const std::size_t n = 40 + static_cast<std::size_t>(rng() % 200);
        const std::size_t k = 2 + static_cast<std::size_t>(rng() % 5);
        Matrix x(n, k);
        std::vector<double> y(n);
        double ar = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            x(t, 0) = 1.0;
            for (std::size_t j = 1; j < k; ++j) x(t, j) = n01(rng) * static_cast<double>(j);
            ar = 0.6 * ar + n01(rng) * (1.0 + std::abs(x(t, 1)));
            y[t] = 0.5 + 1.5 * x(t, 1) + ar;
        }
        const std::vector<oracle::Real> yl(y.begin(), y.end());
        for (int lag : {0, 1, 4}) {
            const auto got = ols_newey_west(x, y, lag);
            const auto want = oracle::ols_hac(to_mat(x), yl, lag);
            for (std::size_t i = 0; i < k; ++i) {
                CHECK(rel(got.coef[i], static_cast<double>(want.coef[i])) < 1e-9);
                for (std::size_t j = 0; j < k; ++j) {
                    CHECK(rel(got.covariance[i * k + j], static_cast<double>(want.cov[i][j])) < 1e-8);
                    CHECK(got.covariance[i * k + j] == got.covariance[j * k + i]);
                }
                CHECK(got.se[i] == doctest::Approx(std::sqrt(got.covariance[i * k + i])));
            }
            // Positive semi-definite along random directions.
            for (int probe = 0; probe < 20; ++probe) {
                std::vector<double> v(k);
                for (auto& c : v) c = n01(rng);
                double q = 0.0;
                for (std::size_t i = 0; i < k; ++i)
                    for (std::size_t j = 0; j < k; ++j) q += v[i] * got.covariance[i * k + j] * v[j];
                CHECK(q >= -1e-12);
            }
        }
    }
}

TEST_CASE("logit: intercept only") {
    Matrix x(40, 1);
    std::vector<double> y(40);
    std::vector<std::uint32_t> cl(40);
    for (std::size_t i = 0; i < 40; ++i) {
        x(i, 0) = 1.0;
        y[i] = i < 10 ? 1.0 : 0.0;
        cl[i] = static_cast<std::uint32_t>(i);
    }
    const auto r = logistic_clustered(x, y, cl);
    CHECK(r.coef[0] == doctest::Approx(std::log(0.25 / 0.75)).epsilon(1e-10));
    CHECK(r.clusters == 40);
    CHECK(r.r_squared == doctest::Approx(0.0).epsilon(1e-10));
    // With one row per cluster the sandwich is the robust variance of a proportion.
    CHECK(r.se[0] == doctest::Approx(std::sqrt(1.0 / (40 * 0.25 * 0.75))).epsilon(1e-9));
}

TEST_CASE("property: clustered logit matches the reference") {
    std::mt19937_64 rng(65);
    std::normal_distribution<double> n01;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int round = 0; round < 20; ++round) {
        const std::size_t n = 200 + static_cast<std::size_t>(rng() % 400);
        const std::size_t k = 2 + static_cast<std::size_t>(rng() % 4);
        const std::uint32_t groups = 10 + static_cast<std::uint32_t>(rng() % 50);
        Matrix x(n, k);
        std::vector<double> y(n);
        std::vector<std::uint32_t> cl(n);
        for (std::size_t t = 0; t < n; ++t) {
            x(t, 0) = 1.0;
            double eta = -0.3;
            for (std::size_t j = 1; j < k; ++j) {
                x(t, j) = n01(rng);
                eta += 0.4 * x(t, j) / static_cast<double>(j);
            }
            y[t] = u(rng) < 1.0 / (1.0 + std::exp(-eta)) ? 1.0 : 0.0;
            cl[t] = static_cast<std::uint32_t>(rng() % groups);
        }
        const auto got = logistic_clustered(x, y, cl);
        const auto want = oracle::logit_newton(to_mat(x), std::vector<oracle::Real>(y.begin(), y.end()), cl);
        double mean_resid = 0.0;
        for (double e : got.residuals) mean_resid += e;
        CHECK(std::abs(mean_resid / static_cast<double>(n)) < 1e-10);
        for (std::size_t i = 0; i < k; ++i) {
            CHECK(std::abs(got.coef[i] - static_cast<double>(want.coef[i])) < 1e-8);
            for (std::size_t j = 0; j < k; ++j) {
                CHECK(rel(got.covariance[i * k + j], static_cast<double>(want.cov[i][j])) < 1e-8);
            }
        }
    }
}

TEST_CASE("significance stars and table output") {
    CHECK(stars(0.001) == "***");
    CHECK(stars(0.03) == "**");
    CHECK(stars(0.07) == "*");
    CHECK(stars(0.2).empty());
    Matrix x(3, 1);
    x(0, 0) = x(1, 0) = x(2, 0) = 1.0;
    const std::vector<double> y{1, 2, 3};
    const auto r = ols_newey_west(x, y, 0, {"const"});
    const std::string table = format_table(r);
    CHECK(table.find("const") != std::string::npos);
    CHECK(table.find('(') != std::string::npos);
    std::ostringstream csv;
    write_csv(csv, r);
    CHECK(csv.str().find("const") != std::string::npos);
}
