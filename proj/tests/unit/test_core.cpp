#include <doctest.h>

#include <sstream>

#include <boost/multiprecision/cpp_int.hpp>

#include "gen.hpp"
#include "lendsim/error.hpp"
#include "lendsim/ledger.hpp"
#include "lendsim/types.hpp"
#include "lendsim/wad.hpp"

using namespace lendsim;
using boost::multiprecision::cpp_int;

namespace {

cpp_int big(int128 v) {
    const bool neg = v < 0;
    uint128 m = neg ? uint128(0) - static_cast<uint128>(v) : static_cast<uint128>(v);
    cpp_int out = static_cast<std::uint64_t>(m >> 64);
    out <<= 64;
    out += static_cast<std::uint64_t>(m);
    return neg ? cpp_int(-out) : out;
}

// Truncating rational product, computed with arbitrary precision.
cpp_int exact_mul(Wad a, Wad b) { return big(a.raw()) * big(b.raw()) / big(Wad::kScale); }
cpp_int exact_div(Wad a, Wad b) { return big(a.raw()) * big(Wad::kScale) / big(b.raw()); }

Event ev(std::int64_t block, EventKind kind = EventKind::Deposit, Wad amount = Wad::one()) {
    Event e;
    e.block = block;
    e.kind = kind;
    e.amount = amount;
    e.usd_value = amount;
    return e;
}

}  // namespace

TEST_CASE("wad multiplication examples") {
    CHECK(wad_mul(Wad::one(), Wad::one()) == Wad::one());
    CHECK(wad_mul(Wad::zero(), wad("123.456")) == Wad::zero());
    CHECK(wad_mul(wad("2.5"), wad("0.4")) == Wad::one());
    CHECK(wad_mul(wad("-2.5"), wad("0.4")) == -Wad::one());
}

TEST_CASE("wad parsing and printing") {
    CHECK(wad("1.5").raw() == Wad::kScale + Wad::kScale / 2);
    CHECK(wad("1e-18").raw() == 1);
    CHECK(wad("2.5e3") == Wad::from_int(2500));
    CHECK(wad("0.0000000000000000019").raw() == 1);
    CHECK(wad("-0.25").to_string() == "-0.25");
    CHECK(Wad::from_int(42).to_string() == "42");
    CHECK(Wad::from_raw(1).to_string() == "0.000000000000000001");
    CHECK(Wad::from_double(0.1) == wad("0.1"));
    CHECK_THROWS_AS(wad("abc"), Error);
    CHECK_THROWS_AS(wad(""), Error);
}

TEST_CASE("wad overflow and division by zero are errors") {
    const Wad huge = Wad::from_raw(static_cast<int128>(~uint128{0} >> 1) / 2 + 1);
    try {
        (void)wad_mul(huge, Wad::from_int(1000));
        FAIL("expected overflow");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::Overflow);
    }
    CHECK_THROWS_AS(huge + huge, Error);
    CHECK_THROWS_AS(huge.times(4), Error);
    try {
        (void)wad_div(Wad::one(), Wad::zero());
        FAIL("expected division by zero");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::DivisionByZero);
    }
}

TEST_CASE("property: wad mul and div truncate like exact rationals") {
    gen::Gen g(11);
    for (int i = 0; i < 5000; ++i) {
        Wad a = g.wad_in(0, 1'000'000'000);
        Wad b = g.wad_in(0, 1'000'000);
        if (g.coin()) a = -a;
        if (g.coin()) b = -b;
        CHECK(big(wad_mul(a, b).raw()) == exact_mul(a, b));
        if (!b.is_zero()) CHECK(big(wad_div(a, b).raw()) == exact_div(a, b));
        CHECK(wad_mul(a, Wad::one()) == a);
        CHECK(wad_mul(a, Wad::zero()) == Wad::zero());
        CHECK(Wad::parse(a.to_string()) == a);
    }
}

TEST_CASE("property: mul_div keeps a wide intermediate") {
    gen::Gen g(12);
    for (int i = 0; i < 2000; ++i) {
        const Wad a = g.wad_in(0, 1'000'000'000'000);
        const Wad b = g.wad_in(0, 1'000'000'000'000);
        const Wad c = g.wad_in(1, 1'000'000'000'000);
        const cpp_int want = big(a.raw()) * big(b.raw()) / big(c.raw());
        CHECK(big(wad_mul_div(a, b, c).raw()) == want);
    }
}

TEST_CASE("ledger append ordering") {
    Ledger l;
    CHECK(l.append(ev(0)) == 0);
    CHECK(l.append(ev(5)) == 1);
    CHECK(l.append(ev(5)) == 2);
    try {
        l.append(ev(3));
        FAIL("expected out-of-order error");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::OutOfOrder);
    }
    CHECK(l.size() == 3);
    CHECK_THROWS_AS(l.append(ev(6, EventKind::Deposit, -Wad::one())), Error);
}

TEST_CASE("property: ledger jsonl round trip is byte-identical") {
    gen::Gen g(13);
    for (int round = 0; round < 20; ++round) {
        Ledger l;
        std::int64_t block = 0;
        const int n = static_cast<int>(g.int_in(0, 60));
        for (int i = 0; i < n; ++i) {
            block += g.int_in(0, 3);
            Event e = ev(block, static_cast<EventKind>(g.int_in(0, 8)), g.wad_in(0, 1'000'000));
            e.address = AddressId{static_cast<std::uint32_t>(g.int_in(0, 9))};
            e.token = TokenId{static_cast<std::uint32_t>(g.int_in(0, 3))};
            if (g.coin()) e.counterparty = AddressId{static_cast<std::uint32_t>(g.int_in(0, 9))};
            if (g.coin()) e.debt_after = g.wad_in(0, 1000);
            l.append(e);
        }
        std::ostringstream first;
        l.write_jsonl(first);
        std::istringstream in(first.str());
        const Ledger back = Ledger::read_jsonl(in);
        std::ostringstream second;
        back.write_jsonl(second);
        CHECK(first.str() == second.str());
        REQUIRE(back.size() == l.size());
        for (std::size_t i = 0; i < l.size(); ++i) CHECK(back[i] == l[i]);
    }
}

TEST_CASE("ledger csv header") {
    Ledger l;
    l.append(ev(1));
    std::ostringstream os;
    l.write_csv(os);
    CHECK(os.str().rfind(std::string(kLedgerCsvHeader) + "\n", 0) == 0);
}

TEST_CASE("block clock") {
    BlockClock c(13, 0);
    CHECK(c.blocks_per_year() == 2'425'846);
    c.tick();
    CHECK(c.block() == 1);
    CHECK(c.timestamp() == 13);
    CHECK_THROWS_AS(c.advance_to(0), Error);
    BlockClock hourly(3600, 24);
    CHECK(hourly.day() == 1);
}

TEST_CASE("token table and categories") {
    TokenTable t;
    const TokenId dai = t.add({"DAI", true, 18});
    CHECK(t.find("DAI") == dai);
    CHECK_FALSE(t.find("ETH").has_value());
    CHECK_THROWS(t.add({"DAI", true, 18}));
    CHECK_THROWS(t.require("ETH"));
    for (std::size_t i = 0; i < kAgentCategoryCount; ++i) {
        const auto c = static_cast<AgentCategory>(i);
        CHECK(parse_agent_category(to_string(c)) == c);
    }
    CHECK_FALSE(parse_agent_category("Whale").has_value());
    for (int i = 0; i <= static_cast<int>(EventKind::RewardAccrue); ++i) {
        const auto k = static_cast<EventKind>(i);
        CHECK(parse_event_kind(to_string(k)) == k);
    }
}
