#include "lendsim/analytics/features.hpp"

#include <cmath>
#include <map>

#include "lendsim/error.hpp"

namespace lendsim::analytics {

namespace {

constexpr double kMillion = 1e6;
const Wad kMinSideUsd = Wad::one();

std::int64_t day_of(std::int64_t block, std::int64_t seconds_per_block) {
    return block * seconds_per_block / kSecondsPerDay;
}

struct PriceFeatures {
    double ret_1d = 0.0;
    double ret_7d = 0.0;
    double vol_30d = 0.0;
    bool ok = false;
};

PriceFeatures price_features(std::span<const MarketDay> days, std::size_t d) {
    PriceFeatures f;
    if (d < static_cast<std::size_t>(kVolatilityWindow)) return f;
    for (std::size_t k = d - kVolatilityWindow; k <= d; ++k) {
        if (!(days[k].price > 0.0)) return f;
    }
    f.ret_1d = (days[d].price / days[d - 1].price - 1.0) * 100.0;
    f.ret_7d = (days[d].price / days[d - 7].price - 1.0) * 100.0;
    std::vector<double> r;
    r.reserve(kVolatilityWindow);
    double mean = 0.0;
    for (std::size_t k = d + 1 - kVolatilityWindow; k <= d; ++k) {
        r.push_back(days[k].price / days[k - 1].price - 1.0);
        mean += r.back();
    }
    mean /= static_cast<double>(r.size());
    double ss = 0.0;
    for (double v : r) ss += (v - mean) * (v - mean);
    f.vol_30d = std::sqrt(ss / static_cast<double>(r.size() - 1)) * 100.0;
    f.ok = true;
    return f;
}

void check_contiguous(std::span<const MarketDay> days) {
    for (std::size_t i = 0; i < days.size(); ++i) {
        if (days[i].day != static_cast<std::int64_t>(i)) {
            throw Error(Errc::InvalidArgument, "market days must run 0, 1, 2, ... without gaps");
        }
    }
}

}  // namespace

std::optional<TokenId> default_market_token(const TokenTable& tokens, std::optional<TokenId> reward_token) {
    for (std::uint32_t t = 0; t < tokens.size(); ++t) {
        const TokenId id{t};
        if (!tokens[id].is_stablecoin && id != reward_token) return id;
    }
    return std::nullopt;
}

std::vector<MarketDay> daily_market(const MarketConfig& config, std::span<const PoolSnapshot> snapshots,
                                    std::span<const PriceRow> prices, const Ledger& ledger) {
    const std::int64_t spb = config.seconds_per_block;
    std::map<std::int64_t, const PoolSnapshot*> last_of_day;
    for (const PoolSnapshot& s : snapshots) {
        if (s.token == config.token) last_of_day[day_of(s.block, spb)] = &s;
    }
    if (last_of_day.empty()) throw Error(Errc::InsufficientHistory, "no snapshots for the pool");

    const TokenId market = config.market_token.value_or(config.token);
    std::map<std::int64_t, Wad> token_price;
    std::map<std::int64_t, Wad> market_price;
    std::map<std::int64_t, Wad> reward_price;
    for (const PriceRow& p : prices) {
        if (p.token == config.token) token_price[p.block] = p.price;
        if (p.token == market) market_price[p.block] = p.price;
        if (config.reward_token && p.token == *config.reward_token) reward_price[p.block] = p.price;
    }
    auto price_at = [](const std::map<std::int64_t, Wad>& series, std::int64_t block) {
        auto it = series.upper_bound(block);
        if (it == series.begin()) return Wad::zero();
        return std::prev(it)->second;
    };

    const std::int64_t last_day = last_of_day.rbegin()->first;
    std::vector<MarketDay> out(static_cast<std::size_t>(last_day + 1));
    for (std::int64_t d = 0; d <= last_day; ++d) {
        const auto it = last_of_day.find(d);
        if (it == last_of_day.end()) {
            throw Error(Errc::InsufficientHistory, "no snapshot on day " + std::to_string(d));
        }
        const PoolSnapshot& s = *it->second;
        MarketDay& m = out[static_cast<std::size_t>(d)];
        m.day = d;
        const Wad p = price_at(token_price, s.block);
        m.price = price_at(market_price, s.block).to_double();
        const Wad deposits_usd = wad_mul(s.cash + s.borrows - s.reserves, p);
        const Wad loans_usd = wad_mul(s.borrows, p);
        m.deposits_usd_m = deposits_usd.to_double() / kMillion;
        m.loans_usd_m = loans_usd.to_double() / kMillion;
        m.supply_rate = s.supply_rate.to_double() * 100.0;
        m.borrow_rate = s.borrow_rate.to_double() * 100.0;
        m.post = config.reward_speed.is_positive() && s.block >= config.reward_start_block;
        if (m.post && config.reward_token) {
            const std::int64_t blocks_per_year = kSecondsPerYear / spb;
            const Wad side_per_year =
                wad_mul(config.reward_speed.times(blocks_per_year).div_int(2), price_at(reward_price, s.block));
            if (deposits_usd >= kMinSideUsd) m.supply_reward = wad_div(side_per_year, deposits_usd).to_double() * 100.0;
            if (loans_usd >= kMinSideUsd) m.borrow_reward = wad_div(side_per_year, loans_usd).to_double() * 100.0;
        }
    }
    std::vector<Wad> net(out.size());
    std::vector<Wad> drawn(out.size());
    for (const Event& e : ledger.events()) {
        if (e.token != config.token) continue;
        const std::int64_t d = day_of(e.block, spb);
        if (d > last_day) continue;
        const auto i = static_cast<std::size_t>(d);
        switch (e.kind) {
            case EventKind::Deposit: net[i] += e.usd_value; break;
            case EventKind::Withdraw: net[i] -= e.usd_value; break;
            case EventKind::Borrow: drawn[i] += e.usd_value; break;
            default: break;
        }
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i].net_deposits_usd_m = net[i].to_double() / kMillion;
        out[i].new_loans_usd_m = drawn[i].to_double() / kMillion;
    }
    return out;
}

FeatureMatrix build_features(std::span<const MarketDay> days, Equation equation) {
    check_contiguous(days);
    if (days.size() <= static_cast<std::size_t>(kVolatilityWindow)) {
        throw Error(Errc::InsufficientHistory, "need at least 31 days of snapshots");
    }
    const bool supply = equation == Equation::NetDeposits;
    FeatureMatrix fm;
    fm.dependent = supply ? "net_deposits_usd_m" : "log1p_loans_usd_m";
    fm.columns = supply ? std::vector<std::string>{"const", "post", "supply_rate_lag", "post_x_supply_rate_lag",
                                                   "supply_reward_lag", "log_deposits_lag", "ret_1d", "ret_7d",
                                                   "vol_30d"}
                        : std::vector<std::string>{"const", "post", "borrow_rate_lag", "post_x_borrow_rate_lag",
                                                   "borrow_reward_lag", "log_loans_lag", "ret_1d", "ret_7d",
                                                   "vol_30d"};
    std::vector<std::vector<double>> rows;
    for (std::size_t d = kVolatilityWindow; d < days.size(); ++d) {
        const MarketDay& lag = days[d - 1];
        const MarketDay& cur = days[d];
        const double size = supply ? lag.deposits_usd_m : lag.loans_usd_m;
        if (!(size > 0.0)) continue;
        const PriceFeatures pf = price_features(days, d);
        if (!pf.ok) continue;
        const double post = cur.post ? 1.0 : 0.0;
        const double rate = supply ? lag.supply_rate : lag.borrow_rate;
        const double reward = supply ? lag.supply_reward : lag.borrow_reward;
        rows.push_back({1.0, post, rate, post * rate, reward, std::log(size), pf.ret_1d, pf.ret_7d, pf.vol_30d});
        fm.y.push_back(supply ? cur.net_deposits_usd_m : std::log1p(cur.new_loans_usd_m));
        fm.days.push_back(cur.day);
    }
    if (rows.empty()) throw Error(Errc::InsufficientHistory, "no usable rows after lag trimming");
    fm.x = Matrix(rows.size(), fm.columns.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < fm.columns.size(); ++c) fm.x(r, c) = rows[r][c];
    }
    return fm;
}

FeatureMatrix build_logit_features(std::span<const LoanDay> loan_days, const CategoryMap& categories,
                                   const std::map<std::uint32_t, std::vector<MarketDay>>& markets, bool same_day) {
    for (const auto& [token, days] : markets) check_contiguous(days);
    auto category_of = [&](AddressId a) {
        if (a.value >= categories.size() || !categories[a.value]) {
            throw Error(Errc::Uncategorized, "address " + std::to_string(a.value) + " has no category");
        }
        return *categories[a.value];
    };

    struct Row {
        std::vector<double> values;
        AgentCategory category;
        double label;
        std::int64_t day;
        std::uint32_t cluster;
    };
    std::vector<Row> rows;
    std::vector<bool> present(kAgentCategoryCount, false);
    for (const LoanDay& ld : loan_days) {
        if (ld.day < kVolatilityWindow) continue;
        const auto it = markets.find(ld.token.value);
        if (it == markets.end()) throw Error(Errc::InvalidArgument, "no market data for a loan-day token");
        const auto& days = it->second;
        const auto d = static_cast<std::size_t>(ld.day);
        if (d >= days.size()) continue;
        const double loan_usd_m = ld.total_drawn_usd.to_double() / kMillion;
        if (!(loan_usd_m > 0.0)) continue;
        const PriceFeatures pf = price_features(days, d);
        if (!pf.ok) continue;
        const MarketDay& lag = days[d - 1];
        const double post = days[d].post ? 1.0 : 0.0;
        const AgentCategory cat = category_of(ld.address);
        present[static_cast<std::size_t>(cat)] = true;
        rows.push_back({{1.0, std::log(loan_usd_m), post, lag.supply_rate, lag.borrow_rate, post * lag.supply_rate,
                         post * lag.borrow_rate, lag.supply_reward, lag.borrow_reward, pf.ret_1d, pf.ret_7d,
                         pf.vol_30d},
                        cat,
                        (same_day ? ld.redeposited_same_day : ld.redeposited_within_window) ? 1.0 : 0.0,
                        ld.day,
                        ld.address.value});
    }
    FeatureMatrix fm;
    fm.dependent = same_day ? "redeposited_same_day" : "redeposited_within_window";
    fm.columns = {"const",         "log_loan_usd_m",  "post",           "supply_rate_lag",
                  "borrow_rate_lag", "post_x_supply_rate_lag", "post_x_borrow_rate_lag", "supply_reward_lag",
                  "borrow_reward_lag", "ret_1d",       "ret_7d",         "vol_30d"};
    if (rows.empty()) throw Error(Errc::InsufficientHistory, "no loan days from day 30 on");
    std::vector<AgentCategory> dummies;
    bool base_taken = false;
    for (std::size_t c = 0; c < kAgentCategoryCount; ++c) {
        if (!present[c]) continue;
        if (!base_taken) {
            base_taken = true;
            continue;
        }
        dummies.push_back(static_cast<AgentCategory>(c));
        fm.columns.push_back("cat_" + std::string(to_string(static_cast<AgentCategory>(c))));
    }
    fm.x = Matrix(rows.size(), fm.columns.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const Row& row = rows[r];
        std::size_t c = 0;
        for (double v : row.values) fm.x(r, c++) = v;
        for (AgentCategory cat : dummies) fm.x(r, c++) = row.category == cat ? 1.0 : 0.0;
        fm.y.push_back(row.label);
        fm.days.push_back(row.day);
        fm.clusters.push_back(row.cluster);
    }
    return fm;
}

}  // namespace lendsim::analytics
