#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lendsim/analytics/flows.hpp"
#include "lendsim/analytics/loans.hpp"
#include "lendsim/engine.hpp"
#include "lendsim/ledger.hpp"

namespace lendsim::analytics {

/// Dense row-major matrix of doubles.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

struct MarketConfig {
    TokenId token;
    std::int64_t seconds_per_block = 13;
    Wad reward_speed;  // reward tokens per block, both sides together
    std::int64_t reward_start_block = 0;
    std::optional<TokenId> reward_token;
    std::optional<TokenId> market_token;  // drives the return columns; the pool token if unset
};

/// The first non-stablecoin token other than the reward token, if any.
std::optional<TokenId> default_market_token(const TokenTable& tokens, std::optional<TokenId> reward_token);

/// End-of-day state of one pool. Rates and reward yields are annual, in percent.
/// A side holding less than 1 USD has a zero reward yield.
struct MarketDay {
    std::int64_t day = 0;
    bool post = false;
    double supply_rate = 0.0;
    double borrow_rate = 0.0;
    double supply_reward = 0.0;
    double borrow_reward = 0.0;
    double deposits_usd_m = 0.0;
    double loans_usd_m = 0.0;
    double price = 0.0;  // market token, end of day
    double net_deposits_usd_m = 0.0;  // deposits minus withdrawals during the day
    double new_loans_usd_m = 0.0;     // borrows drawn during the day
};

/// One row per UTC day from day 0 to the last snapshot's day. Each day uses
/// its last snapshot; every day needs at least one.
std::vector<MarketDay> daily_market(const MarketConfig& config, std::span<const PoolSnapshot> snapshots,
                                    std::span<const PriceRow> prices, const Ledger& ledger);

inline constexpr std::int64_t kVolatilityWindow = 30;

struct FeatureMatrix {
    std::vector<std::string> columns;
    Matrix x;
    std::vector<double> y;
    std::string dependent;
    std::vector<std::int64_t> days;
    std::vector<std::uint32_t> clusters;  // logit rows only
};

enum class Equation { NetDeposits, Loans };

/// Daily regressors for one pool: lagged rate and reward, Post dummy and its
/// interaction, lagged log pool size, 1-day and 7-day returns and 30-day
/// volatility, all in percent. Rows start at day 30 and skip days whose
/// lagged pool size is zero.
FeatureMatrix build_features(std::span<const MarketDay> days, Equation equation);

/// One row per loan day from day 30 on. The label is the within-window flag,
/// or the same-day flag when `same_day` is set. Category dummies use the
/// first category present as the base.
FeatureMatrix build_logit_features(std::span<const LoanDay> loan_days, const CategoryMap& categories,
                                   const std::map<std::uint32_t, std::vector<MarketDay>>& markets,
                                   bool same_day = false);

}  // namespace lendsim::analytics
