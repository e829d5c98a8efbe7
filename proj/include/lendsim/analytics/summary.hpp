#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "lendsim/analytics/flows.hpp"
#include "lendsim/analytics/loans.hpp"
#include "lendsim/ledger.hpp"

namespace lendsim::analytics {

/// Sample statistics; the standard deviation uses n - 1 and percentiles use
/// linear interpolation between order statistics. All zero when empty.
struct Describe {
    std::size_t count = 0;
    double mean = 0.0;
    double sd = 0.0;
    double min = 0.0;
    double p5 = 0.0;
    double p50 = 0.0;
    double p95 = 0.0;
    double max = 0.0;
};

Describe describe(std::vector<double> values);
double quantile(std::span<const double> sorted, double q);

struct TokenDailyStats {
    std::string symbol;
    Describe net_deposits_usd;
};

struct CategoryLoanStats {
    std::string category;
    std::size_t closed_loans = 0;
    double drawn_usd = 0.0;
    double mean_drawn_usd = 0.0;
    double mean_duration_days = 0.0;
    double median_duration_days = 0.0;
};

struct RedepositStats {
    std::size_t loan_days = 0;
    std::size_t same_day = 0;
    std::size_t within_window = 0;
    double same_day_share = 0.0;
    double within_window_share = 0.0;
    double same_day_usd_share = 0.0;
    double within_window_usd_share = 0.0;
};

struct LiquidationStats {
    std::size_t loans = 0;
    std::size_t liquidated_loans = 0;
    double count_share = 0.0;
    double drawn_usd = 0.0;
    double liquidated_drawn_usd = 0.0;
    double usd_share = 0.0;
};

struct SummaryReport {
    std::vector<TokenDailyStats> daily;  // one per token
    std::vector<CategoryLoanStats> loans;  // one per category
    RedepositStats redeposits;
    LiquidationStats liquidations;
};

/// Daily net deposits per token over days 0 through the ledger's last day,
/// closed loans by borrower category, loan-day redeposit shares and the share
/// of loans (closed or open) that saw a liquidation.
SummaryReport summary_tables(const Ledger& ledger, const TokenTable& tokens, const CategoryMap& categories,
                             std::int64_t seconds_per_block);

nlohmann::json to_json(const SummaryReport& report);

}  // namespace lendsim::analytics
