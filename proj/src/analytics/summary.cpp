#include "lendsim/analytics/summary.hpp"

#include <algorithm>
#include <cmath>

namespace lendsim::analytics {

double quantile(std::span<const double> sorted, double q) {
    if (sorted.empty()) return 0.0;
    const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

Describe describe(std::vector<double> values) {
    Describe d;
    d.count = values.size();
    if (values.empty()) return d;
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) sum += v;
    d.mean = sum / static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - d.mean) * (v - d.mean);
        d.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    d.min = values.front();
    d.max = values.back();
    d.p5 = quantile(values, 0.05);
    d.p50 = quantile(values, 0.50);
    d.p95 = quantile(values, 0.95);
    return d;
}

namespace {

double share(double part, double whole) { return whole > 0.0 ? part / whole : 0.0; }

}  // namespace

SummaryReport summary_tables(const Ledger& ledger, const TokenTable& tokens, const CategoryMap& categories,
                             std::int64_t seconds_per_block) {
    SummaryReport report;

    const std::int64_t days =
        ledger.empty() ? 0 : ledger.events().back().block * seconds_per_block / kSecondsPerDay + 1;
    std::vector<std::vector<Wad>> net(tokens.size(), std::vector<Wad>(static_cast<std::size_t>(days)));
    for (const Event& e : ledger.events()) {
        if (e.token.value >= tokens.size()) continue;
        const auto d = static_cast<std::size_t>(e.block * seconds_per_block / kSecondsPerDay);
        if (e.kind == EventKind::Deposit) net[e.token.value][d] += e.usd_value;
        if (e.kind == EventKind::Withdraw) net[e.token.value][d] -= e.usd_value;
    }
    for (std::size_t t = 0; t < tokens.size(); ++t) {
        std::vector<double> values;
        values.reserve(net[t].size());
        for (Wad v : net[t]) values.push_back(v.to_double());
        report.daily.push_back({tokens.all()[t].symbol, describe(std::move(values))});
    }

    const LoanBook book = reconstruct_loans(ledger, seconds_per_block);
    std::vector<std::vector<double>> durations(kAgentCategoryCount);
    report.loans.resize(kAgentCategoryCount);
    for (std::size_t c = 0; c < kAgentCategoryCount; ++c) {
        report.loans[c].category = std::string(to_string(static_cast<AgentCategory>(c)));
    }
    for (const Loan& loan : book.closed) {
        if (loan.address.value >= categories.size() || !categories[loan.address.value]) continue;
        const auto c = static_cast<std::size_t>(*categories[loan.address.value]);
        ++report.loans[c].closed_loans;
        report.loans[c].drawn_usd += loan.drawn_usd.to_double();
        durations[c].push_back(loan.duration_days);
    }
    for (std::size_t c = 0; c < kAgentCategoryCount; ++c) {
        CategoryLoanStats& s = report.loans[c];
        if (s.closed_loans == 0) continue;
        s.mean_drawn_usd = s.drawn_usd / static_cast<double>(s.closed_loans);
        const Describe d = describe(durations[c]);
        s.mean_duration_days = d.mean;
        s.median_duration_days = d.p50;
    }

    const auto loan_days = detect_redeposits(ledger, seconds_per_block);
    RedepositStats& r = report.redeposits;
    double total_usd = 0.0;
    double same_usd = 0.0;
    double window_usd = 0.0;
    for (const LoanDay& ld : loan_days) {
        const double usd = ld.total_drawn_usd.to_double();
        ++r.loan_days;
        total_usd += usd;
        if (ld.redeposited_same_day) {
            ++r.same_day;
            same_usd += usd;
        }
        if (ld.redeposited_within_window) {
            ++r.within_window;
            window_usd += usd;
        }
    }
    r.same_day_share = share(static_cast<double>(r.same_day), static_cast<double>(r.loan_days));
    r.within_window_share = share(static_cast<double>(r.within_window), static_cast<double>(r.loan_days));
    r.same_day_usd_share = share(same_usd, total_usd);
    r.within_window_usd_share = share(window_usd, total_usd);

    LiquidationStats& l = report.liquidations;
    for (const auto* group : {&book.closed, &book.open}) {
        for (const Loan& loan : *group) {
            ++l.loans;
            const double usd = loan.drawn_usd.to_double();
            l.drawn_usd += usd;
            if (loan.liquidation_events > 0) {
                ++l.liquidated_loans;
                l.liquidated_drawn_usd += usd;
            }
        }
    }
    l.count_share = share(static_cast<double>(l.liquidated_loans), static_cast<double>(l.loans));
    l.usd_share = share(l.liquidated_drawn_usd, l.drawn_usd);
    return report;
}

nlohmann::json to_json(const SummaryReport& report) {
    using nlohmann::json;
    json out;
    json daily = json::array();
    for (const auto& t : report.daily) {
        const Describe& d = t.net_deposits_usd;
        daily.push_back({{"token", t.symbol}, {"count", d.count}, {"mean", d.mean}, {"sd", d.sd},
                         {"min", d.min}, {"p5", d.p5}, {"p50", d.p50}, {"p95", d.p95}, {"max", d.max}});
    }
    out["daily_net_deposits"] = daily;
    json loans = json::array();
    for (const auto& c : report.loans) {
        loans.push_back({{"category", c.category}, {"closed_loans", c.closed_loans}, {"drawn_usd", c.drawn_usd},
                         {"mean_drawn_usd", c.mean_drawn_usd}, {"mean_duration_days", c.mean_duration_days},
                         {"median_duration_days", c.median_duration_days}});
    }
    out["closed_loans"] = loans;
    const auto& r = report.redeposits;
    out["redeposits"] = {{"loan_days", r.loan_days},
                         {"same_day", r.same_day},
                         {"within_window", r.within_window},
                         {"same_day_share", r.same_day_share},
                         {"within_window_share", r.within_window_share},
                         {"same_day_usd_share", r.same_day_usd_share},
                         {"within_window_usd_share", r.within_window_usd_share}};
    const auto& l = report.liquidations;
    out["liquidations"] = {{"loans", l.loans},
                           {"liquidated_loans", l.liquidated_loans},
                           {"count_share", l.count_share},
                           {"drawn_usd", l.drawn_usd},
                           {"liquidated_drawn_usd", l.liquidated_drawn_usd},
                           {"usd_share", l.usd_share}};
    return out;
}

}  // namespace lendsim::analytics
