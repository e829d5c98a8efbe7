#include "lendsim/reports.hpp"

#include <charconv>
#include <ostream>

#include "lendsim/error.hpp"

namespace lendsim::reports {

std::string num(double v) {
    if (v == 0.0) return "0";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

std::string category_name(const analytics::CategoryMap& categories, AddressId a) {
    if (a.value >= categories.size() || !categories[a.value]) return "";
    return std::string(to_string(*categories[a.value]));
}

}  // namespace

void closed_loans_csv(std::ostream& os, std::span<const analytics::Loan> loans, const TokenTable& tokens,
                      const analytics::CategoryMap& categories) {
    os << "address,category,token,open_block,close_block,draw_events,repay_events,liquidation_events,drawn_usd,"
          "peak_debt_usd,duration_days\n";
    for (const auto& l : loans) {
        os << l.address.value << ',' << category_name(categories, l.address) << ',' << tokens[l.token].symbol << ','
           << l.open_block << ',' << l.close_block << ',' << l.draw_events << ',' << l.repay_events << ','
           << l.liquidation_events << ',' << l.drawn_usd.to_string() << ',' << l.peak_debt_usd.to_string() << ','
           << num(l.duration_days) << '\n';
    }
}

void loan_days_csv(std::ostream& os, std::span<const analytics::LoanDay> days, const TokenTable& tokens) {
    os << "day,address,token,total_drawn_usd,redeposited_same_day,redeposited_within_window\n";
    for (const auto& d : days) {
        os << d.day << ',' << d.address.value << ',' << tokens[d.token].symbol << ','
           << d.total_drawn_usd.to_string() << ',' << (d.redeposited_same_day ? 1 : 0) << ','
           << (d.redeposited_within_window ? 1 : 0) << '\n';
    }
}

void concentration_csv(std::ostream& os, const Ledger& ledger, std::size_t k) {
    os << "side,k,share\n";
    for (auto [side, name] : {std::pair{analytics::Side::Deposits, "deposits"}, std::pair{analytics::Side::Loans, "loans"}}) {
        double share = 0.0;
        try {
            share = analytics::concentration(ledger, side, k);
        } catch (const Error& e) {
            if (e.code() != Errc::EmptyLedger) throw;
            continue;
        }
        os << name << ',' << k << ',' << num(share) << '\n';
    }
}

void micro_csv(std::ostream& os, const std::set<std::uint32_t>& addresses) {
    os << "address\n";
    for (auto a : addresses) os << a << '\n';
}

void flow_network_csv(std::ostream& os, const analytics::FlowNetwork& net) {
    os << "source,target,usd\n";
    for (const auto& e : net.edges) os << e.source << ',' << e.target << ',' << e.usd.to_string() << '\n';
}

void liquidation_matrix_csv(std::ostream& os, const analytics::LiquidationMatrix& m, const TokenTable& tokens) {
    os << "debt_token,seized_token,usd\n";
    auto sym = [&](std::size_t i) { return tokens[TokenId{static_cast<std::uint32_t>(i)}].symbol; };
    for (std::size_t d = 0; d < m.tokens; ++d) {
        for (std::size_t s = 0; s < m.tokens; ++s) os << sym(d) << ',' << sym(s) << ',' << m.at(d, s).to_string() << '\n';
        os << sym(d) << ",ALL," << m.row_sums[d].to_string() << '\n';
    }
    for (std::size_t s = 0; s < m.tokens; ++s) os << "ALL," << sym(s) << ',' << m.col_sums[s].to_string() << '\n';
    os << "ALL,ALL," << m.total.to_string() << '\n';
}

void daily_net_deposits_csv(std::ostream& os, const analytics::SummaryReport& report) {
    os << "token,days,mean_usd,sd_usd,min_usd,p5_usd,p50_usd,p95_usd,max_usd\n";
    for (const auto& t : report.daily) {
        const auto& d = t.net_deposits_usd;
        os << t.symbol << ',' << d.count << ',' << num(d.mean) << ',' << num(d.sd) << ',' << num(d.min) << ','
           << num(d.p5) << ',' << num(d.p50) << ',' << num(d.p95) << ',' << num(d.max) << '\n';
    }
}

void loan_summary_csv(std::ostream& os, const analytics::SummaryReport& report) {
    os << "category,closed_loans,drawn_usd,mean_drawn_usd,mean_duration_days,median_duration_days\n";
    for (const auto& c : report.loans) {
        os << c.category << ',' << c.closed_loans << ',' << num(c.drawn_usd) << ',' << num(c.mean_drawn_usd) << ','
           << num(c.mean_duration_days) << ',' << num(c.median_duration_days) << '\n';
    }
}

void redeposit_summary_csv(std::ostream& os, const analytics::SummaryReport& report) {
    const auto& r = report.redeposits;
    os << "loan_days,same_day,within_window,same_day_share,within_window_share,same_day_usd_share,"
          "within_window_usd_share\n";
    os << r.loan_days << ',' << r.same_day << ',' << r.within_window << ',' << num(r.same_day_share) << ','
       << num(r.within_window_share) << ',' << num(r.same_day_usd_share) << ',' << num(r.within_window_usd_share)
       << '\n';
}

void liquidation_summary_csv(std::ostream& os, const analytics::SummaryReport& report) {
    const auto& l = report.liquidations;
    os << "loans,liquidated_loans,count_share,drawn_usd,liquidated_drawn_usd,usd_share\n";
    os << l.loans << ',' << l.liquidated_loans << ',' << num(l.count_share) << ',' << num(l.drawn_usd) << ','
       << num(l.liquidated_drawn_usd) << ',' << num(l.usd_share) << '\n';
}

}  // namespace lendsim::reports
