#pragma once

#include <cstdint>
#include <iosfwd>
#include <set>
#include <span>
#include <string>

#include "lendsim/analytics/features.hpp"
#include "lendsim/analytics/flows.hpp"
#include "lendsim/analytics/loans.hpp"
#include "lendsim/analytics/regression.hpp"
#include "lendsim/analytics/summary.hpp"

namespace lendsim::reports {

/// Shortest round-trip decimal form.
std::string num(double v);

void closed_loans_csv(std::ostream& os, std::span<const analytics::Loan> loans, const TokenTable& tokens,
                      const analytics::CategoryMap& categories);
void loan_days_csv(std::ostream& os, std::span<const analytics::LoanDay> days, const TokenTable& tokens);
/// Top-k deposit and loan shares; a side with no volume is left out.
void concentration_csv(std::ostream& os, const Ledger& ledger, std::size_t k);
void micro_csv(std::ostream& os, const std::set<std::uint32_t>& addresses);
void flow_network_csv(std::ostream& os, const analytics::FlowNetwork& net);
/// Long format; "ALL" rows and columns carry the sums.
void liquidation_matrix_csv(std::ostream& os, const analytics::LiquidationMatrix& m, const TokenTable& tokens);

void daily_net_deposits_csv(std::ostream& os, const analytics::SummaryReport& report);
void loan_summary_csv(std::ostream& os, const analytics::SummaryReport& report);
void redeposit_summary_csv(std::ostream& os, const analytics::SummaryReport& report);
void liquidation_summary_csv(std::ostream& os, const analytics::SummaryReport& report);

}  // namespace lendsim::reports
