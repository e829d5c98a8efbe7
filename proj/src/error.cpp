#include "lendsim/error.hpp"

namespace lendsim {

std::string_view to_string(Errc code) {
    switch (code) {
        case Errc::Overflow: return "overflow";
        case Errc::DivisionByZero: return "division_by_zero";
        case Errc::InvalidArgument: return "invalid_argument";
        case Errc::OutOfOrder: return "out_of_order";
        case Errc::ZeroAmount: return "zero_amount";
        case Errc::InsufficientBalance: return "insufficient_balance";
        case Errc::InsufficientCash: return "insufficient_cash";
        case Errc::BorrowLimit: return "borrow_limit";
        case Errc::Undercollateralized: return "undercollateralized";
        case Errc::Overpayment: return "overpayment";
        case Errc::MissingPrice: return "missing_price";
        case Errc::NotLiquidatable: return "not_liquidatable";
        case Errc::ExceedsCloseFactor: return "exceeds_close_factor";
        case Errc::InsufficientCollateral: return "insufficient_collateral";
        case Errc::NothingAccrued: return "nothing_accrued";
        case Errc::OutOfRange: return "out_of_range";
        case Errc::EmptyPool: return "empty_pool";
        case Errc::Disproportionate: return "disproportionate";
        case Errc::ExcessBurn: return "excess_burn";
        case Errc::OutputZero: return "output_zero";
        case Errc::RankDeficient: return "rank_deficient";
        case Errc::NonConvergence: return "non_convergence";
        case Errc::PerfectSeparation: return "perfect_separation";
        case Errc::InsufficientHistory: return "insufficient_history";
        case Errc::Unpaired: return "unpaired";
        case Errc::Uncategorized: return "uncategorized";
        case Errc::EmptyLedger: return "empty_ledger";
        case Errc::Validation: return "validation";
        case Errc::Io: return "io";
    }
    return "unknown";
}

namespace {

std::string summarize(const std::vector<Diagnostic>& diagnostics) {
    std::string out = "scenario validation failed";
    for (const auto& d : diagnostics) {
        out += "; ";
        out += d.field;
        out += ": ";
        out += d.message;
    }
    return out;
}

}  // namespace

ValidationError::ValidationError(std::vector<Diagnostic> diagnostics)
    : Error(Errc::Validation, summarize(diagnostics)), diagnostics_(std::move(diagnostics)) {}

ValidationError::ValidationError(std::string field, std::string message)
    : ValidationError(std::vector<Diagnostic>{{std::move(field), std::move(message)}}) {}

}  // namespace lendsim
