#pragma once

#include <cstdint>
#include <vector>

#include "lendsim/ledger.hpp"
#include "lendsim/types.hpp"
#include "lendsim/wad.hpp"

namespace lendsim::analytics {

/// One borrow-repayment cycle of an (address, token) pair: debt rises from
/// zero at open_block and, for a closed loan, is back to exactly zero at
/// close_block. A cycle may hold several draws and repayments.
struct Loan {
    AddressId address;
    TokenId token;
    std::int64_t open_block = 0;
    std::int64_t close_block = -1;  // -1 while open
    int draw_events = 0;
    int repay_events = 0;
    int liquidation_events = 0;
    Wad drawn_usd;
    Wad peak_debt_usd;
    double duration_days = 0.0;
    std::vector<std::uint64_t> borrow_seqs;
    bool closed() const { return close_block >= 0; }
};

struct LoanBook {
    std::vector<Loan> closed;
    std::vector<Loan> open;  // still owing at the end of the ledger
};

/// Replays each (address, token) debt path. Uses the recorded debt after
/// each event when present, otherwise a running sum of amounts.
LoanBook reconstruct_loans(const Ledger& ledger, std::int64_t seconds_per_block);

struct LoanDay {
    AddressId address;
    TokenId token;
    std::int64_t day = 0;
    Wad total_drawn_usd;
    bool redeposited_same_day = false;
    bool redeposited_within_window = false;
};

/// One row per (address, token, UTC day) with a Borrow. Flags a later Deposit
/// of the same token by the same address in the same UTC day, or within
/// `window_seconds` of any of that day's draws.
std::vector<LoanDay> detect_redeposits(const Ledger& ledger, std::int64_t seconds_per_block,
                                       std::int64_t window_seconds = kSecondsPerDay);

}  // namespace lendsim::analytics
