#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "lendsim/types.hpp"
#include "lendsim/wad.hpp"

namespace lendsim {

enum class EventKind {
    Deposit,
    Withdraw,
    Borrow,
    Repay,
    LiquidateRepay,
    LiquidateSeize,
    Swap,
    ClaimReward,
    RewardAccrue,
};

std::string_view to_string(EventKind kind);
std::optional<EventKind> parse_event_kind(std::string_view text);

/// One ledger record. Amounts are in underlying token units; usd_value is
/// amount times the oracle price of the block.
///
/// For Borrow, Repay and LiquidateRepay the engine also records the
/// borrower's outstanding debt in that token after the event, which lets
/// loan-cycle reconstruction see interest without replaying accrual.
struct Event {
    std::int64_t block = 0;
    std::uint64_t seq = 0;
    AddressId address;
    EventKind kind = EventKind::Deposit;
    TokenId token;
    Wad amount;
    Wad usd_value;
    std::optional<AddressId> counterparty;
    std::optional<Wad> debt_after;

    friend bool operator==(const Event&, const Event&) = default;
};

/// Append-only event log. Blocks are non-decreasing; sequence ids are dense.
class Ledger {
  public:
    std::uint64_t append(Event event);

    std::span<const Event> events() const { return events_; }
    std::size_t size() const { return events_.size(); }
    bool empty() const { return events_.empty(); }
    const Event& operator[](std::size_t i) const { return events_[i]; }

    void write_jsonl(std::ostream& out) const;
    void write_csv(std::ostream& out) const;
    static Ledger read_jsonl(std::istream& in);

  private:
    std::vector<Event> events_;
};

inline constexpr std::string_view kLedgerCsvHeader = "block,seq,address,kind,token,amount,usd_value,counterparty";

}  // namespace lendsim
