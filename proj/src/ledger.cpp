#include "lendsim/ledger.hpp"

#include <array>
#include <istream>
#include <ostream>
#include <string>

#include <json.hpp>

#include "lendsim/error.hpp"

namespace lendsim {

namespace {

constexpr std::array<std::string_view, 9> kKindNames = {
    "Deposit", "Withdraw", "Borrow", "Repay", "LiquidateRepay", "LiquidateSeize", "Swap", "ClaimReward", "RewardAccrue",
};

}  // namespace

std::string_view to_string(EventKind kind) { return kKindNames.at(static_cast<std::size_t>(kind)); }

std::optional<EventKind> parse_event_kind(std::string_view text) {
    for (std::size_t i = 0; i < kKindNames.size(); ++i) {
        if (kKindNames[i] == text) return static_cast<EventKind>(i);
    }
    return std::nullopt;
}

std::uint64_t Ledger::append(Event event) {
    if (!events_.empty() && event.block < events_.back().block) {
        throw Error(Errc::OutOfOrder, "event block " + std::to_string(event.block) + " precedes last block " +
                                          std::to_string(events_.back().block));
    }
    if (event.amount.is_negative() || event.usd_value.is_negative()) {
        throw Error(Errc::InvalidArgument, "event amounts must be non-negative");
    }
    event.seq = events_.size();
    events_.push_back(event);
    return event.seq;
}

void Ledger::write_jsonl(std::ostream& out) const {
    for (const auto& e : events_) {
        nlohmann::ordered_json j;
        j["block"] = e.block;
        j["seq"] = e.seq;
        j["address"] = e.address.value;
        j["kind"] = to_string(e.kind);
        j["token"] = e.token.value;
        j["amount"] = e.amount.to_string();
        j["usd_value"] = e.usd_value.to_string();
        j["counterparty"] = e.counterparty ? nlohmann::ordered_json(e.counterparty->value) : nlohmann::ordered_json();
        if (e.debt_after) j["debt_after"] = e.debt_after->to_string();
        out << j.dump() << '\n';
    }
}

void Ledger::write_csv(std::ostream& out) const {
    out << kLedgerCsvHeader << '\n';
    for (const auto& e : events_) {
        out << e.block << ',' << e.seq << ',' << e.address.value << ',' << to_string(e.kind) << ',' << e.token.value
            << ',' << e.amount.to_string() << ',' << e.usd_value.to_string() << ',';
        if (e.counterparty) out << e.counterparty->value;
        out << '\n';
    }
}

Ledger Ledger::read_jsonl(std::istream& in) {
    Ledger ledger;
    std::string line;
    std::size_t line_no = 0;
    auto wad_field = [](const nlohmann::json& v) {
        return v.is_string() ? Wad::parse(v.get<std::string>()) : Wad::from_double(v.get<double>());
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            Event e;
            e.block = j.at("block").get<std::int64_t>();
            e.address = AddressId{j.at("address").get<std::uint32_t>()};
            const auto kind = parse_event_kind(j.at("kind").get<std::string>());
            if (!kind) throw Error(Errc::InvalidArgument, "unknown event kind");
            e.kind = *kind;
            e.token = TokenId{j.at("token").get<std::uint32_t>()};
            e.amount = wad_field(j.at("amount"));
            e.usd_value = wad_field(j.at("usd_value"));
            if (auto it = j.find("counterparty"); it != j.end() && !it->is_null()) {
                e.counterparty = AddressId{it->get<std::uint32_t>()};
            }
            if (auto it = j.find("debt_after"); it != j.end() && !it->is_null()) e.debt_after = wad_field(*it);
            const auto seq = ledger.append(e);
            if (auto it = j.find("seq"); it != j.end() && it->get<std::uint64_t>() != seq) {
                throw Error(Errc::OutOfOrder, "non-dense sequence id");
            }
        } catch (const nlohmann::json::exception& ex) {
            throw Error(Errc::Io, "ledger line " + std::to_string(line_no) + ": " + ex.what());
        } catch (const Error& ex) {
            throw Error(ex.code(), "ledger line " + std::to_string(line_no) + ": " + ex.what());
        }
    }
    return ledger;
}

}  // namespace lendsim
