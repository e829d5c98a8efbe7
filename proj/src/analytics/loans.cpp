#include "lendsim/analytics/loans.hpp"

#include <algorithm>
#include <map>
#include <tuple>

namespace lendsim::analytics {

namespace {

Wad value_at(Wad amount_now, const Event& e) {
    if (!e.amount.is_positive()) return Wad::zero();
    return wad_mul_div(amount_now, e.usd_value, e.amount);
}

}  // namespace

LoanBook reconstruct_loans(const Ledger& ledger, std::int64_t seconds_per_block) {
    struct Running {
        Loan loan;
        Wad debt;
    };
    std::map<std::pair<std::uint32_t, std::uint32_t>, Running> running;
    LoanBook book;
    for (const Event& e : ledger.events()) {
        if (e.kind != EventKind::Borrow && e.kind != EventKind::Repay && e.kind != EventKind::LiquidateRepay) continue;
        const auto key = std::pair{e.address.value, e.token.value};
        auto it = running.find(key);
        if (e.kind == EventKind::Borrow) {
            if (it == running.end()) {
                Running r;
                r.loan.address = e.address;
                r.loan.token = e.token;
                r.loan.open_block = e.block;
                it = running.emplace(key, std::move(r)).first;
            }
        } else if (it == running.end()) {
            continue;
        }
        Running& r = it->second;
        Wad after;
        if (e.debt_after) {
            after = *e.debt_after;
        } else if (e.kind == EventKind::Borrow) {
            after = r.debt + e.amount;
        } else {
            after = max(r.debt - e.amount, Wad::zero());
        }
        switch (e.kind) {
            case EventKind::Borrow:
                ++r.loan.draw_events;
                r.loan.drawn_usd += e.usd_value;
                r.loan.borrow_seqs.push_back(e.seq);
                break;
            case EventKind::Repay: ++r.loan.repay_events; break;
            default: ++r.loan.liquidation_events; break;
        }
        r.loan.peak_debt_usd = max(r.loan.peak_debt_usd, value_at(after, e));
        r.debt = after;
        if (after.is_zero()) {
            r.loan.close_block = e.block;
            r.loan.duration_days = static_cast<double>((e.block - r.loan.open_block) * seconds_per_block) /
                                   static_cast<double>(kSecondsPerDay);
            book.closed.push_back(std::move(r.loan));
            running.erase(it);
        }
    }
    for (auto& [key, r] : running) {
        const std::int64_t end = ledger.empty() ? r.loan.open_block : ledger.events().back().block;
        r.loan.duration_days = static_cast<double>((end - r.loan.open_block) * seconds_per_block) /
                               static_cast<double>(kSecondsPerDay);
        book.open.push_back(std::move(r.loan));
    }
    return book;
}

std::vector<LoanDay> detect_redeposits(const Ledger& ledger, std::int64_t seconds_per_block,
                                       std::int64_t window_seconds) {
    struct Draw {
        std::int64_t time;
        std::uint64_t seq;
    };
    using Key = std::tuple<std::int64_t, std::uint32_t, std::uint32_t>;  // day, address, token
    std::map<Key, std::pair<Wad, std::vector<Draw>>> days;
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::vector<Draw>> deposits;
    for (const Event& e : ledger.events()) {
        const std::int64_t time = e.block * seconds_per_block;
        if (e.kind == EventKind::Borrow) {
            auto& slot = days[Key{time / kSecondsPerDay, e.address.value, e.token.value}];
            slot.first += e.usd_value;
            slot.second.push_back({time, e.seq});
        } else if (e.kind == EventKind::Deposit) {
            deposits[{e.address.value, e.token.value}].push_back({time, e.seq});
        }
    }
    std::vector<LoanDay> out;
    out.reserve(days.size());
    for (const auto& [key, slot] : days) {
        LoanDay d;
        d.day = std::get<0>(key);
        d.address = AddressId{std::get<1>(key)};
        d.token = TokenId{std::get<2>(key)};
        d.total_drawn_usd = slot.first;
        const auto dep = deposits.find({d.address.value, d.token.value});
        if (dep != deposits.end()) {
            for (const Draw& draw : slot.second) {
                for (const Draw& deposit : dep->second) {
                    if (deposit.seq <= draw.seq) continue;
                    if (deposit.time / kSecondsPerDay == d.day) d.redeposited_same_day = true;
                    if (deposit.time - draw.time <= window_seconds) d.redeposited_within_window = true;
                }
            }
        }
        out.push_back(d);
    }
    return out;
}

}  // namespace lendsim::analytics
