#include "lendsim/analytics/flows.hpp"

#include <algorithm>
#include <map>

#include "lendsim/error.hpp"

namespace lendsim::analytics {

double concentration(const Ledger& ledger, Side side, std::size_t k) {
    if (k == 0) throw Error(Errc::InvalidArgument, "k must be at least 1");
    const EventKind kind = side == Side::Deposits ? EventKind::Deposit : EventKind::Borrow;
    std::map<std::uint32_t, Wad> volume;
    for (const Event& e : ledger.events()) {
        if (e.kind == kind) volume[e.address.value] += e.usd_value;
    }
    std::vector<Wad> sorted;
    sorted.reserve(volume.size());
    Wad total;
    for (const auto& [address, usd] : volume) {
        sorted.push_back(usd);
        total += usd;
    }
    if (!total.is_positive()) throw Error(Errc::EmptyLedger, "no volume on the requested side");
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    Wad top;
    for (std::size_t i = 0; i < std::min(k, sorted.size()); ++i) top += sorted[i];
    return wad_div(top, total).to_double();
}

std::set<std::uint32_t> micro_filter(const Ledger& ledger, const TokenTable& tokens) {
    struct Activity {
        int count = 0;
        const Event* first = nullptr;
    };
    std::map<std::uint32_t, Activity> activity;
    auto touch = [&](std::uint32_t address, const Event& e) {
        Activity& a = activity[address];
        if (a.count++ == 0) a.first = &e;
    };
    for (const Event& e : ledger.events()) {
        if (e.kind == EventKind::RewardAccrue) continue;
        touch(e.address.value, e);
        if (e.counterparty && e.counterparty->value != e.address.value) touch(e.counterparty->value, e);
    }
    const Wad limit = Wad::from_int(3);
    std::set<std::uint32_t> out;
    for (const auto& [address, a] : activity) {
        const Event& e = *a.first;
        if (a.count == 1 && e.kind == EventKind::Deposit && e.address.value == address &&
            e.token.value < tokens.size() && tokens[e.token].is_stablecoin && e.usd_value <= limit) {
            out.insert(address);
        }
    }
    return out;
}

Wad FlowNetwork::weight(const std::string& source, const std::string& target) const {
    for (const FlowEdge& edge : edges) {
        if (edge.source == source && edge.target == target) return edge.usd;
    }
    return Wad::zero();
}

FlowNetwork flow_network(const Ledger& ledger, const CategoryMap& categories, const TokenTable& tokens) {
    constexpr std::size_t kPool = kAgentCategoryCount;
    constexpr std::size_t kAmm = kAgentCategoryCount + 1;
    FlowNetwork net;
    for (std::size_t c = 0; c < kAgentCategoryCount; ++c) {
        net.nodes.emplace_back(to_string(static_cast<AgentCategory>(c)));
    }
    net.nodes.emplace_back(kPoolNode);
    net.nodes.emplace_back(kAmmNode);

    auto category = [&](AddressId address) -> std::size_t {
        if (address.value >= categories.size() || !categories[address.value]) {
            throw Error(Errc::Uncategorized, "address " + std::to_string(address.value) + " has no category");
        }
        return static_cast<std::size_t>(*categories[address.value]);
    };

    std::map<std::pair<std::size_t, std::size_t>, Wad> weights;
    for (const Event& e : ledger.events()) {
        if (e.token.value >= tokens.size() || !tokens[e.token].is_stablecoin) continue;
        std::size_t from = 0;
        std::size_t to = 0;
        switch (e.kind) {
            case EventKind::Deposit:
            case EventKind::Repay:
                from = category(e.address);
                to = kPool;
                break;
            case EventKind::Withdraw:
            case EventKind::Borrow:
            case EventKind::ClaimReward:
                from = kPool;
                to = category(e.address);
                break;
            case EventKind::LiquidateRepay:
                if (!e.counterparty) throw Error(Errc::Unpaired, "liquidation without a liquidator");
                from = category(*e.counterparty);
                to = kPool;
                break;
            case EventKind::LiquidateSeize:
                if (!e.counterparty) throw Error(Errc::Unpaired, "liquidation without a liquidator");
                from = category(e.address);
                to = category(*e.counterparty);
                break;
            case EventKind::Swap:
                from = category(e.address);
                to = kAmm;
                break;
            case EventKind::RewardAccrue: continue;
        }
        if (e.usd_value.is_zero()) continue;
        weights[{from, to}] += e.usd_value;
    }
    for (const auto& [key, usd] : weights) {
        net.edges.push_back({net.nodes[key.first], net.nodes[key.second], usd});
    }
    return net;
}

LiquidationMatrix liquidation_matrix(const Ledger& ledger, std::size_t token_count) {
    LiquidationMatrix m;
    m.tokens = token_count;
    m.cells.assign(token_count * token_count, Wad::zero());
    m.row_sums.assign(token_count, Wad::zero());
    m.col_sums.assign(token_count, Wad::zero());
    const auto events = ledger.events();
    for (std::size_t i = 0; i < events.size(); ++i) {
        const Event& e = events[i];
        if (e.kind == EventKind::LiquidateSeize) {
            throw Error(Errc::Unpaired, "seize event " + std::to_string(e.seq) + " has no matching repay");
        }
        if (e.kind != EventKind::LiquidateRepay) continue;
        if (i + 1 >= events.size()) {
            throw Error(Errc::Unpaired, "repay event " + std::to_string(e.seq) + " has no matching seize");
        }
        const Event& s = events[i + 1];
        if (s.kind != EventKind::LiquidateSeize || s.block != e.block || s.address != e.address ||
            s.counterparty != e.counterparty) {
            throw Error(Errc::Unpaired, "repay event " + std::to_string(e.seq) + " has no matching seize");
        }
        if (e.token.value >= token_count || s.token.value >= token_count) {
            throw Error(Errc::InvalidArgument, "token id outside the matrix");
        }
        m.cells[e.token.value * token_count + s.token.value] += e.usd_value;
        m.row_sums[e.token.value] += e.usd_value;
        m.col_sums[s.token.value] += e.usd_value;
        m.total += e.usd_value;
        ++i;
    }
    return m;
}

}  // namespace lendsim::analytics
