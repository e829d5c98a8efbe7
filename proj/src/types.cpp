#include "lendsim/types.hpp"

#include <array>

#include "lendsim/error.hpp"

namespace lendsim {

TokenId TokenTable::add(TokenInfo info) {
    if (find(info.symbol)) throw Error(Errc::InvalidArgument, "duplicate token symbol " + info.symbol);
    tokens_.push_back(std::move(info));
    return TokenId{static_cast<std::uint32_t>(tokens_.size() - 1)};
}

std::optional<TokenId> TokenTable::find(std::string_view symbol) const {
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
        if (tokens_[i].symbol == symbol) return TokenId{static_cast<std::uint32_t>(i)};
    }
    return std::nullopt;
}

TokenId TokenTable::require(std::string_view symbol) const {
    auto id = find(symbol);
    if (!id) throw Error(Errc::InvalidArgument, "unknown token " + std::string(symbol));
    return *id;
}

namespace {

constexpr std::array<std::string_view, kAgentCategoryCount> kCategoryNames = {
    "LargeAddress",          "SmallAddress",    "MicroAddress",
    "YieldAggregator",       "OnRamp",          "DecentralizedExchange",
    "AssetManagement",       "UnidentifiedContract", "LiquidatorBot",
};

}  // namespace

std::string_view to_string(AgentCategory category) {
    return kCategoryNames.at(static_cast<std::size_t>(category));
}

std::optional<AgentCategory> parse_agent_category(std::string_view text) {
    for (std::size_t i = 0; i < kCategoryNames.size(); ++i) {
        if (kCategoryNames[i] == text) return static_cast<AgentCategory>(i);
    }
    return std::nullopt;
}

BlockClock::BlockClock(std::int64_t seconds_per_block, std::int64_t block)
    : block_(block), seconds_per_block_(seconds_per_block) {
    if (seconds_per_block <= 0 || seconds_per_block > kSecondsPerYear) {
        throw Error(Errc::InvalidArgument, "seconds_per_block must be in (0, 31536000]");
    }
    if (block < 0) throw Error(Errc::InvalidArgument, "block number must be non-negative");
}

void BlockClock::advance_to(std::int64_t block) {
    if (block <= block_) throw Error(Errc::OutOfOrder, "block clock must strictly increase");
    block_ = block;
}

}  // namespace lendsim
