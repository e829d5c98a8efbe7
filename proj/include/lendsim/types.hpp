#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lendsim {

struct TokenId {
    std::uint32_t value = 0;
    friend constexpr auto operator<=>(TokenId, TokenId) = default;
};

struct AddressId {
    std::uint32_t value = 0;
    friend constexpr auto operator<=>(AddressId, AddressId) = default;
};

struct TokenInfo {
    std::string symbol;
    bool is_stablecoin = false;
    int decimals = 18;
};

/// Token registry for one scenario. Identifiers are dense indices.
class TokenTable {
  public:
    TokenId add(TokenInfo info);
    std::optional<TokenId> find(std::string_view symbol) const;
    TokenId require(std::string_view symbol) const;

    const TokenInfo& operator[](TokenId id) const { return tokens_.at(id.value); }
    std::size_t size() const { return tokens_.size(); }
    const std::vector<TokenInfo>& all() const { return tokens_; }

  private:
    std::vector<TokenInfo> tokens_;
};

enum class AgentCategory {
    LargeAddress,
    SmallAddress,
    MicroAddress,
    YieldAggregator,
    OnRamp,
    DecentralizedExchange,
    AssetManagement,
    UnidentifiedContract,
    LiquidatorBot,
};

inline constexpr std::size_t kAgentCategoryCount = 9;

std::string_view to_string(AgentCategory category);
std::optional<AgentCategory> parse_agent_category(std::string_view text);

inline constexpr std::int64_t kSecondsPerYear = 31'536'000;
inline constexpr std::int64_t kSecondsPerDay = 86'400;

class BlockClock {
  public:
    explicit BlockClock(std::int64_t seconds_per_block = 13, std::int64_t block = 0);

    std::int64_t block() const { return block_; }
    std::int64_t seconds_per_block() const { return seconds_per_block_; }
    std::int64_t blocks_per_year() const { return kSecondsPerYear / seconds_per_block_; }
    std::int64_t timestamp() const { return block_ * seconds_per_block_; }
    std::int64_t day() const { return timestamp() / kSecondsPerDay; }

    // Block numbers only move forward.
    void advance_to(std::int64_t block);
    void tick() { advance_to(block_ + 1); }

  private:
    std::int64_t block_;
    std::int64_t seconds_per_block_;
};

}  // namespace lendsim
