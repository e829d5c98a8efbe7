#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "lendsim/ledger.hpp"
#include "lendsim/types.hpp"
#include "lendsim/wad.hpp"

namespace lendsim::analytics {

enum class Side { Deposits, Loans };

/// Share of cumulative USD volume held by the k largest addresses.
double concentration(const Ledger& ledger, Side side, std::size_t k);

/// Addresses whose whole history is one stablecoin deposit worth at most 3 USD.
std::set<std::uint32_t> micro_filter(const Ledger& ledger, const TokenTable& tokens);

/// Address category by AddressId; nullopt for unknown addresses.
using CategoryMap = std::vector<std::optional<AgentCategory>>;

inline constexpr const char* kPoolNode = "LendingPool";
inline constexpr const char* kAmmNode = "AMM";

struct FlowEdge {
    std::string source;
    std::string target;
    Wad usd;
};

struct FlowNetwork {
    std::vector<std::string> nodes;  // categories, then the pool and AMM nodes
    std::vector<FlowEdge> edges;     // sorted by (source, target) node order
    Wad weight(const std::string& source, const std::string& target) const;
};

/// Stablecoin USD flows between address categories and the protocol venues.
FlowNetwork flow_network(const Ledger& ledger, const CategoryMap& categories, const TokenTable& tokens);

struct LiquidationMatrix {
    std::size_t tokens = 0;
    std::vector<Wad> cells;  // row-major: debt token x seized token
    std::vector<Wad> row_sums;
    std::vector<Wad> col_sums;
    Wad total;
    Wad at(std::size_t debt, std::size_t seized) const { return cells.at(debt * tokens + seized); }
};

/// USD of debt repaid by liquidators, by debt token and seized collateral.
LiquidationMatrix liquidation_matrix(const Ledger& ledger, std::size_t token_count);

}  // namespace lendsim::analytics
