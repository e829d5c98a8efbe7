#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lendsim/agents.hpp"
#include "lendsim/comptroller.hpp"
#include "lendsim/ctoken_pool.hpp"
#include "lendsim/interest_model.hpp"
#include "lendsim/price_oracle.hpp"
#include "lendsim/types.hpp"

namespace lendsim {

inline constexpr int kSchemaVersion = 1;

struct OracleSpec {
    PriceSource source = PriceSource::Constant;
    Wad price = Wad::one();                             // constant
    std::vector<std::pair<std::int64_t, Wad>> points;   // scripted
    std::filesystem::path file;                         // file
    GbmParams gbm;                                      // gbm
};

struct ShockSpec {
    TokenId token;
    std::int64_t block = 0;
    Wad multiplier = Wad::one();
};

struct PoolSpec {
    TokenId token;
    RegimeSchedule schedule;
    CollateralConfig collateral;
    Wad reward_speed;
    std::int64_t reward_start_block = 0;
    Wad initial_exchange_rate = Wad::one();
};

struct AmmSpec {
    TokenId token_x;
    TokenId token_y;
    Wad reserve_x;
    Wad reserve_y;
    Wad fee = wad("0.003");
};

struct Scenario {
    int schema_version = kSchemaVersion;
    std::uint64_t seed = 0;
    std::int64_t horizon_blocks = 1;
    std::int64_t seconds_per_block = 13;
    std::int64_t snapshot_interval = 1;
    UtilizationConvention convention = UtilizationConvention::CashPlusBorrows;
    bool oracle_amm_coupling = false;
    TokenTable tokens;
    std::vector<OracleSpec> oracles;  // by TokenId
    std::vector<TokenId> correlated;
    std::vector<double> correlation;  // row-major over `correlated`
    std::vector<ShockSpec> shocks;
    std::vector<PoolSpec> pools;
    LiquidationConfig liquidation;
    std::optional<TokenId> reward_token;
    std::vector<AmmSpec> amms;
    GasModel gas;
    std::vector<AgentSpec> agents;

    std::size_t agent_count() const;
};

/// Parses and validates a scenario document. Relative file paths resolve
/// against `base_dir`. Throws ValidationError listing every bad field.
Scenario parse_scenario(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
Scenario load_scenario(const std::filesystem::path& path);

/// `a.b.0.c` -> `/a/b/0/c`.
std::string dotted_to_pointer(const std::string& path);
/// Sets the value at a dotted path, where `*` fans out over array elements.
/// The path must already resolve. Throws ValidationError otherwise.
void apply_override(nlohmann::json& doc, const std::string& path, const nlohmann::json& value);
/// CLI text to JSON: numbers and literals parse, anything else is a string.
nlohmann::json parse_override_value(const std::string& text);

}  // namespace lendsim
