#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "lendsim/agents.hpp"
#include "lendsim/error.hpp"
#include "lendsim/ledger.hpp"
#include "lendsim/price_oracle.hpp"
#include "lendsim/scenario.hpp"
#include "lendsim/world.hpp"

namespace lendsim {

struct PoolSnapshot {
    std::int64_t block = 0;
    TokenId token;
    Wad cash;
    Wad borrows;
    Wad reserves;
    Wad ctoken_supply;
    Wad exchange_rate;
    Wad utilization;
    Wad borrow_rate;
    Wad supply_rate;
};

struct RiskRow {
    std::int64_t block = 0;
    AddressId address;
    Wad liquidity;
    Wad collateral;
    Wad debt;
};

struct AgentSummary {
    AddressId address;
    AgentCategory category = AgentCategory::SmallAddress;
    Wad total_deposited;  // USD
    Wad total_borrowed;   // USD
    Wad reward_claimed;   // reward tokens
    int liquidated_count = 0;
    Wad pnl_usd;
};

struct RewardRow {
    AddressId address;
    Wad accrued;
    Wad claimed;
};

struct PriceRow {
    std::int64_t block = 0;
    TokenId token;
    Wad price;
};

struct AmmSnapshot {
    std::int64_t block = 0;
    std::size_t amm = 0;
    Wad reserve_x;
    Wad reserve_y;
    Wad spot_price;
    Wad lp_supply;
};

struct Rejection {
    std::int64_t block = 0;
    AddressId address;
    IntentKind kind = IntentKind::Deposit;
    TokenId token;
    Wad amount;
    Errc code = Errc::InvalidArgument;
    std::string message;
};

struct BlockLiquidation {
    std::int64_t block = 0;
    int count = 0;
    int wave = 0;
    Wad repay_usd;
    Wad outstanding_usd;  // all borrows, valued before the block's liquidations
    double share() const;
};

struct RunSummary {
    std::uint64_t seed = 0;
    std::int64_t horizon_blocks = 0;
    std::size_t events = 0;
    std::size_t liquidations = 0;
    Wad liquidation_usd;
    double max_block_liquidated_share = 0.0;
    int cascade_waves = 0;
    std::size_t rejected_intents = 0;
    Wad final_borrows_usd;
    Wad reward_emitted;
};

struct RunOutput {
    TokenTable tokens;
    std::int64_t seconds_per_block = 13;
    Ledger ledger;
    std::vector<PoolSnapshot> snapshots;
    std::vector<RiskRow> risk;
    std::vector<AgentSummary> agents;
    std::vector<RewardRow> rewards;
    std::vector<PriceRow> prices;
    std::vector<AmmSnapshot> amm;
    std::vector<Rejection> rejections;
    std::vector<LiquidationRecord> liquidations;
    std::vector<BlockLiquidation> liquidation_blocks;
    RunSummary summary;
};

/// Builds every token's price path for blocks 0..horizon, shocks applied.
std::vector<PriceSeries> build_price_series(const Scenario& scenario);

/// One scenario run, stepped block by block. Blocks 0..horizon-1 are
/// simulated; each block runs oracle update, pool accrual, reward accrual,
/// agent actions in address order, liquidations, then snapshots.
class Simulation {
  public:
    explicit Simulation(Scenario scenario);

    bool done() const { return next_block_ >= scenario_.horizon_blocks; }
    std::int64_t next_block() const { return next_block_; }
    void step();
    /// Runs the remaining blocks, settles rewards and assembles the output.
    RunOutput finish();

    const Scenario& scenario() const { return scenario_; }
    const World& world() const { return world_; }
    std::span<const AgentState> agents() const { return agents_; }
    std::span<const AccrualRecord> last_accruals() const { return last_accruals_; }
    std::span<const PriceSeries> series() const { return series_; }
    std::optional<AddressId> arbitrageur() const { return arbitrageur_; }

  private:
    void update_oracle(std::int64_t t);
    void step_agents(std::int64_t t);
    void run_liquidations(std::int64_t t);
    void take_snapshot(std::int64_t t);
    void fire_sale(AgentState& bot, TokenId token, std::int64_t t, bool& coupled_sale);
    void reject(std::int64_t t, AddressId who, const Intent& intent, const Error& e);

    Scenario scenario_;
    std::vector<PriceSeries> series_;
    World world_;
    std::vector<AgentState> agents_;  // ordered by address
    std::vector<std::size_t> agent_by_address_;
    std::optional<AddressId> arbitrageur_;
    std::int64_t next_block_ = 0;
    std::vector<AccrualRecord> last_accruals_;
    bool prev_fire_sale_ = false;
    int prev_wave_ = 0;

    std::vector<PoolSnapshot> snapshots_;
    std::vector<RiskRow> risk_;
    std::vector<PriceRow> prices_;
    std::vector<AmmSnapshot> amm_;
    std::vector<Rejection> rejections_;
    std::vector<BlockLiquidation> liquidation_blocks_;
};

RunOutput run(const Scenario& scenario);

struct CrashRun {
    Wad multiplier;
    std::size_t liquidations = 0;
    Wad liquidation_usd;
    Wad outstanding_usd_at_shock;
    double liquidated_fraction = 0.0;
    int cascade_waves = 0;
    std::vector<BlockLiquidation> per_block;
    std::vector<LiquidationRecord> records;
};

/// One run per multiplier with a price shock on `token` at `shock_block`.
/// Multipliers must lie in (0, 1].
std::vector<CrashRun> run_crash_experiment(const Scenario& scenario, TokenId token, std::int64_t shock_block,
                                           std::span<const Wad> multipliers, int parallelism = 1);

struct SweepPoint {
    nlohmann::json value;
    RunSummary summary;
};

/// Runs the scenario once per value of the dotted parameter path. Results come
/// back in `values` order however many threads run them. `on_run` (if set) is
/// called from worker threads with each finished run.
std::vector<SweepPoint> sweep(const nlohmann::json& scenario, const std::filesystem::path& base_dir,
                              const std::string& parameter_path, const std::vector<nlohmann::json>& values,
                              int parallelism,
                              const std::function<void(std::size_t, const RunOutput&)>& on_run = {});

}  // namespace lendsim
