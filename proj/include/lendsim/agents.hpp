#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

#include "lendsim/types.hpp"
#include "lendsim/wad.hpp"
#include "lendsim/world.hpp"

namespace lendsim {

enum class Strategy { HoldDeposit, BorrowAndHold, LeverageLoop, LiquidatorBot, MicroAirdrop, RateChaser };

std::string_view to_string(Strategy strategy);
std::optional<Strategy> parse_strategy(std::string_view text);

/// Flat USD cost per action, whatever the size of the transaction.
struct GasModel {
    Wad deposit;
    Wad withdraw;
    Wad borrow;
    Wad repay;
    Wad liquidate;
    Wad claim;
    Wad swap;
    void validate() const;
};

enum class CapitalDist { Fixed, Uniform, LogNormal, Pareto };

/// Starting capital in USD. Fixed: a. Uniform: [a, b]. LogNormal: median a,
/// log-sd b. Pareto: scale a, shape b.
struct CapitalSpec {
    CapitalDist dist = CapitalDist::Fixed;
    double a = 0.0;
    double b = 0.0;
    double sample(std::mt19937_64& rng) const;
    void validate() const;
};

struct StrategyParams {
    std::optional<TokenId> token;         // supplied / held token
    std::optional<TokenId> borrow_token;  // BorrowAndHold
    Wad loop_fraction = wad("0.75");
    int loop_rounds = 10;
    Wad borrow_fraction = wad("0.7");  // share of the borrow limit drawn
    Wad repay_buffer = wad("0.05");    // extra borrow-token capital, share of capital
    Wad claim_threshold = Wad::one();
    std::int64_t claim_interval = 100;
    double exit_prob = 0.0;
    double reenter_prob = 0.0;
    double repay_prob = 0.0;
    double reborrow_prob = 0.0;
    double redeposit_prob = 0.0;
    Wad rate_threshold = wad("0.03");
    Wad rate_hysteresis = wad("0.005");
    double reaction_prob = 1.0;
    bool fire_sale = true;
};

struct AgentSpec {
    AgentCategory category = AgentCategory::SmallAddress;
    int count = 1;
    CapitalSpec capital;
    Strategy strategy = Strategy::HoldDeposit;
    StrategyParams params;
    std::int64_t start_block = 0;
    std::optional<std::uint32_t> first_address;
};

enum class IntentKind { Deposit, DepositAll, WithdrawAll, Borrow, BorrowFraction, RepayAll, Claim, Liquidate, Swap };

std::string_view to_string(IntentKind kind);

struct Intent {
    IntentKind kind = IntentKind::Deposit;
    TokenId token;
    Wad amount;
    bool clamp = false;         // Borrow: shrink to the current limit
    bool use_previous = false;  // amount is what the previous intent moved
    AddressId borrower;         // Liquidate
    TokenId seize_token;        // Liquidate
    Wad profit_usd;             // Liquidate
    std::size_t amm = 0;        // Swap
};

/// Engine-side state of one simulated address.
struct AgentState {
    AddressId id;
    std::size_t spec_index = 0;
    AgentCategory category = AgentCategory::SmallAddress;
    Strategy strategy = Strategy::HoldDeposit;
    StrategyParams params;
    double capital_usd = 0.0;
    std::int64_t start_block = 0;
    std::mt19937_64 rng;
    bool started = false;

    Wad deposited_usd;
    Wad borrowed_usd;
    Wad reward_claimed;
    Wad gas_usd;
    Wad injected_usd;
    int liquidated_count = 0;
};

/// Converts the agent's capital into wallet tokens at current prices.
void fund_agent(World& world, AgentState& agent);

/// The agent's action plan for the current block; the engine executes it in
/// order and logs rejections.
std::vector<Intent> step_agent(AgentState& agent, const World& world, const GasModel& gas);

/// Executes one intent and returns the underlying amount it moved.
/// `previous` is the amount moved by the preceding intent of the same plan.
Wad execute_intent(World& world, AddressId who, const Intent& intent, Wad previous);

Wad gas_cost(const GasModel& gas, IntentKind kind);

/// Claim only when the reward is worth at least `threshold` claim transactions.
bool should_claim(Wad reward_value_usd, Wad claim_gas_usd, Wad threshold);

struct LoopRound {
    Wad deposit;
    Wad borrow;
};

/// Round k deposits capital*f^k and borrows capital*f^(k+1); the final round
/// only deposits. Requires f <= 1 - haircut.
std::vector<LoopRound> leverage_loop_plan(Wad capital, Wad haircut, Wad fraction, int rounds);

/// Profitable liquidations available to `liquidator`, best first. Profit is
/// repay_usd * incentive - gas; only non-negative profits are listed.
std::vector<Intent> liquidator_scan(const World& world, const GasModel& gas, AddressId liquidator);

/// `count` one-shot depositors of `deposit_usd` of a stablecoin.
std::vector<AgentSpec> micro_airdrop_wave(int count, double deposit_usd, TokenId token, const TokenTable& tokens,
                                          std::int64_t start_block = 0);

}  // namespace lendsim
