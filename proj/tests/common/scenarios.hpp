#pragma once

#include <cstdint>
#include <random>
#include <string>

#include <json.hpp>

namespace scen {

using nlohmann::json;

inline json rate_params(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double slope_low = 0.02 + 0.2 * u(rng);
    return {{"base_rate", 0.03 * u(rng)},
            {"slope_low", slope_low},
            {"slope_high", slope_low + 2.0 * u(rng)},
            {"kink", 0.6 + 0.35 * u(rng)},
            {"reserve_factor", 0.3 * u(rng)}};
}

// A randomized but valid scenario mixing every strategy.
inline json random_scenario(std::uint64_t seed, int agents, std::int64_t blocks) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    json doc = {{"schema_version", 1},
                {"seed", seed},
                {"horizon_blocks", blocks},
                {"seconds_per_block", 600},
                {"snapshot_interval", 50},
                {"oracle_amm_coupling", u(rng) < 0.5},
                {"tokens",
                 {{{"symbol", "DAI"}, {"stablecoin", true}},
                  {{"symbol", "USDC"}, {"stablecoin", true}, {"decimals", 6}},
                  {{"symbol", "ETH"}},
                  {{"symbol", "COMP"}}}},
                {"oracle",
                 {{"ETH", {{"source", "gbm"}, {"p0", 2000}, {"mu", 0.0}, {"sigma", 0.3 + u(rng)}}},
                  {"COMP", {{"source", "gbm"}, {"p0", 150}, {"mu", 0.0}, {"sigma", 1.0}}}}},
                {"reward_token", "COMP"},
                {"liquidation", {{"close_factor", 0.5}, {"incentive", 0.08}}},
                {"gas",
                 {{"deposit", 2}, {"withdraw", 2}, {"borrow", 3}, {"repay", 3}, {"liquidate", 5}, {"claim", 4},
                  {"swap", 3}}},
                {"amm_pools",
                 {{{"token_x", "ETH"}, {"token_y", "USDC"}, {"reserve_x", 2000 + 8000 * u(rng)},
                   {"reserve_y", 4'000'000 + 16'000'000 * u(rng)}, {"fee", 0.003}}}}};
    const std::int64_t reward_start = static_cast<std::int64_t>(u(rng) * static_cast<double>(blocks) / 2);
    doc["pools"] = json::array();
    double dai_haircut = 0.0;
    for (const char* t : {"DAI", "USDC", "ETH"}) {
        const double haircut = 0.2 + 0.3 * u(rng);
        if (std::string(t) == "DAI") dai_haircut = haircut;
        json p = {{"token", t}, {"params", rate_params(rng)}, {"haircut", haircut}, {"reward_speed", u(rng)},
                  {"reward_start_block", reward_start}};
        doc["pools"].push_back(p);
    }
    if (u(rng) < 0.5) {
        doc["shocks"] = {{{"token", "ETH"}, {"block", blocks / 2}, {"multiplier", 0.4 + 0.5 * u(rng)}}};
    }
    json list = json::array();
    int left = agents;
    const auto add = [&](json a, int count) {
        count = std::min(count, left);
        if (count <= 0) return;
        a["count"] = count;
        left -= count;
        list.push_back(std::move(a));
    };
    const int chunk = std::max(1, agents / 10);
    add({{"category", "OnRamp"}, {"capital", 2'000'000}, {"strategy", "hold_deposit"}, {"token", "DAI"},
         {"params", {{"exit_prob", 0.001}, {"reenter_prob", 0.01}}}},
        2);
    add({{"category", "LargeAddress"}, {"capital", 2'000'000}, {"strategy", "hold_deposit"}, {"token", "USDC"}}, 2);
    add({{"category", "LargeAddress"}, {"capital", 500'000}, {"strategy", "hold_deposit"}, {"token", "ETH"}}, 1);
    add({{"category", "SmallAddress"},
         {"capital", {{"dist", "lognormal"}, {"median", 20000}, {"sigma", 0.8}}},
         {"strategy", "borrow_and_hold"},
         {"token", "ETH"},
         {"borrow_token", "DAI"},
         {"params",
          {{"borrow_fraction", 0.5 + 0.45 * u(rng)}, {"repay_prob", 0.01}, {"reborrow_prob", 0.02},
           {"redeposit_prob", 0.3}}}},
        chunk * 3);
    add({{"category", "AssetManagement"},
         {"capital", {{"dist", "uniform"}, {"min", 50000}, {"max", 300000}}},
         {"strategy", "borrow_and_hold"},
         {"token", "ETH"},
         {"borrow_token", "USDC"},
         {"params", {{"borrow_fraction", 0.6}, {"repay_prob", 0.005}, {"reborrow_prob", 0.01}}}},
        chunk);
    add({{"category", "SmallAddress"},
         {"capital", {{"dist", "lognormal"}, {"median", 30000}, {"sigma", 0.5}}},
         {"strategy", "borrow_and_hold"},
         {"token", "USDC"},
         {"borrow_token", "ETH"},
         {"params", {{"borrow_fraction", 0.5}, {"repay_prob", 0.01}, {"reborrow_prob", 0.02}}}},
        chunk);
    add({{"category", "YieldAggregator"},
         {"capital", 100000},
         {"strategy", "leverage_loop"},
         {"token", "DAI"},
         {"start_block", blocks / 4},
         {"params", {{"loop_fraction", 0.95 * (1.0 - dai_haircut)}, {"loop_rounds", 5}}}},
        chunk);
    add({{"category", "UnidentifiedContract"}, {"capital", 100000}, {"strategy", "rate_chaser"}, {"token", "DAI"}},
        chunk);
    add({{"category", "MicroAddress"}, {"capital", 3}, {"strategy", "micro_airdrop"}, {"token", "USDC"},
         {"start_block", blocks / 3}},
        chunk);
    add({{"category", "LiquidatorBot"}, {"capital", 1'000'000}, {"strategy", "liquidator_bot"}, {"token", "DAI"}}, 2);
    add({{"category", "LiquidatorBot"}, {"capital", 1'000'000}, {"strategy", "liquidator_bot"}, {"token", "USDC"}}, 1);
    add({{"category", "SmallAddress"},
         {"capital", {{"dist", "lognormal"}, {"median", 3000}, {"sigma", 1.0}}},
         {"strategy", "hold_deposit"},
         {"token", "USDC"},
         {"params", {{"exit_prob", 0.005}, {"reenter_prob", 0.01}}}},
        left);
    doc["agents"] = list;
    return doc;
}

}  // namespace scen
