#include "lendsim/comptroller.hpp"

#include <string>

#include <boost/multiprecision/cpp_int.hpp>

#include "lendsim/error.hpp"

namespace lendsim {

namespace {

using Index = RewardDistributor::Index;

const Index kMax = (Index(1) << 127) - 1;

Wad narrow(const Index& v) {
    if (v > kMax || v < -kMax) {
        throw Error(Errc::Overflow, "reward amount overflows 128 bits");
    }
    const Index mag = v < 0 ? Index(-v) : v;
    const int128 r = static_cast<int128>(static_cast<unsigned long long>(mag >> 64)) << 64 |
                     static_cast<int128>(static_cast<unsigned long long>(mag & Index(~0ULL)));
    return Wad::from_raw(v < 0 ? -r : r);
}

Index widen(int128 v) {
    const bool neg = v < 0;
    const auto mag = static_cast<unsigned __int128>(neg ? -v : v);
    Index r = (Index(static_cast<unsigned long long>(mag >> 64)) << 64) | Index(static_cast<unsigned long long>(mag));
    return neg ? Index(-r) : r;
}

}  // namespace

void CollateralConfig::validate() const {
    if (haircut.is_negative() || haircut > Wad::one()) throw Error(Errc::InvalidArgument, "haircut must be in [0, 1]");
}

void LiquidationConfig::validate(std::span<const CollateralConfig> collateral) const {
    if (!close_factor.is_positive() || close_factor > Wad::one()) {
        throw Error(Errc::InvalidArgument, "close_factor must be in (0, 1]");
    }
    if (incentive.is_negative()) throw Error(Errc::InvalidArgument, "liquidator incentive must be >= 0");
    for (const auto& c : collateral) {
        if (!c.accepted_as_collateral) continue;
        if (wad_mul(c.collateral_factor(), Wad::one() + incentive) >= Wad::one()) {
            throw Error(Errc::InvalidArgument,
                        "(1 - haircut) * (1 + incentive) must be < 1 so that liquidation improves account health");
        }
    }
}

LiquiditySummary account_liquidity(std::span<const AccountPosition> positions, std::span<const LendingPool> pools,
                                   std::span<const CollateralConfig> collateral, std::span<const Wad> prices) {
    if (positions.size() > pools.size() || pools.size() != collateral.size()) {
        throw Error(Errc::InvalidArgument, "position, pool and collateral arrays must align");
    }
    LiquiditySummary out;
    for (std::size_t m = 0; m < positions.size(); ++m) {
        const auto& pos = positions[m];
        const bool supplies = pos.ctoken_balance.is_positive();
        const bool owes = pos.has_debt();
        if (!supplies && !owes) continue;
        const LendingPool& pool = pools[m];
        const auto token = pool.token().value;
        if (token >= prices.size() || !prices[token].is_positive()) {
            throw Error(Errc::MissingPrice, "no price for token " + std::to_string(token));
        }
        const Wad price = prices[token];
        if (supplies) {
            const Wad value = wad_mul(pool.underlying_of(pos), price);
            out.collateral_usd += value;
            out.borrow_limit_usd += wad_mul(value, collateral[m].collateral_factor());
        }
        if (owes) out.debt_usd += wad_mul(pool.debt_of(pos), price);
    }
    out.liquidity = out.borrow_limit_usd - out.debt_usd;
    return out;
}

bool check_borrow_allowed(Wad liquidity, Wad extra_debt_usd) { return liquidity - extra_debt_usd >= Wad::zero(); }

Wad max_close_amount(Wad debt, const LiquidationConfig& config) { return wad_mul(debt, config.close_factor); }

SeizeQuote quote_seize(Wad repay_amount, Wad repay_price, Wad seize_price, Wad seize_exchange_rate, Wad incentive) {
    if (!repay_price.is_positive() || !seize_price.is_positive()) throw Error(Errc::MissingPrice, "missing price");
    SeizeQuote q;
    q.repay_usd = wad_mul(repay_amount, repay_price);
    q.seize_usd = wad_mul(q.repay_usd, Wad::one() + incentive);
    q.seize_underlying = wad_div(q.seize_usd, seize_price);
    q.seize_ctokens = wad_div(q.seize_underlying, seize_exchange_rate);
    return q;
}

RewardDistributor::RewardDistributor(std::vector<Wad> speeds) {
    markets_.reserve(speeds.size());
    for (Wad s : speeds) {
        if (s.is_negative()) throw Error(Errc::InvalidArgument, "reward speed must be >= 0");
        markets_.push_back(Market{.speed = s});
    }
}

void RewardDistributor::set_speed(std::size_t market, Wad speed) {
    if (speed.is_negative()) throw Error(Errc::InvalidArgument, "reward speed must be >= 0");
    markets_.at(market).speed = speed;
}

RewardDistributor::Account& RewardDistributor::account(AddressId address) {
    if (address.value >= accounts_.size()) accounts_.resize(address.value + 1);
    Account& acct = accounts_[address.value];
    if (acct.supply_index.size() < markets_.size()) {
        acct.supply_index.resize(markets_.size(), 0);
        acct.borrow_index.resize(markets_.size(), 0);
    }
    return acct;
}

void RewardDistributor::accrue(std::size_t market, std::int64_t elapsed_blocks, Wad total_supply_weight,
                               Wad total_borrow_weight) {
    if (elapsed_blocks < 0) throw Error(Errc::InvalidArgument, "negative elapsed blocks");
    Market& m = markets_.at(market);
    if (elapsed_blocks == 0 || m.speed.is_zero()) return;
    const Wad pot = m.speed.times(elapsed_blocks);
    const Wad supply_pot = Wad::from_raw(pot.raw() / 2);
    const Wad borrow_pot = pot - supply_pot;
    m.emitted += pot;

    auto distribute = [&](Wad side_pot, Wad total_weight, Index& index) {
        if (!total_weight.is_positive()) {
            m.withheld += side_pot;
            return;
        }
        const Index scaled = widen(side_pot.raw()) * widen(kIndexScale);
        const Index weight = widen(total_weight.raw());
        index += scaled / weight;
        m.dust_scaled += scaled % weight;
    };
    distribute(supply_pot, total_supply_weight, m.supply_index);
    distribute(borrow_pot, total_borrow_weight, m.borrow_index);
}

Wad RewardDistributor::side_delta(Wad weight, const Index& now, const Index& then) const {
    if (!weight.is_positive() || now == then) return Wad::zero();
    return narrow(widen(weight.raw()) * (now - then) / widen(kIndexScale));
}

Wad RewardDistributor::materialize(AddressId address, std::size_t market, Wad supply_weight, Wad borrow_weight) {
    const Market& m = markets_.at(market);
    Account& acct = account(address);
    const Wad gained = side_delta(supply_weight, m.supply_index, acct.supply_index[market]) +
                       side_delta(borrow_weight, m.borrow_index, acct.borrow_index[market]);
    acct.supply_index[market] = m.supply_index;
    acct.borrow_index[market] = m.borrow_index;
    acct.accrued += gained;
    ++materializations_;
    return gained;
}

Wad RewardDistributor::pending(AddressId address, std::size_t market, Wad supply_weight, Wad borrow_weight) const {
    const Market& m = markets_.at(market);
    Index si = 0;
    Index bi = 0;
    if (address.value < accounts_.size() && market < accounts_[address.value].supply_index.size()) {
        si = accounts_[address.value].supply_index[market];
        bi = accounts_[address.value].borrow_index[market];
    }
    return side_delta(supply_weight, m.supply_index, si) + side_delta(borrow_weight, m.borrow_index, bi);
}

Wad RewardDistributor::accrued(AddressId address) const {
    return address.value < accounts_.size() ? accounts_[address.value].accrued : Wad::zero();
}

Wad RewardDistributor::claimed(AddressId address) const {
    return address.value < accounts_.size() ? accounts_[address.value].claimed : Wad::zero();
}

Wad RewardDistributor::claim(AddressId address) {
    Account& acct = account(address);
    if (!acct.accrued.is_positive()) throw Error(Errc::NothingAccrued, "no accrued rewards to claim");
    const Wad amount = acct.accrued;
    acct.claimed += amount;
    acct.accrued = Wad::zero();
    return amount;
}

Wad RewardDistributor::emitted() const {
    Wad total;
    for (const auto& m : markets_) total += m.emitted;
    return total;
}

Wad RewardDistributor::withheld() const {
    Wad total;
    for (const auto& m : markets_) total += m.withheld;
    return total;
}

Wad RewardDistributor::index_dust() const {
    Index scaled = 0;
    for (const auto& m : markets_) scaled += m.dust_scaled;
    return narrow(scaled / widen(kIndexScale));
}

NetRates net_rates(const LendingPool& pool, Wad reward_speed, Wad reward_price, Wad token_price,
                   std::int64_t blocks_per_year) {
    NetRates out;
    out.supply_rate = pool.supply_rate();
    out.borrow_rate = pool.borrow_rate();
    const Wad side_value_per_year = wad_mul(reward_speed.times(blocks_per_year).div_int(2), reward_price);
    const Wad supplied_usd = wad_mul(pool.total_supplied(), token_price);
    const Wad borrowed_usd = wad_mul(pool.state().total_borrows, token_price);
    if (supplied_usd.is_positive()) out.supply_reward_apy = wad_div(side_value_per_year, supplied_usd);
    if (borrowed_usd.is_positive()) out.borrow_reward_apy = wad_div(side_value_per_year, borrowed_usd);
    out.net_supply_rate = out.supply_rate + out.supply_reward_apy.value_or(Wad::zero());
    out.net_borrow_rate = out.borrow_rate - out.borrow_reward_apy.value_or(Wad::zero());
    return out;
}

}  // namespace lendsim
