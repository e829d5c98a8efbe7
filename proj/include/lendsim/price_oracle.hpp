#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "lendsim/types.hpp"
#include "lendsim/wad.hpp"

namespace lendsim {

enum class PriceSource { Constant, File, GBM, Scripted, AmmCoupled };

std::string_view to_string(PriceSource source);

/// USD price per block for one token, blocks 0..horizon inclusive. Immutable
/// once built; every entry is strictly positive.
class PriceSeries {
  public:
    PriceSeries(TokenId token, PriceSource source, std::vector<Wad> prices);

    TokenId token() const { return token_; }
    PriceSource source() const { return source_; }
    std::int64_t horizon() const { return static_cast<std::int64_t>(prices_.size()) - 1; }
    std::span<const Wad> prices() const { return prices_; }

    Wad price_at(std::int64_t block) const;

  private:
    TokenId token_;
    PriceSource source_;
    std::vector<Wad> prices_;
};

PriceSeries constant_series(TokenId token, Wad price, std::int64_t horizon_blocks);

/// Step function through (block, price) points; the first point must be block 0.
PriceSeries scripted_series(TokenId token, std::span<const std::pair<std::int64_t, Wad>> points,
                            std::int64_t horizon_blocks, PriceSource source = PriceSource::Scripted);

struct GbmParams {
    double p0 = 1.0;
    double mu_annual = 0.0;
    double sigma_annual = 0.0;
};

/// Geometric Brownian motion sampled once per block, dt = seconds_per_block / year.
PriceSeries generate_gbm(TokenId token, std::uint64_t seed, const GbmParams& params, std::int64_t horizon_blocks,
                         std::int64_t seconds_per_block);

/// Jointly generated paths whose Brownian increments have the given
/// correlation matrix (Cholesky factorised). Row-major `correlation`.
std::vector<PriceSeries> generate_correlated_gbm(std::span<const TokenId> tokens, std::uint64_t seed,
                                                 std::span<const GbmParams> params,
                                                 std::span<const double> correlation, std::int64_t horizon_blocks,
                                                 std::int64_t seconds_per_block);

/// Scales every price from `block` onward by `multiplier` (> 0).
PriceSeries apply_shock(const PriceSeries& series, std::int64_t block, Wad multiplier);

/// Reads `block,price` or `date,price` (YYYY-MM-DD, daily, first row is day 0)
/// CSV. Gaps and the tail are forward-filled.
PriceSeries load_price_csv(std::istream& in, TokenId token, std::int64_t horizon_blocks,
                           std::int64_t seconds_per_block);

/// Mixes a per-token seed from a scenario seed. Stable across platforms.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace lendsim
