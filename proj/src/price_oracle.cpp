#include "lendsim/price_oracle.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <istream>
#include <random>
#include <sstream>
#include <string>

#include <Eigen/Dense>

#include "lendsim/error.hpp"

namespace lendsim {

std::string_view to_string(PriceSource source) {
    switch (source) {
        case PriceSource::Constant: return "constant";
        case PriceSource::File: return "file";
        case PriceSource::GBM: return "gbm";
        case PriceSource::Scripted: return "scripted";
        case PriceSource::AmmCoupled: return "amm_coupled";
    }
    return "unknown";
}

PriceSeries::PriceSeries(TokenId token, PriceSource source, std::vector<Wad> prices)
    : token_(token), source_(source), prices_(std::move(prices)) {
    if (prices_.empty()) throw Error(Errc::InvalidArgument, "price series must cover at least block 0");
    for (Wad p : prices_) {
        if (!p.is_positive()) throw Error(Errc::InvalidArgument, "prices must be strictly positive");
    }
}

Wad PriceSeries::price_at(std::int64_t block) const {
    if (block < 0 || block > horizon()) {
        throw Error(Errc::OutOfRange, "block " + std::to_string(block) + " outside price horizon");
    }
    return prices_[static_cast<std::size_t>(block)];
}

PriceSeries constant_series(TokenId token, Wad price, std::int64_t horizon_blocks) {
    if (horizon_blocks < 0) throw Error(Errc::InvalidArgument, "negative horizon");
    return PriceSeries(token, PriceSource::Constant, std::vector<Wad>(static_cast<std::size_t>(horizon_blocks) + 1, price));
}

PriceSeries scripted_series(TokenId token, std::span<const std::pair<std::int64_t, Wad>> points,
                            std::int64_t horizon_blocks, PriceSource source) {
    if (points.empty() || points.front().first != 0) {
        throw Error(Errc::InvalidArgument, "scripted prices must start at block 0");
    }
    std::vector<Wad> prices(static_cast<std::size_t>(horizon_blocks) + 1);
    std::size_t next = 0;
    Wad current = points.front().second;
    for (std::int64_t b = 0; b <= horizon_blocks; ++b) {
        while (next < points.size() && points[next].first <= b) {
            if (next > 0 && points[next].first <= points[next - 1].first) {
                throw Error(Errc::InvalidArgument, "scripted price blocks must strictly increase");
            }
            current = points[next].second;
            ++next;
        }
        prices[static_cast<std::size_t>(b)] = current;
    }
    return PriceSeries(token, source, std::move(prices));
}

namespace {

void check_gbm(const GbmParams& p) {
    if (!(p.p0 > 0.0) || !std::isfinite(p.p0)) throw Error(Errc::InvalidArgument, "gbm p0 must be > 0");
    if (!(p.sigma_annual >= 0.0) || !std::isfinite(p.sigma_annual)) {
        throw Error(Errc::InvalidArgument, "gbm sigma must be >= 0");
    }
    if (!std::isfinite(p.mu_annual)) throw Error(Errc::InvalidArgument, "gbm mu must be finite");
}

Wad positive_wad(double v) {
    const Wad w = Wad::from_double(v);
    return w.is_positive() ? w : Wad::from_raw(1);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    // splitmix64 over (seed, stream)
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

PriceSeries generate_gbm(TokenId token, std::uint64_t seed, const GbmParams& params, std::int64_t horizon_blocks,
                         std::int64_t seconds_per_block) {
    const TokenId tokens[] = {token};
    const GbmParams ps[] = {params};
    const double corr[] = {1.0};
    return std::move(generate_correlated_gbm(tokens, seed, ps, corr, horizon_blocks, seconds_per_block).front());
}

std::vector<PriceSeries> generate_correlated_gbm(std::span<const TokenId> tokens, std::uint64_t seed,
                                                 std::span<const GbmParams> params,
                                                 std::span<const double> correlation, std::int64_t horizon_blocks,
                                                 std::int64_t seconds_per_block) {
    const std::size_t n = tokens.size();
    if (params.size() != n || correlation.size() != n * n) {
        throw Error(Errc::InvalidArgument, "gbm token, parameter and correlation sizes disagree");
    }
    if (horizon_blocks < 0 || seconds_per_block <= 0) throw Error(Errc::InvalidArgument, "invalid gbm horizon");
    for (const auto& p : params) check_gbm(p);

    Eigen::MatrixXd corr(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) corr(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = correlation[i * n + j];
    }
    Eigen::LLT<Eigen::MatrixXd> llt(corr);
    if (llt.info() != Eigen::Success || !corr.isApprox(corr.transpose())) {
        throw Error(Errc::InvalidArgument, "correlation matrix must be symmetric positive definite");
    }
    const Eigen::MatrixXd chol = llt.matrixL();

    const double dt = static_cast<double>(seconds_per_block) / static_cast<double>(kSecondsPerYear);
    const double sqrt_dt = std::sqrt(dt);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    std::vector<std::vector<Wad>> paths(n, std::vector<Wad>(static_cast<std::size_t>(horizon_blocks) + 1));
    std::vector<double> brownian(n, 0.0);
    Eigen::VectorXd z(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) paths[i][0] = positive_wad(params[i].p0);
    for (std::int64_t b = 1; b <= horizon_blocks; ++b) {
        for (std::size_t i = 0; i < n; ++i) z(static_cast<Eigen::Index>(i)) = normal(rng);
        const Eigen::VectorXd shocks = chol * z;
        const double t = dt * static_cast<double>(b);
        for (std::size_t i = 0; i < n; ++i) {
            const auto& p = params[i];
            brownian[i] += sqrt_dt * shocks(static_cast<Eigen::Index>(i));
            const double drift = (p.mu_annual - 0.5 * p.sigma_annual * p.sigma_annual) * t;
            paths[i][static_cast<std::size_t>(b)] = positive_wad(p.p0 * std::exp(drift + p.sigma_annual * brownian[i]));
        }
    }
    std::vector<PriceSeries> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.emplace_back(tokens[i], PriceSource::GBM, std::move(paths[i]));
    return out;
}

PriceSeries apply_shock(const PriceSeries& series, std::int64_t block, Wad multiplier) {
    if (!multiplier.is_positive()) throw Error(Errc::InvalidArgument, "shock multiplier must be > 0");
    if (block < 0 || block > series.horizon()) throw Error(Errc::OutOfRange, "shock block outside price horizon");
    std::vector<Wad> prices(series.prices().begin(), series.prices().end());
    for (auto i = static_cast<std::size_t>(block); i < prices.size(); ++i) {
        prices[i] = wad_mul(prices[i], multiplier);
        if (!prices[i].is_positive()) prices[i] = Wad::from_raw(1);
    }
    return PriceSeries(series.token(), series.source(), std::move(prices));
}

namespace {

std::int64_t parse_date_days(const std::string& text) {
    int y = 0;
    unsigned m = 0;
    unsigned d = 0;
    char tail = 0;
    if (std::sscanf(text.c_str(), "%d-%u-%u%c", &y, &m, &d, &tail) != 3) {
        throw Error(Errc::InvalidArgument, "bad date '" + text + "'");
    }
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!ymd.ok()) throw Error(Errc::InvalidArgument, "bad date '" + text + "'");
    return std::chrono::sys_days{ymd}.time_since_epoch().count();
}

}  // namespace

PriceSeries load_price_csv(std::istream& in, TokenId token, std::int64_t horizon_blocks,
                           std::int64_t seconds_per_block) {
    std::string line;
    if (!std::getline(in, line)) throw Error(Errc::Io, "empty price file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    bool daily = false;
    if (line == "block,price") {
        daily = false;
    } else if (line == "date,price") {
        daily = true;
    } else {
        throw Error(Errc::InvalidArgument, "price file header must be 'block,price' or 'date,price'");
    }
    const std::int64_t blocks_per_day_num = kSecondsPerDay;
    std::vector<std::pair<std::int64_t, Wad>> points;
    std::int64_t first_day = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw Error(Errc::InvalidArgument, "bad price row '" + line + "'");
        const std::string key = line.substr(0, comma);
        const Wad price = Wad::parse(line.substr(comma + 1));
        std::int64_t block = 0;
        if (daily) {
            const std::int64_t day = parse_date_days(key);
            if (points.empty()) first_day = day;
            // first block whose timestamp falls in this day
            const std::int64_t offset_seconds = (day - first_day) * blocks_per_day_num;
            block = (offset_seconds + seconds_per_block - 1) / seconds_per_block;
        } else {
            block = std::stoll(key);
        }
        if (block > horizon_blocks) break;
        points.emplace_back(block, price);
    }
    return scripted_series(token, points, horizon_blocks, PriceSource::File);
}

}  // namespace lendsim
