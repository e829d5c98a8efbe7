#include "lendsim/interest_model.hpp"

#include <algorithm>
#include <string>

#include "lendsim/error.hpp"

namespace lendsim {

InterestParams InterestParams::defaults() {
    return {wad("0.02"), wad("0.20"), wad("2.00"), wad("0.80"), wad("0.10")};
}

void InterestParams::validate() const {
    if (base_rate.is_negative()) throw Error(Errc::InvalidArgument, "base_rate must be >= 0");
    if (slope_low.is_negative()) throw Error(Errc::InvalidArgument, "slope_low must be >= 0");
    if (slope_high < slope_low) throw Error(Errc::InvalidArgument, "slope_high must be >= slope_low");
    if (!kink.is_positive() || kink > Wad::one()) throw Error(Errc::InvalidArgument, "kink must be in (0, 1]");
    if (reserve_factor.is_negative() || reserve_factor >= Wad::one()) {
        throw Error(Errc::InvalidArgument, "reserve_factor must be in [0, 1)");
    }
}

namespace {

void check_utilization(Wad u) {
    if (u.is_negative() || u > Wad::one()) {
        throw Error(Errc::OutOfRange, "utilization " + u.to_string() + " outside [0, 1]");
    }
}

}  // namespace

Wad borrow_rate(const InterestParams& params, Wad utilization) {
    check_utilization(utilization);
    if (utilization <= params.kink) return params.base_rate + wad_mul(params.slope_low, utilization);
    return params.base_rate + wad_mul(params.slope_low, params.kink) +
           wad_mul(params.slope_high, utilization - params.kink);
}

Wad supply_rate(const InterestParams& params, Wad utilization) {
    const Wad ib = borrow_rate(params, utilization);
    return wad_mul(wad_mul(ib, Wad::one() - params.reserve_factor), utilization);
}

RegimeSchedule::RegimeSchedule(InterestParams params) : RegimeSchedule(std::vector<Entry>{{0, params}}) {}

RegimeSchedule::RegimeSchedule(std::vector<Entry> entries) : entries_(std::move(entries)) {
    if (entries_.empty() || entries_.front().activation_block != 0) {
        throw Error(Errc::InvalidArgument, "regime schedule must start at block 0");
    }
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        entries_[i].params.validate();
        if (i > 0 && entries_[i].activation_block <= entries_[i - 1].activation_block) {
            throw Error(Errc::InvalidArgument, "regime activation blocks must strictly increase");
        }
    }
}

std::size_t RegimeSchedule::regime_index(std::int64_t block) const {
    if (block < 0) throw Error(Errc::OutOfRange, "negative block");
    auto it = std::upper_bound(entries_.begin(), entries_.end(), block,
                               [](std::int64_t b, const Entry& e) { return b < e.activation_block; });
    return static_cast<std::size_t>(it - entries_.begin()) - 1;
}

const InterestParams& RegimeSchedule::active_params(std::int64_t block) const {
    return entries_[regime_index(block)].params;
}

}  // namespace lendsim
