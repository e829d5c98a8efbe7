#pragma once

#include <cstdint>
#include <vector>

#include "lendsim/wad.hpp"

namespace lendsim {

/// Kinked utilization rate model. All rates are annual.
struct InterestParams {
    Wad base_rate;       // rate at zero utilization
    Wad slope_low;       // slope below the kink
    Wad slope_high;      // slope above the kink
    Wad kink;            // target utilization, in (0, 1]
    Wad reserve_factor;  // share of borrower interest kept by the pool, in [0, 1)

    static InterestParams defaults();
    // Throws Errc::InvalidArgument when the parameter set is not a valid model.
    void validate() const;

    friend bool operator==(const InterestParams&, const InterestParams&) = default;
};

/// Annual borrow rate: a + bU up to the kink, a + bU* + c(U - U*) above it.
Wad borrow_rate(const InterestParams& params, Wad utilization);

/// Annual supply rate: i_b(U) * (1 - reserve_factor) * U.
Wad supply_rate(const InterestParams& params, Wad utilization);

/// Time-ordered parameter regimes. The first regime activates at block 0.
class RegimeSchedule {
  public:
    struct Entry {
        std::int64_t activation_block = 0;
        InterestParams params;
    };

    RegimeSchedule() : RegimeSchedule(InterestParams::defaults()) {}
    explicit RegimeSchedule(InterestParams params);
    explicit RegimeSchedule(std::vector<Entry> entries);

    const InterestParams& active_params(std::int64_t block) const;
    const std::vector<Entry>& entries() const { return entries_; }
    // Index of the regime active at `block`.
    std::size_t regime_index(std::int64_t block) const;

  private:
    std::vector<Entry> entries_;
};

}  // namespace lendsim
