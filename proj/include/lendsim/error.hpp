#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lendsim {

enum class Errc {
    Overflow,
    DivisionByZero,
    InvalidArgument,
    OutOfOrder,
    ZeroAmount,
    InsufficientBalance,
    InsufficientCash,
    BorrowLimit,
    Undercollateralized,
    Overpayment,
    MissingPrice,
    NotLiquidatable,
    ExceedsCloseFactor,
    InsufficientCollateral,
    NothingAccrued,
    OutOfRange,
    EmptyPool,
    Disproportionate,
    ExcessBurn,
    OutputZero,
    RankDeficient,
    NonConvergence,
    PerfectSeparation,
    InsufficientHistory,
    Unpaired,
    Uncategorized,
    EmptyLedger,
    Validation,
    Io,
};

std::string_view to_string(Errc code);

class Error : public std::runtime_error {
  public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    Errc code() const noexcept { return code_; }

  private:
    Errc code_;
};

/// A single field-level problem found while validating user input.
struct Diagnostic {
    std::string field;
    std::string message;
};

class ValidationError : public Error {
  public:
    explicit ValidationError(std::vector<Diagnostic> diagnostics);
    ValidationError(std::string field, std::string message);

    const std::vector<Diagnostic>& diagnostics() const noexcept { return diagnostics_; }

  private:
    std::vector<Diagnostic> diagnostics_;
};

}  // namespace lendsim
