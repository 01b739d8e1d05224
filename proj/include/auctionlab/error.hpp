#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace auctionlab {

enum class ErrorKind {
    ZeroDensity,
    NoDensity,
    OutOfSupport,
    Unbounded,
    GridTooCoarse,
    InconsistentArity,
    DegenerateCompetition,
    NotRegular,
    Empty,
    AllRemoved,
    SearchSpaceTooLarge,
    EmptyCell,
    RewardOutOfRange,
    NonpositiveBudget,
    NonMonotone,
    NotIncreasing,
    NoRoot,
    NoBracket,
    RequiresDiscrete,
    InvalidArgument,
    InvalidConfig,
    MissingSeries,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries a kind so callers (the CLI in
/// particular) can map it to an exit status without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool condition, ErrorKind kind, const std::string& what) {
    if (!condition)
        fail(kind, what);
}

}  // namespace auctionlab
