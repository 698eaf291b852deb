#pragma once

#include <stdexcept>
#include <string>

namespace supcert {

// Base class for every failure the library reports. Each concrete type marks
// one rejection reason so callers can branch on the category instead of
// parsing message text.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// basis
struct NotPositiveDefinite : Error { using Error::Error; };
struct BadShape : Error { using Error::Error; };
struct BadDimension : Error { using Error::Error; };

// state
struct NotNormalized : Error { using Error::Error; };
struct ZeroVector : Error { using Error::Error; };
struct OutOfRange : Error { using Error::Error; };
struct Unsupported : Error { using Error::Error; };

// conditions
struct NotOrdered : Error { using Error::Error; };
struct BadPermutation : Error { using Error::Error; };
struct RankMismatch : Error { using Error::Error; };
struct Indeterminate : Error { using Error::Error; };
struct NotStochastic : Error { using Error::Error; };

// kraus / planning
struct UnsupportedCase : Error { using Error::Error; };
struct Infeasible : Error { using Error::Error; };
struct Degenerate : Error { using Error::Error; };
struct DivisionByZero : Error { using Error::Error; };
struct UnsupportedDimension : Error { using Error::Error; };
struct Incomplete : Error { using Error::Error; };
struct RankIncrease : Error { using Error::Error; };

// oracle
struct GridTooLarge : Error { using Error::Error; };

}  // namespace supcert
