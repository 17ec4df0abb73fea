#pragma once

#include <compare>
#include <string>

namespace cxls {

/// A real number or the symbolic value minus infinity.
///
/// Loss functions take the value -inf below their truncation point and the
/// truncation point itself may be -inf. Both are represented by this type
/// instead of a floating-point sentinel so that "E[phi(X)] = -inf" is an
/// exact, branch-free decision.
class ExtendedReal {
public:
    constexpr ExtendedReal() = default;
    constexpr ExtendedReal(double v) : value_(v) {}  // NOLINT: implicit by intent

    static constexpr ExtendedReal neg_inf() {
        ExtendedReal r;
        r.neg_inf_ = true;
        return r;
    }

    constexpr bool is_neg_inf() const { return neg_inf_; }
    constexpr bool is_finite() const { return !neg_inf_; }

    /// Finite value; undefined to call on -inf (checked).
    double value() const;

    /// Finite value, or -HUGE_VAL for -inf. Only for printing and plotting.
    double to_double() const;

    std::string to_string() const;

    friend constexpr bool operator==(const ExtendedReal& a, const ExtendedReal& b) {
        if (a.neg_inf_ || b.neg_inf_) return a.neg_inf_ == b.neg_inf_;
        return a.value_ == b.value_;
    }
    friend constexpr std::partial_ordering operator<=>(const ExtendedReal& a,
                                                       const ExtendedReal& b) {
        if (a.neg_inf_ && b.neg_inf_) return std::partial_ordering::equivalent;
        if (a.neg_inf_) return std::partial_ordering::less;
        if (b.neg_inf_) return std::partial_ordering::greater;
        return a.value_ <=> b.value_;
    }

private:
    double value_ = 0.0;
    bool neg_inf_ = false;
};

}  // namespace cxls
