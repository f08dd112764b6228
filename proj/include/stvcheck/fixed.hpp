#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace stv {

// Exact vote arithmetic in integer units of 1e-5 votes. Every quantity the
// count produces is representable; comparisons are exact and transfer
// credits truncate toward zero at the fifth decimal, so repeated runs are
// bit-identical.
class Fixed {
public:
    static constexpr std::int64_t scale = 100000;

    constexpr Fixed() = default;

    static constexpr Fixed from_units(std::int64_t u) {
        Fixed f;
        f.units_ = u;
        return f;
    }
    static constexpr Fixed whole(std::int64_t votes) { return from_units(votes * scale); }

    constexpr std::int64_t units() const { return units_; }
    constexpr bool is_zero() const { return units_ == 0; }

    friend constexpr Fixed operator+(Fixed a, Fixed b) { return from_units(a.units_ + b.units_); }
    friend constexpr Fixed operator-(Fixed a, Fixed b) { return from_units(a.units_ - b.units_); }
    Fixed& operator+=(Fixed o) {
        units_ += o.units_;
        return *this;
    }
    Fixed& operator-=(Fixed o) {
        units_ -= o.units_;
        return *this;
    }
    friend constexpr Fixed operator*(Fixed a, std::int64_t k) { return from_units(a.units_ * k); }
    friend constexpr auto operator<=>(Fixed a, Fixed b) = default;

    // floor(value * num / den) computed exactly in 128-bit. den must be
    // positive and all operands non-negative; this is the only rounding
    // operation in the count.
    static Fixed mul_div(Fixed value, Fixed num, Fixed den);

    double to_double() const { return static_cast<double>(units_) / scale; }

    // "162.5", "233.375", "501" -- trailing zeros trimmed.
    std::string str() const;
    // Fixed number of decimal places, rounded half away from zero. Used for
    // display only; never feeds back into the count.
    std::string str_rounded(int places) const;

private:
    std::int64_t units_ = 0;
};

} // namespace stv
