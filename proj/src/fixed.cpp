#include "stvcheck/fixed.hpp"

#include <stdexcept>

namespace stv {

Fixed Fixed::mul_div(Fixed value, Fixed num, Fixed den) {
    if (den.units_ <= 0)
        throw std::invalid_argument("Fixed::mul_div: non-positive divisor");
    if (value.units_ < 0 || num.units_ < 0)
        throw std::invalid_argument("Fixed::mul_div: negative operand");
    __int128 wide = static_cast<__int128>(value.units_) * num.units_;
    return from_units(static_cast<std::int64_t>(wide / den.units_));
}

std::string Fixed::str() const {
    std::int64_t u = units_;
    std::string sign;
    if (u < 0) {
        sign = "-";
        u = -u;
    }
    std::string out = sign + std::to_string(u / scale);
    std::int64_t frac = u % scale;
    if (frac != 0) {
        std::string digits = std::to_string(frac);
        digits.insert(0, 5 - digits.size(), '0');
        while (digits.back() == '0')
            digits.pop_back();
        out += "." + digits;
    }
    return out;
}

std::string Fixed::str_rounded(int places) const {
    if (places < 0 || places > 5)
        throw std::invalid_argument("Fixed::str_rounded: places out of range");
    std::int64_t u = units_;
    std::string sign;
    if (u < 0) {
        sign = "-";
        u = -u;
    }
    std::int64_t pow = 1;
    for (int i = places; i < 5; ++i)
        pow *= 10;
    std::int64_t scaled = (u + pow / 2) / pow; // half away from zero
    std::int64_t unit_div = scale / pow;
    std::string out = sign + std::to_string(scaled / unit_div);
    if (places > 0) {
        std::string digits = std::to_string(scaled % unit_div);
        digits.insert(0, static_cast<std::size_t>(places) - digits.size(), '0');
        out += "." + digits;
    }
    return out;
}

} // namespace stv
