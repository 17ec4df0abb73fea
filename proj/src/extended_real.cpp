#include "cxls/extended_real.hpp"

#include <cmath>
#include <sstream>

#include "cxls/error.hpp"

namespace cxls {

double ExtendedReal::value() const {
    if (neg_inf_) throw NumericError("value: extended real is -inf");
    return value_;
}

double ExtendedReal::to_double() const { return neg_inf_ ? -HUGE_VAL : value_; }

std::string ExtendedReal::to_string() const {
    if (neg_inf_) return "-inf";
    std::ostringstream os;
    os.precision(17);
    os << value_;
    return os.str();
}

}  // namespace cxls
