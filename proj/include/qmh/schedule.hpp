#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace qmh {

enum class ScheduleKind { Constant, Linear, Geometric, Exponential };

/// Inverse-temperature schedule beta(t) for t = 0, 1, 2, ...
/// `parameter` is the slope (linear), the per-step ratio (geometric) or the
/// per-step rate (exponential, beta0 * e^(rate * t)); unused by constant.
/// Values are clamped at 0 so beta(t) >= 0 always holds.
struct AnnealingSchedule {
    ScheduleKind kind = ScheduleKind::Constant;
    double beta0 = 1.0;
    double parameter = 0.0;

    double beta(std::uint64_t t) const {
        const double td = static_cast<double>(t);
        switch (kind) {
        case ScheduleKind::Constant:
            return std::max(0.0, beta0);
        case ScheduleKind::Linear:
            return std::max(0.0, beta0 + parameter * td);
        case ScheduleKind::Geometric:
            return std::max(0.0, beta0 * std::pow(parameter, td));
        case ScheduleKind::Exponential:
            return std::max(0.0, beta0 * std::exp(parameter * td));
        }
        return beta0;
    }
};

inline std::string to_string(ScheduleKind kind) {
    switch (kind) {
    case ScheduleKind::Constant: return "constant";
    case ScheduleKind::Linear: return "linear";
    case ScheduleKind::Geometric: return "geometric";
    case ScheduleKind::Exponential: return "exponential";
    }
    return "constant";
}

inline ScheduleKind schedule_kind_from_string(const std::string& name) {
    if (name == "constant") return ScheduleKind::Constant;
    if (name == "linear") return ScheduleKind::Linear;
    if (name == "geometric") return ScheduleKind::Geometric;
    if (name == "exponential") return ScheduleKind::Exponential;
    throw std::invalid_argument("unknown schedule kind: " + name);
}

} // namespace qmh
