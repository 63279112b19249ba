#ifndef NIP_SCHEDULE_HPP
#define NIP_SCHEDULE_HPP

#include <charconv>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <string_view>

#include "nip/error.hpp"

namespace nip {

enum class ScheduleKind { Harmonic, Logarithmic, ConstantForTesting };

/// Positive shift sequence eps_i, evaluated in closed form.
///
/// harmonic:    eps0 / (i + 1)^p,  p in (0, 1]
/// logarithmic: eps0 / log(i + e)
/// constant:    eps0 (not decreasing; only for baselines)
///
/// The first two decrease strictly and have eps(i+1)/eps(i) -> 1, i.e. they
/// go to zero slower than any geometric sequence.
class EpsilonSchedule {
public:
  static EpsilonSchedule harmonic(double eps0, double p = 1.0)
  {
    if (!(p > 0.0 && p <= 1.0)) throw Error(ErrorCode::InvalidArgument, "harmonic exponent must lie in (0, 1]");
    return EpsilonSchedule(ScheduleKind::Harmonic, eps0, p);
  }
  static EpsilonSchedule logarithmic(double eps0) { return EpsilonSchedule(ScheduleKind::Logarithmic, eps0, 1.0); }
  static EpsilonSchedule constant_for_testing(double eps0)
  {
    return EpsilonSchedule(ScheduleKind::ConstantForTesting, eps0, 1.0);
  }

  ScheduleKind kind() const { return kind_; }
  double eps0() const { return eps0_; }
  double exponent() const { return p_; }

  double at(std::size_t i) const
  {
    const double k = static_cast<double>(i);
    switch (kind_) {
    case ScheduleKind::Harmonic:
      return p_ == 1.0 ? eps0_ / (k + 1.0) : eps0_ / std::pow(k + 1.0, p_);
    case ScheduleKind::Logarithmic:
      return eps0_ / std::log(k + std::numbers::e);
    case ScheduleKind::ConstantForTesting:
      return eps0_;
    }
    return eps0_;
  }

  /// Descriptor accepted by parse(): "harmonic:p=P", "log" or "const".
  std::string descriptor() const
  {
    switch (kind_) {
    case ScheduleKind::Harmonic: {
      char buf[64];
      auto res = std::to_chars(buf, buf + sizeof buf, p_);
      return "harmonic:p=" + std::string(buf, res.ptr);
    }
    case ScheduleKind::Logarithmic: return "log";
    case ScheduleKind::ConstantForTesting: return "const";
    }
    return "";
  }

  static EpsilonSchedule parse(std::string_view text, double eps0)
  {
    if (text == "log" || text == "logarithmic") return logarithmic(eps0);
    if (text == "const" || text == "constant") return constant_for_testing(eps0);
    if (text == "harmonic") return harmonic(eps0);
    constexpr std::string_view prefix = "harmonic:p=";
    if (text.substr(0, prefix.size()) == prefix) {
      const auto rest = text.substr(prefix.size());
      double p = 0.0;
      auto res = std::from_chars(rest.data(), rest.data() + rest.size(), p);
      if (res.ec != std::errc() || res.ptr != rest.data() + rest.size()) {
        throw Error(ErrorCode::ParseError, "bad harmonic exponent in schedule '" + std::string(text) + "'");
      }
      return harmonic(eps0, p);
    }
    throw Error(ErrorCode::ParseError, "unknown schedule '" + std::string(text) + "'");
  }

private:
  EpsilonSchedule(ScheduleKind kind, double eps0, double p) : kind_(kind), eps0_(eps0), p_(p)
  {
    if (!(eps0 > 0.0) || !std::isfinite(eps0)) throw Error(ErrorCode::InvalidArgument, "eps0 must be positive");
  }

  ScheduleKind kind_;
  double eps0_;
  double p_;
};

inline double eps_at(const EpsilonSchedule& schedule, std::size_t i) { return schedule.at(i); }

} // namespace nip

#endif // NIP_SCHEDULE_HPP
