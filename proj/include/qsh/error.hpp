#pragma once

#include <stdexcept>
#include <string>

namespace qsh {

/// Malformed or inconsistent input (bad spin, unknown lattice, dimension mismatch, ...).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical precondition of the method failed at run time. `guard()` is a
/// stable short name ("gap hypothesis violated", "not hyperbolic", ...) used
/// by the CLI to report which check tripped.
class GuardError : public std::runtime_error {
 public:
  GuardError(std::string guard, const std::string& detail)
      : std::runtime_error(guard + ": " + detail), guard_(std::move(guard)) {}

  const std::string& guard() const noexcept { return guard_; }

 private:
  std::string guard_;
};

namespace guard {
inline constexpr const char* kGapViolated = "gap hypothesis violated";
inline constexpr const char* kFermiTouches = "Fermi level touches spectrum";
inline constexpr const char* kIslandsOverlap = "spin spectrum islands not separated";
inline constexpr const char* kNoDecay = "no exponential decay detected";
inline constexpr const char* kTransferUndefined = "transfer matrix undefined at k";
inline constexpr const char* kNotHyperbolic = "not hyperbolic: E_g not in a gap";
inline constexpr const char* kSymplecticSplit = "symplectic split violated";
inline constexpr const char* kUUndefined = "U undefined at k";
inline constexpr const char* kResolution = "insufficient k-resolution";
inline constexpr const char* kWindingUnreliable = "winding unreliable";
inline constexpr const char* kMarkerNotConverged = "marker not converged";
inline constexpr const char* kOracleUnreliable = "oracle unreliable";
inline constexpr const char* kSupportOutsideGap = "g support outside gap";
inline constexpr const char* kIncreaseWidth = "increase N2";
}  // namespace guard

}  // namespace qsh
