#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace geoqm {

/// Failure categories raised by the numerical kernels.
enum class Errc {
  DimensionMismatch,
  GridMismatch,
  NonDiagonalizable,
  NotPositiveDefinite,
  ComplexSpectrum,
  NotPseudoHermitian,
  NotHermitianOutput,
  NotUnitary,
  MissingGradient,
  SectionNotPseudoHermitian,
  SingularGauge,
  NotUnitaryTransition,
  MissingTransition,
  ZeroState,
  InvalidArgument,
};

constexpr std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::GridMismatch: return "GridMismatch";
    case Errc::NonDiagonalizable: return "NonDiagonalizable";
    case Errc::NotPositiveDefinite: return "NotPositiveDefinite";
    case Errc::ComplexSpectrum: return "ComplexSpectrum";
    case Errc::NotPseudoHermitian: return "NotPseudoHermitian";
    case Errc::NotHermitianOutput: return "NotHermitianOutput";
    case Errc::NotUnitary: return "NotUnitary";
    case Errc::MissingGradient: return "MissingGradient";
    case Errc::SectionNotPseudoHermitian: return "SectionNotPseudoHermitian";
    case Errc::SingularGauge: return "SingularGauge";
    case Errc::NotUnitaryTransition: return "NotUnitaryTransition";
    case Errc::MissingTransition: return "MissingTransition";
    case Errc::ZeroState: return "ZeroState";
    case Errc::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace geoqm
