#include "sawlab/core.hpp"

#include <cmath>
#include <string>

#include "sawlab/errors.hpp"

namespace sawlab {

namespace {

void require_positive_frequency(double f) {
  if (!(f > 0.0) || !std::isfinite(f)) {
    throw DomainError("frequency must be positive and finite, got " + std::to_string(f));
  }
}

}  // namespace

void MaterialParams::validate() const {
  if (!(saw_velocity > 0.0)) throw DomainError("saw_velocity must be > 0");
  if (!(k2_bulk > 0.0 && k2_bulk < 1.0)) throw DomainError("k2_bulk must lie in (0, 1)");
  if (!(sigma_m > 0.0)) throw DomainError("sigma_m must be > 0");
}

void LayerStack::validate() const {
  if (!(depth >= 0.0)) throw DomainError("layer depth must be >= 0");
  if (!(thickness > 0.0)) throw DomainError("layer thickness must be > 0");
  if (!(sigma_xx >= 0.0)) throw DomainError("layer sigma_xx must be >= 0");
}

double saw_wavelength(double frequency_hz, const MaterialParams& material) {
  require_positive_frequency(frequency_hz);
  return material.saw_velocity / frequency_hz;
}

double wavevector(double frequency_hz, const MaterialParams& material) {
  require_positive_frequency(frequency_hz);
  return 2.0 * kPi * frequency_hz / material.saw_velocity;
}

}  // namespace sawlab
