#pragma once

#include "ti64/kinetics.hpp"
#include "ti64/phase_model.hpp"

namespace ti64 {

/// Full microstructure model parameter set.
struct ModelParams {
  CharacteristicTemperatures temps;
  EquilibriumParams eq;
  DiffusionParams diff;

  void validate() const {
    temps.validate();
    eq.validate();
    diff.validate();
  }
};

}  // namespace ti64
