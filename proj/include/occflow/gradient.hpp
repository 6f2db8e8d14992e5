#pragma once

#include "occflow/types.hpp"

namespace occflow {

// Directional forward difference out(p) = f(p) - f(p - d). Pixels whose p - d
// tap falls outside the grid are zero and flagged invalid in the mask.
struct GradientResult {
  Image grad;
  ValidityMask valid;
};

struct ScalarGradientResult {
  ScalarField grad;
  ValidityMask valid;
};

GradientResult directional_gradient(const Image& field, Direction d);
ScalarGradientResult directional_gradient(const ScalarField& field, Direction d);

// Mask shared by every same-shaped field differenced along d.
ValidityMask gradient_valid_mask(int height, int width, Direction d);

}  // namespace occflow
