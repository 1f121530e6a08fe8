#pragma once

#include "config.hpp"
#include "field.hpp"

namespace nlslab {

// amplitude * exp(-|x - c|^2 / (2 width^2)), optionally times exp(i xi . x)
// with xi = 2 pi mode / L, or the first snapshot of a container file.
ComplexField make_initial_data(const ExperimentConfig& config);
ComplexField make_initial_data(const ExperimentConfig& config, double amplitude);

}  // namespace nlslab
