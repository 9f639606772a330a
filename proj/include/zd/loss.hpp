#pragma once

// Kron loss formula. Outputs are converted to per-unit on the model's MVA
// base, the quadratic form is evaluated there, and the loss is returned in MW.

#include <span>
#include <vector>

#include "zd/model.hpp"

namespace zd {

double transmission_loss(const LossModel& lm, std::span<const double> p_mw);

/// dP_L/dP_i in MW/MW.
std::vector<double> loss_gradient(const LossModel& lm, std::span<const double> p_mw);

/// Single-threaded reference for transmission_loss; the OpenMP kernel must
/// agree with it to rounding.
double transmission_loss_serial(const LossModel& lm, std::span<const double> p_mw);

}  // namespace zd
