#pragma once

#include "edrelax/types.hpp"

namespace edrelax {

/// DC generation shift factors (PTDF matrix), lines x buses, relative to the
/// network's slack bus. The slack column is identically zero. Throws
/// std::runtime_error when the network is disconnected (singular reduced
/// susceptance matrix) or a reactance is non-positive.
Eigen::MatrixXd compute_gsf(const Network& net);

}  // namespace edrelax
