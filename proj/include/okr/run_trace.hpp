#pragma once

#include <vector>

namespace okr {

/// One checkpoint of an online run. For kernel runs the three distances are
/// ||f_t - f_target||_K, ||f_t - f_target||_rho and ||f_t - f_rho||_rho; the
/// finite-dimensional runs carry their single Euclidean distance in both of
/// the first two slots and 0 in the third (one Hilbert norm, same schema).
struct Checkpoint {
  long t = 0;
  double k_dist_to_target = 0;
  double rho_dist_to_target = 0;
  double rho_dist_to_frho = 0;
  long atoms = 0;
};

struct RunTrace {
  std::vector<Checkpoint> checkpoints;
};

}  // namespace okr
