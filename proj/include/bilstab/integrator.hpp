#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bilstab/feedback.hpp"
#include "bilstab/models.hpp"

namespace bilstab {

struct SimOptions {
  double dt_max = 1e-2;
  double horizon = 10.0;
  /// Relative extinction threshold: under an FTS-family law the state is set
  /// to exact zero once ||x|| <= eps_ext * ||x0|| and stays there.
  double eps_ext = 1e-12;
  int record_stride = 1;
  int weak_functionals = 5;
  /// Full-step cap dt <= courant_cap / (|u| * max(1, ||B||)).
  double courant_cap = 0.1;
  std::uint64_t max_steps = 20'000'000;
};

struct TrajectorySample {
  double t = 0.0;
  double norm = 0.0;
  double control = 0.0;
  double b_form = 0.0;
  Eigen::VectorXd weak_obs;
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  std::optional<double> extinction_time;
  StateVector final_state;
  std::map<std::string, std::string> manifest;  ///< integrator parameter echo
};

/// One Lie-splitting step: exact semigroup substep, then the feedback substep
/// (exponential-midpoint update, subdivided so each sub-update satisfies
/// |u|*||B||*h <= 0.02). dt = 0 returns x unchanged; transport models require
/// dt to be an integer multiple of dx.
StateVector step(const Model& m, const FeedbackLaw& law, const StateVector& x, double t, double dt,
                 double state_floor = 0.0);

/// Closed-loop evolution over [0, horizon] with adaptive stepping near the
/// feedback singularity, closed-form extinction landing on coercive invariant
/// configurations, and extinction persistence.
Trajectory simulate(const Model& m, const FeedbackLaw& law, const StateVector& x0,
                    const SimOptions& opts);

}  // namespace bilstab
