#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bilstab/integrator.hpp"
#include "bilstab/rng.hpp"

namespace bilstab {

struct RateFit {
  enum class Kind { Polynomial, Exponential };
  Kind kind = Kind::Exponential;
  double exponent = 0.0;   ///< p: ||x|| ~ prefactor * t^(-p)   (Polynomial)
  double rate = 0.0;       ///< sigma: ||x|| ~ prefactor * e^(-sigma t) (Exponential)
  double prefactor = 0.0;
  double t_lo = 0.0;
  double t_hi = 0.0;
  double r_squared = 0.0;
  int n_points = 0;
};

/// Least-squares fit of log||x|| against log t (Polynomial) or t
/// (Exponential) over the last half of the pre-extinction trajectory;
/// polynomial fits additionally exclude the first decade of time and the
/// last decade before extinction. Requires >= 20 usable samples.
RateFit fit_decay(const Trajectory& traj, RateFit::Kind kind);

std::optional<double> settling_time(const Trajectory& traj);

/// Composite-Simpson integral of |<B S(t)y, J(S(t)y)>| over [0, T].
/// Transport models pin the node spacing to dx.
double observation_integral(const Model& m, const StateVector& y, double T,
                            int min_intervals = 2000);

struct ObservabilityEstimate {
  double T = 0.0;
  double delta_over_initial = 0.0;  ///< min integral / ||y||^2
  double delta_over_final = 0.0;    ///< min integral / ||S(T)y||^2
  int n_samples = 0;
  StateVector argmin_sample;        ///< minimizer of the final-normalized form
};

/// Samples the observation functional on unit-norm states (basis modes,
/// two-mode mixtures with both signs, random unit vectors) and reports the
/// smallest value found. Sampling can miss the true minimizer, so the
/// estimates are upper bounds on the respective infima.
ObservabilityEstimate observability_estimate(const Model& m, double T, int n_random,
                                             std::uint64_t seed, int min_intervals = 2000);

struct SequenceLemmaResult {
  double c = 0.0;
  double alpha = 0.0;
  double s0 = 0.0;
  long k_max = 0;
  double sup_product = 0.0;  ///< sup_k s_k (k+1)^{1/(alpha+1)}
  long argmax_k = 0;
  double last_s = 0.0;
  bool pass = false;         ///< sup finite
};

/// Iterates the extremal recurrence s_{k+1} + c s_{k+1}^{alpha+2} = s_k
/// (bisection per step, tolerance 1e-14) and reports the sup of
/// s_k (k+1)^{1/(alpha+1)}.
SequenceLemmaResult sequence_lemma_oracle(double c, double alpha, double s0, long k_max);

struct ParsegovResult {
  double t_exact = 0.0;  ///< (1/(nu sqrt(ab))) atan(sqrt(b/a) V0^nu)
  double t_bound = 0.0;  ///< pi / (2 nu sqrt(ab))
};

/// Extinction time of Vdot = -a V^{1-nu} - b V^{1+nu} via the substitution
/// W = V^nu, together with its a-priori bound.
ParsegovResult parsegov_extinction_time(double a, double b, double nu, double v0);

struct FtsNecessaryVerdict {
  bool impossible = false;
  bool kernel_trivial = false;
  bool kernel_invariant = false;  ///< A ker(B) inside ker(B)
  std::string detail;
  std::optional<StateVector> witness;
};

/// Necessary-condition diagnostic: if ker(B) is invariant under S(t) and the
/// restricted semigroup is injective and non-nilpotent, global finite-time
/// stabilization is impossible; the witness is an obstructing initial state.
FtsNecessaryVerdict fts_necessary_check(const Model& m);

struct A2Verification {
  double worst_ratio = 0.0;
  bool pass = false;
  int n_pairs = 0;
  std::string kappa;  ///< description of the modulus used
};

/// Samples |B_J(y) - B_J(z)| / (K(||y||,||z||) ||y - z||) with the model's
/// Lipschitz modulus K and reports the largest ratio (pass iff <= 1 + 1e-9).
A2Verification verify_A2(const Model& m, int n_samples, std::uint64_t seed);

/// Per-functional ratio of max |<x, phi_k>| over the last 10% of the horizon
/// to its value over the first 10%.
std::vector<double> weak_report(const Trajectory& traj);

struct ContractionReport {
  double window = 0.0;
  std::vector<double> ratios;  ///< zeta_j = ||x((j+1)T)|| / ||x(jT)||
  double max_ratio = 0.0;
};

ContractionReport contraction_ratio_report(const Trajectory& traj, double T);

/// max_t |<B S(t)y, J(S(t)y)>| over a uniform grid in [0, T]; y belongs to
/// the unobservable set G iff this deficiency vanishes.
double g_membership_deficiency(const Model& m, const StateVector& y, double T, int n_nodes = 400);

/// Random state with independent standard-normal coefficients (EnergyWave
/// pairs are scaled 1/sqrt(lambda_j) so modal energies are comparable).
StateVector random_state(const SpaceDescriptor& s, Rng& rng);
StateVector random_unit_state(const SpaceDescriptor& s, Rng& rng);

}  // namespace bilstab
