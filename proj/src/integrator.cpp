#include "bilstab/integrator.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <limits>
#include <sstream>

namespace bilstab {

namespace {

constexpr double kSubstepCap = 0.01;
constexpr std::uint64_t kMaxSubdivisions = 1u << 20;

bool model_is_dense(const Model& m) {
  return std::holds_alternative<FiniteDimR4Spec>(m.spec) ||
         std::holds_alternative<FiniteDimCustomSpec>(m.spec) ||
         std::holds_alternative<HeatNeumannSupSpec>(m.spec);
}

/// Reuses the dense matrix exponential across steps with the same dt.
class SemigroupStepper {
 public:
  explicit SemigroupStepper(const Model& m) : m_(m), dense_(model_is_dense(m)) {}

  StateVector apply(const StateVector& v, double dt) {
    if (!dense_ || dt == 0.0) return semigroup_apply(m_, v, dt);
    for (const auto& [cached_dt, propagator] : cache_) {
      if (cached_dt == dt) return StateVector{v.space, propagator * v.coeffs};
    }
    const Eigen::MatrixXd& gen =
        std::holds_alternative<HeatNeumannSupSpec>(m_.spec) ? m_.generator : m_.a_mat;
    Eigen::MatrixXd propagator = (gen * dt).exp();
    if (cache_.size() >= 8) cache_.erase(cache_.begin());
    cache_.emplace_back(dt, propagator);
    return StateVector{v.space, cache_.back().second * v.coeffs};
  }

 private:
  const Model& m_;
  bool dense_;
  std::vector<std::pair<double, Eigen::MatrixXd>> cache_;
};

/// Feedback substep: solves xdot = u(x) B x over [0, h] by exponential
/// midpoint sub-updates, each exact for its frozen control value.
StateVector feedback_substep(const Model& m, const FeedbackLaw& law, StateVector x, double t_law,
                             double h, double state_floor) {
  if (h <= 0.0) return x;
  const double b_scale = std::max(1.0, m.opnorm_b);
  double u0 = control_value(law, m, x, t_law, state_floor);
  if (u0 == 0.0) return x;

  const double want = std::ceil(std::abs(u0) * b_scale * h / kSubstepCap);
  const auto subdivisions =
      static_cast<std::uint64_t>(std::min<double>(want, static_cast<double>(kMaxSubdivisions)));
  const std::uint64_t n_sub = std::max<std::uint64_t>(1, subdivisions);
  const double hi = h / static_cast<double>(n_sub);

  for (std::uint64_t i = 0; i < n_sub; ++i) {
    const double u_start = (i == 0) ? u0 : control_value(law, m, x, t_law, state_floor);
    if (u_start == 0.0) break;
    const StateVector x_mid = exp_b_update(m, x, u_start * hi * 0.5);
    const double u_mid = control_value(law, m, x_mid, t_law, state_floor);
    x = exp_b_update(m, x, u_mid * hi);
  }
  return x;
}

StateVector step_impl(const Model& m, const FeedbackLaw& law, SemigroupStepper& stepper,
                      const StateVector& x, double t, double dt, double state_floor) {
  StateVector y = stepper.apply(x, dt);
  // control gated at the step's end time so a DelayedSwitch boundary at the
  // step's start activates the inner law for the whole step
  return feedback_substep(m, law, std::move(y), t + dt, dt, state_floor);
}

/// Earliest control switch time strictly after t (DelayedSwitch), or +inf.
double next_switch_after(const FeedbackLaw& law, double t) {
  if (const auto* d = std::get_if<DelayedSwitch>(&law.variant())) {
    if (t < d->tau) return d->tau;
    return next_switch_after(*d->inner, t);
  }
  return std::numeric_limits<double>::infinity();
}

/// Upper bound on the remaining extinction time of the coercive component
/// under the law's comparison ODE, or +inf when no sound bound exists.
double remaining_extinction_bound(const Model& m, const FeedbackLaw& law, const StateVector& x,
                                  double perp_norm) {
  const double mu = singular_mu(law);
  const double rho = singular_gain(law);
  const FeedbackLaw* leaf = &law;
  while (const auto* d = std::get_if<DelayedSwitch>(&leaf->variant())) leaf = d->inner.get();

  if (std::holds_alternative<NonInvariantFt>(leaf->variant())) {
    if (!(m.ab_alpha <= law_shift(law) + 1e-9)) return std::numeric_limits<double>::infinity();
    const double v = std::max(0.0, b_form(m, x));
    if (v == 0.0) return 0.0;
    return std::pow(v, mu) / (2.0 * mu * m.beta);
  }
  // FiniteTime / FixedTime / PrescribedTime / LinearFt
  if (law_shift(law) * m.beta < m.omega0 - 1e-12) return std::numeric_limits<double>::infinity();
  if (perp_norm == 0.0) return 0.0;
  return std::pow(perp_norm, 2.0 * mu) / (2.0 * mu * rho * std::pow(m.beta, 1.0 - mu));
}

}  // namespace

StateVector step(const Model& m, const FeedbackLaw& law, const StateVector& x, double t, double dt,
                 double state_floor) {
  if (dt < 0.0) throw ValidationError("dt: must be >= 0");
  if (dt == 0.0) return x;
  SemigroupStepper stepper(m);
  return step_impl(m, law, stepper, x, t, dt, state_floor);
}

Trajectory simulate(const Model& m, const FeedbackLaw& law, const StateVector& x0,
                    const SimOptions& opts) {
  if (!same_space(m.space, x0.space)) {
    throw StructuralError("simulate: x0 does not belong to the model's space");
  }
  if (!x0.coeffs.allFinite()) throw ValidationError("x0: must be finite");
  if (!(opts.dt_max > 0.0)) throw ValidationError("dt_max: must be > 0");
  if (!(opts.horizon > 0.0)) throw ValidationError("horizon: must be > 0");
  if (!(opts.eps_ext > 0.0 && opts.eps_ext <= 1e-6)) {
    throw ValidationError("eps_ext: must lie in (0, 1e-6]");
  }
  validate_law(law);

  const bool transport = model_is_transport(m);
  double base_dt = opts.dt_max;
  double t_end = opts.horizon;
  if (transport) {
    base_dt = m.space.dx;
    const double steps = opts.horizon / base_dt;
    if (std::abs(steps - std::round(steps)) > 1e-9 * std::max(1.0, steps)) {
      throw ValidationError("horizon: must be an integer multiple of dx for transport models");
    }
    t_end = std::round(steps) * base_dt;
    const double tau = next_switch_after(law, 0.0);
    if (std::isfinite(tau)) {
      const double k = tau / base_dt;
      if (std::abs(k - std::round(k)) > 1e-9 * std::max(1.0, k)) {
        throw ValidationError("tau: must be an integer multiple of dx for transport models");
      }
    }
  }

  const double norm0 = norm(m.space, x0);
  const double eps_abs = opts.eps_ext * norm0;
  const bool fts = is_fts_family(law);
  const bool landing_possible =
      fts && m.kerp_invariant && m.beta > 0.0 && model_is_hilbert(m);

  SemigroupStepper stepper(m);
  Trajectory traj;
  traj.final_state = x0;

  auto record = [&](double tt, const StateVector& xx) {
    if (!traj.samples.empty() && !(tt > traj.samples.back().t)) return;
    TrajectorySample s;
    s.t = tt;
    s.norm = norm(m.space, xx);
    s.control = control_value(law, m, xx, tt, eps_abs);
    s.b_form = b_form(m, xx);
    s.weak_obs = weak_functional_values(m, xx, opts.weak_functionals);
    traj.samples.push_back(std::move(s));
  };

  StateVector x = x0;
  double t = 0.0;
  bool extinct = false;
  if (fts && norm0 == 0.0) {
    extinct = true;
    traj.extinction_time = 0.0;
  }
  record(0.0, x);

  const double t_tol = 1e-12 * std::max(1.0, t_end);
  std::uint64_t steps = 0;
  while (t < t_end - t_tol) {
    if (++steps > opts.max_steps) {
      throw NumericalError("simulate: step budget exceeded at t = " + std::to_string(t));
    }

    double dt = std::min(base_dt, t_end - t);
    const double tau = next_switch_after(law, t);
    if (tau > t && tau < t + dt) dt = tau - t;

    if (extinct) {
      t += dt;
      if (steps % static_cast<std::uint64_t>(opts.record_stride) == 0 || t >= t_end - t_tol) {
        record(t, x);
      }
      continue;
    }

    bool landed = false;
    if (landing_possible && fts_active_at(law, t + dt)) {
      const KernelSplit split = kernel_b_projection(m, x);
      const double perp_norm = norm(m.space, split.perp);
      if (perp_norm > 0.0) {
        const double rem = remaining_extinction_bound(m, law, x, perp_norm);
        if (rem <= dt) {
          const double ker_norm = norm(m.space, split.ker);
          if (ker_norm <= eps_abs) {
            x = zero_state(m.space);
            t += rem;
            extinct = true;
            traj.extinction_time = t;
            landed = true;
          } else if (!transport && m.ker_invariant) {
            // partial landing: the kernel component evolves under the exact
            // semigroup and cannot re-feed the extinguished component
            x = stepper.apply(split.ker, rem);
            t += rem;
            landed = true;
          }
          if (landed) record(t, x);
        }
      }
    }
    if (landed) continue;

    if (!transport) {
      const double u_now = control_value(law, m, x, t + dt, eps_abs);
      if (u_now != 0.0) {
        const double cap = opts.courant_cap / (std::abs(u_now) * std::max(1.0, m.opnorm_b));
        dt = std::min(dt, cap);
      }
    }

    StateVector x_new = step_impl(m, law, stepper, x, t, dt, eps_abs);
    if (!x_new.coeffs.allFinite()) {
      throw BlowupError("simulate: non-finite state (last valid t = " + std::to_string(t) + ")", t);
    }
    x = std::move(x_new);
    t += dt;

    bool event = false;
    if (fts && fts_active_at(law, t) && norm(m.space, x) <= eps_abs) {
      x = zero_state(m.space);
      extinct = true;
      traj.extinction_time = t;
      event = true;
    }
    if (event || steps % static_cast<std::uint64_t>(opts.record_stride) == 0 ||
        t >= t_end - t_tol) {
      record(t, x);
    }
  }
  if (traj.samples.back().t < t_end - t_tol) record(t, x);

  traj.final_state = x;
  std::ostringstream eps;
  eps.precision(17);
  eps << eps_abs;
  traj.manifest["eps_ext"] = std::to_string(opts.eps_ext);
  traj.manifest["eps_ext_abs"] = eps.str();
  traj.manifest["dt_max"] = std::to_string(base_dt);
  traj.manifest["horizon"] = std::to_string(t_end);
  traj.manifest["record_stride"] = std::to_string(opts.record_stride);
  traj.manifest["weak_functionals"] = std::to_string(opts.weak_functionals);
  traj.manifest["courant_cap"] = std::to_string(opts.courant_cap);
  return traj;
}

}  // namespace bilstab
