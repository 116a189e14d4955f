#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <variant>

#include "bilstab/models.hpp"

namespace bilstab {

class FeedbackLaw;

struct ZeroLaw {};

/// u = -<z, Bz>
struct QuadraticV0 {};

/// u = -<z, Bz> / ||z||^r, r < 2 (r = 0 reduces to QuadraticV0).
struct HomogeneousVr {
  double r = 0.0;
};

/// u = -gain * <Bz, J(z)> / ||z||^2 (0-homogeneous, bounded by gain*||B||).
struct NormalizedBanach {
  double gain = 0.1;
};

/// u = -omega0_shift - <Bx,x>^(-mu), mu in (0, 1/2).
struct FiniteTime {
  double mu = 0.25;
  double omega0_shift = 0.0;
};

/// u = -omega0_shift - <Bx,x>^(-mu) - <Bx,x>^(+mu).
struct FixedTime {
  double mu = 0.25;
  double omega0_shift = 0.0;
};

/// u = -omega0_shift - rho * (<Bx,x>^(-mu) + <Bx,x>^(+mu)); rho sets the
/// reachable settling time.
struct PrescribedTime {
  double mu = 0.25;
  double rho = 1.0;
  double omega0_shift = 0.0;
};

/// u = -alpha_shift - <Bx,x>^(-mu) * 1_{Bx != 0}. The alpha shift compensates
/// quasi-dissipativity of A in the B-weighted inner product.
struct NonInvariantFt {
  double mu = 0.25;
  double alpha_shift = 0.0;
};

/// u = 0 on [0, tau], inner law afterwards.
struct DelayedSwitch {
  double tau = 0.0;
  std::shared_ptr<const FeedbackLaw> inner;
};

/// Vector control v = -(omega0/alpha^2) L*x - ||L*x||^(-2mu) L*x
/// (plus -||L*x||^(+2mu) L*x when fixed_time) for linear systems
/// xdot = Ax + Lv with B = LL* supplied by the model. Acting through B the
/// control is the scalar multiplier -omega0/alpha^2 - V^(-mu) [- V^(+mu)]
/// with V = <Bx,x> = ||L*x||^2.
struct LinearFt {
  double mu = 0.25;
  double omega0 = 0.0;
  double alpha_coerc = 1.0;
  bool fixed_time = false;
};

using LawVariant = std::variant<ZeroLaw, QuadraticV0, HomogeneousVr, NormalizedBanach, FiniteTime,
                                FixedTime, PrescribedTime, NonInvariantFt, DelayedSwitch, LinearFt>;

class FeedbackLaw {
 public:
  FeedbackLaw() : v_(ZeroLaw{}) {}
  template <typename T,
            typename = std::enable_if_t<
                !std::is_same_v<std::decay_t<T>, FeedbackLaw> &&
                std::is_constructible_v<LawVariant, T&&>>>
  FeedbackLaw(T&& v) : v_(std::forward<T>(v)) {}  // NOLINT: implicit by design
  const LawVariant& variant() const { return v_; }

 private:
  LawVariant v_;
};

/// Throws ValidationError naming the offending field (gains > 0, mu in
/// (0, 1/2), r < 2, tau >= 0; recurses into DelayedSwitch).
void validate_law(const FeedbackLaw& law);

std::string law_name(const FeedbackLaw& law);

/// The scalar control value u(law, x, t). `state_floor` realizes the
/// indicator 1_{x != 0} as 1_{||x|| > state_floor}; the default 0 tests
/// exact zero only. Laws with a singular power return 0 when <Bx,x> = 0.
double control_value(const FeedbackLaw& law, const Model& m, const StateVector& x, double t,
                     double state_floor = 0.0);

/// The vector control of LinearFt in its native (LS) form, v = u_eff * L*x
/// represented in the model's coordinates through B = LL*. Errors on other laws.
Eigen::VectorXd control_vector(const FeedbackLaw& law, const Model& m, const StateVector& x,
                               double t, double state_floor = 0.0);

/// True for the extinction-capable family (FiniteTime, FixedTime,
/// PrescribedTime, NonInvariantFt, LinearFt, DelayedSwitch around one).
bool is_fts_family(const FeedbackLaw& law);

/// True when the singular part of an FTS-family law is live at time t
/// (false inside a DelayedSwitch dead time).
bool fts_active_at(const FeedbackLaw& law, double t);

/// mu of the singular power (FTS family only).
double singular_mu(const FeedbackLaw& law);

/// Gain multiplying the singular power (rho for PrescribedTime, else 1).
double singular_gain(const FeedbackLaw& law);

/// The law's dissipative shift against the model's quasi-contraction type;
/// used to decide whether closed-form extinction landing is sound.
double law_shift(const FeedbackLaw& law);

}  // namespace bilstab
