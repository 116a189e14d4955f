#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "bilstab/analysis.hpp"
#include "bilstab/feedback.hpp"

using namespace bilstab;
using Catch::Approx;

namespace {

Model scalar_model() {
  FiniteDimCustomSpec spec;
  spec.A = Eigen::MatrixXd::Zero(1, 1);
  spec.B = Eigen::MatrixXd::Identity(1, 1);
  return build_model(spec);
}

Model diag_model(double b1, double b2) {
  FiniteDimCustomSpec spec;
  spec.A = Eigen::MatrixXd::Zero(2, 2);
  spec.B = Eigen::Vector2d(b1, b2).asDiagonal();
  return build_model(spec);
}

}  // namespace

TEST_CASE("quadratic law returns minus the pairing") {
  const Model m = scalar_model();
  // <z, Bz> = 0.5 for z = sqrt(0.5)
  const StateVector z = make_state(m.space, Eigen::VectorXd::Constant(1, std::sqrt(0.5)));
  CHECK(control_value(QuadraticV0{}, m, z, 0.0) == Approx(-0.5).epsilon(1e-14));
}

TEST_CASE("finite-time law applies the inverse power") {
  const Model m = scalar_model();
  const StateVector x = make_state(m.space, Eigen::VectorXd::Constant(1, 4.0));  // <Bx,x> = 16
  CHECK(control_value(FiniteTime{0.25, 0.0}, m, x, 0.0) == Approx(-0.5).epsilon(1e-14));
  CHECK(control_value(FixedTime{0.25, 0.0}, m, x, 0.0) == Approx(-2.5).epsilon(1e-14));
}

TEST_CASE("every law vanishes at the origin") {
  const Model m = diag_model(1.0, 2.0);
  const StateVector zero = zero_state(m.space);
  const auto inner = std::make_shared<FeedbackLaw>(FiniteTime{0.25, 0.0});
  const FeedbackLaw laws[] = {ZeroLaw{},
                              QuadraticV0{},
                              HomogeneousVr{1.0},
                              NormalizedBanach{0.5},
                              FiniteTime{0.25, 1.0},
                              FixedTime{0.3, 0.0},
                              PrescribedTime{0.2, 2.0, 0.0},
                              NonInvariantFt{0.25, 0.7},
                              DelayedSwitch{1.0, inner},
                              LinearFt{0.25, 0.0, 1.0, false}};
  for (const auto& law : laws) {
    CHECK(control_value(law, m, zero, 5.0) == 0.0);
  }
}

TEST_CASE("r = 0 reduces the homogeneous family to the quadratic law") {
  const Model m = diag_model(1.0, 3.0);
  Rng rng(4);
  for (int i = 0; i < 100; ++i) {
    const StateVector x = random_state(m.space, rng);
    CHECK(control_value(HomogeneousVr{0.0}, m, x, 0.0) ==
          Approx(control_value(QuadraticV0{}, m, x, 0.0)).epsilon(1e-13));
  }
}

TEST_CASE("homogeneous law scales with degree 2 - r") {
  const Model m = diag_model(2.0, 1.0);
  Rng rng(12);
  for (const double r : {-1.0, 0.0, 0.5, 1.0, 1.5}) {
    for (int i = 0; i < 50; ++i) {
      const StateVector x = random_unit_state(m.space, rng);
      const double c = std::pow(10.0, rng.uniform(-1.0, 1.0));
      const StateVector cx{m.space, c * x.coeffs};
      const double at_x = control_value(HomogeneousVr{r}, m, x, 0.0);
      const double at_cx = control_value(HomogeneousVr{r}, m, cx, 0.0);
      CHECK(at_cx == Approx(std::pow(c, 2.0 - r) * at_x).epsilon(1e-11).margin(1e-300));
    }
  }
}

TEST_CASE("normalized law is 0-homogeneous and bounded by gain * ||B||") {
  const Model m = diag_model(2.0, 1.0);
  Rng rng(13);
  const double gain = 0.3;
  for (int i = 0; i < 200; ++i) {
    const StateVector x = random_unit_state(m.space, rng);
    const double u = control_value(NormalizedBanach{gain}, m, x, 0.0);
    CHECK(std::abs(u) <= gain * m.opnorm_b * (1.0 + 1e-12));
    const StateVector cx{m.space, 7.5 * x.coeffs};
    CHECK(control_value(NormalizedBanach{gain}, m, cx, 0.0) == Approx(u).epsilon(1e-12));
  }
}

TEST_CASE("the singular part blows up along states shrinking inside ker(B)^perp") {
  const Model m = scalar_model();
  double previous = 0.0;
  for (int k = 1; k <= 8; ++k) {
    const double scale = std::pow(10.0, -k);
    const StateVector x = make_state(m.space, Eigen::VectorXd::Constant(1, scale));
    const double u = control_value(FiniteTime{0.25, 0.0}, m, x, 0.0);
    CHECK(u < previous);
    CHECK(std::abs(u) == Approx(std::pow(scale * scale, -0.25)).epsilon(1e-12));
    previous = u;
  }
}

TEST_CASE("prescribed-time with unit gain coincides with fixed-time") {
  const Model m = diag_model(1.5, 0.5);
  Rng rng(15);
  for (int i = 0; i < 100; ++i) {
    const StateVector x = random_state(m.space, rng);
    CHECK(control_value(PrescribedTime{0.25, 1.0, 0.3}, m, x, 0.0) ==
          Approx(control_value(FixedTime{0.25, 0.3}, m, x, 0.0)).epsilon(1e-13));
  }
}

TEST_CASE("delayed switch is silent until tau") {
  const Model m = scalar_model();
  const StateVector x = make_state(m.space, Eigen::VectorXd::Constant(1, 2.0));
  const auto inner = std::make_shared<FeedbackLaw>(FiniteTime{0.25, 0.0});
  const FeedbackLaw law = DelayedSwitch{1.5, inner};
  CHECK(control_value(law, m, x, 0.0) == 0.0);
  CHECK(control_value(law, m, x, 1.5) == 0.0);
  CHECK(control_value(law, m, x, 1.5000001) ==
        Approx(control_value(*inner, m, x, 0.0)).epsilon(1e-13));
  CHECK(fts_active_at(law, 1.0) == false);
  CHECK(fts_active_at(law, 2.0) == true);
}

TEST_CASE("the vector linear control equals the scalar route through B") {
  const Model m = diag_model(1.0, 1.0);
  Rng rng(16);
  const LinearFt law{0.25, 0.0, 1.0, false};
  for (int i = 0; i < 50; ++i) {
    const StateVector x = random_state(m.space, rng);
    const double u = control_value(law, m, x, 0.0);
    const Eigen::VectorXd drive = control_vector(law, m, x, 0.0);
    CHECK((drive - u * apply_B(m, x).coeffs).norm() == 0.0);
    // explicit form: -||L*x||^{-2 mu} L*x with L = Id
    const double v = x.coeffs.squaredNorm();
    CHECK(u == Approx(-std::pow(v, -0.25)).epsilon(1e-13));
  }
  CHECK_THROWS_AS(control_vector(FeedbackLaw(ZeroLaw{}), m, zero_state(m.space), 0.0),
                  UnsupportedStructureError);
}

TEST_CASE("noninvariant law keeps the alpha shift when Bx = 0") {
  const Model m = diag_model(1.0, 0.0);  // ker(B) = e2
  StateVector x = zero_state(m.space);
  x.coeffs[1] = 3.0;  // Bx = 0 but x != 0
  CHECK(control_value(NonInvariantFt{0.25, 0.7}, m, x, 0.0) == Approx(-0.7));
  // finite-time family returns 0 there instead
  CHECK(control_value(FiniteTime{0.25, 0.5}, m, x, 0.0) == 0.0);
}

TEST_CASE("state floor realizes the indicator") {
  const Model m = scalar_model();
  const StateVector x = make_state(m.space, Eigen::VectorXd::Constant(1, 1e-13));
  CHECK(control_value(FiniteTime{0.25, 0.0}, m, x, 0.0, 0.0) != 0.0);
  CHECK(control_value(FiniteTime{0.25, 0.0}, m, x, 0.0, 1e-12) == 0.0);
}

TEST_CASE("law validation names the offending field") {
  CHECK_THROWS_WITH(validate_law(HomogeneousVr{2.0}), Catch::Matchers::ContainsSubstring("r"));
  CHECK_THROWS_WITH(validate_law(FiniteTime{0.5, 0.0}), Catch::Matchers::ContainsSubstring("mu"));
  CHECK_THROWS_WITH(validate_law(PrescribedTime{0.25, -1.0, 0.0}),
                    Catch::Matchers::ContainsSubstring("rho"));
  CHECK_THROWS_WITH(validate_law(NormalizedBanach{0.0}),
                    Catch::Matchers::ContainsSubstring("gain"));
  CHECK_THROWS_WITH(validate_law(DelayedSwitch{-1.0, std::make_shared<FeedbackLaw>(ZeroLaw{})}),
                    Catch::Matchers::ContainsSubstring("tau"));
}
