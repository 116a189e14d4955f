#include "bilstab/analysis.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <limits>

namespace bilstab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct LinearFitResult {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 1.0;
};

LinearFitResult linear_fit(const std::vector<double>& xs, const std::vector<double>& ys) {
  const auto n = static_cast<double>(xs.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
  }
  const double mx = sx / n;
  const double my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  LinearFitResult f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (syy > 0.0) {
    double ss_res = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double r = ys[i] - (f.intercept + f.slope * xs[i]);
      ss_res += r * r;
    }
    f.r_squared = std::max(0.0, 1.0 - ss_res / syy);
  }
  return f;
}

/// Iterative application of S(h); dense models get a single precomputed
/// propagator.
class UniformStepper {
 public:
  UniformStepper(const Model& m, double h) : m_(m), h_(h) {
    if (std::holds_alternative<HeatNeumannSupSpec>(m.spec)) {
      propagator_ = (m.generator * h).exp();
      dense_ = true;
    } else if (std::holds_alternative<FiniteDimR4Spec>(m.spec) ||
               std::holds_alternative<FiniteDimCustomSpec>(m.spec)) {
      propagator_ = (m.a_mat * h).exp();
      dense_ = true;
    }
  }

  void advance(StateVector& y) const {
    if (dense_) {
      y.coeffs = propagator_ * y.coeffs;
    } else {
      y = semigroup_apply(m_, y, h_);
    }
  }

 private:
  const Model& m_;
  double h_;
  bool dense_ = false;
  Eigen::MatrixXd propagator_;
};

int observation_interval_count(const Model& m, double T, int min_intervals) {
  if (model_is_transport(m)) {
    const double dx = m.space.dx;
    const double k = T / dx;
    if (std::abs(k - std::round(k)) > 1e-9 * std::max(1.0, k)) {
      throw ValidationError("T: must be an integer multiple of dx for transport models");
    }
    auto n = static_cast<int>(std::llround(k));
    if (n % 2 == 1) {
      throw ValidationError("T: transport observation windows need an even number of dx steps");
    }
    return n;
  }
  int n = std::max(min_intervals, 200);
  if (n % 2 == 1) ++n;
  return n;
}

}  // namespace

RateFit fit_decay(const Trajectory& traj, RateFit::Kind kind) {
  std::vector<const TrajectorySample*> pre;
  const double t_ext = traj.extinction_time.value_or(kInf);
  for (const auto& s : traj.samples) {
    if (s.norm > 0.0 && s.t < t_ext) pre.push_back(&s);
  }
  if (pre.size() < 2) throw InsufficientDataError("fit_decay: trajectory has no usable samples");

  double t_first_pos = 0.0;
  for (const auto* s : pre) {
    if (s->t > 0.0) {
      t_first_pos = s->t;
      break;
    }
  }
  double t_b = pre.back()->t;
  double t_a = 0.0;
  if (kind == RateFit::Kind::Polynomial) {
    if (traj.extinction_time) t_b = std::min(t_b, t_ext / 10.0);
    t_a = std::max(t_b / 2.0, 10.0 * t_first_pos);
  } else {
    t_a = t_b / 2.0;
  }

  std::vector<double> xs, ys;
  for (const auto* s : pre) {
    if (s->t < t_a || s->t > t_b) continue;
    if (kind == RateFit::Kind::Polynomial) {
      if (s->t <= 0.0) continue;
      xs.push_back(std::log(s->t));
    } else {
      xs.push_back(s->t);
    }
    ys.push_back(std::log(s->norm));
  }
  if (xs.size() < 20) {
    throw InsufficientDataError("fit_decay: fewer than 20 samples in the fit window");
  }

  const LinearFitResult f = linear_fit(xs, ys);
  RateFit fit;
  fit.kind = kind;
  fit.t_lo = t_a;
  fit.t_hi = t_b;
  fit.n_points = static_cast<int>(xs.size());
  fit.r_squared = f.r_squared;
  fit.prefactor = std::exp(f.intercept);
  if (kind == RateFit::Kind::Polynomial) {
    fit.exponent = -f.slope;
  } else {
    fit.rate = -f.slope;
  }
  return fit;
}

std::optional<double> settling_time(const Trajectory& traj) { return traj.extinction_time; }

double observation_integral(const Model& m, const StateVector& y, double T, int min_intervals) {
  if (!(T > 0.0)) throw ValidationError("T: must be > 0");
  const int n = observation_interval_count(m, T, min_intervals);
  const double h = T / n;
  UniformStepper stepper(m, h);

  StateVector cur = y;
  double sum = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double f = std::abs(b_form(m, cur));
    if (i == 0 || i == n) {
      sum += f;
    } else if (i % 2 == 1) {
      sum += 4.0 * f;
    } else {
      sum += 2.0 * f;
    }
    if (i < n) stepper.advance(cur);
  }
  return sum * h / 3.0;
}

ObservabilityEstimate observability_estimate(const Model& m, double T, int n_random,
                                             std::uint64_t seed, int min_intervals) {
  if (!(T > 0.0)) throw ValidationError("T: must be > 0");
  if (n_random < 0) throw ValidationError("n_random: must be >= 0");

  const Eigen::Index dim = m.space.dim;
  std::vector<StateVector> samples;
  auto add_normalized = [&](StateVector v) {
    const double nv = norm(m.space, v);
    if (nv > 0.0) {
      v.coeffs /= nv;
      samples.push_back(std::move(v));
    }
  };

  if (dim <= 64) {
    for (Eigen::Index i = 0; i < dim; ++i) {
      StateVector e = zero_state(m.space);
      e.coeffs[i] = 1.0;
      add_normalized(std::move(e));
    }
    for (Eigen::Index i = 0; i < dim; ++i) {
      for (Eigen::Index j = i + 1; j < dim; ++j) {
        for (const double sgn : {1.0, -1.0}) {
          StateVector e = zero_state(m.space);
          e.coeffs[i] = 1.0;
          e.coeffs[j] = sgn;
          add_normalized(std::move(e));
        }
      }
    }
  } else {
    for (int k = 0; k < 64; ++k) {
      const auto i = static_cast<Eigen::Index>((static_cast<double>(k) / 63.0) *
                                               static_cast<double>(dim - 1));
      StateVector e = zero_state(m.space);
      e.coeffs[i] = 1.0;
      add_normalized(std::move(e));
    }
  }

  Rng rng(seed);
  for (int k = 0; k < n_random; ++k) add_normalized(random_state(m.space, rng));

  ObservabilityEstimate est;
  est.T = T;
  est.n_samples = static_cast<int>(samples.size());
  est.delta_over_initial = kInf;
  est.delta_over_final = kInf;
  est.argmin_sample = zero_state(m.space);

  for (const auto& y : samples) {
    const double integral = observation_integral(m, y, T, min_intervals);
    const double n_final = norm(m.space, semigroup_apply(m, y, T));
    est.delta_over_initial = std::min(est.delta_over_initial, integral);
    const double ratio_final =
        n_final > 0.0 ? integral / (n_final * n_final) : (integral == 0.0 ? 0.0 : kInf);
    if (ratio_final < est.delta_over_final) {
      est.delta_over_final = ratio_final;
      est.argmin_sample = y;
    }
  }
  if (samples.empty()) {
    est.delta_over_initial = 0.0;
    est.delta_over_final = 0.0;
  }
  return est;
}

SequenceLemmaResult sequence_lemma_oracle(double c, double alpha, double s0, long k_max) {
  if (!(c > 0.0)) throw ValidationError("C: must be > 0");
  if (!(alpha > -1.0)) throw ValidationError("alpha: must be > -1");
  if (s0 < 0.0) throw ValidationError("s0: must be >= 0");
  if (k_max < 1) throw ValidationError("K: must be >= 1");

  SequenceLemmaResult res;
  res.c = c;
  res.alpha = alpha;
  res.s0 = s0;
  res.k_max = k_max;

  const double inv_exp = 1.0 / (alpha + 1.0);
  double s = s0;
  res.sup_product = s0;  // (0+1)^{1/(alpha+1)} = 1
  res.argmax_k = 0;
  for (long k = 1; k <= k_max; ++k) {
    if (s == 0.0) break;
    // monotone root of x + c x^{alpha+2} = s on (0, s]
    double lo = 0.0;
    double hi = s;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double g = mid + c * std::pow(mid, alpha + 2.0) - s;
      (g < 0.0 ? lo : hi) = mid;
      if (hi - lo <= 1e-14 * (1.0 + hi)) break;
    }
    s = 0.5 * (lo + hi);
    const double product = s * std::pow(static_cast<double>(k + 1), inv_exp);
    if (product > res.sup_product) {
      res.sup_product = product;
      res.argmax_k = k;
    }
  }
  res.last_s = s;
  res.pass = std::isfinite(res.sup_product);
  return res;
}

ParsegovResult parsegov_extinction_time(double a, double b, double nu, double v0) {
  if (!(a > 0.0)) throw ValidationError("a: must be > 0");
  if (!(b > 0.0)) throw ValidationError("b: must be > 0");
  if (!(nu > 0.0 && nu < 0.5)) throw ValidationError("nu: must lie in (0, 1/2)");
  if (v0 < 0.0) throw ValidationError("V0: must be >= 0");

  ParsegovResult res;
  const double root_ab = std::sqrt(a * b);
  res.t_bound = M_PI / (2.0 * nu * root_ab);
  res.t_exact =
      v0 == 0.0 ? 0.0 : std::atan(std::sqrt(b / a) * std::pow(v0, nu)) / (nu * root_ab);
  return res;
}

FtsNecessaryVerdict fts_necessary_check(const Model& m) {
  if (!model_is_hilbert(m)) {
    throw UnsupportedStructureError(
        "fts_necessary_check: requires a finite-dimensional or spectral (Hilbert) model");
  }

  FtsNecessaryVerdict v;
  std::vector<Eigen::Index> kernel_coords;  // for coordinate-diagonal kernels

  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, HeatDirichletSpectralSpec>) {
          if (s.b_multipliers.size() > 0) {
            for (Eigen::Index j = 0; j < m.space.dim; ++j) {
              if (s.b_multipliers[j] == 0.0) kernel_coords.push_back(j);
            }
          }
          v.kernel_trivial = kernel_coords.empty();
          v.kernel_invariant = true;  // diagonal semigroup
          v.impossible = !v.kernel_trivial;
        } else if constexpr (std::is_same_v<T, HeatSpectralProjectionSpec>) {
          for (Eigen::Index j = s.q; j < m.space.dim; ++j) kernel_coords.push_back(j);
          v.kernel_trivial = kernel_coords.empty();
          v.kernel_invariant = true;
          v.impossible = !v.kernel_trivial;
        } else if constexpr (std::is_same_v<T, WaveUndampedSpec> ||
                             std::is_same_v<T, WaveDampedSpec>) {
          v.kernel_trivial = false;
          v.kernel_invariant = false;  // modal rotation mixes the two slots
          v.impossible = false;
        } else if constexpr (std::is_same_v<T, TransportL2FtsSpec>) {
          v.kernel_trivial = false;
          v.kernel_invariant = false;  // the shift carries (0, a)-supported states across a
          v.impossible = false;
        } else if constexpr (std::is_same_v<T, FiniteDimR4Spec> ||
                             std::is_same_v<T, FiniteDimCustomSpec>) {
          const Eigen::Index n = m.space.dim;
          const double b_scale = std::max(1.0, m.b_eigs.maxCoeff());
          const double a_scale = std::max(1.0, m.a_mat.cwiseAbs().maxCoeff());
          const Eigen::MatrixXd a_in_b = m.b_vecs.transpose() * m.a_mat * m.b_vecs;
          std::vector<Eigen::Index> kernel_idx;
          for (Eigen::Index i = 0; i < n; ++i) {
            if (m.b_eigs[i] <= 1e-12 * b_scale) kernel_idx.push_back(i);
          }
          v.kernel_trivial = kernel_idx.empty();
          bool invariant = true;
          for (const Eigen::Index kc : kernel_idx) {
            for (Eigen::Index r = 0; r < n; ++r) {
              if (m.b_eigs[r] <= 1e-12 * b_scale) continue;  // perp rows only
              if (std::abs(a_in_b(r, kc)) > 1e-10 * a_scale) invariant = false;
            }
          }
          v.kernel_invariant = invariant && !v.kernel_trivial;
          // a matrix exponential is invertible, hence injective and never
          // nilpotent on a nontrivial invariant subspace
          v.impossible = !v.kernel_trivial && invariant;
          if (v.impossible) {
            v.witness = StateVector{m.space, m.b_vecs.col(kernel_idx.front())};
          }
        } else {
          throw UnsupportedStructureError("fts_necessary_check: unsupported model structure");
        }
      },
      m.spec);

  if (!kernel_coords.empty() && v.impossible && !v.witness) {
    StateVector w = zero_state(m.space);
    w.coeffs[kernel_coords.front()] = 1.0;
    v.witness = std::move(w);
  }
  v.detail = v.impossible
                 ? "global FTS impossible: ker(B) is S(t)-invariant and the restricted "
                   "semigroup is injective and non-nilpotent"
                 : (v.kernel_trivial ? "no obstruction found (trivial kernel)"
                                     : "no obstruction found");
  return v;
}

A2Verification verify_A2(const Model& m, int n_samples, std::uint64_t seed) {
  if (n_samples < 1) throw ValidationError("n_samples: must be >= 1");

  enum class KappaKind { TransportL1, SupHeat, Hilbert } kappa_kind;
  if (std::holds_alternative<TransportL1Spec>(m.spec)) {
    kappa_kind = KappaKind::TransportL1;
  } else if (std::holds_alternative<HeatNeumannSupSpec>(m.spec)) {
    kappa_kind = KappaKind::SupHeat;
  } else if (model_is_hilbert(m)) {
    kappa_kind = KappaKind::Hilbert;
  } else {
    throw UnsupportedStructureError("verify_A2: no Lipschitz modulus known for this model");
  }

  auto kappa = [&](double s, double t) {
    switch (kappa_kind) {
      case KappaKind::TransportL1:
        return 2.0 * (s + t);
      case KappaKind::SupHeat:
        return m.a_sup * (s + t);
      case KappaKind::Hilbert:
        return 2.0 * m.opnorm_b * (s + t);
    }
    return 0.0;
  };

  A2Verification res;
  res.kappa = kappa_kind == KappaKind::TransportL1
                  ? "K(s,t) = 2(s+t)"
                  : (kappa_kind == KappaKind::SupHeat ? "K(s,t) = ||a||_inf (s+t)"
                                                      : "K(s,t) = 2||B|| (s+t)");

  Rng rng(seed);
  for (int i = 0; i < n_samples; ++i) {
    StateVector y = random_state(m.space, rng);
    y.coeffs *= std::pow(10.0, rng.uniform(-1.0, 1.0));
    StateVector z = zero_state(m.space);
    switch (i % 3) {
      case 0:
        z = random_state(m.space, rng);
        z.coeffs *= std::pow(10.0, rng.uniform(-1.0, 1.0));
        break;
      case 1:
        z = y;
        z.coeffs += 1e-3 * random_state(m.space, rng).coeffs;
        break;
      default:
        z = y;
        z.coeffs *= rng.uniform(0.25, 1.75);
        break;
    }
    const StateVector diff{m.space, y.coeffs - z.coeffs};
    const double dn = norm(m.space, diff);
    if (dn == 0.0) continue;
    const double num = std::abs(b_form(m, y) - b_form(m, z));
    const double den = kappa(norm(m.space, y), norm(m.space, z)) * dn;
    if (den == 0.0) continue;
    res.worst_ratio = std::max(res.worst_ratio, num / den);
    ++res.n_pairs;
  }
  res.pass = res.worst_ratio <= 1.0 + 1e-9;
  return res;
}

std::vector<double> weak_report(const Trajectory& traj) {
  if (traj.samples.empty() || traj.samples.front().weak_obs.size() == 0) {
    throw InsufficientDataError("weak_report: trajectory recorded no weak observables (K = 0)");
  }
  const auto k = traj.samples.front().weak_obs.size();
  const double t_last = traj.samples.back().t;
  const double window = 0.1 * t_last;

  Eigen::VectorXd start = Eigen::VectorXd::Zero(k);
  Eigen::VectorXd end = Eigen::VectorXd::Zero(k);
  for (const auto& s : traj.samples) {
    const bool in_start = s.t <= window;
    const bool in_end = s.t >= t_last - window;
    if (!in_start && !in_end) continue;
    for (Eigen::Index i = 0; i < k; ++i) {
      const double a = std::abs(s.weak_obs[i]);
      if (in_start && a > start[i]) start[i] = a;
      if (in_end && a > end[i]) end[i] = a;
    }
  }
  std::vector<double> ratios(static_cast<std::size_t>(k));
  for (Eigen::Index i = 0; i < k; ++i) {
    ratios[static_cast<std::size_t>(i)] =
        start[i] > 0.0 ? end[i] / start[i] : (end[i] == 0.0 ? 0.0 : kInf);
  }
  return ratios;
}

ContractionReport contraction_ratio_report(const Trajectory& traj, double T) {
  if (!(T > 0.0)) throw ValidationError("T: must be > 0");
  if (traj.samples.size() < 2) throw InsufficientDataError("contraction_ratio_report: no samples");
  const double t_last = traj.samples.back().t;
  if (t_last < 3.0 * T - 1e-9) {
    throw ValidationError("horizon: contraction report needs horizon >= 3T");
  }

  auto norm_at = [&](double t) {
    const auto& ss = traj.samples;
    auto it = std::lower_bound(ss.begin(), ss.end(), t, [](const TrajectorySample& s, double tt) {
      return s.t < tt;
    });
    if (it == ss.begin()) return it->norm;
    if (it == ss.end()) return ss.back().norm;
    const auto& hi = *it;
    const auto& lo = *(it - 1);
    if (hi.t == lo.t) return hi.norm;
    const double w = (t - lo.t) / (hi.t - lo.t);
    return (1.0 - w) * lo.norm + w * hi.norm;
  };

  ContractionReport rep;
  rep.window = T;
  for (long j = 0;; ++j) {
    const double t1 = static_cast<double>(j + 1) * T;
    if (t1 > t_last + 1e-9) break;
    const double n0 = norm_at(static_cast<double>(j) * T);
    const double n1 = norm_at(t1);
    rep.ratios.push_back(n0 > 0.0 ? n1 / n0 : 0.0);
  }
  rep.max_ratio = 0.0;
  for (const double r : rep.ratios) rep.max_ratio = std::max(rep.max_ratio, r);
  return rep;
}

double g_membership_deficiency(const Model& m, const StateVector& y, double T, int n_nodes) {
  if (!(T > 0.0)) throw ValidationError("T: must be > 0");
  int n = std::max(2, n_nodes);
  if (model_is_transport(m)) {
    n = observation_interval_count(m, T, n);
  }
  const double h = T / n;
  UniformStepper stepper(m, h);
  StateVector cur = y;
  double worst = 0.0;
  for (int i = 0; i <= n; ++i) {
    worst = std::max(worst, std::abs(b_form(m, cur)));
    if (i < n) stepper.advance(cur);
  }
  return worst;
}

StateVector random_state(const SpaceDescriptor& s, Rng& rng) {
  StateVector v = zero_state(s);
  v.coeffs = rng.normal_vector(s.dim);
  if (s.kind == SpaceKind::EnergyWave) {
    const Eigen::Index n = s.eigenvalues.size();
    for (Eigen::Index j = 0; j < n; ++j) {
      const double scale = 1.0 / std::sqrt(s.eigenvalues[j]);
      v.coeffs[2 * j] *= scale;
      v.coeffs[2 * j + 1] *= scale;
    }
  }
  return v;
}

StateVector random_unit_state(const SpaceDescriptor& s, Rng& rng) {
  StateVector v = random_state(s, rng);
  double n = norm(s, v);
  while (n == 0.0) {
    v = random_state(s, rng);
    n = norm(s, v);
  }
  v.coeffs /= n;
  return v;
}

}  // namespace bilstab
