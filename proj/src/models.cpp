#include "bilstab/models.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <string>

namespace bilstab {

namespace {

constexpr double kKernelTol = 1e-12;

Eigen::MatrixXd r4_matrix_a() {
  Eigen::MatrixXd a(4, 4);
  a << 0, 1, 0, 2,
       1, 0, 0, 0,
       0, 0, 1, 0,
       0, 0, 0, 0;
  return a;
}

Eigen::MatrixXd r4_matrix_b() {
  Eigen::Vector4d d(1, 1, 1, 0);
  return d.asDiagonal();
}

/// Second-order finite-difference Laplacian with Neumann ghost nodes.
Eigen::MatrixXd neumann_laplacian(Eigen::Index nodes, double dx) {
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(nodes, nodes);
  const double w = 1.0 / (dx * dx);
  for (Eigen::Index i = 0; i < nodes; ++i) {
    if (i == 0) {
      l(0, 0) = -2.0 * w;
      l(0, 1) = 2.0 * w;
    } else if (i == nodes - 1) {
      l(i, i) = -2.0 * w;
      l(i, i - 1) = 2.0 * w;
    } else {
      l(i, i - 1) = w;
      l(i, i) = -2.0 * w;
      l(i, i + 1) = w;
    }
  }
  return l;
}

void setup_finite_dim(Model& m, const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                      double omega0, bool validate_omega0) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n || b.rows() != n || b.cols() != n) {
    throw ValidationError("A/B: matrices must be square and of equal size");
  }
  if ((b - b.transpose()).cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, b.cwiseAbs().maxCoeff())) {
    throw ValidationError("B: must be symmetric");
  }
  m.a_mat = a;
  m.b_mat = 0.5 * (b + b.transpose());
  m.space = SpaceDescriptor::finite_dim(n);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.b_mat);
  m.b_eigs = es.eigenvalues();
  m.b_vecs = es.eigenvectors();
  const double b_scale = std::max(1.0, m.b_eigs.cwiseAbs().maxCoeff());
  if (m.b_eigs.minCoeff() < -kKernelTol * b_scale) {
    throw ValidationError("B: must be positive semidefinite");
  }
  m.b_eigs = m.b_eigs.cwiseMax(0.0);
  m.opnorm_b = m.b_eigs.maxCoeff();

  double beta = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double e = m.b_eigs[i];
    if (e > kKernelTol * b_scale && (beta == 0.0 || e < beta)) beta = e;
  }
  m.beta = beta;

  const Eigen::MatrixXd sym_a = 0.5 * (a + a.transpose());
  const double type_a = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sym_a).eigenvalues().maxCoeff();
  if (validate_omega0 && omega0 < type_a - 1e-9) {
    throw ValidationError("omega0: smaller than the type of A (largest eigenvalue of sym(A) = " +
                          std::to_string(type_a) + ")");
  }
  m.omega0 = omega0;

  // A maps ker(B)^perp into itself iff the kernel-row/perp-column block of
  // A in the B-eigenbasis vanishes; A maps ker(B) into itself iff the
  // transposed block vanishes.
  const Eigen::MatrixXd a_in_b_basis = m.b_vecs.transpose() * a * m.b_vecs;
  bool perp_invariant = true;
  bool ker_invariant = true;
  const double a_scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  bool kernel_trivial = true;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (m.b_eigs[i] > kKernelTol * b_scale) continue;
    kernel_trivial = false;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (m.b_eigs[j] <= kKernelTol * b_scale) continue;
      if (std::abs(a_in_b_basis(i, j)) > 1e-10 * a_scale) perp_invariant = false;
      if (std::abs(a_in_b_basis(j, i)) > 1e-10 * a_scale) ker_invariant = false;
    }
  }
  m.kerp_invariant = perp_invariant;
  m.ker_invariant = ker_invariant;

  if (kernel_trivial && m.beta > 0.0) {
    // smallest alpha with <Ax, Bx> <= alpha <Bx, x>: the type of
    // B^{1/2} A B^{-1/2} in the Euclidean inner product
    const Eigen::VectorXd sqrt_e = m.b_eigs.cwiseSqrt();
    const Eigen::MatrixXd b_half = m.b_vecs * sqrt_e.asDiagonal() * m.b_vecs.transpose();
    const Eigen::MatrixXd b_half_inv =
        m.b_vecs * sqrt_e.cwiseInverse().asDiagonal() * m.b_vecs.transpose();
    const Eigen::MatrixXd conj = b_half * a * b_half_inv;
    const Eigen::MatrixXd sym_conj = 0.5 * (conj + conj.transpose());
    m.ab_alpha = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sym_conj).eigenvalues().maxCoeff();
  }
}

double transport_cut(const Model& m) {
  if (const auto* t1 = std::get_if<TransportL1Spec>(&m.spec)) return t1->alpha_cut;
  return std::get<TransportL2FtsSpec>(m.spec).a_cut;
}

Eigen::Index transport_shift_count(const Model& m, double t) {
  const double dx = m.space.dx;
  const double ratio = t / dx;
  const auto k = static_cast<long long>(std::llround(ratio));
  if (std::abs(t - static_cast<double>(k) * dx) > 1e-9 * std::max(1.0, std::abs(t))) {
    throw ValidationError("t: transport evolution times must be integer multiples of dx (got t=" +
                          std::to_string(t) + ", dx=" + std::to_string(dx) + ")");
  }
  return static_cast<Eigen::Index>(k);
}

}  // namespace

Model build_model(const ModelSpec& spec) {
  Model m;
  m.spec = spec;

  std::visit(
      [&m](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, HeatDirichletSpectralSpec>) {
          if (s.n_modes < 1) throw ValidationError("n_modes: must be >= 1");
          if (s.b_multipliers.size() != 0 && s.b_multipliers.size() != s.n_modes) {
            throw ValidationError("b_multipliers: size must equal n_modes");
          }
          m.space = SpaceDescriptor::spectral_l2(s.n_modes);
          if (s.b_multipliers.size() == 0) {
            m.beta = 1.0;
            m.opnorm_b = 1.0;
          } else {
            if (s.b_multipliers.minCoeff() < 0.0) {
              throw ValidationError("b_multipliers: must be nonnegative");
            }
            double beta = 0.0;
            for (Eigen::Index j = 0; j < s.b_multipliers.size(); ++j) {
              const double e = s.b_multipliers[j];
              if (e > 0.0 && (beta == 0.0 || e < beta)) beta = e;
            }
            m.beta = beta;
            m.opnorm_b = s.b_multipliers.size() ? s.b_multipliers.maxCoeff() : 1.0;
          }
          m.omega0 = 0.0;
          m.kerp_invariant = true;
          m.ker_invariant = true;
        } else if constexpr (std::is_same_v<T, WaveUndampedSpec>) {
          if (s.n_modes < 1) throw ValidationError("n_modes: must be >= 1");
          m.space = SpaceDescriptor::energy_wave(s.n_modes);
          m.beta = 0.0;  // B is not self-adjoint nonnegative here
          m.omega0 = 0.0;
          m.opnorm_b = 1.0 / std::sqrt(m.space.eigenvalues[0]);
          m.kerp_invariant = false;
        } else if constexpr (std::is_same_v<T, WaveDampedSpec>) {
          if (s.n_modes < 1) throw ValidationError("n_modes: must be >= 1");
          m.space = SpaceDescriptor::energy_wave(s.n_modes);
          m.beta = 1.0;  // B restricted to ker(B)^perp is the identity
          m.omega0 = 0.0;
          m.opnorm_b = 1.0;
          m.kerp_invariant = false;
        } else if constexpr (std::is_same_v<T, TransportL1Spec>) {
          m.space = SpaceDescriptor::grid_l1(s.cells, s.dx);
          const double x_max = s.dx * static_cast<double>(s.cells);
          if (!(s.alpha_cut > 0.0 && s.alpha_cut < x_max)) {
            throw ValidationError("alpha_cut: must lie strictly inside (0, x_max)");
          }
          m.beta = 1.0;
          m.omega0 = 0.0;
          m.opnorm_b = 1.0;
          m.kerp_invariant = false;
        } else if constexpr (std::is_same_v<T, HeatNeumannSupSpec>) {
          if (s.nodes < 3) throw ValidationError("nodes: must be >= 3");
          if (s.a_profile.size() != s.nodes) {
            throw ValidationError("a_profile: size must equal nodes");
          }
          const double k = s.a_profile.minCoeff();
          if (!(k > 0.0)) throw ValidationError("a_profile: min k must be > 0");
          const double dx = 1.0 / static_cast<double>(s.nodes - 1);
          m.space = SpaceDescriptor::grid_sup(s.nodes, dx);
          m.generator = neumann_laplacian(s.nodes, dx);
          m.a_profile = s.a_profile;
          m.k_min = k;
          m.a_sup = s.a_profile.maxCoeff();
          m.beta = k;
          m.omega0 = 0.0;
          m.opnorm_b = m.a_sup;
          m.kerp_invariant = false;
        } else if constexpr (std::is_same_v<T, TransportL2FtsSpec>) {
          m.space = SpaceDescriptor::grid_l2(s.cells, s.dx);
          const double x_max = s.dx * static_cast<double>(s.cells);
          if (!(s.a_cut > 0.0 && s.a_cut < x_max)) {
            throw ValidationError("a_cut: must lie strictly inside (0, x_max)");
          }
          m.beta = 1.0;
          m.omega0 = 0.0;
          m.opnorm_b = 1.0;
          m.kerp_invariant = true;
        } else if constexpr (std::is_same_v<T, HeatSpectralProjectionSpec>) {
          if (s.n_modes < 1) throw ValidationError("n_modes: must be >= 1");
          if (s.q < 1 || s.q > s.n_modes) throw ValidationError("q: must satisfy 1 <= q <= n_modes");
          if (s.a_weights.size() != s.q) throw ValidationError("a_weights: size must equal q");
          for (Eigen::Index j = 0; j < s.q; ++j) {
            if (!(s.a_weights[j] > 0.0)) {
              throw ValidationError("a_weights[" + std::to_string(j) + "]: must be > 0");
            }
          }
          m.space = SpaceDescriptor::spectral_l2(s.n_modes);
          m.beta = s.a_weights.minCoeff();
          m.omega0 = 0.0;
          m.opnorm_b = s.a_weights.maxCoeff();
          m.kerp_invariant = true;
          m.ker_invariant = true;
        } else if constexpr (std::is_same_v<T, FiniteDimR4Spec>) {
          setup_finite_dim(m, r4_matrix_a(), r4_matrix_b(), std::sqrt(2.0), false);
        } else if constexpr (std::is_same_v<T, FiniteDimCustomSpec>) {
          setup_finite_dim(m, s.A, s.B, s.omega0, true);
        }
      },
      spec);

  return m;
}

bool model_is_hilbert(const Model& m) { return space_is_hilbert(m.space); }

bool model_is_transport(const Model& m) {
  return std::holds_alternative<TransportL1Spec>(m.spec) ||
         std::holds_alternative<TransportL2FtsSpec>(m.spec);
}

std::string model_name(const Model& m) {
  return std::visit(
      [](const auto& s) -> std::string {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, HeatDirichletSpectralSpec>) return "heat_dirichlet_spectral";
        else if constexpr (std::is_same_v<T, WaveUndampedSpec>) return "wave_undamped";
        else if constexpr (std::is_same_v<T, WaveDampedSpec>) return "wave_damped";
        else if constexpr (std::is_same_v<T, TransportL1Spec>) return "transport_l1";
        else if constexpr (std::is_same_v<T, HeatNeumannSupSpec>) return "heat_neumann_sup";
        else if constexpr (std::is_same_v<T, TransportL2FtsSpec>) return "transport_l2_fts";
        else if constexpr (std::is_same_v<T, HeatSpectralProjectionSpec>) return "heat_spectral_projection";
        else if constexpr (std::is_same_v<T, FiniteDimR4Spec>) return "finite_dim_r4";
        else return "finite_dim_custom";
      },
      m.spec);
}

StateVector semigroup_apply(const Model& m, const StateVector& v, double t) {
  if (t < 0.0) {
    throw TimeDomainError("t: semigroup evolution requires t >= 0 (no backward flow)");
  }
  if (!same_space(m.space, v.space)) {
    throw StructuralError("semigroup_apply: state does not belong to the model's space");
  }
  if (t == 0.0) return v;

  StateVector out = v;
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, HeatDirichletSpectralSpec> ||
                      std::is_same_v<T, HeatSpectralProjectionSpec>) {
          for (Eigen::Index j = 0; j < m.space.dim; ++j) {
            out.coeffs[j] *= std::exp(-m.space.eigenvalues[j] * t);
          }
        } else if constexpr (std::is_same_v<T, WaveUndampedSpec> ||
                             std::is_same_v<T, WaveDampedSpec>) {
          const Eigen::Index n = m.space.modes();
          for (Eigen::Index j = 0; j < n; ++j) {
            const double w = std::sqrt(m.space.eigenvalues[j]);
            const double c = std::cos(w * t);
            const double si = std::sin(w * t);
            const double a = wave_alpha(v, j);
            const double b = wave_beta(v, j);
            wave_alpha(out, j) = a * c + b * si;
            wave_beta(out, j) = -a * si + b * c;
          }
        } else if constexpr (std::is_same_v<T, TransportL1Spec> ||
                             std::is_same_v<T, TransportL2FtsSpec>) {
          const Eigen::Index k = transport_shift_count(m, t);
          const Eigen::Index n = m.space.dim;
          out.coeffs.setZero();
          for (Eigen::Index i = n - 1; i >= k; --i) out.coeffs[i] = v.coeffs[i - k];
        } else if constexpr (std::is_same_v<T, HeatNeumannSupSpec>) {
          const Eigen::MatrixXd propagator = (m.generator * t).exp();
          out.coeffs = propagator * v.coeffs;
        } else {
          const Eigen::MatrixXd propagator = (m.a_mat * t).exp();
          out.coeffs = propagator * v.coeffs;
        }
      },
      m.spec);
  return out;
}

StateVector apply_B(const Model& m, const StateVector& v) {
  if (!same_space(m.space, v.space)) {
    throw StructuralError("apply_B: state does not belong to the model's space");
  }
  StateVector out = v;
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, HeatDirichletSpectralSpec>) {
          if (s.b_multipliers.size() > 0) out.coeffs = s.b_multipliers.cwiseProduct(v.coeffs);
        } else if constexpr (std::is_same_v<T, WaveUndampedSpec>) {
          // B(y, w) = (0, y)
          const Eigen::Index n = m.space.modes();
          for (Eigen::Index j = 0; j < n; ++j) {
            const double a = wave_alpha(v, j);
            wave_alpha(out, j) = 0.0;
            wave_beta(out, j) = a / std::sqrt(m.space.eigenvalues[j]);
          }
        } else if constexpr (std::is_same_v<T, WaveDampedSpec>) {
          // B(y, w) = (0, w)
          const Eigen::Index n = m.space.modes();
          for (Eigen::Index j = 0; j < n; ++j) wave_alpha(out, j) = 0.0;
        } else if constexpr (std::is_same_v<T, TransportL1Spec> ||
                             std::is_same_v<T, TransportL2FtsSpec>) {
          const double cut = transport_cut(m);
          for (Eigen::Index i = 0; i < m.space.dim; ++i) {
            const double center = (static_cast<double>(i) + 0.5) * m.space.dx;
            if (center <= cut) out.coeffs[i] = 0.0;
          }
        } else if constexpr (std::is_same_v<T, HeatNeumannSupSpec>) {
          out.coeffs = m.a_profile.cwiseProduct(v.coeffs);
        } else if constexpr (std::is_same_v<T, HeatSpectralProjectionSpec>) {
          out.coeffs.setZero();
          for (Eigen::Index j = 0; j < s.q; ++j) out.coeffs[j] = s.a_weights[j] * v.coeffs[j];
        } else {
          out.coeffs = m.b_mat * v.coeffs;
        }
      },
      m.spec);
  return out;
}

double b_form(const Model& m, const StateVector& v) {
  if (std::holds_alternative<HeatNeumannSupSpec>(m.spec)) {
    // surrogate pairing operator k*Id
    const double n = norm(m.space, v);
    return m.k_min * n * n;
  }
  return pairing(m.space, apply_B(m, v), duality_select(m.space, v));
}

KernelSplit kernel_b_projection(const Model& m, const StateVector& v) {
  if (!model_is_hilbert(m)) {
    throw UnsupportedStructureError(
        "kernel_b_projection: requires a Hilbert-structured model (L2 / energy / finite-dim)");
  }
  if (!same_space(m.space, v.space)) {
    throw StructuralError("kernel_b_projection: state does not belong to the model's space");
  }
  KernelSplit split{zero_state(m.space), zero_state(m.space)};

  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, HeatDirichletSpectralSpec>) {
          for (Eigen::Index j = 0; j < m.space.dim; ++j) {
            const double mult = s.b_multipliers.size() > 0 ? s.b_multipliers[j] : 1.0;
            (mult == 0.0 ? split.ker : split.perp).coeffs[j] = v.coeffs[j];
          }
        } else if constexpr (std::is_same_v<T, WaveUndampedSpec>) {
          // ker B = {(0, w)}
          const Eigen::Index n = m.space.modes();
          for (Eigen::Index j = 0; j < n; ++j) {
            wave_beta(split.ker, j) = wave_beta(v, j);
            wave_alpha(split.perp, j) = wave_alpha(v, j);
          }
        } else if constexpr (std::is_same_v<T, WaveDampedSpec>) {
          // ker B = {(y, 0)}
          const Eigen::Index n = m.space.modes();
          for (Eigen::Index j = 0; j < n; ++j) {
            wave_alpha(split.ker, j) = wave_alpha(v, j);
            wave_beta(split.perp, j) = wave_beta(v, j);
          }
        } else if constexpr (std::is_same_v<T, TransportL2FtsSpec>) {
          for (Eigen::Index i = 0; i < m.space.dim; ++i) {
            const double center = (static_cast<double>(i) + 0.5) * m.space.dx;
            (center <= s.a_cut ? split.ker : split.perp).coeffs[i] = v.coeffs[i];
          }
        } else if constexpr (std::is_same_v<T, HeatSpectralProjectionSpec>) {
          for (Eigen::Index j = 0; j < m.space.dim; ++j) {
            (j < s.q ? split.perp : split.ker).coeffs[j] = v.coeffs[j];
          }
        } else if constexpr (std::is_same_v<T, FiniteDimR4Spec> ||
                             std::is_same_v<T, FiniteDimCustomSpec>) {
          const double b_scale = std::max(1.0, m.b_eigs.maxCoeff());
          for (Eigen::Index i = 0; i < m.space.dim; ++i) {
            const Eigen::VectorXd dir = m.b_vecs.col(i);
            const double c = dir.dot(v.coeffs);
            if (m.b_eigs[i] <= kKernelTol * b_scale) {
              split.ker.coeffs += c * dir;
            } else {
              split.perp.coeffs += c * dir;
            }
          }
        } else {
          throw UnsupportedStructureError("kernel_b_projection: unsupported model structure");
        }
      },
      m.spec);
  return split;
}

Eigen::VectorXd weak_functional_values(const Model& m, const StateVector& v, int K) {
  if (K <= 0) return Eigen::VectorXd(0);
  switch (m.space.kind) {
    case SpaceKind::FiniteDim:
    case SpaceKind::SpectralL2: {
      const Eigen::Index k = std::min<Eigen::Index>(K, m.space.dim);
      return v.coeffs.head(k);
    }
    case SpaceKind::EnergyWave: {
      const Eigen::Index k = std::min<Eigen::Index>(K, m.space.modes());
      Eigen::VectorXd out(k);
      for (Eigen::Index j = 0; j < k; ++j) {
        out[j] = std::sqrt(m.space.eigenvalues[j]) * wave_alpha(v, j);
      }
      return out;
    }
    case SpaceKind::GridL1:
    case SpaceKind::GridL2:
    case SpaceKind::GridSup: {
      // K evenly spaced hat functions over the domain
      const double length = m.space.dx * static_cast<double>(m.space.dim);
      const double w = length / static_cast<double>(K + 1);
      Eigen::VectorXd out = Eigen::VectorXd::Zero(K);
      for (int kf = 0; kf < K; ++kf) {
        const double center = w * static_cast<double>(kf + 1);
        double acc = 0.0;
        for (Eigen::Index i = 0; i < m.space.dim; ++i) {
          const double pos = m.space.kind == SpaceKind::GridSup
                                 ? m.space.dx * static_cast<double>(i)
                                 : (static_cast<double>(i) + 0.5) * m.space.dx;
          const double hat = std::max(0.0, 1.0 - std::abs(pos - center) / w);
          acc += hat * v.coeffs[i];
        }
        out[kf] = acc * m.space.dx;
      }
      return out;
    }
  }
  return Eigen::VectorXd(0);
}

StateVector exp_b_update(const Model& m, const StateVector& v, double s) {
  StateVector out = v;
  std::visit(
      [&](const auto& sp) {
        using T = std::decay_t<decltype(sp)>;
        if constexpr (std::is_same_v<T, HeatDirichletSpectralSpec>) {
          if (sp.b_multipliers.size() == 0) {
            out.coeffs *= std::exp(s);
          } else {
            for (Eigen::Index j = 0; j < m.space.dim; ++j) {
              out.coeffs[j] *= std::exp(s * sp.b_multipliers[j]);
            }
          }
        } else if constexpr (std::is_same_v<T, WaveUndampedSpec>) {
          // B is nilpotent (B^2 = 0): exp(sB) = I + sB, a shear
          const Eigen::Index n = m.space.modes();
          for (Eigen::Index j = 0; j < n; ++j) {
            wave_beta(out, j) += s * wave_alpha(v, j) / std::sqrt(m.space.eigenvalues[j]);
          }
        } else if constexpr (std::is_same_v<T, WaveDampedSpec>) {
          const double f = std::exp(s);
          const Eigen::Index n = m.space.modes();
          for (Eigen::Index j = 0; j < n; ++j) wave_beta(out, j) *= f;
        } else if constexpr (std::is_same_v<T, TransportL1Spec> ||
                             std::is_same_v<T, TransportL2FtsSpec>) {
          const double cut = transport_cut(m);
          const double f = std::exp(s);
          for (Eigen::Index i = 0; i < m.space.dim; ++i) {
            const double center = (static_cast<double>(i) + 0.5) * m.space.dx;
            if (center > cut) out.coeffs[i] *= f;
          }
        } else if constexpr (std::is_same_v<T, HeatNeumannSupSpec>) {
          for (Eigen::Index i = 0; i < m.space.dim; ++i) {
            out.coeffs[i] *= std::exp(s * m.a_profile[i]);
          }
        } else if constexpr (std::is_same_v<T, HeatSpectralProjectionSpec>) {
          for (Eigen::Index j = 0; j < sp.q; ++j) {
            out.coeffs[j] *= std::exp(s * sp.a_weights[j]);
          }
        } else {
          const Eigen::VectorXd factors = (s * m.b_eigs.array()).exp();
          out.coeffs = m.b_vecs * factors.cwiseProduct(m.b_vecs.transpose() * v.coeffs);
        }
      },
      m.spec);
  return out;
}

}  // namespace bilstab
