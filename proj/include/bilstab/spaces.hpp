#pragma once

#include <Eigen/Dense>

#include "bilstab/errors.hpp"

namespace bilstab {

/// The norm structures used by the workbench.
///
///   FiniteDim   — R^n with the Euclidean inner product.
///   SpectralL2  — L2(0,1) represented by Dirichlet eigenfunction
///                 coefficients; lambda_j = (j*pi)^2 by default.
///   EnergyWave  — H_0^1 x L2 energy space in modal form. Coefficients are
///                 interleaved pairs (alpha_j, beta_j) per mode with
///                 ||y||^2 = sum_j lambda_j (alpha_j^2 + beta_j^2).
///   GridL1      — L1(0, n*dx) on midpoint cells.
///   GridL2      — L2(0, n*dx) on midpoint cells.
///   GridSup     — continuous functions on [0, (n-1)*dx] with the sup norm,
///                 nodal values.
enum class SpaceKind { FiniteDim, SpectralL2, EnergyWave, GridL1, GridL2, GridSup };

struct SpaceDescriptor {
  SpaceKind kind = SpaceKind::FiniteDim;
  Eigen::Index dim = 0;          ///< coefficient count (2N for EnergyWave)
  Eigen::VectorXd eigenvalues;   ///< SpectralL2 / EnergyWave only, size N
  double dx = 0.0;               ///< grid kinds only

  Eigen::Index modes() const;    ///< N for spectral kinds

  static SpaceDescriptor finite_dim(Eigen::Index n);
  static SpaceDescriptor spectral_l2(Eigen::Index n_modes);
  static SpaceDescriptor spectral_l2(Eigen::VectorXd eigenvalues);
  static SpaceDescriptor energy_wave(Eigen::Index n_modes);
  static SpaceDescriptor energy_wave(Eigen::VectorXd eigenvalues);
  static SpaceDescriptor grid_l1(Eigen::Index cells, double dx);
  static SpaceDescriptor grid_l2(Eigen::Index cells, double dx);
  static SpaceDescriptor grid_sup(Eigen::Index nodes, double dx);
};

bool same_space(const SpaceDescriptor& a, const SpaceDescriptor& b);
bool space_is_hilbert(const SpaceDescriptor& s);

/// Dirichlet Laplacian eigenvalues (j*pi)^2, j = 1..n.
Eigen::VectorXd dirichlet_eigenvalues(Eigen::Index n);

struct StateVector {
  SpaceDescriptor space;
  Eigen::VectorXd coeffs;
};

/// Validates length and finiteness against the space.
StateVector make_state(const SpaceDescriptor& space, Eigen::VectorXd coeffs);
StateVector zero_state(const SpaceDescriptor& space);

// EnergyWave interleaved accessors (mode index j is 0-based).
inline double wave_alpha(const StateVector& v, Eigen::Index j) { return v.coeffs[2 * j]; }
inline double wave_beta(const StateVector& v, Eigen::Index j) { return v.coeffs[2 * j + 1]; }
inline double& wave_alpha(StateVector& v, Eigen::Index j) { return v.coeffs[2 * j]; }
inline double& wave_beta(StateVector& v, Eigen::Index j) { return v.coeffs[2 * j + 1]; }

/// A selected element of the duality set J(v).
struct DualityElement {
  enum class Kind {
    SameSpace,   ///< Hilbert identification: the element is a state
    BoundedFn,   ///< L-infinity representative of an L1 dual element
    PointMass,   ///< weighted point measure (sup-norm dual)
  };
  Kind kind = Kind::SameSpace;
  Eigen::VectorXd values;    ///< SameSpace / BoundedFn
  Eigen::Index index = 0;    ///< PointMass
  double weight = 0.0;       ///< PointMass
};

double norm(const SpaceDescriptor& space, const StateVector& v);
double pairing(const SpaceDescriptor& space, const StateVector& v, const StateVector& w);
double pairing(const SpaceDescriptor& space, const StateVector& v, const DualityElement& w);

/// Deterministic selection from J(v): identity on Hilbert spaces,
/// sign(v)*||v||_1 on GridL1 (sign(0) := 0), smallest-argmax point mass on
/// GridSup. Satisfies <v, J(v)> = ||v||^2 = ||J(v)||^2.
DualityElement duality_select(const SpaceDescriptor& space, const StateVector& v);

/// Norm of a dual element in the dual space of `space`.
double dual_norm(const SpaceDescriptor& space, const DualityElement& w);

}  // namespace bilstab
