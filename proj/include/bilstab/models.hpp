#pragma once

#include <Eigen/Dense>
#include <limits>
#include <string>
#include <variant>

#include "bilstab/spaces.hpp"

namespace bilstab {

// --- model catalog -----------------------------------------------------------

/// Heat equation on (0,1), Dirichlet, in modal coordinates. B is the identity
/// unless modal multipliers are given.
struct HeatDirichletSpectralSpec {
  Eigen::Index n_modes = 16;
  Eigen::VectorXd b_multipliers;  ///< empty => B = Id
};

/// Undamped wave equation on (0,1) in the energy space; the control operator
/// feeds the position into the velocity slot: B(y, w) = (0, y).
struct WaveUndampedSpec {
  Eigen::Index n_modes = 16;
};

/// Damped wave equation on (0,1); B(y, w) = (0, w).
struct WaveDampedSpec {
  Eigen::Index n_modes = 16;
};

/// Right-shift transport on L1(0, cells*dx), zero inflow; B multiplies by
/// the indicator of (alpha_cut, infinity). Mass leaving the right boundary
/// is dropped.
struct TransportL1Spec {
  Eigen::Index cells = 1000;
  double dx = 0.01;
  double alpha_cut = 0.5;
};

/// Neumann heat equation on [0,1] in the sup norm, nodal grid, second-order
/// finite differences. The dynamics use B = a(.)* ; pairings use the
/// surrogate operator k*Id with k = min a.
struct HeatNeumannSupSpec {
  Eigen::Index nodes = 101;
  Eigen::VectorXd a_profile;  ///< size == nodes, min must be > 0
};

/// Right-shift transport on L2(0, cells*dx); B = indicator of (a_cut, inf).
struct TransportL2FtsSpec {
  Eigen::Index cells = 1500;
  double dx = 0.01;
  double a_cut = 1.0;
};

/// Heat equation with a rank-q spectral control operator
/// B y = sum_{j<=q} a_j <y, phi_j> phi_j.
struct HeatSpectralProjectionSpec {
  Eigen::Index n_modes = 8;
  Eigen::Index q = 3;
  Eigen::VectorXd a_weights;  ///< size q, all > 0
};

/// The fixed 4x4 example pair: quasi-contractive of type sqrt(2),
/// B = diag(1,1,1,0).
struct FiniteDimR4Spec {};

/// User-supplied finite-dimensional pair. B must be symmetric positive
/// semidefinite; omega0 must dominate the symmetric part of A.
struct FiniteDimCustomSpec {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  double omega0 = 0.0;
};

using ModelSpec =
    std::variant<HeatDirichletSpectralSpec, WaveUndampedSpec, WaveDampedSpec, TransportL1Spec,
                 HeatNeumannSupSpec, TransportL2FtsSpec, HeatSpectralProjectionSpec,
                 FiniteDimR4Spec, FiniteDimCustomSpec>;

struct Model {
  ModelSpec spec;
  SpaceDescriptor space;
  double beta = 0.0;          ///< coercivity of B on ker(B)^perp (0 if none)
  double omega0 = 0.0;        ///< quasi-contraction type of S(t)
  double opnorm_b = 1.0;      ///< operator norm of B
  bool kerp_invariant = false;  ///< ker(B)^perp invariant under S(t)
  bool ker_invariant = false;   ///< ker(B) invariant under S(t)
  /// Smallest alpha with <Ax, Bx> <= alpha <Bx, x> for all x (finite-dim
  /// models with invertible B only; +inf otherwise).
  double ab_alpha = std::numeric_limits<double>::infinity();

  // finite-dimensional machinery
  Eigen::MatrixXd a_mat;
  Eigen::MatrixXd b_mat;
  Eigen::VectorXd b_eigs;     ///< eigenvalues of symmetric B
  Eigen::MatrixXd b_vecs;     ///< corresponding orthonormal eigenvectors

  // sup-norm heat machinery
  Eigen::MatrixXd generator;  ///< Neumann finite-difference Laplacian
  Eigen::VectorXd a_profile;
  double k_min = 0.0;         ///< min of a (surrogate pairing operator k*Id)
  double a_sup = 0.0;         ///< sup of a
};

Model build_model(const ModelSpec& spec);

/// Exact (or spectrally / grid exact) action of S(t), t >= 0. Transport
/// models require t to be an integer multiple of dx.
StateVector semigroup_apply(const Model& m, const StateVector& v, double t);

StateVector apply_B(const Model& m, const StateVector& v);

/// <Bv, J(v)> with the deterministic duality selection. For Hilbert models
/// this is <Bv, v>; HeatNeumannSup uses its surrogate pairing operator k*Id.
double b_form(const Model& m, const StateVector& v);

struct KernelSplit {
  StateVector ker;
  StateVector perp;
};

/// Orthogonal splitting v = v_ker + v_perp with B v_ker = 0. Hilbert models only.
KernelSplit kernel_b_projection(const Model& m, const StateVector& v);

bool model_is_hilbert(const Model& m);
bool model_is_transport(const Model& m);
std::string model_name(const Model& m);

/// Values of the weak-observation functionals <x, phi_k>, k = 1..K:
/// leading coefficient functionals on spectral / finite-dimensional models,
/// K evenly spaced hat functions on grid models.
Eigen::VectorXd weak_functional_values(const Model& m, const StateVector& v, int K);

/// exp(s * B) v, exact (diagonal scaling, nilpotent shear, or symmetric
/// eigendecomposition depending on the model).
StateVector exp_b_update(const Model& m, const StateVector& v, double s);

}  // namespace bilstab
