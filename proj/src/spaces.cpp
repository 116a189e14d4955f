#include "bilstab/spaces.hpp"

#include <cmath>
#include <string>

namespace bilstab {

namespace {

void check_eigenvalues(const Eigen::VectorXd& ev) {
  if (ev.size() < 1) throw ValidationError("eigenvalues: at least one mode required");
  double prev = 0.0;
  for (Eigen::Index j = 0; j < ev.size(); ++j) {
    if (!(ev[j] > prev)) {
      throw ValidationError("eigenvalues: must be strictly increasing and positive (index " +
                            std::to_string(j) + ")");
    }
    prev = ev[j];
  }
}

void check_grid(Eigen::Index n, double dx, const char* which) {
  if (n < 1) throw ValidationError(std::string(which) + ": size must be >= 1");
  if (!(dx > 0.0)) throw ValidationError(std::string(which) + ": dx must be > 0");
}

}  // namespace

Eigen::VectorXd dirichlet_eigenvalues(Eigen::Index n) {
  Eigen::VectorXd ev(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double jpi = static_cast<double>(j + 1) * M_PI;
    ev[j] = jpi * jpi;
  }
  return ev;
}

Eigen::Index SpaceDescriptor::modes() const {
  switch (kind) {
    case SpaceKind::SpectralL2:
      return dim;
    case SpaceKind::EnergyWave:
      return dim / 2;
    default:
      return dim;
  }
}

SpaceDescriptor SpaceDescriptor::finite_dim(Eigen::Index n) {
  if (n < 1) throw ValidationError("FiniteDim: dimension must be >= 1");
  SpaceDescriptor s;
  s.kind = SpaceKind::FiniteDim;
  s.dim = n;
  return s;
}

SpaceDescriptor SpaceDescriptor::spectral_l2(Eigen::Index n_modes) {
  return spectral_l2(dirichlet_eigenvalues(n_modes));
}

SpaceDescriptor SpaceDescriptor::spectral_l2(Eigen::VectorXd eigenvalues) {
  check_eigenvalues(eigenvalues);
  SpaceDescriptor s;
  s.kind = SpaceKind::SpectralL2;
  s.dim = eigenvalues.size();
  s.eigenvalues = std::move(eigenvalues);
  return s;
}

SpaceDescriptor SpaceDescriptor::energy_wave(Eigen::Index n_modes) {
  return energy_wave(dirichlet_eigenvalues(n_modes));
}

SpaceDescriptor SpaceDescriptor::energy_wave(Eigen::VectorXd eigenvalues) {
  check_eigenvalues(eigenvalues);
  SpaceDescriptor s;
  s.kind = SpaceKind::EnergyWave;
  s.dim = 2 * eigenvalues.size();
  s.eigenvalues = std::move(eigenvalues);
  return s;
}

SpaceDescriptor SpaceDescriptor::grid_l1(Eigen::Index cells, double dx) {
  check_grid(cells, dx, "GridL1");
  SpaceDescriptor s;
  s.kind = SpaceKind::GridL1;
  s.dim = cells;
  s.dx = dx;
  return s;
}

SpaceDescriptor SpaceDescriptor::grid_l2(Eigen::Index cells, double dx) {
  check_grid(cells, dx, "GridL2");
  SpaceDescriptor s;
  s.kind = SpaceKind::GridL2;
  s.dim = cells;
  s.dx = dx;
  return s;
}

SpaceDescriptor SpaceDescriptor::grid_sup(Eigen::Index nodes, double dx) {
  check_grid(nodes, dx, "GridSup");
  SpaceDescriptor s;
  s.kind = SpaceKind::GridSup;
  s.dim = nodes;
  s.dx = dx;
  return s;
}

bool same_space(const SpaceDescriptor& a, const SpaceDescriptor& b) {
  if (a.kind != b.kind || a.dim != b.dim) return false;
  if (a.eigenvalues.size() != b.eigenvalues.size()) return false;
  if (a.eigenvalues.size() > 0 && a.eigenvalues != b.eigenvalues) return false;
  return a.dx == b.dx;
}

bool space_is_hilbert(const SpaceDescriptor& s) {
  switch (s.kind) {
    case SpaceKind::FiniteDim:
    case SpaceKind::SpectralL2:
    case SpaceKind::EnergyWave:
    case SpaceKind::GridL2:
      return true;
    default:
      return false;
  }
}

StateVector make_state(const SpaceDescriptor& space, Eigen::VectorXd coeffs) {
  if (coeffs.size() != space.dim) {
    throw StructuralError("state coefficient count " + std::to_string(coeffs.size()) +
                          " does not match space dimension " + std::to_string(space.dim));
  }
  if (!coeffs.allFinite()) throw ValidationError("state coefficients must be finite");
  return StateVector{space, std::move(coeffs)};
}

StateVector zero_state(const SpaceDescriptor& space) {
  return StateVector{space, Eigen::VectorXd::Zero(space.dim)};
}

namespace {

void check_membership(const SpaceDescriptor& space, const StateVector& v) {
  if (!same_space(space, v.space) || v.coeffs.size() != space.dim) {
    throw StructuralError("state does not belong to the given space");
  }
}

double energy_inner(const SpaceDescriptor& s, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  double acc = 0.0;
  const Eigen::Index n = s.eigenvalues.size();
  for (Eigen::Index j = 0; j < n; ++j) {
    acc += s.eigenvalues[j] * (a[2 * j] * b[2 * j] + a[2 * j + 1] * b[2 * j + 1]);
  }
  return acc;
}

}  // namespace

double norm(const SpaceDescriptor& space, const StateVector& v) {
  check_membership(space, v);
  switch (space.kind) {
    case SpaceKind::FiniteDim:
    case SpaceKind::SpectralL2:
      return v.coeffs.norm();
    case SpaceKind::EnergyWave:
      return std::sqrt(energy_inner(space, v.coeffs, v.coeffs));
    case SpaceKind::GridL1:
      return space.dx * v.coeffs.lpNorm<1>();
    case SpaceKind::GridL2:
      return std::sqrt(space.dx) * v.coeffs.norm();
    case SpaceKind::GridSup:
      return v.coeffs.lpNorm<Eigen::Infinity>();
  }
  throw StructuralError("unknown space kind");
}

double pairing(const SpaceDescriptor& space, const StateVector& v, const StateVector& w) {
  check_membership(space, v);
  if (w.coeffs.size() != space.dim) {
    throw StructuralError("pairing: second argument has incompatible dimension");
  }
  switch (space.kind) {
    case SpaceKind::FiniteDim:
    case SpaceKind::SpectralL2:
      return v.coeffs.dot(w.coeffs);
    case SpaceKind::EnergyWave:
      return energy_inner(space, v.coeffs, w.coeffs);
    case SpaceKind::GridL1:
    case SpaceKind::GridL2:
    case SpaceKind::GridSup:
      // grid functions paired through the quadrature integral
      return space.dx * v.coeffs.dot(w.coeffs);
  }
  throw StructuralError("unknown space kind");
}

double pairing(const SpaceDescriptor& space, const StateVector& v, const DualityElement& w) {
  check_membership(space, v);
  switch (w.kind) {
    case DualityElement::Kind::SameSpace: {
      if (!space_is_hilbert(space)) {
        throw StructuralError("SameSpace dual element on a non-Hilbert space");
      }
      if (w.values.size() != space.dim) {
        throw StructuralError("pairing: dual element has incompatible dimension");
      }
      return pairing(space, v, StateVector{space, w.values});
    }
    case DualityElement::Kind::BoundedFn: {
      if (space.kind != SpaceKind::GridL1) {
        throw StructuralError("BoundedFn dual element requires a GridL1 space");
      }
      if (w.values.size() != space.dim) {
        throw StructuralError("pairing: dual element has incompatible dimension");
      }
      return space.dx * v.coeffs.dot(w.values);
    }
    case DualityElement::Kind::PointMass: {
      if (space.kind != SpaceKind::GridSup) {
        throw StructuralError("PointMass dual element requires a GridSup space");
      }
      if (w.index < 0 || w.index >= space.dim) {
        throw StructuralError("pairing: point mass index out of range");
      }
      return v.coeffs[w.index] * w.weight;
    }
  }
  throw StructuralError("unknown dual element kind");
}

DualityElement duality_select(const SpaceDescriptor& space, const StateVector& v) {
  check_membership(space, v);
  DualityElement d;
  switch (space.kind) {
    case SpaceKind::FiniteDim:
    case SpaceKind::SpectralL2:
    case SpaceKind::EnergyWave:
    case SpaceKind::GridL2:
      d.kind = DualityElement::Kind::SameSpace;
      d.values = v.coeffs;
      return d;
    case SpaceKind::GridL1: {
      const double l1 = norm(space, v);
      d.kind = DualityElement::Kind::BoundedFn;
      d.values = Eigen::VectorXd::Zero(space.dim);
      for (Eigen::Index i = 0; i < space.dim; ++i) {
        // sign(0) := 0, a valid member of [-1, 1]
        if (v.coeffs[i] > 0.0) d.values[i] = l1;
        else if (v.coeffs[i] < 0.0) d.values[i] = -l1;
      }
      return d;
    }
    case SpaceKind::GridSup: {
      // smallest index attaining max |v|
      Eigen::Index best = 0;
      double best_abs = std::abs(v.coeffs[0]);
      for (Eigen::Index i = 1; i < space.dim; ++i) {
        const double a = std::abs(v.coeffs[i]);
        if (a > best_abs) {
          best_abs = a;
          best = i;
        }
      }
      d.kind = DualityElement::Kind::PointMass;
      d.index = best;
      d.weight = v.coeffs[best];
      return d;
    }
  }
  throw StructuralError("unknown space kind");
}

double dual_norm(const SpaceDescriptor& space, const DualityElement& w) {
  switch (w.kind) {
    case DualityElement::Kind::SameSpace:
      return norm(space, StateVector{space, w.values});
    case DualityElement::Kind::BoundedFn:
      if (w.values.size() == 0) return 0.0;
      return w.values.lpNorm<Eigen::Infinity>();
    case DualityElement::Kind::PointMass:
      return std::abs(w.weight);
  }
  throw StructuralError("unknown dual element kind");
}

}  // namespace bilstab
