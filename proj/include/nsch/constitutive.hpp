#pragma once

#include <cmath>
#include <string>

#include "nsch/errors.hpp"
#include "nsch/fields.hpp"

namespace nsch {

// ---- Landau double-well potential ------------------------------------------

/// Psi(s) = (s^2 - 1)^2 / 4, minima at the pure phases s = +-1.
template <typename Scalar>
Scalar landau(Scalar s) {
  const Scalar q = s * s - Scalar(1);
  return Scalar(0.25) * q * q;
}

/// Psi'(s) = s^3 - s.
template <typename Scalar>
Scalar landau_prime(Scalar s) {
  return s * s * s - s;
}

/// Psi''(s) = 3 s^2 - 1.
template <typename Scalar>
Scalar landau_second(Scalar s) {
  return Scalar(3) * s * s - Scalar(1);
}

// ---- bounded viscosity law --------------------------------------------------

enum class ViscosityProfile { constant, logistic };

/// Concentration-dependent viscosity confined to [nu_star, nu_upper]. The
/// logistic profile nu(s) = nu_star + (nu_upper - nu_star) * sigma(shape * s)
/// is smooth and Lipschitz with constant (nu_upper - nu_star) * shape / 4.
template <typename Scalar = double>
struct ViscosityLaw {
  Scalar nu_star = 1;
  Scalar nu_upper = 1;
  Scalar shape = 1;
  ViscosityProfile profile = ViscosityProfile::constant;

  static ViscosityLaw constant(Scalar nu) { return validated({nu, nu, Scalar(1), ViscosityProfile::constant}); }

  static ViscosityLaw logistic(Scalar nu_star, Scalar nu_upper, Scalar shape = Scalar(1)) {
    return validated({nu_star, nu_upper, shape, ViscosityProfile::logistic});
  }

  static ViscosityLaw validated(ViscosityLaw law) {
    if (!(law.nu_star > Scalar(0)))
      throw ConfigError("ViscosityLaw: nu_star must be positive");
    if (law.nu_upper < law.nu_star)
      throw ConfigError("ViscosityLaw: nu_upper must be >= nu_star");
    if (!(law.shape > Scalar(0)))
      throw ConfigError("ViscosityLaw: shape must be positive");
    return law;
  }

  Scalar lipschitz_bound() const { return (nu_upper - nu_star) * shape / Scalar(4); }
};

template <typename Scalar>
Scalar viscosity(Scalar s, const ViscosityLaw<Scalar>& law) {
  if (law.profile == ViscosityProfile::constant || law.nu_upper == law.nu_star)
    return law.nu_star;
  const Scalar sigma = Scalar(1) / (Scalar(1) + std::exp(-law.shape * s));
  return law.nu_star + (law.nu_upper - law.nu_star) * sigma;
}

// ---- power-law exponent ------------------------------------------------------

/// Stress exponent p > 1. Newtonian at p = 2, shear thinning for p in [1,2),
/// shear thickening for p > 2. The well-posedness theory covers p > 5/2 (weak
/// solutions) and 5/2 <= p < 3 (strong solutions on the torus); other values
/// still run but carry theory_flag() == false.
template <typename Scalar = double>
struct PowerLawExponent {
  Scalar p = 2;

  explicit PowerLawExponent(Scalar p_) : p(p_) {
    if (!(p > Scalar(1))) throw ConfigError("PowerLawExponent: p must be > 1");
  }

  bool in_weak_theory_range() const { return p > Scalar(2.5); }
  bool in_strong_theory_range() const { return p >= Scalar(2.5) && p < Scalar(3); }
  bool theory_flag() const { return in_weak_theory_range() || in_strong_theory_range(); }
};

// ---- power-law stress ---------------------------------------------------------

/// (1 + q)^((p-2)/2) with q = |Du|^2 (squared Frobenius norm).
template <typename Scalar>
Scalar stress_factor(Scalar q, Scalar p) {
  if (q < Scalar(0)) throw DomainError("stress_factor: q must be >= 0");
  return std::pow(Scalar(1) + q, (p - Scalar(2)) / Scalar(2));
}

/// Pointwise squared Frobenius norm of a grid tensor.
template <typename Scalar>
typename SpectralLayout<Scalar>::ArrayX frobenius_squared(const TensorField<Scalar>& t) {
  const int d = t.layout->dim();
  typename SpectralLayout<Scalar>::ArrayX q =
      SpectralLayout<Scalar>::ArrayX::Zero(t.layout->grid_size());
  for (int i = 0; i < d * d; ++i) q += t.comp[i].square();
  return q;
}

/// Stress tensor nu(phi) (1 + |Du|^2)^((p-2)/2) Du on the grid.
template <typename Scalar>
TensorField<Scalar> stress_tensor(const TensorField<Scalar>& Du,
                                  const typename SpectralLayout<Scalar>::ArrayX& phi_grid,
                                  Scalar p, const ViscosityLaw<Scalar>& law) {
  const auto q = frobenius_squared(Du);
  typename SpectralLayout<Scalar>::ArrayX factor(q.size());
  const Scalar half_pm2 = (p - Scalar(2)) / Scalar(2);
  for (Index i = 0; i < q.size(); ++i)
    factor[i] = viscosity(phi_grid[i], law) * std::pow(Scalar(1) + q[i], half_pm2);
  TensorField<Scalar> out = Du;
  for (auto& c : out.comp) c *= factor;
  return out;
}

}  // namespace nsch
