#pragma once

#include <functional>

#include "nsch/constitutive.hpp"
#include "nsch/density.hpp"
#include "nsch/fields.hpp"

namespace nsch {

/// Physical and solver parameters of one problem instance.
template <typename Scalar = double>
struct Params {
  Scalar p = Scalar(2.8);                       // power-law stress exponent
  ViscosityLaw<Scalar> viscosity = ViscosityLaw<Scalar>::constant(Scalar(1));
  Scalar delta = Scalar(0.05);                  // mollification floor for rho
  Scalar rho_star = Scalar(2);                  // initial density cap
  Scalar cg_tol = Scalar(1e-11);                // mass-solve relative residual
  int cg_max_iter = 2000;

  // term toggles (ablation runs and reversibility probes)
  bool enable_stress = true;
  bool enable_potential = true;

  // optional manufactured forcing added to the phase equation, (x, t) -> f
  std::function<Scalar(const Eigen::Matrix<Scalar, 3, 1>&, Scalar)> phase_forcing;

  PowerLawExponent<Scalar> exponent() const { return PowerLawExponent<Scalar>(p); }
};

/// Complete simulation state: density on the grid and the Galerkin
/// coefficient vectors a (velocity, solenoidal), b (order parameter) and
/// c (chemical potential), plus the clock.
template <typename Scalar = double>
struct SimState {
  LayoutPtr<Scalar> layout;
  Scalar t = 0;
  DensityField<Scalar> rho;
  VectorField<Scalar> a;   // coeff rep, k.a(k) = 0
  ScalarField<Scalar> b;   // coeff rep
  ScalarField<Scalar> c;   // coeff rep

  static SimState rest(LayoutPtr<Scalar> l, Scalar rho_value = Scalar(1),
                       Scalar phi_value = Scalar(1)) {
    SimState s;
    s.layout = l;
    s.rho = DensityField<Scalar>::uniform(l, rho_value);
    s.a = VectorField<Scalar>::zero(l, Rep::coeff);
    s.b = ScalarField<Scalar>::zero(l, Rep::coeff);
    s.b.coeff[l->mode_index(0, 0, 0)] = phi_value;
    s.c = ScalarField<Scalar>::zero(l, Rep::coeff);
    return s;
  }

  bool finite() const {
    if (!rho.values.isFinite().all()) return false;
    for (const auto& comp : a.coeff)
      if (!comp.allFinite()) return false;
    return b.coeff.allFinite() && c.coeff.allFinite();
  }
};

}  // namespace nsch
