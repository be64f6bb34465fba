#pragma once

#include <map>
#include <string>

#include "nsch/galerkin.hpp"

namespace nsch {

/// Instantaneous energies and dissipation rates of the balance
/// d/dt(E_kin + E_int + E_pot) + D_visc + D_chem = 0.
template <typename Scalar = double>
struct EnergyLedger {
  Scalar t = 0;
  Scalar e_kin = 0;    // (1/2) int rho |u|^2
  Scalar e_int = 0;    // (1/2) int |grad phi|^2
  Scalar e_pot = 0;    // int rho Psi(phi)
  Scalar d_visc = 0;   // int nu(phi) (1+|Du|^2)^((p-2)/2) |Du|^2
  Scalar d_chem = 0;   // int |grad mu|^2
  Scalar e_pot_prime = 0;  // int rho Psi'(phi), tracked alongside the Psi form

  Scalar total() const { return e_kin + e_int + e_pot; }
  Scalar dissipation() const { return d_visc + d_chem; }
};

template <typename Scalar>
EnergyLedger<Scalar> energy(const SimState<Scalar>& state, const Params<Scalar>& params) {
  const auto& L = *state.layout;
  const int d = L.dim();
  const Scalar vol = L.volume();
  const auto fields = detail::make_stage_fields<Scalar>(L, state.a, state.b);
  const auto mu = L.inverse(state.c.coeff);

  EnergyLedger<Scalar> e;
  e.t = state.t;
  typename SpectralLayout<Scalar>::ArrayX usq =
      SpectralLayout<Scalar>::ArrayX::Zero(L.grid_size());
  for (int i = 0; i < d; ++i) usq += fields.u[i].square();
  e.e_kin = Scalar(0.5) * vol * (state.rho.values * usq).mean();

  typename SpectralLayout<Scalar>::ArrayX gphi_sq =
      SpectralLayout<Scalar>::ArrayX::Zero(L.grid_size());
  for (int i = 0; i < d; ++i) gphi_sq += fields.grad_phi[i].square();
  e.e_int = Scalar(0.5) * vol * gphi_sq.mean();

  if (params.enable_potential) {
    const auto q = fields.phi.square() - Scalar(1);
    e.e_pot = Scalar(0.25) * vol * (state.rho.values * q.square()).mean();
    e.e_pot_prime =
        vol * (state.rho.values * (fields.phi * fields.phi * fields.phi - fields.phi)).mean();
  }

  if (params.enable_stress) {
    typename SpectralLayout<Scalar>::ArrayX dusq =
        SpectralLayout<Scalar>::ArrayX::Zero(L.grid_size());
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        dusq += (Scalar(0.5) * (fields.du[i][j] + fields.du[j][i])).square();
    const Scalar half_pm2 = (params.p - Scalar(2)) / Scalar(2);
    typename SpectralLayout<Scalar>::ArrayX integrand(L.grid_size());
    for (Index g = 0; g < L.grid_size(); ++g)
      integrand[g] = viscosity(fields.phi[g], params.viscosity) *
                     std::pow(Scalar(1) + dusq[g], half_pm2) * dusq[g];
    e.d_visc = vol * integrand.mean();
  }

  typename SpectralLayout<Scalar>::VectorXc work(L.mode_count());
  Scalar gmu = 0;
  for (Index j = 0; j < L.mode_count(); ++j)
    gmu += L.k_squared(j) * std::norm(state.c.coeff[j]);
  e.d_chem = vol * gmu;  // Plancherel: mean |grad mu|^2 = sum |k|^2 |c_k|^2
  return e;
}

/// Energy-identity defect over one step, dissipation integrated by the
/// trapezoid of the endpoint ledgers: E(t1) - E(t0) + int_{t0}^{t1} D dt.
template <typename Scalar>
Scalar energy_defect(const EnergyLedger<Scalar>& prev, const EnergyLedger<Scalar>& curr) {
  const Scalar dt = curr.t - prev.t;
  return curr.total() - prev.total() +
         dt / 2 * (prev.dissipation() + curr.dissipation());
}

/// Reference values fixed at the start of a run, against which conservation
/// drifts are measured.
template <typename Scalar = double>
struct Baselines {
  Scalar mass0 = 0;      // int rho_0delta
  Scalar rho_phi0 = 0;   // int rho_0delta phi_0
  Scalar rho_min0 = 0;
  Scalar rho_max0 = 0;

  static Baselines capture(const SimState<Scalar>& s) {
    const auto& L = *s.layout;
    Baselines b;
    b.mass0 = L.volume() * s.rho.values.mean();
    const auto phi = L.inverse(s.b.coeff);
    b.rho_phi0 = L.volume() * (s.rho.values * phi).mean();
    b.rho_min0 = s.rho.min0;
    b.rho_max0 = s.rho.max0;
    return b;
  }
};

template <typename Scalar = double>
struct InvariantReport {
  Scalar div_resid = 0;      // max_k |k.a(k)| / ||a||
  Scalar mass_drift = 0;     // |int rho - mass0| / mass0
  Scalar rho_phi_drift = 0;  // |int rho phi - rho_phi0| relative
  bool rho_bounds_ok = true;
  Scalar rho_min = 0, rho_max = 0;
  Scalar mu_resid = 0;       // band residual of rho mu + Delta phi - rho Psi'(phi)
  Scalar energy_defect = 0;  // over (prev, curr)
  bool finite = true;

  bool ok(Scalar div_tol = Scalar(1e-13)) const {
    return finite && rho_bounds_ok && div_resid <= div_tol;
  }
};

/// Band residual of the chemical-potential equation on the grid, normalized
/// by the equation scale.
template <typename Scalar>
Scalar mu_residual(const SimState<Scalar>& state, const Params<Scalar>& params) {
  const auto& L = *state.layout;
  const auto phi = L.inverse(state.b.coeff);
  const auto mu = L.inverse(state.c.coeff);
  typename SpectralLayout<Scalar>::VectorXc lap(L.mode_count());
  for (Index j = 0; j < L.mode_count(); ++j) lap[j] = -L.k_squared(j) * state.b.coeff[j];
  const auto lap_phi = L.inverse(lap);
  typename SpectralLayout<Scalar>::ArrayX r = state.rho.values * mu + lap_phi;
  if (params.enable_potential)
    r -= state.rho.values * (phi * phi * phi - phi);
  const auto r_band = L.inverse(L.forward(r));
  const Scalar scale = lap_phi.abs().maxCoeff() + (state.rho.values * mu).abs().maxCoeff();
  return r_band.abs().maxCoeff() / std::max(scale, Scalar(1e-300));
}

template <typename Scalar>
InvariantReport<Scalar> invariant_report(const SimState<Scalar>& prev,
                                         const SimState<Scalar>& curr,
                                         const Params<Scalar>& params,
                                         const Baselines<Scalar>& base) {
  const auto& L = *curr.layout;
  InvariantReport<Scalar> rep;
  rep.finite = curr.finite();
  if (!rep.finite) return rep;

  Scalar a_norm = 0;
  for (const auto& comp : curr.a.coeff) a_norm += comp.squaredNorm();
  a_norm = std::sqrt(a_norm);
  rep.div_resid = divergence_residual(curr.a) / std::max(a_norm, Scalar(1e-300));

  const Scalar mass = L.volume() * curr.rho.values.mean();
  rep.mass_drift = std::abs(mass - base.mass0) / base.mass0;

  const auto phi = L.inverse(curr.b.coeff);
  const Scalar rho_phi = L.volume() * (curr.rho.values * phi).mean();
  rep.rho_phi_drift =
      std::abs(rho_phi - base.rho_phi0) / std::max(std::abs(base.rho_phi0), base.mass0);

  std::tie(rep.rho_min, rep.rho_max) = density_bounds(curr.rho);
  rep.rho_bounds_ok = rep.rho_min >= base.rho_min0 && rep.rho_max <= base.rho_max0;

  rep.mu_resid = mu_residual(curr, params);
  rep.energy_defect = energy_defect(energy(prev, params), energy(curr, params));
  return rep;
}

/// Instantaneous norms mirroring the a-priori bounds tracked by the theory:
/// sqrt(rho) u in L^2, grad u in L^p, grad mu in L^2, phi in H^2,
/// sqrt(rho) mu in L^2, and the power-law dissipation norm.
template <typename Scalar>
std::map<std::string, Scalar> norm_tracks(const SimState<Scalar>& state,
                                          const Params<Scalar>& params) {
  const auto& L = *state.layout;
  const int d = L.dim();
  const Scalar vol = L.volume();
  const auto fields = detail::make_stage_fields<Scalar>(L, state.a, state.b);
  const auto mu = L.inverse(state.c.coeff);

  std::map<std::string, Scalar> out;

  typename SpectralLayout<Scalar>::ArrayX usq =
      SpectralLayout<Scalar>::ArrayX::Zero(L.grid_size());
  for (int i = 0; i < d; ++i) usq += fields.u[i].square();
  out["sqrt_rho_u_L2"] = std::sqrt(vol * (state.rho.values * usq).mean());

  typename SpectralLayout<Scalar>::ArrayX gu =
      SpectralLayout<Scalar>::ArrayX::Zero(L.grid_size());
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) gu += fields.du[i][j].square();
  out["grad_u_Lp"] =
      std::pow(vol * gu.pow(params.p / Scalar(2)).mean(), Scalar(1) / params.p);

  Scalar gmu = 0;
  for (Index j = 0; j < L.mode_count(); ++j)
    gmu += L.k_squared(j) * std::norm(state.c.coeff[j]);
  out["grad_mu_L2"] = std::sqrt(vol * gmu);

  Scalar h2 = 0;
  for (Index j = 0; j < L.mode_count(); ++j) {
    const Scalar k2 = L.k_squared(j);
    h2 += (Scalar(1) + k2 + k2 * k2) * std::norm(state.b.coeff[j]);
  }
  out["phi_H2"] = std::sqrt(vol * h2);

  out["sqrt_rho_mu_L2"] = std::sqrt(vol * (state.rho.values * mu.square()).mean());

  typename SpectralLayout<Scalar>::ArrayX dusq =
      SpectralLayout<Scalar>::ArrayX::Zero(L.grid_size());
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      dusq += (Scalar(0.5) * (fields.du[i][j] + fields.du[j][i])).square();
  const Scalar half_pm2 = (params.p - Scalar(2)) / Scalar(2);
  typename SpectralLayout<Scalar>::ArrayX diss(L.grid_size());
  for (Index g = 0; g < L.grid_size(); ++g)
    diss[g] = std::pow(Scalar(1) + dusq[g], half_pm2) * dusq[g];
  out["power_law_diss_L2"] = std::sqrt(vol * diss.mean());
  return out;
}

}  // namespace nsch
