#pragma once

#include <functional>
#include <string>
#include <vector>

#include "nsch/galerkin.hpp"

namespace nsch {

template <typename Scalar = double>
struct StepControls {
  Scalar dt = 0;             // fixed step; 0 selects stable_dt every step
  Scalar cfl_adv = Scalar(0.5);
  Scalar cfl_diff = Scalar(0.25);
  Scalar t_end = 1;
  long max_steps = 1000000;
  bool use_if_splitting = false;  // integrating-factor variant, first order

  void validate() const {
    if (!(cfl_adv > 0 && cfl_adv <= 1) || !(cfl_diff > 0 && cfl_diff <= 1))
      throw ConfigError("StepControls: CFL factors must lie in (0, 1]");
    if (dt < 0) throw ConfigError("StepControls: dt must be >= 0");
    if (t_end < 0) throw ConfigError("StepControls: t_end must be >= 0");
    if (max_steps < 0) throw ConfigError("StepControls: max_steps must be >= 0");
  }
};

/// Explicit step bound: advective CFL against max |u| and the fourth-order
/// limit of the chemical-potential diffusion, dt = min(cfl_adv h / max|u|,
/// cfl_diff h^4 rho_min).
template <typename Scalar>
Scalar stable_dt(const SimState<Scalar>& state, const StepControls<Scalar>& controls) {
  const auto& L = *state.layout;
  const Scalar h = L.grid_spacing();
  Scalar umax = 0;
  for (int i = 0; i < L.dim(); ++i) {
    const auto ug = L.inverse(state.a.coeff[i]);
    if (!ug.isFinite().all()) throw NumericError("stable_dt: non-finite velocity");
    umax = std::max(umax, ug.abs().maxCoeff());
  }
  const Scalar rho_min = state.rho.values.minCoeff();
  if (!std::isfinite(rho_min)) throw NumericError("stable_dt: non-finite density");
  const Scalar adv = controls.cfl_adv * h / std::max(umax, Scalar(1e-12));
  const Scalar diff = controls.cfl_diff * h * h * h * h * rho_min;
  return std::min(adv, diff);
}

namespace detail {

template <typename Scalar>
VectorField<Scalar> axpy_velocity(const VectorField<Scalar>& a, Scalar s,
                                  const VectorField<Scalar>& da) {
  VectorField<Scalar> out = a;
  for (size_t i = 0; i < out.coeff.size(); ++i) out.coeff[i] += s * da.coeff[i];
  leray_stack(*out.layout, out.coeff);
  return out;
}

template <typename Scalar>
void require_finite(const SimState<Scalar>& s, const char* where) {
  if (!s.finite()) throw NumericError(std::string(where) + ": non-finite state");
}

}  // namespace detail

template <typename Scalar>
SimState<Scalar> step_if_split(const SimState<Scalar>& state, Scalar dt,
                               const Params<Scalar>& params,
                               RhsWorkspace<Scalar>* ws = nullptr);

/// One Heun (explicit trapezoid) step of the coupled system. The predictor
/// stage carries its own density, advected over [t, t+dt] with the
/// time-centered velocity, and its own chemical potential solve; the output
/// chemical potential is re-solved so every returned state satisfies the
/// mu-equation against its own (b, rho).
template <typename Scalar>
SimState<Scalar> step(const SimState<Scalar>& state, Scalar dt, const Params<Scalar>& params,
                      const StepControls<Scalar>& controls = {},
                      RhsWorkspace<Scalar>* ws = nullptr) {
  if (controls.use_if_splitting) return step_if_split(state, dt, params, ws);
  if (std::abs(dt) > stable_dt(state, controls) * (Scalar(1) + Scalar(1e-6)))
    throw ConfigError("step: dt exceeds the stability bound");

  const auto s1 = stage_rhs(state.layout, state.a, state.b, state.rho, state.t, params, ws);
  const auto a_pred = detail::axpy_velocity(state.a, dt, s1.a_dot);
  auto b_pred = state.b;
  b_pred.coeff += dt * s1.b_dot.coeff;
  auto rho_new = advect_density(state.rho, a_pred, state.a, dt);
  const auto s2 = stage_rhs(state.layout, a_pred, b_pred, rho_new, state.t + dt, params, ws);

  SimState<Scalar> out;
  out.layout = state.layout;
  out.t = state.t + dt;
  out.rho = std::move(rho_new);
  out.a = state.a;
  for (size_t i = 0; i < out.a.coeff.size(); ++i)
    out.a.coeff[i] += (dt / 2) * (s1.a_dot.coeff[i] + s2.a_dot.coeff[i]);
  detail::leray_stack(*out.layout, out.a.coeff);
  out.b = state.b;
  out.b.coeff += (dt / 2) * (s1.b_dot.coeff + s2.b_dot.coeff);
  out.c = chemical_potential_solve(out.b, out.rho, params, ws ? &ws->c : nullptr);
  if (ws) ws->c = {out.c.coeff};
  detail::require_finite(out, "step");
  return out;
}

/// Integrating-factor (Lawson-Euler) variant: the leading biharmonic symbol
/// of the phase equation, with coefficient 1/rho_min^2, is integrated
/// exactly; everything else is advanced explicitly. First order in dt but
/// free of the h^4 step restriction.
template <typename Scalar>
SimState<Scalar> step_if_split(const SimState<Scalar>& state, Scalar dt,
                               const Params<Scalar>& params, RhsWorkspace<Scalar>* ws) {
  const auto& L = *state.layout;
  const auto s1 = stage_rhs(state.layout, state.a, state.b, state.rho, state.t, params, ws);
  const Scalar rho_min = state.rho.values.minCoeff();
  const Scalar kappa_if = Scalar(1) / (rho_min * rho_min);

  SimState<Scalar> out;
  out.layout = state.layout;
  out.t = state.t + dt;
  out.a = detail::axpy_velocity(state.a, dt, s1.a_dot);
  out.rho = advect_density(state.rho, out.a, state.a, dt);
  out.b = state.b;
  for (Index j = 0; j < L.mode_count(); ++j) {
    const Scalar k2 = L.k_squared(j);
    const Scalar lam = kappa_if * k2 * k2;
    out.b.coeff[j] = std::exp(-lam * dt) *
                     (state.b.coeff[j] + dt * (s1.b_dot.coeff[j] + lam * state.b.coeff[j]));
  }
  out.c = chemical_potential_solve(out.b, out.rho, params, ws ? &ws->c : nullptr);
  if (ws) ws->c = {out.c.coeff};
  detail::require_finite(out, "step_if_split");
  return out;
}

template <typename Scalar = double>
struct StepRecord {
  Scalar t;
  Scalar dt;
};

template <typename Scalar = double>
struct BlowUpReport {
  bool blown_up = false;
  long at_step = 0;
  Scalar at_time = 0;
  std::string what;
};

template <typename Scalar = double>
struct RunResult {
  SimState<Scalar> state;  // final, or last valid state before blow-up
  std::vector<StepRecord<Scalar>> steps;
  BlowUpReport<Scalar> blowup;
};

/// Advance until t_end or max_steps. The callback, when set, observes
/// (previous, current) state pairs every `cadence` accepted steps and at the
/// final step. Numeric failures end the run with a blow-up report carrying
/// the last valid state instead of propagating.
template <typename Scalar>
RunResult<Scalar> run(
    const SimState<Scalar>& state0, const StepControls<Scalar>& controls,
    const Params<Scalar>& params,
    const std::function<void(const SimState<Scalar>&, const SimState<Scalar>&, long)>& callback =
        nullptr,
    long cadence = 1) {
  controls.validate();
  RunResult<Scalar> result;
  result.state = state0;
  RhsWorkspace<Scalar> ws;
  long step_count = 0;
  while (result.state.t < controls.t_end && step_count < controls.max_steps) {
    Scalar dt = controls.dt > 0 ? controls.dt : stable_dt(result.state, controls);
    const Scalar remaining = controls.t_end - result.state.t;
    if (remaining <= dt * (Scalar(1) + Scalar(1e-9)))
      dt = remaining;
    try {
      SimState<Scalar> next = step(result.state, dt, params, controls, &ws);
      ++step_count;
      result.steps.push_back({next.t, dt});
      if (callback && (step_count % cadence == 0 || next.t >= controls.t_end))
        callback(result.state, next, step_count);
      result.state = std::move(next);
    } catch (const NumericError& e) {
      result.blowup = {true, step_count, result.state.t, e.what()};
      return result;
    } catch (const SolverError& e) {
      result.blowup = {true, step_count, result.state.t, e.what()};
      return result;
    }
  }
  return result;
}

}  // namespace nsch
