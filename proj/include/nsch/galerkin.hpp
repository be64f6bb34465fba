#pragma once

#include <optional>
#include <vector>

#include "nsch/constitutive.hpp"
#include "nsch/spectral_ops.hpp"
#include "nsch/state.hpp"

namespace nsch {

template <typename Scalar>
using CoeffStack = std::vector<typename SpectralLayout<Scalar>::VectorXc>;

namespace detail {

template <typename Scalar>
Scalar stack_inner(const CoeffStack<Scalar>& x, const CoeffStack<Scalar>& y) {
  Scalar s = 0;
  for (size_t i = 0; i < x.size(); ++i) s += x[i].dot(y[i]).real();
  return s;
}

template <typename Scalar>
void leray_stack(const SpectralLayout<Scalar>& L, CoeffStack<Scalar>& v) {
  const int d = L.dim();
  for (Index j = 0; j < L.mode_count(); ++j) {
    const auto kappa = L.wavenumber(j);
    const Scalar k2 = kappa.squaredNorm();
    if (k2 == Scalar(0)) continue;
    std::complex<Scalar> kdotu(0, 0);
    for (int a = 0; a < d; ++a) kdotu += kappa[a] * v[a][j];
    for (int a = 0; a < d; ++a) v[a][j] -= kappa[a] * kdotu / k2;
  }
}

}  // namespace detail

/// Density-weighted Gram operator of the retained basis: the matrices M1
/// (solenoidal vector modes) and M2 (scalar modes) applied matrix-free as
/// transform -> multiply by rho -> transform back (-> project). Symmetric
/// positive definite whenever rho > 0, and the identity when rho == 1.
template <typename Scalar = double>
class MassOperator {
 public:
  using ArrayX = typename SpectralLayout<Scalar>::ArrayX;
  enum class Basis { scalar, solenoidal };

  MassOperator(LayoutPtr<Scalar> layout, ArrayX rho_grid, Basis basis)
      : layout_(std::move(layout)), rho_(std::move(rho_grid)), basis_(basis) {
    if (rho_.size() != layout_->grid_size())
      throw LayoutError("MassOperator: density size does not match layout");
    if (!(rho_.minCoeff() > Scalar(0)))
      throw DomainError("MassOperator: density must be strictly positive");
  }

  const SpectralLayout<Scalar>& layout() const { return *layout_; }
  int stack_size() const { return basis_ == Basis::scalar ? 1 : layout_->dim(); }

  CoeffStack<Scalar> apply(const CoeffStack<Scalar>& v) const {
    CoeffStack<Scalar> out(v.size());
    for (size_t i = 0; i < v.size(); ++i)
      out[i] = layout_->forward(rho_ * layout_->inverse(v[i]));
    if (basis_ == Basis::solenoidal) detail::leray_stack(*layout_, out);
    return out;
  }

  /// Conjugate gradients to relative residual tol; throws SolverError with
  /// the reached residual if the iteration cap is hit.
  CoeffStack<Scalar> solve(CoeffStack<Scalar> rhs, const CoeffStack<Scalar>* warm_start,
                           Scalar tol, int max_iter) const {
    if (int(rhs.size()) != stack_size())
      throw LayoutError("MassOperator::solve: rhs stack size mismatch");
    if (basis_ == Basis::solenoidal) detail::leray_stack(*layout_, rhs);
    const Scalar rhs_norm = std::sqrt(detail::stack_inner<Scalar>(rhs, rhs));
    CoeffStack<Scalar> x;
    if (warm_start && int(warm_start->size()) == stack_size()) {
      x = *warm_start;
      if (basis_ == Basis::solenoidal) detail::leray_stack(*layout_, x);
    } else {
      x.assign(rhs.size(),
               SpectralLayout<Scalar>::VectorXc::Zero(layout_->mode_count()));
    }
    if (rhs_norm == Scalar(0)) return x;  // rhs == 0 has the zero solution
    CoeffStack<Scalar> r = apply(x);
    for (size_t i = 0; i < r.size(); ++i) r[i] = rhs[i] - r[i];
    CoeffStack<Scalar> p = r;
    Scalar rr = detail::stack_inner<Scalar>(r, r);
    for (int it = 0; it < max_iter; ++it) {
      if (std::sqrt(rr) <= tol * rhs_norm) return x;
      const CoeffStack<Scalar> ap = apply(p);
      const Scalar alpha = rr / detail::stack_inner<Scalar>(p, ap);
      for (size_t i = 0; i < x.size(); ++i) {
        x[i] += alpha * p[i];
        r[i] -= alpha * ap[i];
      }
      const Scalar rr_new = detail::stack_inner<Scalar>(r, r);
      const Scalar beta = rr_new / rr;
      rr = rr_new;
      for (size_t i = 0; i < p.size(); ++i) p[i] = r[i] + beta * p[i];
    }
    if (std::sqrt(rr) <= tol * rhs_norm) return x;
    throw SolverError("MassOperator::solve: CG did not reach tolerance",
                      double(std::sqrt(rr) / rhs_norm));
  }

 private:
  LayoutPtr<Scalar> layout_;
  ArrayX rho_;
  Basis basis_;
};

namespace detail {

/// Grid realizations shared by the right-hand sides at one stage.
template <typename Scalar>
struct StageFields {
  using ArrayX = typename SpectralLayout<Scalar>::ArrayX;
  std::vector<ArrayX> u;                // velocity components
  std::vector<std::vector<ArrayX>> du;  // du[i][a] = d u_i / d x_a
  ArrayX phi;
  std::vector<ArrayX> grad_phi;
};

template <typename Scalar>
StageFields<Scalar> make_stage_fields(const SpectralLayout<Scalar>& L,
                                      const VectorField<Scalar>& a,
                                      const ScalarField<Scalar>& b) {
  const int d = L.dim();
  StageFields<Scalar> f;
  f.u.resize(d);
  f.du.assign(d, std::vector<typename StageFields<Scalar>::ArrayX>(d));
  typename SpectralLayout<Scalar>::VectorXc work(L.mode_count());
  const std::complex<Scalar> I(0, 1);
  for (int i = 0; i < d; ++i) {
    f.u[i] = L.inverse(a.coeff[i]);
    for (int ax = 0; ax < d; ++ax) {
      for (Index j = 0; j < L.mode_count(); ++j)
        work[j] = I * L.wavenumber(j)[ax] * a.coeff[i][j];
      f.du[i][ax] = L.inverse(work);
    }
  }
  f.phi = L.inverse(b.coeff);
  f.grad_phi.resize(d);
  for (int ax = 0; ax < d; ++ax) {
    for (Index j = 0; j < L.mode_count(); ++j)
      work[j] = I * L.wavenumber(j)[ax] * b.coeff[j];
    f.grad_phi[ax] = L.inverse(work);
  }
  return f;
}

}  // namespace detail

/// Galerkin chemical potential: solve M2 c = K b + F2(b) with K the
/// stiffness diagonal |k|^2 and F2 the band analysis of rho Psi'(phi), the
/// weak form of rho mu = -Delta phi + rho Psi'(phi).
template <typename Scalar>
ScalarField<Scalar> chemical_potential_solve(const ScalarField<Scalar>& b,
                                             const DensityField<Scalar>& rho,
                                             const Params<Scalar>& params,
                                             const CoeffStack<Scalar>* warm = nullptr) {
  const auto& L = *b.layout;
  typename SpectralLayout<Scalar>::VectorXc rhs(L.mode_count());
  for (Index j = 0; j < L.mode_count(); ++j) rhs[j] = L.k_squared(j) * b.coeff[j];
  if (params.enable_potential) {
    const auto phi = L.inverse(b.coeff);
    rhs += L.forward(rho.values * (phi * phi * phi - phi));
  }
  MassOperator<Scalar> m2(b.layout, rho.values, MassOperator<Scalar>::Basis::scalar);
  auto c = m2.solve({std::move(rhs)}, warm, params.cg_tol, params.cg_max_iter);
  return ScalarField<Scalar>::from_coeff(b.layout, std::move(c[0]));
}

/// Capillary force (rho mu - rho Psi'(phi)) grad phi, band-analyzed and
/// Leray-projected. The chemical potential enters as a grid field so callers
/// choose between the Galerkin mu (production) and a pointwise mu (tests of
/// the -div(grad phi x grad phi) equivalence).
template <typename Scalar>
VectorField<Scalar> capillary_force(const ScalarField<Scalar>& b,
                                    const typename SpectralLayout<Scalar>::ArrayX& mu_grid,
                                    const DensityField<Scalar>& rho,
                                    const Params<Scalar>& params) {
  const auto& L = *b.layout;
  typename SpectralLayout<Scalar>::ArrayX s = rho.values * mu_grid;
  if (params.enable_potential) {
    const auto phi = L.inverse(b.coeff);
    s -= rho.values * (phi * phi * phi - phi);
  }
  auto out = VectorField<Scalar>::zero(b.layout, Rep::coeff);
  typename SpectralLayout<Scalar>::VectorXc work(L.mode_count());
  const std::complex<Scalar> I(0, 1);
  for (int ax = 0; ax < L.dim(); ++ax) {
    for (Index j = 0; j < L.mode_count(); ++j)
      work[j] = I * L.wavenumber(j)[ax] * b.coeff[j];
    out.coeff[ax] = L.forward(s * L.inverse(work));
  }
  detail::leray_stack(L, out.coeff);
  return out;
}

template <typename Scalar>
VectorField<Scalar> capillary_force(const ScalarField<Scalar>& b, const ScalarField<Scalar>& c,
                                    const DensityField<Scalar>& rho,
                                    const Params<Scalar>& params) {
  return capillary_force(b, b.layout->inverse(c.coeff), rho, params);
}

namespace detail {

/// Unprojected momentum force: band analysis of
///   -rho (u.grad)u + div T + (rho mu - rho Psi'(phi)) grad phi,
/// with T the power-law stress. Pressure recovery needs exactly this field;
/// the momentum equation sees its Leray projection.
template <typename Scalar>
VectorField<Scalar> momentum_force(const SpectralLayout<Scalar>& L,
                                   const StageFields<Scalar>& fields,
                                   const typename SpectralLayout<Scalar>::ArrayX& mu_grid,
                                   const typename SpectralLayout<Scalar>::ArrayX& rho,
                                   const Params<Scalar>& params, LayoutPtr<Scalar> lp) {
  const int d = L.dim();
  auto F = VectorField<Scalar>::zero(lp, Rep::coeff);
  typename SpectralLayout<Scalar>::ArrayX cap = rho * mu_grid;
  if (params.enable_potential)
    cap -= rho * (fields.phi * fields.phi * fields.phi - fields.phi);
  for (int i = 0; i < d; ++i) {
    typename SpectralLayout<Scalar>::ArrayX g = cap * fields.grad_phi[i];
    for (int ax = 0; ax < d; ++ax) g -= rho * fields.u[ax] * fields.du[i][ax];
    F.coeff[i] = L.forward(g);
  }
  if (params.enable_stress) {
    TensorField<Scalar> Du;
    Du.layout = lp;
    Du.comp.assign(d * d, typename SpectralLayout<Scalar>::ArrayX());
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        Du.comp[i * d + j] = Scalar(0.5) * (fields.du[i][j] + fields.du[j][i]);
    const auto T = stress_tensor(Du, fields.phi, params.p, params.viscosity);
    const std::complex<Scalar> I(0, 1);
    for (int i = 0; i < d; ++i) {
      for (int ax = 0; ax < d; ++ax) {
        const auto c = L.forward(T(i, ax));
        for (Index j = 0; j < L.mode_count(); ++j)
          F.coeff[i][j] += I * L.wavenumber(j)[ax] * c[j];
      }
    }
  }
  return F;
}

}  // namespace detail

/// Band analysis of div T alone (the stress pairing used by the energy
/// dissipation identity tests).
template <typename Scalar>
VectorField<Scalar> stress_force(const VectorField<Scalar>& a, const ScalarField<Scalar>& b,
                                 const Params<Scalar>& params) {
  const auto& L = *a.layout;
  const int d = L.dim();
  auto fields = detail::make_stage_fields<Scalar>(L, a, b);
  TensorField<Scalar> Du;
  Du.layout = a.layout;
  Du.comp.assign(d * d, typename SpectralLayout<Scalar>::ArrayX());
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      Du.comp[i * d + j] = Scalar(0.5) * (fields.du[i][j] + fields.du[j][i]);
  const auto T = stress_tensor(Du, fields.phi, params.p, params.viscosity);
  return divergence_tensor(T);
}

/// Workspace carrying CG warm starts between stages of one run.
template <typename Scalar = double>
struct RhsWorkspace {
  CoeffStack<Scalar> c;
  CoeffStack<Scalar> dadt;
  CoeffStack<Scalar> dbdt;
};

/// Velocity equation right-hand side: da/dt = M1^{-1} P[ momentum force ].
/// Precondition: c solved consistently from (b, rho).
template <typename Scalar>
VectorField<Scalar> momentum_rhs(const SimState<Scalar>& state, const Params<Scalar>& params,
                                 RhsWorkspace<Scalar>* ws = nullptr) {
  const auto& L = *state.layout;
  const auto fields = detail::make_stage_fields<Scalar>(L, state.a, state.b);
  const auto mu_grid = L.inverse(state.c.coeff);
  auto F = detail::momentum_force<Scalar>(L, fields, mu_grid, state.rho.values, params,
                                          state.layout);
  detail::leray_stack(L, F.coeff);
  MassOperator<Scalar> m1(state.layout, state.rho.values,
                          MassOperator<Scalar>::Basis::solenoidal);
  auto dadt = m1.solve(F.coeff, ws ? &ws->dadt : nullptr, params.cg_tol, params.cg_max_iter);
  if (ws) ws->dadt = dadt;
  auto out = VectorField<Scalar>::zero(state.layout, Rep::coeff);
  out.coeff = std::move(dadt);
  return out;
}

/// Phase equation right-hand side: db/dt = M2^{-1}[ -analysis(rho u.grad phi)
/// - K c (+ forcing) ]. Precondition: c solved consistently from (b, rho).
template <typename Scalar>
ScalarField<Scalar> phase_rhs(const SimState<Scalar>& state, const Params<Scalar>& params,
                              RhsWorkspace<Scalar>* ws = nullptr) {
  const auto& L = *state.layout;
  const auto fields = detail::make_stage_fields<Scalar>(L, state.a, state.b);
  typename SpectralLayout<Scalar>::ArrayX conv =
      SpectralLayout<Scalar>::ArrayX::Zero(L.grid_size());
  for (int ax = 0; ax < L.dim(); ++ax) conv += fields.u[ax] * fields.grad_phi[ax];
  typename SpectralLayout<Scalar>::VectorXc rhs = -L.forward(state.rho.values * conv);
  for (Index j = 0; j < L.mode_count(); ++j) rhs[j] -= L.k_squared(j) * state.c.coeff[j];
  if (params.phase_forcing) {
    typename SpectralLayout<Scalar>::ArrayX f(L.grid_size());
    const long n = L.n_grid();
    for (Index gi = 0; gi < L.grid_size(); ++gi) {
      Eigen::Matrix<Scalar, 3, 1> x = Eigen::Matrix<Scalar, 3, 1>::Zero();
      Index rem = gi;
      for (int ax = 0; ax < L.dim(); ++ax) {
        x[ax] = L.grid_coord(rem % n);
        rem /= n;
      }
      f[gi] = params.phase_forcing(x, state.t);
    }
    rhs += L.forward(f);
  }
  MassOperator<Scalar> m2(state.layout, state.rho.values, MassOperator<Scalar>::Basis::scalar);
  auto dbdt = m2.solve({std::move(rhs)}, ws ? &ws->dbdt : nullptr, params.cg_tol,
                       params.cg_max_iter);
  if (ws) ws->dbdt = dbdt;
  return ScalarField<Scalar>::from_coeff(state.layout, std::move(dbdt[0]));
}

/// Pressure from the Helmholtz decomposition of the unprojected force:
/// P(k) = -i k.F(k)/|k|^2, zero mean. grad P is the curl-free part of F.
template <typename Scalar>
ScalarField<Scalar> recover_pressure(const SimState<Scalar>& state,
                                     const Params<Scalar>& params) {
  const auto& L = *state.layout;
  const auto fields = detail::make_stage_fields<Scalar>(L, state.a, state.b);
  const auto mu_grid = L.inverse(state.c.coeff);
  const auto F = detail::momentum_force<Scalar>(L, fields, mu_grid, state.rho.values, params,
                                                state.layout);
  auto P = ScalarField<Scalar>::zero(state.layout, Rep::coeff);
  const std::complex<Scalar> I(0, 1);
  for (Index j = 0; j < L.mode_count(); ++j) {
    const Scalar k2 = L.k_squared(j);
    if (k2 == Scalar(0)) continue;
    std::complex<Scalar> kdotf(0, 0);
    for (int ax = 0; ax < L.dim(); ++ax) kdotf += L.wavenumber(j)[ax] * F.coeff[ax][j];
    P.coeff[j] = -I * kdotf / k2;
  }
  return P;
}

/// Full unprojected momentum force of a state (exposed for the pressure and
/// Helmholtz-split diagnostics).
template <typename Scalar>
VectorField<Scalar> momentum_force_field(const SimState<Scalar>& state,
                                         const Params<Scalar>& params) {
  const auto& L = *state.layout;
  const auto fields = detail::make_stage_fields<Scalar>(L, state.a, state.b);
  const auto mu_grid = L.inverse(state.c.coeff);
  return detail::momentum_force<Scalar>(L, fields, mu_grid, state.rho.values, params,
                                        state.layout);
}

/// One coupled evaluation at a stage: chemical potential solve followed by
/// both time derivatives, sharing the stage grid fields.
template <typename Scalar>
struct StageDerivative {
  VectorField<Scalar> a_dot;
  ScalarField<Scalar> b_dot;
  ScalarField<Scalar> c;
};

template <typename Scalar>
StageDerivative<Scalar> stage_rhs(const LayoutPtr<Scalar>& layout, const VectorField<Scalar>& a,
                                  const ScalarField<Scalar>& b, const DensityField<Scalar>& rho,
                                  Scalar t, const Params<Scalar>& params,
                                  RhsWorkspace<Scalar>* ws = nullptr) {
  const auto& L = *layout;
  const int d = L.dim();
  const auto fields = detail::make_stage_fields<Scalar>(L, a, b);

  MassOperator<Scalar> m2(layout, rho.values, MassOperator<Scalar>::Basis::scalar);
  typename SpectralLayout<Scalar>::VectorXc mu_rhs(L.mode_count());
  for (Index j = 0; j < L.mode_count(); ++j) mu_rhs[j] = L.k_squared(j) * b.coeff[j];
  if (params.enable_potential)
    mu_rhs += L.forward(rho.values * (fields.phi * fields.phi * fields.phi - fields.phi));
  auto c_stack = m2.solve({std::move(mu_rhs)}, ws ? &ws->c : nullptr, params.cg_tol,
                          params.cg_max_iter);
  if (ws) ws->c = c_stack;
  const auto mu_grid = L.inverse(c_stack[0]);

  auto F = detail::momentum_force<Scalar>(L, fields, mu_grid, rho.values, params, layout);
  detail::leray_stack(L, F.coeff);
  MassOperator<Scalar> m1(layout, rho.values, MassOperator<Scalar>::Basis::solenoidal);
  auto dadt = m1.solve(F.coeff, ws ? &ws->dadt : nullptr, params.cg_tol, params.cg_max_iter);
  if (ws) ws->dadt = dadt;

  typename SpectralLayout<Scalar>::ArrayX conv =
      SpectralLayout<Scalar>::ArrayX::Zero(L.grid_size());
  for (int ax = 0; ax < d; ++ax) conv += fields.u[ax] * fields.grad_phi[ax];
  typename SpectralLayout<Scalar>::VectorXc phase = -L.forward(rho.values * conv);
  for (Index j = 0; j < L.mode_count(); ++j) phase[j] -= L.k_squared(j) * c_stack[0][j];
  if (params.phase_forcing) {
    typename SpectralLayout<Scalar>::ArrayX f(L.grid_size());
    const long n = L.n_grid();
    for (Index gi = 0; gi < L.grid_size(); ++gi) {
      Eigen::Matrix<Scalar, 3, 1> x = Eigen::Matrix<Scalar, 3, 1>::Zero();
      Index rem = gi;
      for (int ax = 0; ax < L.dim(); ++ax) {
        x[ax] = L.grid_coord(rem % n);
        rem /= n;
      }
      f[gi] = params.phase_forcing(x, t);
    }
    phase += L.forward(f);
  }
  auto dbdt = m2.solve({std::move(phase)}, ws ? &ws->dbdt : nullptr, params.cg_tol,
                       params.cg_max_iter);
  if (ws) ws->dbdt = dbdt;

  StageDerivative<Scalar> out;
  out.a_dot = VectorField<Scalar>::zero(layout, Rep::coeff);
  out.a_dot.coeff = std::move(dadt);
  out.b_dot = ScalarField<Scalar>::from_coeff(layout, std::move(dbdt[0]));
  out.c = ScalarField<Scalar>::from_coeff(layout, std::move(c_stack[0]));
  return out;
}

}  // namespace nsch
