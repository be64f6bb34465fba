#pragma once

#include <complex>

#include "nsch/fields.hpp"

namespace nsch {

namespace detail {
template <typename Scalar>
void require_rep(Rep have, Rep want, const char* op) {
  if (have != want)
    throw LayoutError(std::string(op) + ": field is in the wrong representation");
}
}  // namespace detail

/// grad f: component a carries i*kappa_a*f_k. Exact on the retained band.
template <typename Scalar>
VectorField<Scalar> gradient(const ScalarField<Scalar>& f) {
  detail::require_rep<Scalar>(f.rep, Rep::coeff, "gradient");
  const auto& L = *f.layout;
  auto out = VectorField<Scalar>::zero(f.layout, Rep::coeff);
  const std::complex<Scalar> I(0, 1);
  for (Index j = 0; j < L.mode_count(); ++j) {
    const auto kappa = L.wavenumber(j);
    for (int a = 0; a < L.dim(); ++a) out.coeff[a][j] = I * kappa[a] * f.coeff[j];
  }
  return out;
}

template <typename Scalar>
ScalarField<Scalar> divergence(const VectorField<Scalar>& v) {
  detail::require_rep<Scalar>(v.rep, Rep::coeff, "divergence");
  const auto& L = *v.layout;
  auto out = ScalarField<Scalar>::zero(v.layout, Rep::coeff);
  const std::complex<Scalar> I(0, 1);
  for (Index j = 0; j < L.mode_count(); ++j) {
    const auto kappa = L.wavenumber(j);
    for (int a = 0; a < L.dim(); ++a) out.coeff[j] += I * kappa[a] * v.coeff[a][j];
  }
  return out;
}

template <typename Scalar>
ScalarField<Scalar> laplacian(const ScalarField<Scalar>& f) {
  detail::require_rep<Scalar>(f.rep, Rep::coeff, "laplacian");
  const auto& L = *f.layout;
  auto out = ScalarField<Scalar>::from_coeff(f.layout, f.coeff);
  for (Index j = 0; j < L.mode_count(); ++j) out.coeff[j] *= -L.k_squared(j);
  return out;
}

/// Symmetric velocity gradient Du = (grad u + grad u^t)/2, returned on the
/// grid where the power-law stress needs it pointwise.
template <typename Scalar>
TensorField<Scalar> sym_gradient(const VectorField<Scalar>& u) {
  detail::require_rep<Scalar>(u.rep, Rep::coeff, "sym_gradient");
  const auto& L = *u.layout;
  const int d = L.dim();
  auto out = TensorField<Scalar>::zero(u.layout);
  const std::complex<Scalar> I(0, 1);
  typename SpectralLayout<Scalar>::VectorXc dcomp(L.mode_count());
  for (int i = 0; i < d; ++i) {
    for (int a = 0; a < d; ++a) {
      // du_i/dx_a in coefficients, then to the grid
      for (Index j = 0; j < L.mode_count(); ++j)
        dcomp[j] = I * L.wavenumber(j)[a] * u.coeff[i][j];
      auto g = L.inverse(dcomp);
      out(i, a) += Scalar(0.5) * g;
      out(a, i) += Scalar(0.5) * g;
    }
  }
  return out;
}

/// Leray projection onto divergence-free fields: per mode u -= k (k.u)/|k|^2;
/// the k = 0 (mean-flow) mode passes through.
template <typename Scalar>
VectorField<Scalar> leray_project(const VectorField<Scalar>& v) {
  detail::require_rep<Scalar>(v.rep, Rep::coeff, "leray_project");
  const auto& L = *v.layout;
  const int d = L.dim();
  VectorField<Scalar> out = v;
  for (Index j = 0; j < L.mode_count(); ++j) {
    const auto kappa = L.wavenumber(j);
    const Scalar k2 = kappa.squaredNorm();
    if (k2 == Scalar(0)) continue;
    std::complex<Scalar> kdotu(0, 0);
    for (int a = 0; a < d; ++a) kdotu += kappa[a] * v.coeff[a][j];
    for (int a = 0; a < d; ++a) out.coeff[a][j] -= kappa[a] * kdotu / k2;
  }
  return out;
}

/// Two-thirds dealiasing. Coefficient fields span only the retained band, so
/// this is the identity there; on the grid it is the band-projection
/// synth(anal(f)), which is what nonlinear products go through.
template <typename Scalar>
ScalarField<Scalar> dealias(const ScalarField<Scalar>& f) {
  if (f.rep == Rep::coeff) return f;
  return ScalarField<Scalar>::from_grid(f.layout, f.layout->inverse(f.layout->forward(f.grid)));
}

/// Divergence of a grid tensor, component i = sum_a d(T_ia)/dx_a, computed by
/// band analysis of each component followed by spectral differentiation.
template <typename Scalar>
VectorField<Scalar> divergence_tensor(const TensorField<Scalar>& t) {
  const auto& L = *t.layout;
  const int d = L.dim();
  auto out = VectorField<Scalar>::zero(t.layout, Rep::coeff);
  const std::complex<Scalar> I(0, 1);
  for (int i = 0; i < d; ++i) {
    for (int a = 0; a < d; ++a) {
      auto c = L.forward(t(i, a));
      for (Index j = 0; j < L.mode_count(); ++j)
        out.coeff[i][j] += I * L.wavenumber(j)[a] * c[j];
    }
  }
  return out;
}

/// Largest |k.u(k)| over the band; zero for solenoidal fields.
template <typename Scalar>
Scalar divergence_residual(const VectorField<Scalar>& v) {
  detail::require_rep<Scalar>(v.rep, Rep::coeff, "divergence_residual");
  const auto& L = *v.layout;
  Scalar worst = 0;
  for (Index j = 0; j < L.mode_count(); ++j) {
    const auto kappa = L.wavenumber(j);
    std::complex<Scalar> kdotu(0, 0);
    for (int a = 0; a < L.dim(); ++a) kdotu += kappa[a] * v.coeff[a][j];
    worst = std::max(worst, std::abs(kdotu));
  }
  return worst;
}

}  // namespace nsch
