#pragma once

#include <Eigen/Dense>

#include <complex>
#include <vector>

#include "nsch/errors.hpp"
#include "nsch/spectral_layout.hpp"

namespace nsch {

enum class Rep { grid, coeff };

/// Real scalar field on a periodic torus, stored either as collocation
/// samples (rep == grid) or as retained-band Fourier coefficients
/// (rep == coeff, conjugate-symmetric).
template <typename Scalar = double>
struct ScalarField {
  using ArrayX = typename SpectralLayout<Scalar>::ArrayX;
  using VectorXc = typename SpectralLayout<Scalar>::VectorXc;

  LayoutPtr<Scalar> layout;
  Rep rep = Rep::grid;
  ArrayX grid;     // valid when rep == grid
  VectorXc coeff;  // valid when rep == coeff

  ScalarField() = default;

  static ScalarField zero(LayoutPtr<Scalar> l, Rep r = Rep::grid) {
    ScalarField f;
    f.layout = std::move(l);
    f.rep = r;
    if (r == Rep::grid)
      f.grid = ArrayX::Zero(f.layout->grid_size());
    else
      f.coeff = VectorXc::Zero(f.layout->mode_count());
    return f;
  }

  static ScalarField from_grid(LayoutPtr<Scalar> l, ArrayX values) {
    if (values.size() != l->grid_size())
      throw LayoutError("ScalarField: grid values do not match layout");
    ScalarField f;
    f.layout = std::move(l);
    f.rep = Rep::grid;
    f.grid = std::move(values);
    return f;
  }

  static ScalarField from_coeff(LayoutPtr<Scalar> l, VectorXc c) {
    if (c.size() != l->mode_count())
      throw LayoutError("ScalarField: coefficients do not match layout band");
    ScalarField f;
    f.layout = std::move(l);
    f.rep = Rep::coeff;
    f.coeff = std::move(c);
    return f;
  }
};

/// d-component real vector field; all components share one representation.
template <typename Scalar = double>
struct VectorField {
  using ArrayX = typename SpectralLayout<Scalar>::ArrayX;
  using VectorXc = typename SpectralLayout<Scalar>::VectorXc;

  LayoutPtr<Scalar> layout;
  Rep rep = Rep::grid;
  std::vector<ArrayX> grid;      // size dim when rep == grid
  std::vector<VectorXc> coeff;   // size dim when rep == coeff

  static VectorField zero(LayoutPtr<Scalar> l, Rep r = Rep::grid) {
    VectorField f;
    f.layout = std::move(l);
    f.rep = r;
    if (r == Rep::grid)
      f.grid.assign(f.layout->dim(), ArrayX::Zero(f.layout->grid_size()));
    else
      f.coeff.assign(f.layout->dim(), VectorXc::Zero(f.layout->mode_count()));
    return f;
  }
};

/// dim x dim real tensor field on the collocation grid (row-major components).
template <typename Scalar = double>
struct TensorField {
  using ArrayX = typename SpectralLayout<Scalar>::ArrayX;

  LayoutPtr<Scalar> layout;
  std::vector<ArrayX> comp;  // dim*dim entries, comp[i*dim+j] = T_ij

  const ArrayX& operator()(int i, int j) const { return comp[i * layout->dim() + j]; }
  ArrayX& operator()(int i, int j) { return comp[i * layout->dim() + j]; }

  static TensorField zero(LayoutPtr<Scalar> l) {
    TensorField t;
    t.layout = std::move(l);
    t.comp.assign(t.layout->dim() * t.layout->dim(), ArrayX::Zero(t.layout->grid_size()));
    return t;
  }
};

// ---- representation changes ----------------------------------------------

template <typename Scalar>
ScalarField<Scalar> forward_transform(const ScalarField<Scalar>& f) {
  if (f.rep == Rep::coeff) return f;
  return ScalarField<Scalar>::from_coeff(f.layout, f.layout->forward(f.grid));
}

template <typename Scalar>
ScalarField<Scalar> inverse_transform(const ScalarField<Scalar>& f) {
  if (f.rep == Rep::grid) return f;
  return ScalarField<Scalar>::from_grid(f.layout, f.layout->inverse(f.coeff));
}

template <typename Scalar>
VectorField<Scalar> forward_transform(const VectorField<Scalar>& v) {
  if (v.rep == Rep::coeff) return v;
  VectorField<Scalar> out;
  out.layout = v.layout;
  out.rep = Rep::coeff;
  out.coeff.reserve(v.grid.size());
  for (const auto& g : v.grid) out.coeff.push_back(v.layout->forward(g));
  return out;
}

template <typename Scalar>
VectorField<Scalar> inverse_transform(const VectorField<Scalar>& v) {
  if (v.rep == Rep::grid) return v;
  VectorField<Scalar> out;
  out.layout = v.layout;
  out.rep = Rep::grid;
  out.grid.reserve(v.coeff.size());
  for (const auto& c : v.coeff) out.grid.push_back(v.layout->inverse(c));
  return out;
}

// ---- pairings and norms ----------------------------------------------------

/// Grid-mean pairing (1/N) sum_x f g == (1/|Omega|) integral of f g for
/// exactly integrable products; the retained basis is orthonormal under it.
template <typename Scalar>
Scalar grid_mean(const typename SpectralLayout<Scalar>::ArrayX& a) {
  return a.mean();
}

template <typename Scalar>
Scalar integral(const SpectralLayout<Scalar>& layout,
                const typename SpectralLayout<Scalar>::ArrayX& a) {
  return layout.volume() * a.mean();
}

/// l2 norm of a coefficient stack (velocity components concatenated, etc.).
template <typename Scalar>
Scalar coeff_norm(const std::vector<typename SpectralLayout<Scalar>::VectorXc>& cs) {
  Scalar s = 0;
  for (const auto& c : cs) s += c.squaredNorm();
  return std::sqrt(s);
}

/// Largest conjugate-symmetry violation |c(k) - conj(c(-k))| over the band.
template <typename Scalar>
Scalar conjugate_symmetry_defect(const SpectralLayout<Scalar>& layout,
                                 const typename SpectralLayout<Scalar>::VectorXc& c) {
  Scalar worst = 0;
  for (Index j = 0; j < layout.mode_count(); ++j)
    worst = std::max(worst, std::abs(c[j] - std::conj(c[layout.negate_index(j)])));
  return worst;
}

}  // namespace nsch
