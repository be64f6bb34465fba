#pragma once

#include <array>
#include <cmath>
#include <limits>

#include "nsch/errors.hpp"
#include "nsch/fields.hpp"
#include "nsch/parallel.hpp"

namespace nsch {

/// Mixture density on the collocation grid together with the bounds and mass
/// of the mollified initial datum. Transport never leaves [min0, max0]: the
/// semi-Lagrangian update interpolates with a stencil-clamped cubic, so the
/// discrete maximum principle holds exactly, not just to truncation order.
template <typename Scalar = double>
struct DensityField {
  using ArrayX = typename SpectralLayout<Scalar>::ArrayX;

  LayoutPtr<Scalar> layout;
  ArrayX values;
  Scalar min0 = 0;   // extrema of the mollified initial density
  Scalar max0 = 0;
  Scalar mass0 = 0;  // integral of the mollified initial density

  static DensityField uniform(LayoutPtr<Scalar> l, Scalar value) {
    DensityField d;
    d.layout = std::move(l);
    d.values = ArrayX::Constant(d.layout->grid_size(), value);
    d.min0 = d.max0 = value;
    d.mass0 = d.layout->volume() * value;
    return d;
  }
};

template <typename Scalar>
std::pair<Scalar, Scalar> density_bounds(const DensityField<Scalar>& rho) {
  return {rho.values.minCoeff(), rho.values.maxCoeff()};
}

/// Mollified initial density: spectral low-pass with cutoff radius
/// proportional to 1/delta, then clamp into [delta, rho_star + 1]. As
/// delta -> 0 the filter opens up and the clamp floor drops, so the output
/// converges to the band projection of the input in every grid-L^r norm.
template <typename Scalar>
DensityField<Scalar> mollify_initial_density(const LayoutPtr<Scalar>& layout,
                                             const typename DensityField<Scalar>::ArrayX& rho0,
                                             Scalar delta, Scalar rho_star) {
  if (rho0.size() != layout->grid_size())
    throw LayoutError("mollify_initial_density: sample size does not match layout");
  if (!(delta > Scalar(0)))
    throw ConfigError("mollify_initial_density: delta must be positive");
  if (!(rho_star > Scalar(0)))
    throw ConfigError("mollify_initial_density: rho_star must be positive");
  if ((rho0 < Scalar(0)).any())
    throw DataError("mollify_initial_density: negative density sample");

  auto c = layout->forward(rho0);
  const Scalar ell = Scalar(2) * delta;  // cutoff wavenumber 1/(2 delta)
  for (Index j = 0; j < layout->mode_count(); ++j)
    c[j] *= std::exp(-ell * ell * layout->k_squared(j));
  typename DensityField<Scalar>::ArrayX smooth = layout->inverse(c);
  smooth = smooth.max(delta).min(rho_star + Scalar(1));

  DensityField<Scalar> out;
  out.layout = layout;
  out.values = std::move(smooth);
  out.min0 = out.values.minCoeff();
  out.max0 = out.values.maxCoeff();
  out.mass0 = layout->volume() * out.values.mean();
  return out;
}

namespace detail {

/// Cubic Lagrange weights on the 4-point stencil {-1, 0, 1, 2} at fractional
/// offset a in [0, 1). Exact at a == 0: (0, 1, 0, 0).
template <typename Scalar>
std::array<Scalar, 4> cubic_weights(Scalar a) {
  const Scalar am1 = a - Scalar(1);
  const Scalar am2 = a - Scalar(2);
  const Scalar ap1 = a + Scalar(1);
  return {-a * am1 * am2 / Scalar(6), ap1 * am1 * am2 / Scalar(2),
          -ap1 * a * am2 / Scalar(2), ap1 * a * am1 / Scalar(6)};
}

inline long wrap_index(long i, long n) {
  i %= n;
  return i < 0 ? i + n : i;
}

}  // namespace detail

/// Interpolate grid values at a point given in index coordinates (units of
/// grid spacing), with the result clamped to the local stencil extrema.
template <typename Scalar>
Scalar interpolate_clamped(const SpectralLayout<Scalar>& layout,
                           const typename DensityField<Scalar>::ArrayX& values,
                           const Eigen::Matrix<Scalar, 3, 1>& xg) {
  const long n = layout.n_grid();
  const int d = layout.dim();
  long base[3] = {0, 0, 0};
  std::array<Scalar, 4> w[3];
  for (int a = 0; a < d; ++a) {
    const Scalar g = xg[a] - Scalar(n) * std::floor(xg[a] / Scalar(n));
    const Scalar fl = std::floor(g);
    base[a] = long(fl);
    w[a] = detail::cubic_weights(g - fl);
  }
  Scalar acc = 0;
  Scalar lo = std::numeric_limits<Scalar>::max();
  Scalar hi = std::numeric_limits<Scalar>::lowest();
  const int s2 = d == 3 ? 4 : 1;
  for (int o2 = 0; o2 < s2; ++o2) {
    const long i2 = d == 3 ? detail::wrap_index(base[2] + o2 - 1, n) : 0;
    for (int o1 = 0; o1 < 4; ++o1) {
      const long i1 = detail::wrap_index(base[1] + o1 - 1, n);
      const Scalar w12 = w[1][o1] * (d == 3 ? w[2][o2] : Scalar(1));
      for (int o0 = 0; o0 < 4; ++o0) {
        const long i0 = detail::wrap_index(base[0] + o0 - 1, n);
        const Scalar v = values[layout.grid_index(i0, i1, i2)];
        acc += w[0][o0] * w12 * v;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
  }
  return std::min(std::max(acc, lo), hi);
}

/// Backward characteristic foot point X(t - dt) through the grid point with
/// flat index `gi`, for the time-centered velocity (u_now + u_prev)/2:
/// midpoint rule with one fixed-point correction, second-order accurate.
/// `u_mid_grid` must hold the synthesized centered velocity on the grid.
/// The result is in index coordinates and not yet wrapped.
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 1> trace_foot_index(
    const SpectralLayout<Scalar>& layout,
    const std::vector<typename SpectralLayout<Scalar>::VectorXc>& u_mid_coeff,
    const std::vector<typename SpectralLayout<Scalar>::ArrayX>& u_mid_grid, Index gi,
    Scalar dt) {
  const int d = layout.dim();
  const long n = layout.n_grid();
  const Scalar h = layout.grid_spacing();
  long idx[3] = {0, 0, 0};
  Index rem = gi;
  for (int a = 0; a < d; ++a) {
    idx[a] = long(rem % n);
    rem /= n;
  }
  // first guess: half displacement from the grid-point velocity
  Eigen::Matrix<Scalar, 3, 1> xhalf = Eigen::Matrix<Scalar, 3, 1>::Zero();
  for (int a = 0; a < d; ++a) {
    const Scalar ua = u_mid_grid[a][gi];
    if (!std::isfinite(ua)) throw NumericError("trace_characteristics: non-finite velocity");
    xhalf[a] = layout.grid_coord(idx[a]) - Scalar(0.5) * dt * ua;
  }
  // one correction: re-evaluate the centered velocity at the half point
  std::array<typename SpectralLayout<Scalar>::VectorXc, 3> phases;
  for (int a = 0; a < d; ++a) phases[a] = layout.axis_phases(xhalf[a]);
  Eigen::Matrix<Scalar, 3, 1> foot = Eigen::Matrix<Scalar, 3, 1>::Zero();
  for (int a = 0; a < d; ++a) {
    const Scalar ua = layout.evaluate(u_mid_coeff[a], phases);
    if (!std::isfinite(ua)) throw NumericError("trace_characteristics: non-finite velocity");
    foot[a] = Scalar(idx[a]) - dt * ua / h;
  }
  return foot;
}

/// Foot point in physical coordinates for a single grid point; thin wrapper
/// used by the per-point contract tests.
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 1> trace_characteristics(const VectorField<Scalar>& u_now,
                                                  const VectorField<Scalar>& u_prev,
                                                  Index grid_point, Scalar dt) {
  const auto& L = *u_now.layout;
  std::vector<typename SpectralLayout<Scalar>::VectorXc> mid(L.dim());
  std::vector<typename SpectralLayout<Scalar>::ArrayX> mid_grid(L.dim());
  for (int a = 0; a < L.dim(); ++a) {
    mid[a] = Scalar(0.5) * (u_now.coeff[a] + u_prev.coeff[a]);
    mid_grid[a] = L.inverse(mid[a]);
  }
  auto foot = trace_foot_index(L, mid, mid_grid, grid_point, dt);
  const Scalar n = Scalar(L.n_grid());
  for (int a = 0; a < L.dim(); ++a) {
    Scalar g = foot[a] - n * std::floor(foot[a] / n);
    foot[a] = g * L.grid_spacing();
  }
  return foot;
}

/// Semi-Lagrangian transport of rho from t to t + dt along the time-centered
/// velocity (u_new + u_old)/2. Pure transport by a solenoidal field, so the
/// update is interpolation at the foot point; clamping keeps the output
/// inside [min rho, max rho] of the input exactly.
template <typename Scalar>
DensityField<Scalar> advect_density(const DensityField<Scalar>& rho,
                                    const VectorField<Scalar>& u_new,
                                    const VectorField<Scalar>& u_old, Scalar dt) {
  const auto& L = *rho.layout;
  const int d = L.dim();
  std::vector<typename SpectralLayout<Scalar>::VectorXc> mid(d);
  std::vector<typename SpectralLayout<Scalar>::ArrayX> mid_grid(d);
  for (int a = 0; a < d; ++a) {
    mid[a] = Scalar(0.5) * (u_new.coeff[a] + u_old.coeff[a]);
    mid_grid[a] = L.inverse(mid[a]);
  }
  // validate once up front so the parallel point loop cannot throw
  for (int a = 0; a < d; ++a)
    if (!mid_grid[a].isFinite().all())
      throw NumericError("advect_density: non-finite velocity samples");
  DensityField<Scalar> out = rho;
  parallel_for(L.grid_size(), [&](long gi) {
    const auto foot = trace_foot_index(L, mid, mid_grid, Index(gi), dt);
    out.values[gi] = interpolate_clamped(L, rho.values, foot);
  });
  return out;
}

}  // namespace nsch
