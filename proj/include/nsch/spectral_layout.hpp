#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <complex>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "nsch/errors.hpp"

namespace nsch {

using Eigen::Index;

/// Discrete periodic torus: a uniform collocation grid of n_grid points per
/// axis carrying a Galerkin band of Fourier modes |k_i| <= m_cut per axis.
///
/// Coefficients follow the convention f(x) = sum_k c_k exp(i kappa.x) with
/// kappa = 2*pi*k/extent, so a constant field has c_0 = 1 and cos(x1) on the
/// default 2*pi box has c = 1/2 at k = (+-1, 0, ...). With the grid-mean
/// pairing <f,g> = (1/N) sum_x f g the retained exponentials are orthonormal,
/// which makes density-weighted mass operators the identity when rho == 1.
///
/// The grid is sized for the two-thirds rule, 3*(2*m_cut+1) <= 2*n_grid, so
/// quadratic collocation products are alias-free on the retained band.
template <typename Scalar = double>
class SpectralLayout {
 public:
  using Complex = std::complex<Scalar>;
  using ArrayX = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
  using VectorXc = Eigen::Vector<Complex, Eigen::Dynamic>;
  using MatrixXc = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic>;

  SpectralLayout(int dim, int n_grid, int m_cut,
                 Scalar extent = Scalar(2) * std::numbers::pi_v<Scalar>)
      : dim_(dim), n_grid_(n_grid), m_cut_(m_cut), extent_(extent) {
    if (dim != 2 && dim != 3)
      throw LayoutError("SpectralLayout: dim must be 2 or 3, got " + std::to_string(dim));
    if (m_cut < 0) throw LayoutError("SpectralLayout: m_cut must be >= 0");
    if (extent <= Scalar(0)) throw LayoutError("SpectralLayout: extent must be positive");
    if (2 * n_grid < 3 * (2 * m_cut + 1))
      throw LayoutError("SpectralLayout: n_grid=" + std::to_string(n_grid) +
                        " violates the two-thirds rule for m_cut=" + std::to_string(m_cut) +
                        " (need 2*n_grid >= 3*(2*m_cut+1))");
    modes_per_axis_ = 2 * m_cut + 1;
    grid_size_ = 1;
    mode_count_ = 1;
    for (int a = 0; a < dim_; ++a) {
      grid_size_ *= n_grid_;
      mode_count_ *= modes_per_axis_;
    }
    build_transform_tables();
  }

  int dim() const { return dim_; }
  int n_grid() const { return n_grid_; }
  int m_cut() const { return m_cut_; }
  Scalar extent() const { return extent_; }
  Index grid_size() const { return grid_size_; }
  Index mode_count() const { return mode_count_; }
  int modes_per_axis() const { return modes_per_axis_; }

  Scalar grid_spacing() const { return extent_ / Scalar(n_grid_); }
  Scalar volume() const {
    Scalar v = Scalar(1);
    for (int a = 0; a < dim_; ++a) v *= extent_;
    return v;
  }

  /// Grid coordinate of index i along any axis.
  Scalar grid_coord(Index i) const { return extent_ * Scalar(i) / Scalar(n_grid_); }

  /// Flat grid index, axis 0 fastest (column-major).
  Index grid_index(Index i0, Index i1, Index i2 = 0) const {
    return i0 + Index(n_grid_) * (i1 + Index(n_grid_) * i2);
  }

  /// Integer mode numbers of flat mode index j, axis 0 fastest.
  std::array<int, 3> mode(Index j) const {
    std::array<int, 3> k{0, 0, 0};
    for (int a = 0; a < dim_; ++a) {
      k[a] = int(j % modes_per_axis_) - m_cut_;
      j /= modes_per_axis_;
    }
    return k;
  }

  Index mode_index(int k0, int k1, int k2 = 0) const {
    Index j = 0;
    const int k[3] = {k0, k1, k2};
    Index stride = 1;
    for (int a = 0; a < dim_; ++a) {
      j += stride * Index(k[a] + m_cut_);
      stride *= modes_per_axis_;
    }
    return j;
  }

  /// Flat index of the negated mode -k; the retained set is closed under
  /// negation so real fields can carry conjugate-symmetric coefficients.
  Index negate_index(Index j) const {
    Index out = 0;
    Index stride = 1;
    for (int a = 0; a < dim_; ++a) {
      const Index ja = j % modes_per_axis_;
      out += stride * (Index(modes_per_axis_) - 1 - ja);
      j /= modes_per_axis_;
      stride *= modes_per_axis_;
    }
    return out;
  }

  /// Physical wavenumber vector kappa = 2*pi*k/extent of mode j.
  Eigen::Matrix<Scalar, 3, 1> wavenumber(Index j) const {
    const auto k = mode(j);
    const Scalar f = Scalar(2) * std::numbers::pi_v<Scalar> / extent_;
    return {f * Scalar(k[0]), f * Scalar(k[1]), f * Scalar(k[2])};
  }

  Scalar k_squared(Index j) const { return wavenumber(j).squaredNorm(); }

  /// Eigenvalue of -Laplacian on mode j (the stiffness diagonal of the weak
  /// form (grad w_j, grad w_l)).
  Scalar stiffness_eigenvalue(Index j) const { return k_squared(j); }

  /// Eigenvalue of A = -Laplacian + I on mode j.
  Scalar helmholtz_eigenvalue(Index j) const { return k_squared(j) + Scalar(1); }

  // ---- transforms -------------------------------------------------------

  /// Analysis: grid samples -> retained-band coefficients. Products formed on
  /// the grid are implicitly dealiased by restriction to the band.
  VectorXc forward(const Eigen::Ref<const ArrayX>& grid) const {
    if (grid.size() != grid_size_)
      throw LayoutError("forward: field size does not match layout grid");
    VectorXc work = grid.matrix().template cast<Complex>();
    transform_all_axes(work, anal_);
    return work;
  }

  /// Synthesis: coefficients -> real grid samples (real part; the imaginary
  /// part vanishes for conjugate-symmetric input).
  ArrayX inverse(const Eigen::Ref<const VectorXc>& coeff) const {
    if (coeff.size() != mode_count_)
      throw LayoutError("inverse: coefficient size does not match layout band");
    VectorXc work = coeff;
    transform_all_axes(work, synth_);
    return work.real().array();
  }

  // ---- scattered evaluation ---------------------------------------------

  /// Per-axis phase vector exp(i kappa_j x) used to evaluate a coefficient
  /// field at an arbitrary (off-grid) coordinate.
  VectorXc axis_phases(Scalar x) const {
    VectorXc ph(modes_per_axis_);
    const Scalar f = Scalar(2) * std::numbers::pi_v<Scalar> / extent_;
    for (int j = 0; j < modes_per_axis_; ++j)
      ph[j] = std::polar(Scalar(1), f * Scalar(j - m_cut_) * x);
    return ph;
  }

  /// Evaluate sum_k c_k exp(i kappa.x) given precomputed axis phases.
  Scalar evaluate(const Eigen::Ref<const VectorXc>& coeff,
                  const std::array<VectorXc, 3>& phases) const {
    const int M1 = modes_per_axis_;
    Complex val(0, 0);
    if (dim_ == 2) {
      Eigen::Map<const MatrixXc> C(coeff.data(), M1, M1);
      val = (phases[0].transpose() * (C * phases[1]))(0, 0);
    } else {
      for (int j2 = 0; j2 < M1; ++j2) {
        Eigen::Map<const MatrixXc> C(coeff.data() + Index(j2) * M1 * M1, M1, M1);
        val += phases[2][j2] * (phases[0].transpose() * (C * phases[1]))(0, 0);
      }
    }
    return val.real();
  }

  Scalar evaluate_at(const Eigen::Ref<const VectorXc>& coeff,
                     const Eigen::Matrix<Scalar, 3, 1>& point) const {
    std::array<VectorXc, 3> ph;
    for (int a = 0; a < dim_; ++a) ph[a] = axis_phases(point[a]);
    return evaluate(coeff, ph);
  }

 private:
  void build_transform_tables() {
    const Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
    const int M1 = modes_per_axis_;
    anal_.resize(M1, n_grid_);
    synth_.resize(n_grid_, M1);
    // Rows for k < 0 mirror the conjugate of k > 0 exactly, so analysis of a
    // real field is conjugate-symmetric down to the last bit of each entry.
    for (int k = 0; k <= m_cut_; ++k) {
      for (int i = 0; i < n_grid_; ++i) {
        const Scalar angle = two_pi * Scalar(k) * Scalar(i) / Scalar(n_grid_);
        const Complex e = std::polar(Scalar(1), angle);  // exp(+i kappa_k x_i)
        synth_(i, m_cut_ + k) = e;
        synth_(i, m_cut_ - k) = std::conj(e);
        anal_(m_cut_ + k, i) = std::conj(e) / Scalar(n_grid_);
        anal_(m_cut_ - k, i) = e / Scalar(n_grid_);
      }
    }
  }

  /// Apply the per-axis matrix `op` (out_dim x in_dim) along every axis of
  /// the flattened column-major tensor held in `work`.
  void transform_all_axes(VectorXc& work, const MatrixXc& op) const {
    const Index in_dim = op.cols();
    const Index out_dim = op.rows();
    std::array<Index, 3> sz{in_dim, in_dim, dim_ == 3 ? in_dim : 1};
    for (int axis = 0; axis < dim_; ++axis) {
      Index inner = 1;
      for (int a = 0; a < axis; ++a) inner *= sz[a];
      Index outer = 1;
      for (int a = axis + 1; a < dim_; ++a) outer *= sz[a];
      VectorXc next(inner * out_dim * outer);
      for (Index o = 0; o < outer; ++o) {
        Eigen::Map<const MatrixXc> x(work.data() + o * inner * sz[axis], inner, sz[axis]);
        Eigen::Map<MatrixXc> y(next.data() + o * inner * out_dim, inner, out_dim);
        y.noalias() = x * op.transpose();
      }
      sz[axis] = out_dim;
      work.swap(next);
    }
  }

  int dim_;
  int n_grid_;
  int m_cut_;
  Scalar extent_;
  int modes_per_axis_ = 0;
  Index grid_size_ = 0;
  Index mode_count_ = 0;
  MatrixXc anal_;   // modes_per_axis x n_grid
  MatrixXc synth_;  // n_grid x modes_per_axis
};

template <typename Scalar>
using LayoutPtr = std::shared_ptr<const SpectralLayout<Scalar>>;

template <typename Scalar = double>
LayoutPtr<Scalar> make_layout(int dim, int n_grid, int m_cut,
                              Scalar extent = Scalar(2) * std::numbers::pi_v<Scalar>) {
  return std::make_shared<const SpectralLayout<Scalar>>(dim, n_grid, m_cut, extent);
}

}  // namespace nsch
