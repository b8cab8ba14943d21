#pragma once

#include <cmath>
#include <span>
#include <string>

#include "gglr/graph.hpp"
#include "gglr/linear_operator.hpp"
#include "gglr/solvers.hpp"
#include "gglr/types.hpp"

namespace gglr {

/// Power-law model phi(i) = a i^b of the regularizer spectrum, pinned to the
/// smallest non-null eigenvalue (index `low_index`, 1-based) and the largest
/// eigenvalue (index n).
struct SpectralFit {
  double a = 0.0;
  double b = 0.0;
  double lambda_low = 0.0;
  double lambda_high = 0.0;
  double rho_high = 0.0;
  double sigma_z = 0.0;
  Index n = 0;
  Index low_index = 3;

  double phi(double i) const { return a * std::pow(i, b); }
};

/// Exact expected squared error of the denoiser (I + mu L)^{-1} y for
/// y = x0 + z, z ~ N(0, sigma_z^2 I), given the full eigendecomposition of
/// L (columns of `eigenvectors`). Eigenvalues below 1e-12 of the largest
/// count as zero.
double mse_exact(const Vector& eigenvalues, const DenseMatrix& eigenvectors,
                 const Vector& x0, double sigma_z, double mu);

SpectralFit fit_from_extremes(double lambda_low, double lambda_high,
                              double rho_high, double sigma_z, Index n,
                              Index low_index = 3);

/// Fits the spectrum of `op` from its extreme eigenvalues. `null_vectors`
/// span the operator's null space; the smallest eigenvalue outside it
/// becomes lambda_low. rho_high = lambda_high |v_high^T y| uses the
/// observation in place of the unknown clean signal.
SpectralFit fit_spectrum(const LinearOperator& op,
                         std::span<const Vector> null_vectors, const Vector& y,
                         double sigma_z, const EigenOptions& options = {});

/// sum_{i=low}^{n} (mu^2 rho^2 + sigma^2) / (1 + mu phi(i))^2.
double mse_approx(const SpectralFit& fit, double mu);
double mse_approx_derivative(const SpectralFit& fit, double mu);

inline constexpr double kMuLower = 1e-8;
inline constexpr double kMuUpper = 1e4;

struct MuChoice {
  double mu = 0.0;
  bool interior = false;
  std::string warning;  // set when the minimum sits on a boundary
};

/// Minimizes mse_approx over [kMuLower, kMuUpper]: a derivative-sign scan
/// brackets the minimum, golden-section search on log(mu) narrows it and
/// bisection on the derivative sign finishes.
MuChoice minimize_mu(const SpectralFit& fit);

/// Median-absolute-deviation noise estimate from edge differences. Never
/// applied automatically.
double estimate_noise_mad(const Graph& g, const Vector& y);

}  // namespace gglr
