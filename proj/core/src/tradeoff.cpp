#include "gglr/tradeoff.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/QR>

#include "gglr/error.hpp"

namespace gglr {

namespace {

constexpr const char* kModule = "tradeoff";

}  // namespace

double mse_exact(const Vector& eigenvalues, const DenseMatrix& eigenvectors,
                 const Vector& x0, double sigma_z, double mu) {
  if (eigenvectors.rows() != x0.size() ||
      eigenvectors.cols() != eigenvalues.size()) {
    throw Error(ErrorCode::kLengthMismatch, kModule,
                "eigendecomposition does not match the signal");
  }
  const Vector proj = eigenvectors.transpose() * x0;
  const double s2 = sigma_z * sigma_z;
  // Eigenvalues at rounding level are null directions; without this a huge
  // mu would turn 1e-16 noise into shrinkage.
  const double lmax = eigenvalues.size() > 0 ? eigenvalues.cwiseAbs().maxCoeff() : 0.0;
  const double zero_tol = 1e-12 * lmax;
  double total = 0.0;
  for (Index i = 0; i < eigenvalues.size(); ++i) {
    const double lam = eigenvalues[i] > zero_tol ? eigenvalues[i] : 0.0;
    const double ml = mu * lam;
    const double phi = 1.0 / (1.0 + ml);
    const double psi = ml * phi;
    total += psi * psi * proj[i] * proj[i] + s2 * phi * phi;
  }
  return total;
}

SpectralFit fit_from_extremes(double lambda_low, double lambda_high,
                              double rho_high, double sigma_z, Index n,
                              Index low_index) {
  if (!(lambda_low > 1e-12)) {
    throw Error(ErrorCode::kDegenerateSpectrum, kModule,
                "smallest non-null eigenvalue is zero: gradient graph "
                "disconnected");
  }
  if (lambda_high < lambda_low) {
    throw Error(ErrorCode::kInvalidArgument, kModule,
                "largest eigenvalue below smallest");
  }
  if (n <= low_index) {
    throw Error(ErrorCode::kDimensionTooSmall, kModule,
                "spectrum too short to fit");
  }
  SpectralFit fit;
  fit.lambda_low = lambda_low;
  fit.lambda_high = lambda_high;
  fit.rho_high = rho_high;
  fit.sigma_z = sigma_z;
  fit.n = n;
  fit.low_index = low_index;
  fit.b = std::log(lambda_low / lambda_high) /
          std::log(static_cast<double>(low_index) / static_cast<double>(n));
  fit.a = lambda_low / std::pow(static_cast<double>(low_index), fit.b);
  return fit;
}

SpectralFit fit_spectrum(const LinearOperator& op,
                         std::span<const Vector> null_vectors, const Vector& y,
                         double sigma_z, const EigenOptions& options) {
  if (y.size() != op.dim()) {
    throw Error(ErrorCode::kLengthMismatch, kModule, "observation length mismatch");
  }
  // Count independent null vectors for the index offset.
  Index nullity = 0;
  if (!null_vectors.empty()) {
    DenseMatrix z(op.dim(), static_cast<Index>(null_vectors.size()));
    for (std::size_t k = 0; k < null_vectors.size(); ++k) {
      z.col(static_cast<Index>(k)) = null_vectors[k];
    }
    Eigen::ColPivHouseholderQR<DenseMatrix> qr(z);
    qr.setThreshold(1e-10);
    nullity = qr.rank();
  }
  const EigenPairs low = smallest_eigenpairs(op, 1, null_vectors, options);
  const LargestEigenpair high = largest_eigenpair(op, options);
  const double rho = high.value * std::abs(high.vector.dot(y));
  return fit_from_extremes(low.values[0], high.value, rho, sigma_z, op.dim(),
                           nullity + 1);
}

double mse_approx(const SpectralFit& fit, double mu) {
  const double r2 = fit.rho_high * fit.rho_high;
  const double s2 = fit.sigma_z * fit.sigma_z;
  const double num = mu * mu * r2 + s2;
  double total = 0.0;
  for (Index i = fit.low_index; i <= fit.n; ++i) {
    const double d = 1.0 + mu * fit.phi(static_cast<double>(i));
    total += num / (d * d);
  }
  return total;
}

double mse_approx_derivative(const SpectralFit& fit, double mu) {
  const double r2 = fit.rho_high * fit.rho_high;
  const double s2 = fit.sigma_z * fit.sigma_z;
  double total = 0.0;
  for (Index i = fit.low_index; i <= fit.n; ++i) {
    const double phi = fit.phi(static_cast<double>(i));
    const double d = 1.0 + mu * phi;
    total += 2.0 * (mu * r2 - phi * s2) / (d * d * d);
  }
  return total;
}

MuChoice minimize_mu(const SpectralFit& fit) {
  const double lo = std::log(kMuLower);
  const double hi = std::log(kMuUpper);
  constexpr int kScan = 241;
  double bracket_a = 0.0;
  double bracket_b = 0.0;
  bool found = false;
  bool any_negative = false;
  double prev_t = lo;
  double prev_d = mse_approx_derivative(fit, kMuLower);
  if (prev_d < 0.0) any_negative = true;
  for (int s = 1; s < kScan; ++s) {
    const double t = lo + (hi - lo) * s / (kScan - 1);
    const double d = mse_approx_derivative(fit, std::exp(t));
    if (d < 0.0) any_negative = true;
    if (prev_d < 0.0 && d >= 0.0) {
      bracket_a = prev_t;
      bracket_b = t;
      found = true;
      break;
    }
    prev_t = t;
    prev_d = d;
  }
  MuChoice choice;
  if (!found) {
    if (any_negative) {
      choice.mu = kMuUpper;
      choice.warning = "MSE approximation decreasing on the whole range; "
                       "mu set to the upper boundary";
    } else {
      choice.mu = kMuLower;
      choice.warning = "MSE approximation non-decreasing on the whole range; "
                       "mu set to the lower boundary";
    }
    return choice;
  }

  auto f = [&](double t) { return mse_approx(fit, std::exp(t)); };
  const double golden = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = bracket_a;
  double b = bracket_b;
  double c = b - golden * (b - a);
  double d = a + golden * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < 40 && (b - a) > 1e-6; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - golden * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + golden * (b - a);
      fd = f(d);
    }
  }
  // Bisection on the derivative sign; the golden-section interval may have
  // lost the sign change to rounding, so fall back to the scan bracket.
  if (!(mse_approx_derivative(fit, std::exp(a)) < 0.0 &&
        mse_approx_derivative(fit, std::exp(b)) >= 0.0)) {
    a = bracket_a;
    b = bracket_b;
  }
  double mid = 0.5 * (a + b);
  for (int it = 0; it < 200; ++it) {
    mid = 0.5 * (a + b);
    const double mu = std::exp(mid);
    const double dm = mse_approx_derivative(fit, mu);
    if (std::abs(dm) * mu <= 1e-8 * mse_approx(fit, mu)) break;
    if (dm < 0.0) {
      a = mid;
    } else {
      b = mid;
    }
    if (b - a < 1e-15) break;
  }
  choice.mu = std::exp(mid);
  choice.interior = true;
  return choice;
}

double estimate_noise_mad(const Graph& g, const Vector& y) {
  if (y.size() != g.node_count()) {
    throw Error(ErrorCode::kLengthMismatch, kModule, "signal length mismatch");
  }
  if (g.edge_count() == 0) return 0.0;
  std::vector<double> diffs;
  diffs.reserve(static_cast<std::size_t>(g.edge_count()));
  for (const auto& e : g.edges()) diffs.push_back(std::abs(y[e.u] - y[e.v]));
  const auto mid = diffs.begin() + static_cast<std::ptrdiff_t>(diffs.size() / 2);
  std::nth_element(diffs.begin(), mid, diffs.end());
  // A difference of two independent samples has standard deviation sqrt(2) sigma.
  return *mid / (0.6744897501960817 * std::sqrt(2.0));
}

}  // namespace gglr
