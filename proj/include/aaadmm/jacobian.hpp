#pragma once

#include <complex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "aaadmm/fixed_point.hpp"
#include "aaadmm/problems.hpp"

namespace aaadmm {

struct RealSpectrumStats {
  double sigma_min = 0.0;
  double sigma_max = 0.0;
};

struct ComplexSpectrumStats {
  std::optional<double> mu_plus;  // largest nonnegative real eigenvalue, if any
  double rho = 0.0;
};

/// Complex eigenvalue multiset of a dense real matrix with its
/// classification. The spectrum is Real when every eigenvalue satisfies
/// |Im| <= imag_tolerance * max(1, spectral_radius).
struct Spectrum {
  std::vector<std::complex<double>> eigenvalues;
  double spectral_radius = 0.0;
  double imag_tolerance = 1e-8;
  std::variant<RealSpectrumStats, ComplexSpectrumStats> classification;

  bool is_real() const { return std::holds_alternative<RealSpectrumStats>(classification); }
  const RealSpectrumStats& real_stats() const { return std::get<RealSpectrumStats>(classification); }
  const ComplexSpectrumStats& complex_stats() const {
    return std::get<ComplexSpectrumStats>(classification);
  }
};

/// One-sided forward difference Jacobian: column j is
/// (q(x* + h e_j) - q(x*)) / h. Set `central` for the second-order
/// variant used by the step-size robustness check. Columns are evaluated
/// concurrently with deterministic assembly; threads = 0 picks the
/// hardware default.
Matrix fd_jacobian(const FixedPointMap& map, const Vector& x_star, double h, bool central = false,
                   int threads = 0);

/// Closed-form piecewise Jacobian of the iteration map at `fpi_state`
/// (ridge, scalar_l1_demo, lasso, total_variation). Throws when any prox
/// argument sits within 1e-10 of its threshold, where the map is not
/// differentiable.
Matrix analytic_jacobian(const ProblemInstance& instance, const Vector& fpi_state);

/// Full eigenvalue multiset of a dense real (nonsymmetric) matrix via
/// Hessenberg reduction and the shifted-QR iteration; throws if the
/// eigeniteration fails to converge.
Spectrum spectrum_of(const Matrix& matrix, double imag_tolerance = 1e-8);

/// Classify an explicitly given eigenvalue multiset (synthetic spectra,
/// CSV round-trips).
Spectrum spectrum_from_eigenvalues(std::vector<std::complex<double>> eigenvalues,
                                   double imag_tolerance = 1e-8);

/// CSV with header `re,im`, one eigenvalue per row, 17 significant digits.
std::string spectrum_to_csv(const Spectrum& spectrum);
Spectrum spectrum_from_csv(const std::string& text, double imag_tolerance = 1e-8);
void write_spectrum_csv(const Spectrum& spectrum, const std::string& path);
Spectrum read_spectrum_csv(const std::string& path, double imag_tolerance = 1e-8);

}  // namespace aaadmm
