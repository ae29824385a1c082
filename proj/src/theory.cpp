#include "aaadmm/theory.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <future>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "text_util.hpp"

namespace aaadmm {

std::string to_string(OptimalKind kind) {
  switch (kind) {
    case OptimalKind::exact_closed_form: return "exact_closed_form";
    case OptimalKind::lower_bound_equality_check: return "lower_bound_equality_check";
    case OptimalKind::lower_bound_only: return "lower_bound_only";
    case OptimalKind::grid_optimum: return "grid_optimum";
  }
  throw std::logic_error("unknown OptimalKind");
}

namespace {

using Complex = std::complex<double>;

// Stable complex quadratic: roots of lambda^2 + b lambda + c.
void quadratic_roots(Complex b, Complex c, Complex out[2]) {
  Complex s = std::sqrt(b * b - 4.0 * c);
  if (std::real(std::conj(b) * s) < 0.0) s = -s;  // avoid cancellation in b + s
  Complex q = -0.5 * (b + s);
  out[0] = q;
  out[1] = std::abs(q) > 0.0 ? c / q : Complex(0.0, 0.0);
}

// Monic polynomial coefficients (ascending powers, without the leading 1)
// of the window-m characteristic relation for a single eigenvalue mu.
void characteristic_coeffs(Complex mu, const Eigen::VectorXd& beta, std::vector<Complex>& coeffs) {
  const int m = static_cast<int>(beta.size());
  double beta_sum = beta.sum();
  coeffs.assign(m + 1, Complex(0, 0));
  coeffs[m] = -(1.0 + beta_sum) * mu;  // coefficient of lambda^m
  for (int i = 1; i <= m; ++i) coeffs[m - i] = beta[i - 1] * mu;
}

double max_root_modulus(Complex mu, const Eigen::VectorXd& beta) {
  const int m = static_cast<int>(beta.size());
  if (m == 1) {
    Complex roots[2];
    quadratic_roots(-(1.0 + beta[0]) * mu, beta[0] * mu, roots);
    return std::max(std::abs(roots[0]), std::abs(roots[1]));
  }
  std::vector<Complex> coeffs;
  characteristic_coeffs(mu, beta, coeffs);
  const int d = m + 1;
  Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(d, d);
  for (int i = 1; i < d; ++i) comp(i, i - 1) = 1.0;
  for (int i = 0; i < d; ++i) comp(i, d - 1) = -coeffs[i];
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(comp, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("lambda_roots: companion eigeniteration failed");
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

// Distinct eigenvalues from the closed upper half plane; conjugates share
// root moduli because the characteristic coefficients are real in beta.
std::vector<Complex> distinct_upper_half(const Spectrum& spectrum) {
  std::vector<Complex> mus;
  mus.reserve(spectrum.eigenvalues.size());
  for (const auto& mu : spectrum.eigenvalues)
    if (mu.imag() >= 0.0) mus.push_back(mu);
  std::sort(mus.begin(), mus.end(), [](const Complex& a, const Complex& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  mus.erase(std::unique(mus.begin(), mus.end()), mus.end());
  return mus;
}

double beta_star_for(double mu) {
  double s = std::sqrt(1.0 - mu);
  return (1.0 - s) / (1.0 + s);
}

}  // namespace

std::vector<Complex> lambda_roots(Complex mu, const Eigen::VectorXd& beta) {
  const int m = static_cast<int>(beta.size());
  if (m < 1 || m > 3) throw std::invalid_argument("lambda_roots: window size must be 1, 2 or 3");
  if (m == 1) {
    Complex roots[2];
    quadratic_roots(-(1.0 + beta[0]) * mu, beta[0] * mu, roots);
    return {roots[0], roots[1]};
  }
  std::vector<Complex> coeffs;
  characteristic_coeffs(mu, beta, coeffs);
  const int d = m + 1;
  Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(d, d);
  for (int i = 1; i < d; ++i) comp(i, i - 1) = 1.0;
  for (int i = 0; i < d; ++i) comp(i, d - 1) = -coeffs[i];
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(comp, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("lambda_roots: companion eigeniteration failed");
  std::vector<Complex> roots(d);
  for (int i = 0; i < d; ++i) roots[i] = solver.eigenvalues()[i];
  return roots;
}

double s_mu(double mu, double beta) {
  double disc = (1.0 + beta) * (1.0 + beta) * mu * mu - 4.0 * beta * mu;
  if (disc >= 0.0) {
    double r = std::sqrt(disc);
    double sum = (1.0 + beta) * mu;
    return std::max(std::abs(sum + r), std::abs(sum - r)) / 2.0;
  }
  return std::sqrt(beta * mu);  // conjugate pair, |lambda|^2 = beta*mu
}

std::pair<double, double> optimal_beta_single_mu(double mu) {
  if (mu == 0.0) return {0.0, 0.0};
  if (mu >= 1.0) return {-1.0, std::sqrt(mu)};
  double s = std::sqrt(1.0 - mu);
  double beta = (1.0 - s) / (1.0 + s);
  return {beta, mu > 0.0 ? 1.0 - s : s - 1.0};
}

CircleParams circle_params(double beta) {
  if (beta == -1.0) throw std::invalid_argument("circle_params: beta = -1 degenerates the circle");
  double c = beta / (1.0 + beta);
  return {c, std::abs(c)};
}

OptimalSAAResult optimal_saa1(const Spectrum& spectrum) {
  if (spectrum.eigenvalues.empty()) throw std::invalid_argument("optimal_saa1: empty spectrum");

  OptimalSAAResult result;
  result.beta.resize(1);

  if (spectrum.is_real()) {
    if (spectrum.spectral_radius >= 1.0)
      throw std::runtime_error("optimal_saa1: spectral radius >= 1 is out of domain");
    const auto& stats = spectrum.real_stats();
    const double smin = stats.sigma_min;
    const double smax = stats.sigma_max;
    result.kind = OptimalKind::exact_closed_form;

    if (smin >= 0.0) {
      result.beta[0] = beta_star_for(smax);
      result.factor = 1.0 - std::sqrt(1.0 - smax);
      result.case_label = "real_nonneg";
    } else if (smax <= 0.0) {
      result.beta[0] = beta_star_for(smin);
      result.factor = std::sqrt(1.0 - smin) - 1.0;
      result.case_label = "real_nonpos";
    } else if (smax == -smin) {
      result.beta[0] = 0.0;
      result.factor = smax;
      result.case_label = "mixed_a";
    } else if (smax > -smin) {
      double beta_p = beta_star_for(smax);
      double cross = (-(1.0 + beta_p) * smin +
                      std::sqrt((1.0 + beta_p) * (1.0 + beta_p) * smin * smin -
                                4.0 * beta_p * smin)) /
                     2.0;
      double value_p = 1.0 - std::sqrt(1.0 - smax);
      if (cross <= value_p) {
        result.beta[0] = beta_p;
        result.factor = value_p;
        result.case_label = "mixed_b1";
      } else {
        double mp = (smax - smin) / std::sqrt(-2.0 * smax * smin * (smax + smin));
        double root = mp - std::sqrt(std::max(0.0, mp * mp - 4.0));
        double beta = root * root / 4.0;
        double disc = std::max(0.0, (1.0 + beta) * (1.0 + beta) * smax * smax - 4.0 * beta * smax);
        result.beta[0] = beta;
        result.factor = ((1.0 + beta) * smax + std::sqrt(disc)) / 2.0;
        result.case_label = "mixed_b2";
      }
    } else {
      double beta_m = beta_star_for(smin);
      double cross = ((1.0 + beta_m) * smax +
                      std::sqrt((1.0 + beta_m) * (1.0 + beta_m) * smax * smax -
                                4.0 * beta_m * smax)) /
                     2.0;
      double value_m = std::sqrt(1.0 - smin) - 1.0;
      if (cross <= value_m) {
        result.beta[0] = beta_m;
        result.factor = value_m;
        result.case_label = "mixed_c1";
      } else {
        double mm = (smax - smin) / std::sqrt(2.0 * smax * smin * (smax + smin));
        double root = std::sqrt(mm * mm + 4.0) - mm;
        double beta = -root * root / 4.0;
        double disc = std::max(0.0, (1.0 + beta) * (1.0 + beta) * smax * smax - 4.0 * beta * smax);
        result.beta[0] = beta;
        result.factor = ((1.0 + beta) * smax + std::sqrt(disc)) / 2.0;
        result.case_label = "mixed_c2";
      }
    }
    result.circle = circle_params(result.beta[0]);
    return result;
  }

  // Complex spectrum: lower-bound coefficient from the spectral radius.
  const auto& stats = spectrum.complex_stats();
  const double rho = stats.rho;
  if (rho >= 1.0) throw std::runtime_error("optimal_saa1: spectral radius >= 1 is out of domain");

  const double bound = 1.0 - std::sqrt(1.0 - rho);
  result.beta[0] = beta_star_for(rho);
  result.circle = circle_params(result.beta[0]);
  double measured = rho_saa(spectrum, result.beta);
  result.factor = measured;

  bool radius_is_real =
      stats.mu_plus && (rho - *stats.mu_plus) <= 1e-8 * std::max(1.0, rho);
  if (radius_is_real && std::abs(measured - bound) <= 1e-6) {
    result.kind = OptimalKind::lower_bound_equality_check;
    result.case_label = "complex_equality";
  } else if (radius_is_real) {
    // Mapped complex eigenvalues leave the circle and dominate; the bound
    // is strict and the coefficient is not claimed optimal.
    result.kind = OptimalKind::lower_bound_only;
    result.case_label = "complex_bound_exceeded";
  } else {
    result.kind = OptimalKind::lower_bound_only;
    result.case_label = "complex_no_real_radius";
  }
  return result;
}

Matrix companion_psi(const Matrix& q_prime, const Eigen::VectorXd& beta) {
  if (q_prime.rows() != q_prime.cols())
    throw std::invalid_argument("companion_psi: q' must be square");
  const int m = static_cast<int>(beta.size());
  if (m < 1) throw std::invalid_argument("companion_psi: window size must be >= 1");
  const Eigen::Index n = q_prime.rows();

  Matrix psi = Matrix::Zero((m + 1) * n, (m + 1) * n);
  psi.block(0, 0, n, n) = (1.0 + beta.sum()) * q_prime;
  for (int j = 1; j <= m; ++j) psi.block(0, j * n, n, n) = -beta[j - 1] * q_prime;
  for (int i = 1; i <= m; ++i) psi.block(i * n, (i - 1) * n, n, n).setIdentity();
  return psi;
}

double rho_saa(const Spectrum& spectrum, const Eigen::VectorXd& beta) {
  const int m = static_cast<int>(beta.size());
  if (m < 1 || m > 3) throw std::invalid_argument("rho_saa: window size must be 1, 2 or 3");
  double worst = 0.0;
  for (const auto& mu : distinct_upper_half(spectrum))
    worst = std::max(worst, max_root_modulus(mu, beta));
  return worst;
}

OptimalSAAResult brute_force_sweep(const Spectrum& spectrum, int m, double lo, double hi,
                                   double step, int threads) {
  if (m != 2 && m != 3) throw std::invalid_argument("brute_force_sweep: m must be 2 or 3");
  if (!(lo < hi)) throw std::invalid_argument("brute_force_sweep: requires lo < hi");
  if (!(step > 0)) throw std::invalid_argument("brute_force_sweep: step must be positive");

  std::vector<double> grid;
  for (int i = 0;; ++i) {
    double v = lo + i * step;
    if (v > hi + 1e-9 * step) break;
    grid.push_back(std::min(v, hi));
  }
  if (grid.empty()) throw std::invalid_argument("brute_force_sweep: empty grid");

  const auto mus = distinct_upper_half(spectrum);
  const int npts = static_cast<int>(grid.size());

  struct Best {
    double factor = std::numeric_limits<double>::infinity();
    Eigen::VectorXd beta;
  };

  auto eval_row = [&](int i0) {
    Best best;
    Eigen::VectorXd beta(m);
    beta[0] = grid[i0];
    for (int i1 = 0; i1 < npts; ++i1) {
      beta[1] = grid[i1];
      for (int i2 = 0; i2 < (m == 3 ? npts : 1); ++i2) {
        if (m == 3) beta[2] = grid[i2];
        double worst = 0.0;
        for (const auto& mu : mus) {
          worst = std::max(worst, max_root_modulus(mu, beta));
          if (worst >= best.factor) break;
        }
        if (worst < best.factor) {
          best.factor = worst;
          best.beta = beta;
        }
      }
    }
    return best;
  };

  int workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min(workers, npts));

  std::vector<Best> row_best(npts);
  if (workers == 1) {
    for (int i0 = 0; i0 < npts; ++i0) row_best[i0] = eval_row(i0);
  } else {
    std::atomic<int> next_row{0};
    auto worker = [&]() {
      while (true) {
        int i0 = next_row.fetch_add(1);
        if (i0 >= npts) break;
        row_best[i0] = eval_row(i0);
      }
    };
    std::vector<std::future<void>> tasks;
    for (int w = 0; w < workers; ++w) tasks.push_back(std::async(std::launch::async, worker));
    for (auto& t : tasks) t.get();
  }

  // Deterministic reduction: rows merge in lexicographic-beta order and
  // strict inequality keeps the earliest (lexicographically smallest) tie.
  Best best;
  for (const auto& cand : row_best) {
    if (cand.factor < best.factor) best = cand;
  }

  OptimalSAAResult result;
  result.beta = best.beta;
  result.factor = best.factor;
  result.kind = OptimalKind::grid_optimum;
  result.case_label = "grid";
  return result;
}

std::string analysis_summary(const Spectrum& spectrum, const OptimalSAAResult& result) {
  std::ostringstream out;
  out << "eigenvalue_count = " << spectrum.eigenvalues.size() << '\n';
  out << "spectral_radius = " << detail::fmt_double(spectrum.spectral_radius) << '\n';
  if (spectrum.is_real()) {
    out << "classification = real\n";
    out << "sigma_min = " << detail::fmt_double(spectrum.real_stats().sigma_min) << '\n';
    out << "sigma_max = " << detail::fmt_double(spectrum.real_stats().sigma_max) << '\n';
  } else {
    out << "classification = complex\n";
    const auto& stats = spectrum.complex_stats();
    out << "mu_plus = " << (stats.mu_plus ? detail::fmt_double(*stats.mu_plus) : "none") << '\n';
  }
  out << "branch = " << result.case_label << '\n';
  out << "m = " << result.beta.size() << '\n';
  out << "beta =";
  for (Eigen::Index i = 0; i < result.beta.size(); ++i)
    out << ' ' << detail::fmt_double(result.beta[i]);
  out << '\n';
  out << "predicted_factor = " << detail::fmt_double(result.factor) << '\n';
  out << "provenance = " << to_string(result.kind) << '\n';
  if (result.circle) {
    out << "circle_center = " << detail::fmt_double(result.circle->center) << '\n';
    out << "circle_radius = " << detail::fmt_double(result.circle->radius) << '\n';
  }
  return out.str();
}

SAAPlan plan_from_result(const OptimalSAAResult& result) {
  SAAPlan plan;
  plan.m = static_cast<int>(result.beta.size());
  plan.beta = result.beta;
  plan.predicted_factor = result.factor;
  switch (result.kind) {
    case OptimalKind::exact_closed_form:
    case OptimalKind::lower_bound_equality_check:
      plan.provenance = BetaProvenance::closed_form;
      break;
    case OptimalKind::lower_bound_only:
      plan.provenance = BetaProvenance::lower_bound_only;
      break;
    case OptimalKind::grid_optimum:
      plan.provenance = BetaProvenance::grid_sweep;
      break;
  }
  return plan;
}

}  // namespace aaadmm
