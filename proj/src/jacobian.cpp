#include "aaadmm/jacobian.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <future>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "text_util.hpp"

namespace aaadmm {

Matrix fd_jacobian(const FixedPointMap& map, const Vector& x_star, double h, bool central,
                   int threads) {
  if (!(h > 0)) throw std::invalid_argument("fd_jacobian: step size must be positive");
  if (x_star.size() != map.dimension)
    throw std::invalid_argument("fd_jacobian: x_star dimension does not match map");

  const Eigen::Index n = map.dimension;
  Matrix jac(n, n);
  Vector q0;
  if (!central) {
    q0 = map.evaluate(x_star);
    if (!q0.allFinite()) throw std::runtime_error("fd_jacobian: map not finite at base point");
  }

  std::atomic<Eigen::Index> bad_column{-1};
  auto compute_range = [&](Eigen::Index begin, Eigen::Index end) {
    Vector probe = x_star;
    for (Eigen::Index j = begin; j < end; ++j) {
      probe[j] = x_star[j] + h;
      Vector qp = map.evaluate(probe);
      if (central) {
        probe[j] = x_star[j] - h;
        Vector qm = map.evaluate(probe);
        jac.col(j) = (qp - qm) / (2.0 * h);
      } else {
        jac.col(j) = (qp - q0) / h;
      }
      probe[j] = x_star[j];
      if (!jac.col(j).allFinite()) {
        bad_column = j;
        return;
      }
    }
  };

  int workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min<int>(workers, static_cast<int>(n)));
  if (workers == 1) {
    compute_range(0, n);
  } else {
    std::vector<std::future<void>> tasks;
    Eigen::Index chunk = (n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      Eigen::Index begin = w * chunk;
      Eigen::Index end = std::min(n, begin + chunk);
      if (begin >= end) break;
      tasks.push_back(std::async(std::launch::async, compute_range, begin, end));
    }
    for (auto& t : tasks) t.get();
  }
  if (bad_column >= 0)
    throw std::runtime_error("fd_jacobian: non-finite map output probing column " +
                             std::to_string(bad_column.load()));
  return jac;
}

namespace {

// diag(active) selector from the prox argument w against a threshold;
// throws at components too close to the kink to pick a branch.
std::vector<bool> select_branches(const Vector& w, double threshold) {
  std::vector<bool> active(w.size());
  for (Eigen::Index j = 0; j < w.size(); ++j) {
    if (std::abs(std::abs(w[j]) - threshold) < 1e-10)
      throw std::runtime_error(
          "analytic_jacobian: component " + std::to_string(j) +
          " sits on a prox threshold; the iteration map is not differentiable here");
    active[j] = std::abs(w[j]) > threshold;
  }
  return active;
}

// Assemble [diag(a) W; (I - diag(a)) W] from W = [W_z | W_u].
Matrix piecewise_blocks(const Matrix& w_block, const std::vector<bool>& active) {
  const Eigen::Index h = w_block.rows();
  Matrix jac = Matrix::Zero(2 * h, 2 * h);
  for (Eigen::Index i = 0; i < h; ++i) {
    if (active[i])
      jac.row(i) = w_block.row(i);
    else
      jac.row(h + i) = w_block.row(i);
  }
  return jac;
}

}  // namespace

Matrix analytic_jacobian(const ProblemInstance& instance, const Vector& fpi_state) {
  if (fpi_state.size() != fpi_dimension(instance))
    throw std::invalid_argument("analytic_jacobian: state dimension mismatch");
  const double rho = instance.penalty_rho;

  switch (instance.kind) {
    case ProblemKind::ridge: {
      const Matrix& A = instance.data_matrix;
      const Eigen::Index n = A.cols();
      const double lam = instance.reg_lambda;
      Matrix normal = A.transpose() * A;
      normal.diagonal().array() += rho;
      Eigen::LLT<Matrix> llt(normal);
      Matrix inv = llt.solve(Matrix::Identity(n, n));
      Matrix m = (rho * (rho - 2.0 * lam) / (rho + 2.0 * lam)) * inv;
      m.diagonal().array() += 2.0 * lam / (rho + 2.0 * lam);
      return m;
    }
    case ProblemKind::lasso:
    case ProblemKind::scalar_l1_demo: {
      const Matrix& A = instance.data_matrix;
      const Eigen::Index n = A.cols();
      Matrix normal = A.transpose() * A;
      normal.diagonal().array() += rho;
      Eigen::LLT<Matrix> llt(normal);
      Matrix r = llt.solve(Matrix::Identity(n, n));

      Vector z = fpi_state.head(n), u = fpi_state.tail(n);
      Vector x = llt.solve(A.transpose() * instance.rhs + rho * (z - u));
      Vector w = x + u;
      auto active = select_branches(w, instance.reg_lambda / rho);

      Matrix w_block(n, 2 * n);
      w_block.leftCols(n) = rho * r;
      w_block.rightCols(n) = -rho * r;
      w_block.rightCols(n).diagonal().array() += 1.0;
      return piecewise_blocks(w_block, active);
    }
    case ProblemKind::total_variation: {
      const Eigen::Index n = instance.rhs.size();
      const Eigen::Index h = n - 1;
      Matrix d = Matrix::Zero(h, n);
      for (Eigen::Index i = 0; i < h; ++i) {
        d(i, i) = -1.0;
        d(i, i + 1) = 1.0;
      }
      Matrix normal = Matrix::Identity(n, n) + rho * d.transpose() * d;
      Eigen::LLT<Matrix> llt(normal);
      Matrix drdt = d * llt.solve(d.transpose());  // D (I + rho D^T D)^{-1} D^T

      Vector z = fpi_state.head(h), u = fpi_state.tail(h);
      Vector x = llt.solve(instance.rhs + rho * d.transpose() * (z - u));
      Vector w = d * x + u;
      auto active = select_branches(w, instance.smoothing_alpha / rho);

      Matrix w_block(h, 2 * h);
      w_block.leftCols(h) = rho * drdt;
      w_block.rightCols(h) = -rho * drdt;
      w_block.rightCols(h).diagonal().array() += 1.0;
      return piecewise_blocks(w_block, active);
    }
    default:
      throw std::invalid_argument("analytic_jacobian: no closed form for kind '" +
                                  to_string(instance.kind) + "'");
  }
}

namespace {

Spectrum classify(std::vector<std::complex<double>> eigs, double imag_tolerance) {
  Spectrum spec;
  std::sort(eigs.begin(), eigs.end(), [](const auto& a, const auto& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  spec.eigenvalues = std::move(eigs);
  spec.imag_tolerance = imag_tolerance;
  double radius = 0.0;
  for (const auto& ev : spec.eigenvalues) radius = std::max(radius, std::abs(ev));
  spec.spectral_radius = radius;

  const double imag_cut = imag_tolerance * std::max(1.0, radius);
  bool all_real = true;
  for (const auto& ev : spec.eigenvalues)
    if (std::abs(ev.imag()) > imag_cut) all_real = false;

  if (all_real) {
    RealSpectrumStats stats;
    stats.sigma_min = std::numeric_limits<double>::infinity();
    stats.sigma_max = -std::numeric_limits<double>::infinity();
    for (const auto& ev : spec.eigenvalues) {
      stats.sigma_min = std::min(stats.sigma_min, ev.real());
      stats.sigma_max = std::max(stats.sigma_max, ev.real());
    }
    spec.classification = stats;
  } else {
    ComplexSpectrumStats stats;
    stats.rho = radius;
    for (const auto& ev : spec.eigenvalues) {
      if (std::abs(ev.imag()) <= imag_cut && ev.real() >= 0.0) {
        if (!stats.mu_plus || ev.real() > *stats.mu_plus) stats.mu_plus = ev.real();
      }
    }
    spec.classification = stats;
  }
  return spec;
}

}  // namespace

Spectrum spectrum_of(const Matrix& matrix, double imag_tolerance) {
  if (matrix.rows() != matrix.cols()) throw std::invalid_argument("spectrum_of: matrix not square");
  if (!matrix.allFinite()) throw std::invalid_argument("spectrum_of: non-finite entries");

  Eigen::EigenSolver<Matrix> solver(matrix, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("spectrum_of: QR eigeniteration did not converge");

  std::vector<std::complex<double>> eigs(matrix.rows());
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) eigs[i] = solver.eigenvalues()[i];
  return classify(std::move(eigs), imag_tolerance);
}

Spectrum spectrum_from_eigenvalues(std::vector<std::complex<double>> eigenvalues,
                                   double imag_tolerance) {
  return classify(std::move(eigenvalues), imag_tolerance);
}

std::string spectrum_to_csv(const Spectrum& spectrum) {
  std::ostringstream out;
  out << "re,im\n";
  for (const auto& ev : spectrum.eigenvalues)
    out << detail::fmt_double(ev.real()) << ',' << detail::fmt_double(ev.imag()) << '\n';
  return out.str();
}

Spectrum spectrum_from_csv(const std::string& text, double imag_tolerance) {
  auto lines = detail::split(text, '\n');
  if (lines.empty() || detail::strip(lines[0]) != "re,im")
    throw std::runtime_error("spectrum_from_csv: missing or malformed header");
  std::vector<std::complex<double>> eigs;
  for (size_t i = 1; i < lines.size(); ++i) {
    std::string line = detail::strip(lines[i]);
    if (line.empty()) continue;
    auto cells = detail::split(line, ',');
    if (cells.size() != 2) throw std::runtime_error("spectrum_from_csv: expected 2 cells per row");
    eigs.emplace_back(detail::parse_double(cells[0]), detail::parse_double(cells[1]));
  }
  return spectrum_from_eigenvalues(std::move(eigs), imag_tolerance);
}

void write_spectrum_csv(const Spectrum& spectrum, const std::string& path) {
  detail::write_file(path, spectrum_to_csv(spectrum));
}

Spectrum read_spectrum_csv(const std::string& path, double imag_tolerance) {
  return spectrum_from_csv(detail::read_file(path), imag_tolerance);
}

}  // namespace aaadmm
