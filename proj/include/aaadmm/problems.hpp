#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "aaadmm/fixed_point.hpp"

namespace aaadmm {

enum class ProblemKind {
  ridge,
  reg_logistic,
  total_variation,
  lasso,
  nnls,
  box_logistic,
  scalar_l1_demo,
};

std::string to_string(ProblemKind kind);
ProblemKind problem_kind_from_string(const std::string& name);

/// Generated data for one benchmark problem. Immutable after construction;
/// safe for shared concurrent reads.
struct ProblemInstance {
  ProblemKind kind = ProblemKind::ridge;
  Matrix data_matrix;  // A, F, or feature matrix; empty for total_variation
  Vector rhs;          // b, g, +-1 labels, or the total-variation signal
  double reg_lambda = 0.0;
  double smoothing_alpha = 0.0;  // total variation only
  double penalty_rho = 1.0;
  std::uint64_t seed = 0;
  double density = 1.0;
  bool scaled_projection = false;  // z = (1/rho)*Pi(x+u) instead of the plain projection
};

struct ADMMState {
  Vector x, z, u;
};

struct GenerateParams {
  std::optional<double> reg_lambda;
  std::optional<double> penalty_rho;
  double alpha_scale = 0.001;        // alpha = alpha_scale * ||y||_inf
  double label_flip_fraction = 0.1;  // logistic label noise
  bool scaled_projection = false;
};

/// Componentwise soft-thresholding sign(v)*max(|v|-t, 0).
Vector prox_l1(const Vector& v, double t);
Vector project_box(const Vector& v, double lo, double hi);
Vector project_nonneg(const Vector& v);

/// Newton's method on a smooth strongly convex objective given by its
/// gradient and (SPD) Hessian; returns x with ||gradient(x)|| <= tol.
/// Throws when the linear solve fails or max_iter is exhausted, naming
/// the last gradient norm.
Vector newton_inner_solve(const std::function<Vector(const Vector&)>& gradient,
                          const std::function<Matrix(const Vector&)>& hessian, const Vector& x0,
                          double tol, int max_iter);

/// Deterministic-in-seed synthetic data. `rows`/`cols` are the data matrix
/// shape; for total_variation `cols` is the signal length and `rows` is
/// ignored. `density` must lie in (0,1].
ProblemInstance generate_instance(ProblemKind kind, int rows, int cols, double density,
                                  std::uint64_t seed, const GenerateParams& params = {});

/// The per-problem default sizes and parameters used by the experiments.
ProblemInstance default_instance(ProblemKind kind, std::uint64_t seed);

/// True for problems reduced to a fixed-point iteration over z alone.
bool is_z_only(ProblemKind kind);
Eigen::Index fpi_dimension(const ProblemInstance& instance);

/// One ADMM sweep as a fixed-point map over z or over stacked (z, u),
/// with cached factorizations and residual hooks attached.
FixedPointMap build_fpi(const ProblemInstance& instance);

/// Expands a fixed-point state vector into the full ADMM triple; x is the
/// x-step evaluated at (z, u).
ADMMState recover_state(const ProblemInstance& instance, const Vector& fpi_state);

/// (||A x_after + B z_after - b||, ||rho A^T B (z_after - z_before)||).
std::pair<double, double> residual_norms(const ProblemInstance& instance, const ADMMState& before,
                                         const ADMMState& after);

// Structured text persistence (key/value plus dense or coordinate-sparse
// matrix blocks); format documented in the README.
std::string instance_to_text(const ProblemInstance& instance);
ProblemInstance instance_from_text(const std::string& text);
void save_instance(const ProblemInstance& instance, const std::string& path);
ProblemInstance load_instance(const std::string& path);

}  // namespace aaadmm
