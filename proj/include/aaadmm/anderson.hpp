#pragma once

#include <deque>
#include <variant>

#include "aaadmm/fixed_point.hpp"

namespace aaadmm {

/// Rolling history of the most recent iterates for window size m.
///
/// Holds up to m+1 triples (x_i, q(x_i), r_i = x_i - q(x_i)), oldest
/// evicted first. Index 0 is the most recent entry.
class WindowBuffer {
 public:
  WindowBuffer(int m, Eigen::Index dimension);

  void push(Vector x, Vector qx);

  int window() const { return m_; }
  int size() const { return static_cast<int>(entries_.size()); }
  Eigen::Index dimension() const { return dim_; }

  const Vector& x(int i) const { return entries_.at(i).x; }
  const Vector& q(int i) const { return entries_.at(i).q; }
  const Vector& r(int i) const { return entries_.at(i).r; }

 private:
  struct Entry {
    Vector x, q, r;
  };
  int m_;
  Eigen::Index dim_;
  std::deque<Entry> entries_;  // front = newest
};

enum class BetaProvenance { closed_form, lower_bound_only, grid_sweep, user_supplied };

/// Fixed-coefficient acceleration plan: window size m, beta vector of
/// length m, and the predicted asymptotic factor with its provenance.
struct SAAPlan {
  int m = 1;
  Eigen::VectorXd beta;
  double predicted_factor = std::numeric_limits<double>::quiet_NaN();
  BetaProvenance provenance = BetaProvenance::user_supplied;
};

/// Least-squares coefficients beta_0..beta_{m_k-1} minimizing
/// ||r(x_k) + sum_i beta_i (r(x_{k-i}) - r(x_{k-i-1}))||_2; rank-deficient
/// difference matrices yield the minimum-norm minimizer.
Eigen::VectorXd aa_coefficients(const WindowBuffer& buffer);

/// q(x_k) + sum_i beta_i (q(x_{k-i}) - q(x_{k-i-1})) with coefficients
/// from aa_coefficients; reduces to q(x_k) when only one entry is stored.
Vector aa_step(const FixedPointMap& map, const WindowBuffer& buffer);

/// (1 + sum beta_i) q(x_k) - sum_i beta_i q(x_{k-i}); during warm-up the
/// window truncates to the available history.
Vector saa_step(const FixedPointMap& map, const WindowBuffer& buffer, const SAAPlan& plan);

struct PlainScheme {};
struct AAScheme {
  int m = 1;
};
struct SAAScheme {
  SAAPlan plan;
};
using Scheme = std::variant<PlainScheme, AAScheme, SAAScheme>;

/// Full driver: chosen stepper plus trace recording identical in format
/// to fixed_point::iterate.
IterationTrace run_accelerated(const FixedPointMap& map, const Vector& x0, const Scheme& scheme,
                               int max_iter, double tol,
                               const std::optional<Vector>& reference = std::nullopt);

}  // namespace aaadmm
