#include "aaadmm/anderson.hpp"

#include <Eigen/QR>

#include <cmath>
#include <stdexcept>

namespace aaadmm {

WindowBuffer::WindowBuffer(int m, Eigen::Index dimension) : m_(m), dim_(dimension) {
  if (m < 0) throw std::invalid_argument("WindowBuffer: window size must be >= 0");
  if (dimension <= 0) throw std::invalid_argument("WindowBuffer: dimension must be positive");
}

void WindowBuffer::push(Vector x, Vector qx) {
  if (x.size() != dim_ || qx.size() != dim_)
    throw std::invalid_argument("WindowBuffer: entry dimension mismatch");
  Entry e;
  e.r = x - qx;
  e.x = std::move(x);
  e.q = std::move(qx);
  entries_.push_front(std::move(e));
  while (size() > m_ + 1) entries_.pop_back();
}

Eigen::VectorXd aa_coefficients(const WindowBuffer& buffer) {
  if (buffer.size() < 2) throw std::invalid_argument("aa_coefficients: need at least 2 entries");
  const int mk = buffer.size() - 1;
  const Eigen::Index n = buffer.dimension();

  Matrix diffs(n, mk);
  for (int i = 0; i < mk; ++i) diffs.col(i) = buffer.r(i) - buffer.r(i + 1);

  // Minimum-norm least-squares solution of diffs * beta = -r(x_k).
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod;
  cod.setThreshold(1e-12);
  cod.compute(diffs);
  return cod.solve(-buffer.r(0));
}

Vector aa_step(const FixedPointMap& map, const WindowBuffer& buffer) {
  if (buffer.size() < 1) throw std::invalid_argument("aa_step: empty buffer");
  if (buffer.dimension() != map.dimension)
    throw std::invalid_argument("aa_step: buffer/map dimension mismatch");
  if (buffer.size() == 1) return buffer.q(0);

  Eigen::VectorXd beta = aa_coefficients(buffer);
  Vector next = buffer.q(0);
  for (int i = 0; i < beta.size(); ++i) next += beta[i] * (buffer.q(i) - buffer.q(i + 1));
  return next;
}

Vector saa_step(const FixedPointMap& map, const WindowBuffer& buffer, const SAAPlan& plan) {
  if (buffer.size() < 1) throw std::invalid_argument("saa_step: empty buffer");
  if (buffer.dimension() != map.dimension)
    throw std::invalid_argument("saa_step: buffer/map dimension mismatch");
  if (plan.beta.size() != plan.m) throw std::invalid_argument("saa_step: beta length != m");

  const int m_eff = std::min(plan.m, buffer.size() - 1);
  bool all_zero = true;
  for (int i = 0; i < m_eff; ++i)
    if (plan.beta[i] != 0.0) all_zero = false;
  if (m_eff == 0 || all_zero) return buffer.q(0);

  double lead = 1.0;
  for (int i = 0; i < m_eff; ++i) lead += plan.beta[i];
  Vector next = lead * buffer.q(0);
  for (int i = 0; i < m_eff; ++i) next -= plan.beta[i] * buffer.q(i + 1);
  return next;
}

IterationTrace run_accelerated(const FixedPointMap& map, const Vector& x0, const Scheme& scheme,
                               int max_iter, double tol, const std::optional<Vector>& reference) {
  if (x0.size() != map.dimension)
    throw std::invalid_argument("run_accelerated: x0 dimension does not match map");
  if (reference && reference->size() != map.dimension)
    throw std::invalid_argument("run_accelerated: reference dimension does not match map");
  if (max_iter < 1) throw std::invalid_argument("run_accelerated: max_iter must be positive");
  if (!(tol > 0)) throw std::invalid_argument("run_accelerated: tol must be positive");

  int window = 0;
  if (const auto* aa = std::get_if<AAScheme>(&scheme)) {
    if (aa->m < 0) throw std::invalid_argument("run_accelerated: AA window must be >= 0");
    window = aa->m;
  } else if (const auto* saa = std::get_if<SAAScheme>(&scheme)) {
    if (saa->plan.m < 1) throw std::invalid_argument("run_accelerated: sAA window must be >= 1");
    if (saa->plan.beta.size() != saa->plan.m)
      throw std::invalid_argument("run_accelerated: sAA beta length != m");
    window = saa->plan.m;
  }

  auto blown_up = [](double e) { return !std::isfinite(e) || e > kBlowUpCeiling; };

  IterationTrace trace;
  Vector x = x0;
  WindowBuffer buffer(window, map.dimension);

  if (reference) {
    double e0 = (x - *reference).norm();
    if (blown_up(e0)) {
      trace.terminal_status = TerminalStatus::diverged;
      trace.final_iterate = x;
      return trace;
    }
    trace.records.push_back({0, e0, std::nullopt, std::nullopt});
    if (e0 <= tol) {
      trace.terminal_status = TerminalStatus::converged;
      trace.final_iterate = x;
      return trace;
    }
  }

  trace.terminal_status = TerminalStatus::max_iterations;
  for (int k = 0; k < max_iter; ++k) {
    Vector qx = map.evaluate(x);
    buffer.push(x, qx);

    Vector next = std::visit(
        [&](const auto& s) -> Vector {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, PlainScheme>)
            return buffer.q(0);
          else if constexpr (std::is_same_v<T, AAScheme>)
            return aa_step(map, buffer);
          else
            return saa_step(map, buffer, s.plan);
        },
        scheme);

    double e = reference ? (next - *reference).norm() : (next - x).norm();
    if (blown_up(e)) {
      trace.terminal_status = TerminalStatus::diverged;
      trace.final_iterate = x;
      return trace;
    }
    auto res = map.residual_hooks
                   ? std::optional<std::pair<double, double>>(map.residual_hooks(x, next))
                   : std::nullopt;
    TraceRecord rec{reference ? k + 1 : k, e, std::nullopt, std::nullopt};
    if (res) {
      rec.primal_residual = res->first;
      rec.dual_residual = res->second;
    }
    trace.records.push_back(rec);
    x = std::move(next);
    if (e <= tol) {
      trace.terminal_status = TerminalStatus::converged;
      break;
    }
  }
  trace.final_iterate = x;
  return trace;
}

}  // namespace aaadmm
