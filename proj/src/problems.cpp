#include "aaadmm/problems.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <memory>
#include <random>
#include <stdexcept>

#include "text_util.hpp"

namespace aaadmm {

std::string to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::ridge: return "ridge";
    case ProblemKind::reg_logistic: return "reg_logistic";
    case ProblemKind::total_variation: return "total_variation";
    case ProblemKind::lasso: return "lasso";
    case ProblemKind::nnls: return "nnls";
    case ProblemKind::box_logistic: return "box_logistic";
    case ProblemKind::scalar_l1_demo: return "scalar_l1_demo";
  }
  throw std::logic_error("unknown ProblemKind");
}

ProblemKind problem_kind_from_string(const std::string& name) {
  for (ProblemKind k :
       {ProblemKind::ridge, ProblemKind::reg_logistic, ProblemKind::total_variation,
        ProblemKind::lasso, ProblemKind::nnls, ProblemKind::box_logistic,
        ProblemKind::scalar_l1_demo}) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown problem kind: '" + name + "'");
}

Vector prox_l1(const Vector& v, double t) {
  if (!(t > 0)) throw std::invalid_argument("prox_l1: threshold must be positive");
  Vector out(v.size());
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    double mag = std::abs(v[j]) - t;
    out[j] = mag > 0 ? (v[j] > 0 ? mag : -mag) : 0.0;
  }
  return out;
}

Vector project_box(const Vector& v, double lo, double hi) {
  if (!(lo < hi)) throw std::invalid_argument("project_box: requires lo < hi");
  return v.cwiseMax(lo).cwiseMin(hi);
}

Vector project_nonneg(const Vector& v) { return v.cwiseMax(0.0); }

Vector newton_inner_solve(const std::function<Vector(const Vector&)>& gradient,
                          const std::function<Matrix(const Vector&)>& hessian, const Vector& x0,
                          double tol, int max_iter) {
  if (!(tol > 0)) throw std::invalid_argument("newton_inner_solve: tol must be positive");
  Vector x = x0;
  Vector g = gradient(x);
  double gnorm = g.norm();
  if (gnorm <= tol) return x;
  for (int it = 0; it < max_iter; ++it) {
    Eigen::LLT<Matrix> llt(hessian(x));
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("newton_inner_solve: Hessian not SPD, gradient norm " +
                               detail::fmt_double(gnorm));
    x -= llt.solve(g);
    g = gradient(x);
    gnorm = g.norm();
    if (gnorm <= tol) return x;
  }
  throw std::runtime_error("newton_inner_solve: no convergence in " + std::to_string(max_iter) +
                           " iterations, gradient norm " + detail::fmt_double(gnorm));
}

namespace {

// Forward difference operator D in R^{(n-1) x n}, applied matrix-free.
Vector diff_apply(const Vector& x) {
  const Eigen::Index n = x.size();
  Vector out(n - 1);
  for (Eigen::Index i = 0; i + 1 < n; ++i) out[i] = x[i + 1] - x[i];
  return out;
}

Vector diff_apply_t(const Vector& v) {
  const Eigen::Index n = v.size() + 1;
  Vector out(n);
  out[0] = -v[0];
  for (Eigen::Index i = 1; i + 1 < n; ++i) out[i] = v[i - 1] - v[i];
  out[n - 1] = v[n - 2];
  return out;
}

double stable_sigmoid_neg(double t) {
  // 1 / (1 + exp(t)) without overflow
  if (t >= 0) {
    double e = std::exp(-t);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(t));
}

// Cached per-instance data shared by evaluate and the residual hooks.
struct ProblemOps {
  ProblemInstance inst;
  Eigen::Index nx = 0;  // x dimension
  Eigen::Index nz = 0;  // z dimension

  // ridge
  Matrix ridge_M;
  Vector ridge_bhat;

  // cached SPD factorization of the x-step normal matrix
  Eigen::LLT<Matrix> llt;
  Vector linear_rhs;  // A^T b, 2 F^T g, or the TV signal

  // logistic problems
  Matrix features1;  // [1 A]
  Vector labels;

  Vector logistic_gradient(const Vector& x) const {
    Vector t = labels.cwiseProduct(features1 * x);
    Vector s(t.size());
    for (Eigen::Index i = 0; i < t.size(); ++i) s[i] = stable_sigmoid_neg(t[i]);
    double inv_m = 1.0 / static_cast<double>(features1.rows());
    return -inv_m * (features1.transpose() * labels.cwiseProduct(s));
  }

  Matrix logistic_hessian(const Vector& x) const {
    Vector t = labels.cwiseProduct(features1 * x);
    Vector w(t.size());
    for (Eigen::Index i = 0; i < t.size(); ++i) {
      double s = stable_sigmoid_neg(t[i]);
      w[i] = s * (1.0 - s);
    }
    double inv_m = 1.0 / static_cast<double>(features1.rows());
    return inv_m * (features1.transpose() * w.asDiagonal() * features1);
  }

  Vector x_step(const Vector& z, const Vector& u) const {
    const double rho = inst.penalty_rho;
    switch (inst.kind) {
      case ProblemKind::ridge:
        return llt.solve(linear_rhs + rho * (z - u));
      case ProblemKind::lasso:
      case ProblemKind::scalar_l1_demo:
        return llt.solve(linear_rhs + rho * (z - u));
      case ProblemKind::nnls:
        return llt.solve(linear_rhs + rho * (z - u));
      case ProblemKind::total_variation:
        return llt.solve(linear_rhs + rho * diff_apply_t(z - u));
      case ProblemKind::reg_logistic: {
        Vector v = z - u;
        auto grad = [&](const Vector& x) { return logistic_gradient(x) + rho * (x - v); };
        auto hess = [&](const Vector& x) {
          Matrix h = logistic_hessian(x);
          h.diagonal().array() += rho;
          return h;
        };
        return newton_inner_solve(grad, hess, v, 1e-12, 50);
      }
      case ProblemKind::box_logistic: {
        Vector v = z - u;
        const double lam = inst.reg_lambda;
        auto grad = [&](const Vector& x) {
          return Vector(logistic_gradient(x) + 2.0 * lam * x + rho * (x - v));
        };
        auto hess = [&](const Vector& x) {
          Matrix h = logistic_hessian(x);
          h.diagonal().array() += 2.0 * lam + rho;
          return h;
        };
        return newton_inner_solve(grad, hess, v, 1e-12, 50);
      }
    }
    throw std::logic_error("x_step: unknown kind");
  }

  Vector z_step(const Vector& w) const {
    const double rho = inst.penalty_rho;
    switch (inst.kind) {
      case ProblemKind::total_variation:
        return prox_l1(w, inst.smoothing_alpha / rho);
      case ProblemKind::lasso:
      case ProblemKind::scalar_l1_demo:
        return prox_l1(w, inst.reg_lambda / rho);
      case ProblemKind::nnls: {
        Vector p = project_nonneg(w);
        return inst.scaled_projection ? Vector(p / rho) : p;
      }
      case ProblemKind::box_logistic: {
        Vector p = project_box(w, -1.0, 1.0);
        return inst.scaled_projection ? Vector(p / rho) : p;
      }
      default:
        throw std::logic_error("z_step: kind has a closed-form z update");
    }
  }
};

std::shared_ptr<const ProblemOps> make_ops(const ProblemInstance& inst) {
  auto ops = std::make_shared<ProblemOps>();
  ops->inst = inst;
  const double rho = inst.penalty_rho;
  if (!(rho > 0)) throw std::invalid_argument("build_fpi: penalty_rho must be positive");

  switch (inst.kind) {
    case ProblemKind::ridge: {
      const Matrix& A = inst.data_matrix;
      const double lam = inst.reg_lambda;
      const Eigen::Index n = A.cols();
      ops->nx = ops->nz = n;
      Matrix normal = A.transpose() * A;
      normal.diagonal().array() += rho;
      ops->llt.compute(normal);
      if (ops->llt.info() != Eigen::Success)
        throw std::runtime_error("build_fpi: ridge normal matrix factorization failed");
      ops->linear_rhs = A.transpose() * inst.rhs;
      Matrix inv = ops->llt.solve(Matrix::Identity(n, n));
      ops->ridge_M = (rho * (rho - 2.0 * lam) / (rho + 2.0 * lam)) * inv;
      ops->ridge_M.diagonal().array() += 2.0 * lam / (rho + 2.0 * lam);
      ops->ridge_bhat = (rho / (rho + 2.0 * lam)) * (inv * ops->linear_rhs);
      break;
    }
    case ProblemKind::lasso:
    case ProblemKind::scalar_l1_demo: {
      const Matrix& A = inst.data_matrix;
      const Eigen::Index n = A.cols();
      ops->nx = ops->nz = n;
      Matrix normal = A.transpose() * A;
      normal.diagonal().array() += rho;
      ops->llt.compute(normal);
      if (ops->llt.info() != Eigen::Success)
        throw std::runtime_error("build_fpi: lasso normal matrix factorization failed");
      ops->linear_rhs = A.transpose() * inst.rhs;
      break;
    }
    case ProblemKind::nnls: {
      const Matrix& F = inst.data_matrix;
      const Eigen::Index n = F.cols();
      ops->nx = ops->nz = n;
      Matrix normal = 2.0 * (F.transpose() * F);
      normal.diagonal().array() += rho;
      ops->llt.compute(normal);
      if (ops->llt.info() != Eigen::Success)
        throw std::runtime_error("build_fpi: nnls normal matrix factorization failed");
      ops->linear_rhs = 2.0 * (F.transpose() * inst.rhs);
      break;
    }
    case ProblemKind::total_variation: {
      const Eigen::Index n = inst.rhs.size();
      if (n < 2) throw std::invalid_argument("build_fpi: total_variation needs signal length >= 2");
      ops->nx = n;
      ops->nz = n - 1;
      // I + rho D^T D is tridiagonal
      Matrix normal = Matrix::Zero(n, n);
      for (Eigen::Index i = 0; i < n; ++i) {
        double diag = 1.0;
        if (i > 0) diag += rho;
        if (i + 1 < n) diag += rho;
        normal(i, i) = diag;
        if (i + 1 < n) normal(i, i + 1) = normal(i + 1, i) = -rho;
      }
      ops->llt.compute(normal);
      if (ops->llt.info() != Eigen::Success)
        throw std::runtime_error("build_fpi: total_variation factorization failed");
      ops->linear_rhs = inst.rhs;
      break;
    }
    case ProblemKind::reg_logistic:
    case ProblemKind::box_logistic: {
      const Matrix& A = inst.data_matrix;
      const Eigen::Index m = A.rows();
      ops->nx = ops->nz = A.cols() + 1;
      ops->features1.resize(m, A.cols() + 1);
      ops->features1.col(0).setOnes();
      ops->features1.rightCols(A.cols()) = A;
      ops->labels = inst.rhs;
      break;
    }
  }
  return ops;
}

}  // namespace

bool is_z_only(ProblemKind kind) {
  return kind == ProblemKind::ridge || kind == ProblemKind::reg_logistic;
}

Eigen::Index fpi_dimension(const ProblemInstance& instance) {
  switch (instance.kind) {
    case ProblemKind::ridge: return instance.data_matrix.cols();
    case ProblemKind::reg_logistic: return instance.data_matrix.cols() + 1;
    case ProblemKind::total_variation: return 2 * (instance.rhs.size() - 1);
    case ProblemKind::lasso:
    case ProblemKind::scalar_l1_demo:
    case ProblemKind::nnls: return 2 * instance.data_matrix.cols();
    case ProblemKind::box_logistic: return 2 * (instance.data_matrix.cols() + 1);
  }
  throw std::logic_error("fpi_dimension: unknown kind");
}

FixedPointMap build_fpi(const ProblemInstance& instance) {
  auto ops = make_ops(instance);
  FixedPointMap map;
  map.dimension = fpi_dimension(instance);

  const ProblemKind kind = instance.kind;
  const double rho = instance.penalty_rho;
  const double lam = instance.reg_lambda;

  if (kind == ProblemKind::ridge) {
    map.evaluate = [ops](const Vector& z) -> Vector {
      return ops->ridge_M * z + ops->ridge_bhat;
    };
  } else if (kind == ProblemKind::reg_logistic) {
    const double zscale = rho / (2.0 * lam + rho);
    const double uscale = 2.0 * lam / rho;
    map.evaluate = [ops, zscale, uscale](const Vector& z) -> Vector {
      Vector u = uscale * z;
      Vector x = ops->x_step(z, u);
      return zscale * (x + u);
    };
  } else if (kind == ProblemKind::total_variation) {
    map.evaluate = [ops](const Vector& v) -> Vector {
      const Eigen::Index h = v.size() / 2;
      Vector z = v.head(h), u = v.tail(h);
      Vector x = ops->x_step(z, u);
      Vector w = diff_apply(x) + u;
      Vector zn = ops->z_step(w);
      Vector out(v.size());
      out.head(h) = zn;
      out.tail(h) = w - zn;
      return out;
    };
  } else {
    // lasso / scalar_l1_demo / nnls / box_logistic: stacked (z, u), constraint x - z = 0
    map.evaluate = [ops](const Vector& v) -> Vector {
      const Eigen::Index h = v.size() / 2;
      Vector z = v.head(h), u = v.tail(h);
      Vector x = ops->x_step(z, u);
      Vector w = x + u;
      Vector zn = ops->z_step(w);
      Vector out(v.size());
      out.head(h) = zn;
      out.tail(h) = u + x - zn;
      return out;
    };
  }

  const double uscale = 2.0 * lam / rho;
  map.residual_hooks = [ops, kind, rho, uscale](const Vector& before,
                                                const Vector& after) -> std::pair<double, double> {
    Vector zb, ub, za;
    if (is_z_only(kind)) {
      zb = before;
      ub = uscale * before;
      za = after;
    } else {
      const Eigen::Index h = before.size() / 2;
      zb = before.head(h);
      ub = before.tail(h);
      za = after.head(h);
    }
    Vector x = ops->x_step(zb, ub);
    if (kind == ProblemKind::total_variation) {
      double primal = (diff_apply(x) - za).norm();
      double dual = rho * diff_apply_t(za - zb).norm();
      return {primal, dual};
    }
    double primal = (x - za).norm();
    double dual = rho * (za - zb).norm();
    return {primal, dual};
  };

  return map;
}

ADMMState recover_state(const ProblemInstance& instance, const Vector& fpi_state) {
  if (fpi_state.size() != fpi_dimension(instance))
    throw std::invalid_argument("recover_state: state dimension mismatch");
  auto ops = make_ops(instance);
  ADMMState st;
  if (is_z_only(instance.kind)) {
    st.z = fpi_state;
    st.u = (2.0 * instance.reg_lambda / instance.penalty_rho) * fpi_state;
  } else {
    const Eigen::Index h = fpi_state.size() / 2;
    st.z = fpi_state.head(h);
    st.u = fpi_state.tail(h);
  }
  st.x = ops->x_step(st.z, st.u);
  return st;
}

std::pair<double, double> residual_norms(const ProblemInstance& instance, const ADMMState& before,
                                         const ADMMState& after) {
  const double rho = instance.penalty_rho;
  if (instance.kind == ProblemKind::total_variation) {
    double primal = (diff_apply(after.x) - after.z).norm();
    double dual = rho * diff_apply_t(after.z - before.z).norm();
    return {primal, dual};
  }
  double primal = (after.x - after.z).norm();
  double dual = rho * (after.z - before.z).norm();
  return {primal, dual};
}

namespace {

struct KindDefaults {
  int rows, cols;
  double density, lambda, rho;
};

KindDefaults defaults_for(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::ridge: return {150, 300, 0.001, 1.0, 10.0};
    case ProblemKind::lasso: return {150, 300, 0.001, 1.0, 10.0};
    case ProblemKind::nnls: return {150, 300, 0.001, 0.0, 2.0};
    case ProblemKind::total_variation: return {0, 1000, 1.0, 0.0, 10.0};
    case ProblemKind::reg_logistic: return {120, 40, 1.0, 2.0, 10.0};
    case ProblemKind::box_logistic: return {120, 40, 1.0, 2.0, 10.0};
    case ProblemKind::scalar_l1_demo: return {1, 1, 1.0, 1.0, 10.0};
  }
  throw std::logic_error("defaults_for: unknown kind");
}

void fill_sparse(Matrix& A, double density, std::mt19937_64& rng, bool uniform01) {
  const long long total = static_cast<long long>(A.rows()) * A.cols();
  long long nnz = std::max<long long>(1, std::llround(density * static_cast<double>(total)));
  std::uniform_int_distribution<long long> pos(0, total - 1);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  A.setZero();
  long long placed = 0;
  while (placed < nnz) {
    long long p = pos(rng);
    Eigen::Index i = static_cast<Eigen::Index>(p % A.rows());
    Eigen::Index j = static_cast<Eigen::Index>(p / A.rows());
    if (A(i, j) != 0.0) continue;
    double v = uniform01 ? unif(rng) : normal(rng);
    if (v == 0.0) continue;
    A(i, j) = v;
    ++placed;
  }
}

}  // namespace

ProblemInstance generate_instance(ProblemKind kind, int rows, int cols, double density,
                                  std::uint64_t seed, const GenerateParams& params) {
  if (!(density > 0.0 && density <= 1.0))
    throw std::invalid_argument("generate_instance: density must be in (0, 1]");
  if (cols < 1 || (kind != ProblemKind::total_variation && rows < 1))
    throw std::invalid_argument("generate_instance: invalid dimensions");

  KindDefaults defs = defaults_for(kind);
  ProblemInstance inst;
  inst.kind = kind;
  inst.seed = seed;
  inst.density = density;
  inst.reg_lambda = params.reg_lambda.value_or(defs.lambda);
  inst.penalty_rho = params.penalty_rho.value_or(defs.rho);
  inst.scaled_projection = params.scaled_projection;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;

  switch (kind) {
    case ProblemKind::ridge:
    case ProblemKind::nnls: {
      inst.data_matrix.resize(rows, cols);
      fill_sparse(inst.data_matrix, density, rng, /*uniform01=*/false);
      inst.rhs.resize(rows);
      for (Eigen::Index i = 0; i < rows; ++i) inst.rhs[i] = normal(rng);
      break;
    }
    case ProblemKind::lasso: {
      inst.data_matrix.resize(rows, cols);
      fill_sparse(inst.data_matrix, density, rng, /*uniform01=*/true);
      inst.rhs.resize(rows);
      for (Eigen::Index i = 0; i < rows; ++i) inst.rhs[i] = normal(rng);
      break;
    }
    case ProblemKind::total_variation: {
      const Eigen::Index n = cols;
      if (n < 2)
        throw std::invalid_argument("generate_instance: total_variation needs length >= 2");
      inst.rhs.resize(n);
      for (Eigen::Index i = 0; i < n; ++i) inst.rhs[i] = normal(rng);
      inst.smoothing_alpha = params.alpha_scale * inst.rhs.cwiseAbs().maxCoeff();
      break;
    }
    case ProblemKind::reg_logistic:
    case ProblemKind::box_logistic: {
      inst.data_matrix.resize(rows, cols);
      for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) inst.data_matrix(i, j) = normal(rng);
      Vector truth(cols + 1);
      for (Eigen::Index j = 0; j <= cols; ++j) truth[j] = normal(rng);
      inst.rhs.resize(rows);
      std::bernoulli_distribution flip(params.label_flip_fraction);
      for (Eigen::Index i = 0; i < rows; ++i) {
        double score = truth[0] + inst.data_matrix.row(i).dot(truth.tail(cols));
        double label = score >= 0 ? 1.0 : -1.0;
        inst.rhs[i] = flip(rng) ? -label : label;
      }
      break;
    }
    case ProblemKind::scalar_l1_demo: {
      inst.data_matrix = Matrix::Ones(1, 1);
      inst.rhs = Vector::Zero(1);
      break;
    }
  }
  return inst;
}

ProblemInstance default_instance(ProblemKind kind, std::uint64_t seed) {
  KindDefaults defs = defaults_for(kind);
  return generate_instance(kind, defs.rows, defs.cols, defs.density, seed);
}

void save_instance(const ProblemInstance& instance, const std::string& path) {
  detail::write_file(path, instance_to_text(instance));
}

ProblemInstance load_instance(const std::string& path) {
  return instance_from_text(detail::read_file(path));
}

}  // namespace aaadmm
