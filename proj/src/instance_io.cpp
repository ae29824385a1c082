#include <sstream>
#include <stdexcept>

#include "aaadmm/problems.hpp"
#include "text_util.hpp"

namespace aaadmm {

namespace {

constexpr const char* kMagic = "aaadmm-instance v1";

void write_matrix_block(std::ostringstream& out, const Matrix& A) {
  long long nnz = 0;
  for (Eigen::Index j = 0; j < A.cols(); ++j)
    for (Eigen::Index i = 0; i < A.rows(); ++i)
      if (A(i, j) != 0.0) ++nnz;
  const long long total = static_cast<long long>(A.rows()) * A.cols();
  if (4 * nnz < total) {
    out << "matrix coo " << A.rows() << ' ' << A.cols() << ' ' << nnz << '\n';
    for (Eigen::Index j = 0; j < A.cols(); ++j)
      for (Eigen::Index i = 0; i < A.rows(); ++i)
        if (A(i, j) != 0.0)
          out << i << ' ' << j << ' ' << detail::fmt_double(A(i, j)) << '\n';
  } else {
    out << "matrix dense " << A.rows() << ' ' << A.cols() << '\n';
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
      for (Eigen::Index j = 0; j < A.cols(); ++j) {
        if (j) out << ' ';
        out << detail::fmt_double(A(i, j));
      }
      out << '\n';
    }
  }
}

}  // namespace

std::string instance_to_text(const ProblemInstance& instance) {
  std::ostringstream out;
  out << kMagic << '\n';
  out << "kind = " << to_string(instance.kind) << '\n';
  out << "seed = " << instance.seed << '\n';
  out << "density = " << detail::fmt_double(instance.density) << '\n';
  out << "reg_lambda = " << detail::fmt_double(instance.reg_lambda) << '\n';
  out << "smoothing_alpha = " << detail::fmt_double(instance.smoothing_alpha) << '\n';
  out << "penalty_rho = " << detail::fmt_double(instance.penalty_rho) << '\n';
  out << "scaled_projection = " << (instance.scaled_projection ? 1 : 0) << '\n';
  if (instance.data_matrix.size() > 0) write_matrix_block(out, instance.data_matrix);
  out << "rhs dense " << instance.rhs.size() << '\n';
  for (Eigen::Index i = 0; i < instance.rhs.size(); ++i)
    out << detail::fmt_double(instance.rhs[i]) << '\n';
  out << "end\n";
  return out.str();
}

ProblemInstance instance_from_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || detail::strip(line) != kMagic)
    throw std::runtime_error("instance_from_text: bad header");

  ProblemInstance inst;
  bool have_kind = false, have_rhs = false, ended = false;

  while (std::getline(in, line)) {
    std::string s = detail::strip(line);
    if (s.empty() || s[0] == '#') continue;
    if (s == "end") {
      ended = true;
      break;
    }
    std::istringstream ls(s);
    std::string head;
    ls >> head;
    if (head == "matrix") {
      std::string layout;
      Eigen::Index rows, cols;
      ls >> layout >> rows >> cols;
      if (!ls) throw std::runtime_error("instance_from_text: malformed matrix header");
      inst.data_matrix = Matrix::Zero(rows, cols);
      if (layout == "coo") {
        long long nnz;
        ls >> nnz;
        for (long long k = 0; k < nnz; ++k) {
          if (!std::getline(in, line))
            throw std::runtime_error("instance_from_text: truncated matrix block");
          std::istringstream es(line);
          Eigen::Index i, j;
          double v;
          es >> i >> j >> v;
          if (!es || i < 0 || i >= rows || j < 0 || j >= cols)
            throw std::runtime_error("instance_from_text: bad coo entry");
          inst.data_matrix(i, j) = v;
        }
      } else if (layout == "dense") {
        for (Eigen::Index i = 0; i < rows; ++i) {
          if (!std::getline(in, line))
            throw std::runtime_error("instance_from_text: truncated matrix block");
          std::istringstream es(line);
          for (Eigen::Index j = 0; j < cols; ++j) {
            if (!(es >> inst.data_matrix(i, j)))
              throw std::runtime_error("instance_from_text: short matrix row");
          }
        }
      } else {
        throw std::runtime_error("instance_from_text: unknown matrix layout '" + layout + "'");
      }
      continue;
    }
    if (head == "rhs") {
      std::string layout;
      Eigen::Index n;
      ls >> layout >> n;
      if (!ls || layout != "dense")
        throw std::runtime_error("instance_from_text: malformed rhs header");
      inst.rhs.resize(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        if (!std::getline(in, line))
          throw std::runtime_error("instance_from_text: truncated rhs block");
        inst.rhs[i] = detail::parse_double(detail::strip(line));
      }
      have_rhs = true;
      continue;
    }
    // key = value
    auto eq = s.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("instance_from_text: unrecognized line '" + s + "'");
    std::string key = detail::strip(s.substr(0, eq));
    std::string value = detail::strip(s.substr(eq + 1));
    if (key == "kind") {
      inst.kind = problem_kind_from_string(value);
      have_kind = true;
    } else if (key == "seed") {
      inst.seed = std::stoull(value);
    } else if (key == "density") {
      inst.density = detail::parse_double(value);
    } else if (key == "reg_lambda") {
      inst.reg_lambda = detail::parse_double(value);
    } else if (key == "smoothing_alpha") {
      inst.smoothing_alpha = detail::parse_double(value);
    } else if (key == "penalty_rho") {
      inst.penalty_rho = detail::parse_double(value);
    } else if (key == "scaled_projection") {
      inst.scaled_projection = detail::parse_double(value) != 0.0;
    } else {
      throw std::runtime_error("instance_from_text: unknown key '" + key + "'");
    }
  }
  if (!ended) throw std::runtime_error("instance_from_text: missing 'end'");
  if (!have_kind) throw std::runtime_error("instance_from_text: missing kind");
  if (!have_rhs) throw std::runtime_error("instance_from_text: missing rhs");
  return inst;
}

}  // namespace aaadmm
