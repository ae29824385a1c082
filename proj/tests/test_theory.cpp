#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <random>

#include "aaadmm/theory.hpp"

using namespace aaadmm;
using Complexd = std::complex<double>;

namespace {

Eigen::VectorXd beta1(double b) { return Eigen::VectorXd::Constant(1, b); }

Eigen::VectorXd beta_vec(std::initializer_list<double> vals) {
  Eigen::VectorXd b(static_cast<Eigen::Index>(vals.size()));
  Eigen::Index i = 0;
  for (double v : vals) b[i++] = v;
  return b;
}

Spectrum real_spectrum(std::initializer_list<double> vals) {
  std::vector<Complexd> eigs;
  for (double v : vals) eigs.emplace_back(v, 0.0);
  return spectrum_from_eigenvalues(std::move(eigs));
}

double multiset_distance(std::vector<Complexd> a, std::vector<Complexd> b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (const auto& va : a) {
    double best = std::numeric_limits<double>::infinity();
    size_t best_idx = 0;
    for (size_t i = 0; i < b.size(); ++i) {
      double d = std::abs(va - b[i]);
      if (d < best) {
        best = d;
        best_idx = i;
      }
    }
    worst = std::max(worst, best);
    b.erase(b.begin() + static_cast<long>(best_idx));
  }
  return worst;
}

// 1-D oracle: scan beta and take the max of s_mu over the spectrum.
double grid_scan_optimum(const std::vector<double>& mus, double step = 1e-4) {
  double best = std::numeric_limits<double>::infinity();
  for (double beta = -0.9999; beta <= 0.9999 + 1e-12; beta += step) {
    double worst = 0.0;
    for (double mu : mus) worst = std::max(worst, s_mu(mu, beta));
    best = std::min(best, worst);
  }
  return best;
}

}  // namespace

TEST_CASE("lambda_roots window-1 examples") {
  SUBCASE("beta = 0 decouples into {0, mu}") {
    auto roots = lambda_roots(Complexd(0.8, 0), beta1(0.0));
    std::vector<double> mods = {std::abs(roots[0]), std::abs(roots[1])};
    std::sort(mods.begin(), mods.end());
    CHECK(mods[0] == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(mods[1] == doctest::Approx(0.8).epsilon(1e-14));
  }
  SUBCASE("mu = 0.5, beta = 1 gives (1 +- i)/2") {
    auto roots = lambda_roots(Complexd(0.5, 0), beta1(1.0));
    for (const auto& r : roots) {
      CHECK(r.real() == doctest::Approx(0.5).epsilon(1e-12));
      CHECK(std::abs(r.imag()) == doctest::Approx(0.5).epsilon(1e-12));
      CHECK(std::abs(r) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
    }
  }
  SUBCASE("complex pair carries modulus sqrt(beta mu)") {
    auto roots = lambda_roots(Complexd(0.833, 0), beta1(0.420));
    for (const auto& r : roots)
      CHECK(std::abs(r) == doctest::Approx(std::sqrt(0.420 * 0.833)).epsilon(1e-12));
  }
  SUBCASE("window size out of range") {
    CHECK_THROWS_AS(lambda_roots(Complexd(0.5, 0), Eigen::VectorXd::Zero(4)),
                    std::invalid_argument);
  }
}

TEST_CASE("root product identity on the complex branch") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  int seen = 0;
  for (int trial = 0; trial < 500; ++trial) {
    double mu = unif(rng);
    double beta = unif(rng);
    double disc = (1 + beta) * (1 + beta) * mu * mu - 4 * beta * mu;
    if (disc >= 0) continue;
    auto roots = lambda_roots(Complexd(mu, 0), beta1(beta));
    for (const auto& r : roots) CHECK(std::abs(r) * std::abs(r) == doctest::Approx(beta * mu).epsilon(1e-12));
    ++seen;
  }
  CHECK(seen > 50);
}

TEST_CASE("s_mu evaluates the max root modulus") {
  CHECK(s_mu(0.75, 0.0) == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(s_mu(0.75, 1.0 / 3.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(s_mu(0.0, 0.7) == 0.0);
  CHECK(s_mu(0.0, -0.4) == 0.0);
}

TEST_CASE("optimal coefficient for a single eigenvalue") {
  SUBCASE("mu = 0.75") {
    auto [beta, value] = optimal_beta_single_mu(0.75);
    CHECK(beta == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(value == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(grid_scan_optimum({0.75}) >= value - 1e-3);
  }
  SUBCASE("mu = 0") {
    auto [beta, value] = optimal_beta_single_mu(0.0);
    CHECK(beta == 0.0);
    CHECK(value == 0.0);
  }
  SUBCASE("mu = -0.5") {
    auto [beta, value] = optimal_beta_single_mu(-0.5);
    CHECK(value == doctest::Approx(std::sqrt(1.5) - 1.0).epsilon(1e-12));
    CHECK(beta == doctest::Approx((1 - std::sqrt(1.5)) / (1 + std::sqrt(1.5))).epsilon(1e-12));
    CHECK(grid_scan_optimum({-0.5}) >= value - 1e-3);
  }
  SUBCASE("mu >= 1") {
    auto [beta, value] = optimal_beta_single_mu(1.44);
    CHECK(beta == -1.0);
    CHECK(value == doctest::Approx(1.2).epsilon(1e-12));
  }
}

TEST_CASE("optimal_saa1 closed-form branches") {
  SUBCASE("nonnegative real spectrum") {
    Spectrum spec = real_spectrum({0.1, 0.4, 0.833});
    OptimalSAAResult res = optimal_saa1(spec);
    double s = std::sqrt(1 - 0.833);
    CHECK(res.kind == OptimalKind::exact_closed_form);
    CHECK(res.case_label == "real_nonneg");
    CHECK(res.beta[0] == doctest::Approx((1 - s) / (1 + s)).epsilon(1e-14));
    CHECK(res.factor == doctest::Approx(1 - s).epsilon(1e-14));
    // published values, rounded to 3 decimals
    CHECK(std::round(res.beta[0] * 1000) / 1000 == 0.420);
    REQUIRE(res.circle.has_value());
    CHECK(res.circle->center == doctest::Approx(res.beta[0] / (1 + res.beta[0])).epsilon(1e-14));
    // the stationary map at beta* attains exactly the predicted factor
    CHECK(rho_saa(spec, res.beta) == doctest::Approx(res.factor).epsilon(1e-12));
  }
  SUBCASE("nonpositive real spectrum") {
    Spectrum spec = real_spectrum({-0.5, -0.2, 0.0});
    OptimalSAAResult res = optimal_saa1(spec);
    CHECK(res.case_label == "real_nonpos");
    CHECK(res.factor == doctest::Approx(std::sqrt(1.5) - 1).epsilon(1e-14));
    CHECK(res.beta[0] < 0);
    CHECK(grid_scan_optimum({-0.5, -0.2, 0.0}) >= res.factor - 1e-3);
  }
  SUBCASE("mixed sign, symmetric (case a)") {
    Spectrum spec = real_spectrum({-0.6, 0.2, 0.6});
    OptimalSAAResult res = optimal_saa1(spec);
    CHECK(res.case_label == "mixed_a");
    CHECK(res.beta[0] == 0.0);
    CHECK(res.factor == 0.6);
  }
  SUBCASE("mixed sign dominated by sigma_max (case b)") {
    Spectrum spec = real_spectrum({-0.01, 0.5, 0.8});
    OptimalSAAResult res = optimal_saa1(spec);
    CHECK((res.case_label == "mixed_b1" || res.case_label == "mixed_b2"));
    CHECK(grid_scan_optimum({-0.01, 0.5, 0.8}) >= res.factor - 1e-3);
  }
  SUBCASE("mixed sign with a strong negative tail (case c)") {
    Spectrum spec = real_spectrum({-0.8, -0.1, 0.3});
    OptimalSAAResult res = optimal_saa1(spec);
    CHECK((res.case_label == "mixed_c1" || res.case_label == "mixed_c2"));
    CHECK(grid_scan_optimum({-0.8, -0.1, 0.3}) >= res.factor - 1e-3);
  }
  SUBCASE("balanced mixed pair crossing (case b2 values)") {
    Spectrum spec = real_spectrum({-0.5, 0.8});
    OptimalSAAResult res = optimal_saa1(spec);
    CHECK(res.case_label == "mixed_b2");
    // crossing point of the two branch curves, verified by the scan oracle
    double oracle = grid_scan_optimum({-0.5, 0.8});
    CHECK(res.factor == doctest::Approx(oracle).epsilon(2e-3));
  }
  SUBCASE("out of domain") {
    CHECK_THROWS_AS(optimal_saa1(real_spectrum({0.2, 1.2})), std::runtime_error);
  }
}

TEST_CASE("optimal_saa1 complex branches") {
  SUBCASE("radius attained by a real eigenvalue, benign complex pair") {
    Spectrum spec = spectrum_from_eigenvalues({{0.9, 0.0}, {0.1, 0.1}, {0.1, -0.1}});
    REQUIRE(!spec.is_real());
    OptimalSAAResult res = optimal_saa1(spec);
    CHECK(res.kind == OptimalKind::lower_bound_equality_check);
    CHECK(res.case_label == "complex_equality");
    double bound = 1 - std::sqrt(0.1);
    // beta* makes mu_plus a defective double root, so the measured
    // modulus carries sqrt(eps)-level rounding
    CHECK(res.factor == doctest::Approx(bound).epsilon(1e-6));
    CHECK(res.beta[0] == doctest::Approx(bound / (2 - bound)).epsilon(1e-12));
  }
  SUBCASE("dominating complex pair breaks the equality") {
    Spectrum spec = spectrum_from_eigenvalues({{0.9, 0.0}, {0.15, 0.85, }, {0.15, -0.85}});
    REQUIRE(!spec.is_real());
    REQUIRE(spec.complex_stats().mu_plus == doctest::Approx(0.9));
    OptimalSAAResult res = optimal_saa1(spec);
    double bound = 1 - std::sqrt(0.1);
    if (res.kind == OptimalKind::lower_bound_only) {
      CHECK(res.case_label == "complex_bound_exceeded");
      CHECK(res.factor > bound + 1e-6);
    } else {
      CHECK(res.factor == doctest::Approx(bound).epsilon(1e-6));
    }
  }
  SUBCASE("radius attained only by complex eigenvalues") {
    Spectrum spec = spectrum_from_eigenvalues({{0.3, 0.8}, {0.3, -0.8}, {0.5, 0.0}});
    OptimalSAAResult res = optimal_saa1(spec);
    CHECK(res.kind == OptimalKind::lower_bound_only);
    CHECK(res.case_label == "complex_no_real_radius");
  }
}

TEST_CASE("circle parameters") {
  CircleParams c1 = circle_params(0.5);
  CHECK(c1.center == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(c1.radius == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CircleParams c0 = circle_params(0.0);
  CHECK(c0.center == 0.0);
  CHECK(c0.radius == 0.0);
  CircleParams c42 = circle_params(0.420);
  CHECK(c42.center == doctest::Approx(0.2957746478873239).epsilon(1e-14));
  CHECK_THROWS_AS(circle_params(-1.0), std::invalid_argument);
}

TEST_CASE("complex mapped eigenvalues lie on the predicted circle") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> mu_dist(-1.0, 1.0);
  std::uniform_real_distribution<double> beta_dist(-0.99, 0.99);
  int complex_cases = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    double mu = mu_dist(rng);
    double beta = beta_dist(rng);
    auto roots = lambda_roots(Complexd(mu, 0), beta1(beta));
    CircleParams circle = circle_params(beta);
    for (const auto& r : roots) {
      if (std::abs(r.imag()) < 1e-12) continue;
      CHECK(std::abs(std::abs(r - Complexd(circle.center, 0)) - circle.radius) <= 1e-10);
      ++complex_cases;
    }
  }
  CHECK(complex_cases > 200);
}

TEST_CASE("companion matrix assembly") {
  SUBCASE("scalar example") {
    Matrix q = Matrix::Constant(1, 1, 0.8);
    Matrix psi = companion_psi(q, beta1(0.420));
    Matrix expected(2, 2);
    expected << 1.136, -0.336, 1.0, 0.0;
    CHECK((psi - expected).cwiseAbs().maxCoeff() <= 1e-15);
  }
  SUBCASE("beta = 0 keeps the spectrum plus zeros") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> nd;
    Matrix q(3, 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) q(i, j) = nd(rng);
    Matrix psi = companion_psi(q, beta1(0.0));
    Spectrum sq = spectrum_of(q);
    Spectrum sp = spectrum_of(psi);
    std::vector<Complexd> expected = sq.eigenvalues;
    for (int i = 0; i < 3; ++i) expected.emplace_back(0.0, 0.0);
    CHECK(multiset_distance(sp.eigenvalues, expected) <= 1e-8);
  }
}

TEST_CASE("companion spectrum equals the union of lambda_roots") {
  std::mt19937_64 rng(29);
  std::normal_distribution<double> nd;
  std::uniform_int_distribution<int> n_dist(1, 8);
  std::uniform_int_distribution<int> m_dist(1, 3);
  std::uniform_real_distribution<double> beta_dist(-1.0, 1.0);
  for (int trial = 0; trial < 25; ++trial) {
    int n = n_dist(rng);
    int m = m_dist(rng);
    Matrix q(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) q(i, j) = nd(rng) / n;
    Eigen::VectorXd beta(m);
    for (int i = 0; i < m; ++i) beta[i] = beta_dist(rng);

    Spectrum sq = spectrum_of(q);
    std::vector<Complexd> mapped;
    for (const auto& mu : sq.eigenvalues)
      for (const auto& lam : lambda_roots(mu, beta)) mapped.push_back(lam);
    Spectrum sp = spectrum_of(companion_psi(q, beta));
    CHECK(multiset_distance(sp.eigenvalues, mapped) <= 1e-8);
  }
}

TEST_CASE("rho_saa") {
  SUBCASE("beta = 0 returns the spectral radius") {
    Spectrum spec = real_spectrum({0.5, -0.3});
    CHECK(rho_saa(spec, beta1(0.0)) == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("exact cubic factorization at sigma = 5/6") {
    // lambda^3 - (1.6)(5/6) lambda^2 + 0.7 (5/6) lambda - 0.1 (5/6)
    // factors as (lambda - 1/2)(lambda - 1/2)(lambda - 1/3).
    Spectrum spec = real_spectrum({5.0 / 6.0});
    // the double root at 1/2 is defective; root conditioning is sqrt(eps)
    CHECK(rho_saa(spec, beta_vec({0.7, -0.1})) == doctest::Approx(0.5).epsilon(1e-6));
  }
  SUBCASE("equals the companion spectral radius") {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> nd;
    Matrix q(5, 5);
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) q(i, j) = nd(rng) / 5.0;
    Spectrum sq = spectrum_of(q);
    Eigen::VectorXd beta = beta_vec({0.4, -0.15});
    CHECK(rho_saa(sq, beta) ==
          doctest::Approx(spectrum_of(companion_psi(q, beta)).spectral_radius).epsilon(1e-9));
  }
}

TEST_CASE("brute-force sweep") {
  SUBCASE("single eigenvalue embeds the window-1 optimum up to grid resolution") {
    Spectrum spec = real_spectrum({0.75});
    OptimalSAAResult res = brute_force_sweep(spec, 2, -1.0, 1.0, 0.05);
    CHECK(res.kind == OptimalKind::grid_optimum);
    CHECK(res.factor <= 0.5 + 0.05);
    CHECK(res.factor < 0.75);  // never worse than plain: beta = 0 is on the grid
  }
  SUBCASE("zero vector on the grid caps the factor at the radius") {
    Spectrum spec = real_spectrum({0.6, 0.3, -0.2});
    OptimalSAAResult res = brute_force_sweep(spec, 2, -1.0, 1.0, 0.2);
    CHECK(res.factor <= spec.spectral_radius + 1e-12);
  }
  SUBCASE("deterministic across thread counts") {
    Spectrum spec = real_spectrum({0.82, 0.5, 0.11, -0.07});
    OptimalSAAResult a = brute_force_sweep(spec, 2, -1.0, 1.0, 0.1, 1);
    OptimalSAAResult b = brute_force_sweep(spec, 2, -1.0, 1.0, 0.1, 7);
    CHECK(a.factor == b.factor);
    CHECK(a.beta == b.beta);
  }
  SUBCASE("window-2 grid optimum does not trail the window-1 closed form by more than the resolution") {
    Spectrum spec = real_spectrum({0.05, 0.3, 0.55, 0.85});
    OptimalSAAResult closed = optimal_saa1(spec);
    OptimalSAAResult grid = brute_force_sweep(spec, 2, -1.0, 1.0, 0.05);
    CHECK(grid.factor <= closed.factor + 0.05);
  }
  SUBCASE("argument validation") {
    Spectrum spec = real_spectrum({0.5});
    CHECK_THROWS_AS(brute_force_sweep(spec, 4, -1, 1, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(brute_force_sweep(spec, 2, 1, -1, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(brute_force_sweep(spec, 2, -1, 1, 0.0), std::invalid_argument);
  }
}

TEST_CASE("closed form never loses to a fine grid scan") {
  std::mt19937_64 rng(47);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    // alternate among spectrum shapes to cover every branch
    std::vector<double> mus;
    int shape = trial % 3;
    int count = 3 + static_cast<int>(unif(rng) * 5);
    for (int i = 0; i < count; ++i) {
      double v = unif(rng) * 0.95;
      if (shape == 1) v = -v;
      if (shape == 2 && i % 2) v = -v * 0.8;
      mus.push_back(v);
    }
    Spectrum spec = real_spectrum({});
    {
      std::vector<Complexd> eigs;
      for (double v : mus) eigs.emplace_back(v, 0.0);
      spec = spectrum_from_eigenvalues(std::move(eigs));
    }
    OptimalSAAResult res = optimal_saa1(spec);
    CHECK(grid_scan_optimum(mus) >= res.factor - 1e-3);
  }
}

TEST_CASE("optimal window-1 acceleration strictly improves on the plain factor") {
  for (double smax : {0.05, 0.3, 0.6, 0.9, 0.99}) {
    double value = 1 - std::sqrt(1 - smax);
    CHECK(value < smax);
  }
}

TEST_CASE("analysis summary carries the key fields") {
  Spectrum spec = real_spectrum({0.1, 0.833});
  OptimalSAAResult res = optimal_saa1(spec);
  std::string text = analysis_summary(spec, res);
  CHECK(text.find("spectral_radius") != std::string::npos);
  CHECK(text.find("branch = real_nonneg") != std::string::npos);
  CHECK(text.find("provenance = exact_closed_form") != std::string::npos);
  CHECK(text.find("circle_center") != std::string::npos);

  SAAPlan plan = plan_from_result(res);
  CHECK(plan.m == 1);
  CHECK(plan.provenance == BetaProvenance::closed_form);
  CHECK(plan.predicted_factor == res.factor);
}
