#include <doctest.h>

#include "netform/error.hpp"
#include "netform/lasso.hpp"
#include "netform/rng.hpp"

using namespace netform;

namespace {

Eigen::MatrixXd gaussian_matrix(Eigen::Index n, Eigen::Index p, Rng& rng) {
  Eigen::MatrixXd x(n, p);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < p; ++j) x(i, j) = rng.normal();
  return x;
}

}  // namespace

TEST_CASE("planted support is recovered and refit by least squares") {
  Rng rng(81);
  const Eigen::Index n = 300, p = 20;
  const Eigen::MatrixXd x = gaussian_matrix(n, p, rng);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) y(i) = 1 + 2 * x(i, 0) - 3 * x(i, 7) + 0.2 * rng.normal();
  const auto fit = post_lasso(x, y);
  CHECK(fit.support == std::vector<std::size_t>{0, 7});
  CHECK(fit.lambda > 0);

  // OLS on the intercept and the two selected columns.
  Eigen::MatrixXd z(n, 3);
  z.col(0).setOnes();
  z.col(1) = x.col(0);
  z.col(2) = x.col(7);
  const Eigen::VectorXd ols = z.colPivHouseholderQr().solve(y);
  CHECK(fit.intercept == doctest::Approx(ols(0)).epsilon(1e-8));
  CHECK(fit.coef(0) == doctest::Approx(ols(1)).epsilon(1e-8));
  CHECK(fit.coef(7) == doctest::Approx(ols(2)).epsilon(1e-8));
  for (Eigen::Index j = 0; j < p; ++j)
    if (j != 0 && j != 7) CHECK(fit.coef(j) == 0.0);
}

TEST_CASE("without refit the estimates are shrunk") {
  Rng rng(82);
  const Eigen::MatrixXd x = gaussian_matrix(200, 5, rng);
  Eigen::VectorXd y = 2 * x.col(1);
  for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += 0.1 * rng.normal();
  LassoOptions opt;
  opt.lambda = 0.3;
  opt.refit = false;
  const auto fit = post_lasso(x, y, opt);
  CHECK(fit.coef(1) > 0);
  CHECK(fit.coef(1) < 2);
}

TEST_CASE("a large penalty keeps only the intercept") {
  Rng rng(83);
  const Eigen::MatrixXd x = gaussian_matrix(50, 4, rng);
  Eigen::VectorXd y(50);
  for (Eigen::Index i = 0; i < 50; ++i) y(i) = 5 + x(i, 2) + rng.normal();
  LassoOptions opt;
  opt.lambda = 1e6;
  const auto fit = post_lasso(x, y, opt);
  CHECK(fit.support.empty());
  CHECK(fit.intercept == doctest::Approx(y.mean()));
}

TEST_CASE("constant columns are dropped") {
  Rng rng(84);
  Eigen::MatrixXd x = gaussian_matrix(80, 3, rng);
  x.col(1).setConstant(4.0);
  Eigen::VectorXd y = 3 * x.col(0);
  const auto fit = post_lasso(x, y);
  CHECK(fit.constant_columns == std::vector<std::size_t>{1});
  CHECK(fit.coef(1) == 0.0);
  CHECK(fit.coef(0) == doctest::Approx(3));
  CHECK_THROWS_AS(post_lasso(x, Eigen::VectorXd(3)), ConfigError);
}

TEST_CASE("plug-in penalty formula") {
  // gamma = 0.1 / ln 400; Phi^-1(1 - gamma/60) = 3.452048845910993.
  CHECK(plugin_lambda(400, 30, 2.0) == doctest::Approx(1.1 * 2.0 * 3.452048845910993 / 20).epsilon(1e-9));
}
