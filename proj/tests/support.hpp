#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "netform/covariates.hpp"
#include "netform/dyadic.hpp"
#include "netform/network.hpp"
#include "netform/params.hpp"
#include "netform/rng.hpp"

namespace testsupport {

using netform::CovariateSet;
using netform::Network;
using netform::ParamVector;
using netform::Rng;

inline CovariateSet random_covariates(std::size_t n, std::size_t k, Rng& rng) {
  CovariateSet x(n, k);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      for (std::size_t l = 0; l < k; ++l) x.set_covariate(i, j, l, rng.normal());
      x.set_instrument(i, j, std::floor(4 * rng.uniform()));
    }
  return x;
}

inline ParamVector random_params(std::size_t k, Rng& rng, double scale = 1.0) {
  ParamVector b(k);
  for (std::size_t i = 0; i < b.size(); ++i) b[i] = scale * rng.normal();
  return b;
}

inline Network random_network(std::size_t n, Rng& rng, double p = 0.5) {
  Network g(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) g.set(i, j, rng.uniform() < p);
  return g;
}

// beta_block'(1, W_ij) written out directly from the flat layout.
inline double block(const ParamVector& b, std::size_t offset, const CovariateSet& x, std::size_t i,
                    std::size_t j) {
  double v = b[offset];
  for (std::size_t l = 0; l < x.k(); ++l) v += b[offset + 1 + l] * x.covariate(i, j, l);
  return v;
}

/// Utility of agent i, term by term.
inline double utility_oracle(std::size_t i, const Network& g, const CovariateSet& x,
                             const ParamVector& b) {
  const std::size_t n = g.size();
  const std::size_t k = x.k();
  const std::size_t od = k + 2, om = 2 * k + 3, on = 3 * k + 4;
  double u = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (j == i || !g(i, j)) continue;
    u += block(b, od, x, i, j);
    if (g(j, i)) u += block(b, om, x, i, j);
    for (std::size_t l = 0; l < n; ++l) {
      if (l == i || l == j) continue;
      if (g(j, l)) u += block(b, on, x, i, l);
      if (g(l, i)) u += block(b, on, x, j, l);
    }
  }
  return u;
}

/// Meeting probabilities from the softmax definition.
inline std::vector<double> meeting_oracle(const Network& g, const CovariateSet& x,
                                          const ParamVector& b) {
  const std::size_t n = g.size(), k = x.k();
  std::vector<double> e;
  double mx = -1e300;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      double v = 0.0;
      for (std::size_t l = 0; l < k; ++l) v += b[l] * x.covariate(i, j, l);
      v += g(i, j) ? b[k] : b[k + 1] * x.instrument(i, j);
      e.push_back(v);
      mx = std::max(mx, v);
    }
  double s = 0.0;
  for (auto& v : e) s += (v = std::exp(v - mx));
  for (auto& v : e) v /= s;
  return e;
}

inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }


/// Five classrooms of sizes 4..8 with two regressors and a response built
/// from planted sender and receiver effects plus noise.
inline netform::DyadFrame planted_dyads(std::uint64_t seed) {
  Rng rng(seed);
  netform::DyadFrame f;
  f.names = {"gender", "skills"};
  std::vector<double> y;
  std::vector<std::array<double, 2>> x;
  std::size_t offset = 0;
  for (std::size_t c = 0; c < 5; ++c) {
    const std::size_t n = 4 + c;
    std::vector<double> a(n), b(n), skill(n), gender(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = rng.normal();
      b[i] = rng.normal();
      skill[i] = rng.normal();
      gender[i] = rng.uniform() < 0.5;
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        const double w0 = gender[i] != gender[j], w1 = std::abs(skill[i] - skill[j]);
        f.cluster.push_back(c);
        f.sender.push_back(offset + i);
        f.receiver.push_back(offset + j);
        x.push_back({w0, w1});
        y.push_back(0.3 - 0.4 * w0 - 0.2 * w1 + a[i] + b[j] + 0.3 * rng.normal());
      }
    offset += n;
  }
  f.y = Eigen::Map<Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
  f.x.resize(static_cast<Eigen::Index>(x.size()), 2);
  for (std::size_t r = 0; r < x.size(); ++r) {
    f.x(static_cast<Eigen::Index>(r), 0) = x[r][0];
    f.x(static_cast<Eigen::Index>(r), 1) = x[r][1];
  }
  return f;
}

struct DummyFit {
  Eigen::VectorXd coef, se;
};

/// Least squares with explicit sender and receiver dummies (one receiver
/// dropped per classroom) and the cluster sandwich written out. The
/// small-sample factor counts only the reported regressors, since the
/// dummies are nested within clusters.
inline DummyFit dummy_oracle(const netform::DyadFrame& f) {
  const auto n = static_cast<Eigen::Index>(f.rows());
  const auto k = f.x.cols();
  std::size_t senders = 0, receivers = 0, clusters = 0;
  for (std::size_t r = 0; r < f.rows(); ++r) {
    senders = std::max(senders, f.sender[r] + 1);
    receivers = std::max(receivers, f.receiver[r] + 1);
    clusters = std::max(clusters, f.cluster[r] + 1);
  }
  // First receiver of every classroom is the reference level.
  std::vector<std::size_t> first(clusters, SIZE_MAX);
  for (std::size_t r = 0; r < f.rows(); ++r)
    first[f.cluster[r]] = std::min(first[f.cluster[r]], f.receiver[r]);
  const auto cols = k + static_cast<Eigen::Index>(senders + receivers);
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(n, cols);
  X.leftCols(k) = f.x;
  for (std::size_t r = 0; r < f.rows(); ++r) {
    const auto ri = static_cast<Eigen::Index>(r);
    X(ri, k + static_cast<Eigen::Index>(f.sender[r])) = 1;
    if (f.receiver[r] != first[f.cluster[r]])
      X(ri, k + static_cast<Eigen::Index>(senders + f.receiver[r])) = 1;
  }
  // Drop the all-zero reference columns.
  std::vector<Eigen::Index> keep;
  for (Eigen::Index c = 0; c < cols; ++c)
    if (X.col(c).cwiseAbs().sum() > 0) keep.push_back(c);
  Eigen::MatrixXd Z(n, static_cast<Eigen::Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) Z.col(static_cast<Eigen::Index>(c)) = X.col(keep[c]);

  const Eigen::MatrixXd ZtZinv = (Z.transpose() * Z).inverse();
  const Eigen::VectorXd b = ZtZinv * Z.transpose() * f.y;
  const Eigen::VectorXd e = f.y - Z * b;
  Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(Z.cols(), Z.cols());
  for (std::size_t g = 0; g < clusters; ++g) {
    Eigen::VectorXd s = Eigen::VectorXd::Zero(Z.cols());
    for (std::size_t r = 0; r < f.rows(); ++r)
      if (f.cluster[r] == g) s += e(static_cast<Eigen::Index>(r)) * Z.row(static_cast<Eigen::Index>(r)).transpose();
    meat += s * s.transpose();
  }
  const double G = static_cast<double>(clusters), nn = static_cast<double>(n);
  const double factor = G / (G - 1) * (nn - 1) / (nn - static_cast<double>(k));
  const Eigen::MatrixXd V = factor * ZtZinv * meat * ZtZinv;
  DummyFit out{b.head(k), V.diagonal().head(k).cwiseSqrt()};
  return out;
}

}  // namespace testsupport
