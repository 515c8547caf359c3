#include "netform/dyadic.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "netform/error.hpp"
#include "netform/halton.hpp"

namespace netform {

void DyadFrame::validate() const {
  const auto n = rows();
  if (cluster.size() != n || sender.size() != n || receiver.size() != n ||
      static_cast<std::size_t>(x.rows()) != n)
    throw ValidationError("dyad frame columns differ in length");
  if (static_cast<std::size_t>(x.cols()) != names.size())
    throw ValidationError("dyad frame has " + std::to_string(x.cols()) + " regressors but " +
                          std::to_string(names.size()) + " names");
  for (std::size_t r = 0; r < n; ++r)
    if (sender[r] == receiver[r]) throw ValidationError("dyad frame row " + std::to_string(r) + " is a self-pair");
}

DyadFrame dyad_frame(const NetworkPanel& panel, const std::vector<Network>& followups,
                     bool with_instrument) {
  panel.validate();
  if (followups.size() != panel.size())
    throw ConfigError("need one followup network per classroom");
  DyadFrame f;
  if (panel.empty()) return f;
  const std::size_t k = panel.k();
  f.names = panel.observations.front().covariates.names();
  if (with_instrument) f.names.push_back("instrument");
  std::size_t rows = 0;
  for (const auto& o : panel.observations) rows += o.baseline.n_pairs();
  f.y.resize(static_cast<Eigen::Index>(rows));
  f.x.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(f.names.size()));
  std::size_t r = 0, offset = 0;
  for (std::size_t c = 0; c < panel.size(); ++c) {
    const auto& o = panel.observations[c];
    const std::size_t n = o.baseline.size();
    if (followups[c].size() != n) throw ConfigError("followup " + std::to_string(c) + " has the wrong size");
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        const auto ri = static_cast<Eigen::Index>(r);
        f.cluster.push_back(c);
        f.sender.push_back(offset + i);
        f.receiver.push_back(offset + j);
        f.y(ri) = followups[c](i, j) ? 1.0 : 0.0;
        for (std::size_t l = 0; l < k; ++l) f.x(ri, static_cast<Eigen::Index>(l)) = o.covariates.covariate(i, j, l);
        if (with_instrument) f.x(ri, static_cast<Eigen::Index>(k)) = o.covariates.instrument(i, j);
        ++r;
      }
    offset += n;
  }
  return f;
}

DyadFrame dyad_frame(const NetworkPanel& panel, bool with_instrument) {
  std::vector<Network> followups;
  for (const auto& o : panel.observations) followups.push_back(o.followup);
  return dyad_frame(panel, followups, with_instrument);
}

namespace {

// Subtracts group means in place; returns the largest adjustment.
double demean_groups(Eigen::MatrixXd& m, const std::vector<std::size_t>& group, std::size_t n_groups) {
  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_groups), m.cols());
  std::vector<double> counts(n_groups, 0.0);
  for (std::size_t r = 0; r < group.size(); ++r) {
    sums.row(static_cast<Eigen::Index>(group[r])) += m.row(static_cast<Eigen::Index>(r));
    counts[group[r]] += 1;
  }
  for (std::size_t g = 0; g < n_groups; ++g)
    if (counts[g] > 0) sums.row(static_cast<Eigen::Index>(g)) /= counts[g];
  double change = 0.0;
  for (std::size_t r = 0; r < group.size(); ++r) {
    m.row(static_cast<Eigen::Index>(r)) -= sums.row(static_cast<Eigen::Index>(group[r]));
  }
  if (sums.size() > 0) change = sums.cwiseAbs().maxCoeff();
  return change;
}

std::vector<std::size_t> compact(const std::vector<std::size_t>& ids, std::size_t& n_groups) {
  std::map<std::size_t, std::size_t> index;
  std::vector<std::size_t> out;
  out.reserve(ids.size());
  for (auto id : ids) out.push_back(index.emplace(id, index.size()).first->second);
  n_groups = index.size();
  return out;
}

}  // namespace

DyadicFit dyadic_ols(const DyadFrame& frame, const DyadicOptions& opt) {
  frame.validate();
  const std::size_t n = frame.rows();
  DyadicFit fit;
  fit.n = n;

  std::size_t n_clusters = 0;
  const auto cl = compact(frame.cluster, n_clusters);
  fit.clusters = n_clusters;

  // Response in column 0, regressors after it.
  Eigen::MatrixXd m(static_cast<Eigen::Index>(n), frame.x.cols() + 1);
  m.col(0) = frame.y;
  m.rightCols(frame.x.cols()) = frame.x;
  if (opt.fixed_effects) {
    fit.names = frame.names;
    std::size_t ns = 0, nr = 0;
    const auto s = compact(frame.sender, ns);
    const auto r = compact(frame.receiver, nr);
    for (;;) {
      const double ds = demean_groups(m, s, ns);
      const double dr = demean_groups(m, r, nr);
      ++fit.demean_sweeps;
      if (std::max(ds, dr) < opt.demean_tolerance) break;
      if (fit.demean_sweeps >= opt.max_demean_sweeps)
        throw NumericError("fixed-effect demeaning did not converge in " +
                           std::to_string(opt.max_demean_sweeps) + " sweeps");
    }
  } else {
    fit.names.push_back("intercept");
    fit.names.insert(fit.names.end(), frame.names.begin(), frame.names.end());
    Eigen::MatrixXd with_const(m.rows(), m.cols() + 1);
    with_const.col(0) = m.col(0);
    with_const.col(1).setOnes();
    with_const.rightCols(m.cols() - 1) = m.rightCols(m.cols() - 1);
    m = std::move(with_const);
  }
  const Eigen::VectorXd y = m.col(0);
  const Eigen::MatrixXd X = m.rightCols(m.cols() - 1);
  const auto k = static_cast<std::size_t>(X.cols());
  if (k == 0) throw ConfigError("dyadic regression has no regressors");
  if (n <= k) throw ValidationError("dyadic regression needs more rows than regressors");

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(1e-10);
  if (static_cast<std::size_t>(qr.rank()) < k) {
    std::string bad;
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index c = qr.rank(); c < perm.size(); ++c) {
      if (!bad.empty()) bad += ", ";
      bad += fit.names[static_cast<std::size_t>(perm(c))];
    }
    throw ValidationError("dyadic design is rank deficient; collinear columns: " + bad);
  }
  fit.coef = qr.solve(y);
  const Eigen::VectorXd e = y - X * fit.coef;

  const Eigen::MatrixXd bread = (X.transpose() * X).ldlt().solve(Eigen::MatrixXd::Identity(
      static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)));
  Eigen::MatrixXd scores = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_clusters), static_cast<Eigen::Index>(k));
  for (std::size_t r = 0; r < n; ++r)
    scores.row(static_cast<Eigen::Index>(cl[r])) += e(static_cast<Eigen::Index>(r)) * X.row(static_cast<Eigen::Index>(r));
  const Eigen::MatrixXd meat = scores.transpose() * scores;
  const double G = static_cast<double>(n_clusters);
  const double factor = G > 1 ? G / (G - 1) * (static_cast<double>(n) - 1) / static_cast<double>(n - k) : 1.0;
  fit.cov = factor * bread * meat * bread;
  fit.cov = 0.5 * (fit.cov + fit.cov.transpose()).eval();
  fit.se = fit.cov.diagonal().cwiseMax(0.0).cwiseSqrt();

  const double ssr = e.squaredNorm();
  const double sst = (frame.y.array() - frame.y.mean()).matrix().squaredNorm();
  fit.r2 = sst > 0 ? 1 - ssr / sst : 0.0;
  const double sst_w = opt.fixed_effects ? y.squaredNorm() : sst;
  fit.r2_within = sst_w > 0 ? 1 - ssr / sst_w : 0.0;
  return fit;
}

std::string significance_stars(double coef, double se) {
  if (!(se > 0)) return "";
  const double p = 2 * (1 - normal_cdf(std::abs(coef / se)));
  if (p < 0.01) return "***";
  if (p < 0.05) return "**";
  if (p < 0.1) return "*";
  return "";
}

}  // namespace netform
