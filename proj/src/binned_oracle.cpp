// Time-binned discrete Gaussian map. Shares no integration code with the
// covariance engine: the per-bin map and its noise come from dense matrix
// exponentials, and the filter is the mode sampled at bin midpoints.

#include <cmath>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "condsq/covariance.hpp"

namespace condsq {

JointCM binned_oracle(const SystemParams& p, const TemporalMode& mode, std::size_t n_bins) {
  if (static_cast<double>(n_bins) < 64.0 * p.kappa() * p.tau()) {
    throw InvalidArgument("binned oracle needs n_bins >= 64 kappa tau");
  }
  if (std::abs(mode.tau() - p.tau()) > 1e-12 * p.tau()) {
    throw InvalidArgument("temporal mode duration differs from the pulse duration");
  }
  using Mat6 = Eigen::Matrix<double, 6, 6>;
  using Mat12 = Eigen::Matrix<double, 12, 12>;

  const double h = p.tau() / static_cast<double>(n_bins);
  const NoiseSpec noise = NoiseSpec::from(p);
  const double root = std::sqrt(2.0 * p.kappa());

  // Unit-weight increment over one bin: x = (u, d) with du = A u ds + S dW and
  // dd = -dW_opt + sqrt(2 kappa) u_opt ds, d(0) = 0.
  Mat6 f = Mat6::Zero();
  f.topLeftCorner<4, 4>() = build_drift(p).a;
  f(4, 0) = root;
  f(5, 1) = root;
  Eigen::Matrix<double, 6, 4> g = Eigen::Matrix<double, 6, 4>::Zero();
  g.topRows<4>() = noise_gain(p).asDiagonal();
  g(4, 0) = -1.0;
  g(5, 1) = -1.0;
  const Mat6 diffusion = g * noise.sigma_in.asDiagonal() * g.transpose();

  // Van Loan: exp([[-F, G Sigma G^T], [0, F^T]] h) yields e^{Fh} and the
  // exact bin noise covariance Q = e^{Fh} (upper-right block).
  Mat12 c = Mat12::Zero();
  c.topLeftCorner<6, 6>() = -f;
  c.topRightCorner<6, 6>() = diffusion;
  c.bottomRightCorner<6, 6>() = f.transpose();
  const Mat12 ec = (c * h).exp();
  const Mat6 phi = ec.bottomRightCorner<6, 6>().transpose();
  Mat6 q = phi * ec.topRightCorner<6, 6>();
  q = 0.5 * (q + q.transpose()).eval();

  // Midpoint samples, rescaled so the piecewise-constant mode has unit norm.
  std::vector<double> weights(n_bins);
  double norm2 = 0.0;
  for (std::size_t n = 0; n < n_bins; ++n) {
    weights[n] = mode((static_cast<double>(n) + 0.5) * h);
    norm2 += weights[n] * weights[n] * h;
  }
  if (!(norm2 > 0.0)) throw InvalidArgument("temporal mode vanishes on the bin grid");
  const double rescale = 1.0 / std::sqrt(norm2);

  // State (u, q_acc): the accumulated filtered output gains w * d per bin.
  Mat6 cov = Mat6::Zero();
  cov.topLeftCorner<4, 4>() = noise.sigma0.asDiagonal();
  Mat6 transfer = Mat6::Identity();
  transfer.topLeftCorner<4, 4>() = phi.topLeftCorner<4, 4>();

  for (std::size_t n = 0; n < n_bins; ++n) {
    const double w = rescale * weights[n];
    transfer.bottomLeftCorner<2, 4>() = w * phi.bottomLeftCorner<2, 4>();
    Mat6 scale = Mat6::Identity();
    scale(4, 4) = w;
    scale(5, 5) = w;
    cov = transfer * cov * transfer.transpose() + scale * q * scale;
    cov = 0.5 * (cov + cov.transpose()).eval();
  }

  Mat4 v;
  const int order[4] = {4, 5, 2, 3};
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) v(i, j) = cov(order[i], order[j]);
  }
  return JointCM(v);
}

}  // namespace condsq
