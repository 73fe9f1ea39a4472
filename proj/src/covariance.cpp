#include "condsq/covariance.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "condsq/quadrature.hpp"

namespace condsq {

namespace {

constexpr int kSmoothOrder = 16;  // exponential-sum profiles
constexpr int kPanelOrder = 4;    // piecewise-linear profiles, per grid interval

// T_k(s) = int_s^tau f(s') e^{mu_k (s' - s)} ds' for the four drift eigenvalues.
class TailIntegrals {
 public:
  TailIntegrals(const TemporalMode& f, const Vec4& rates) : mode_(f), rates_(rates) {
    if (!f.expsum()) build_node_table();
  }

  double profile(double s) const { return mode_(s); }

  Vec4 operator()(double s) const {
    return mode_.expsum() ? from_expsum(s) : from_nodes(s);
  }

 private:
  Vec4 from_expsum(double s) const {
    const double len = mode_.tau() - s;
    Vec4 out = Vec4::Zero();
    for (const auto& term : mode_.expsum()->terms) {
      const double head = term.coef * std::exp(term.rate * s) * len;
      for (int k = 0; k < 4; ++k) out(k) += head * quad::phi1((term.rate + rates_(k)) * len);
    }
    return out;
  }

  // Integral over [s, s + len] of the linear piece starting at value `start`
  // with slope `slope`, weighted by e^{mu (s' - s)}.
  static double linear_piece(double start, double slope, double mu, double len) {
    const double x = mu * len;
    return start * len * quad::phi1(x) + slope * len * len * std::exp(x) * quad::phi2(-x);
  }

  void build_node_table() {
    const auto& v = mode_.values();
    const std::size_t n = v.size();
    const double h = mode_.grid().dt();
    nodes_.assign(n, Vec4::Zero());
    for (std::size_t i = n - 1; i-- > 0;) {
      const double slope = (v[i + 1] - v[i]) / h;
      for (int k = 0; k < 4; ++k) {
        const double mu = rates_(k);
        nodes_[i](k) = linear_piece(v[i], slope, mu, h) + std::exp(mu * h) * nodes_[i + 1](k);
      }
    }
  }

  Vec4 from_nodes(double s) const {
    const auto& v = mode_.values();
    const double h = mode_.grid().dt();
    const double tau = mode_.tau();
    if (s >= tau) return Vec4::Zero();
    const auto i = std::min(static_cast<std::size_t>(std::max(s, 0.0) / h), v.size() - 2);
    const double end = mode_.grid().at(i + 1);
    const double len = end - s;
    const double slope = (v[i + 1] - v[i]) / h;
    const double start = mode_(s);
    Vec4 out;
    for (int k = 0; k < 4; ++k) {
      const double mu = rates_(k);
      out(k) = linear_piece(start, slope, mu, len) + std::exp(mu * len) * nodes_[i + 1](k);
    }
    return out;
  }

  const TemporalMode& mode_;
  Vec4 rates_;
  std::vector<Vec4> nodes_;
};

struct Assembly {
  Mat4 linear;  // L: response to u(0)
  Mat4 noise;   // int W sigma_in W^T
};

class Engine {
 public:
  Engine(const SystemParams& p, const TemporalMode& f)
      : params_(p),
        prop_(p),
        noise_(NoiseSpec::from(p)),
        gain_(noise_gain(p)),
        tails_(f, prop_.rates()) {
    if (std::abs(f.tau() - p.tau()) > 1e-12 * p.tau()) {
      throw InvalidArgument("temporal mode duration differs from the pulse duration");
    }
  }

  // Rows of W(s) scaled column-wise by sqrt(2K).
  Mat4 kernel(double s) const {
    const Mat4& q = prop_.eigenvectors();
    const Vec4 tail = tails_(s);
    const Eigen::Matrix<double, 2, 4> filtered =
        q.topRows<2>() * tail.asDiagonal() * q.transpose();
    Mat4 w;
    w.topRows<2>() = std::sqrt(2.0 * params_.kappa()) * filtered;
    w.bottomRows<2>() = prop_.sample(params_.tau() - s).bottomRows<2>();
    w = w * gain_.asDiagonal();
    const double f = tails_.profile(s);
    w(0, 0) -= f;
    w(1, 1) -= f;
    return w;
  }

  Mat4 linear() const {
    const Mat4& q = prop_.eigenvectors();
    Mat4 l;
    l.topRows<2>() = std::sqrt(2.0 * params_.kappa()) * q.topRows<2>() *
                     tails_(0.0).asDiagonal() * q.transpose();
    l.bottomRows<2>() = prop_.sample(params_.tau()).bottomRows<2>();
    return l;
  }

  Mat4 noise_integral(std::size_t panels, const quad::GaussLegendre& rule) const {
    const Vec4 sigma_in = noise_.sigma_in;
    auto integrand = [&](double s) -> Mat4 {
      const Mat4 w = kernel(s);
      return w * sigma_in.asDiagonal() * w.transpose();
    };
    return quad::composite_gauss<Mat4>(integrand, 0.0, params_.tau(), panels, rule,
                                       Mat4::Zero());
  }

  Mat4 assemble(std::size_t panels, const quad::GaussLegendre& rule) const {
    const Mat4 l = linear();
    return l * noise_.sigma0.asDiagonal() * l.transpose() + noise_integral(panels, rule);
  }

  const Propagator& propagator() const { return prop_; }

 private:
  SystemParams params_;
  Propagator prop_;
  NoiseSpec noise_;
  Vec4 gain_;
  TailIntegrals tails_;
};

Mat4 mechanical_full(const SystemParams& p, const Propagator& prop) {
  const NoiseSpec noise = NoiseSpec::from(p);
  const Vec4 diffusion = noise_gain(p).array().square() * noise.sigma_in.array();
  const Mat4& q = prop.eigenvectors();
  const Vec4& mu = prop.rates();
  Mat4 inner = q.transpose() * diffusion.asDiagonal() * q;
  for (int k = 0; k < 4; ++k) {
    for (int l = 0; l < 4; ++l) inner(k, l) *= quad::exp_integral(mu(k) + mu(l), 0.0, p.tau());
  }
  const Mat4 m = prop.sample(p.tau());
  return m * noise.sigma0.asDiagonal() * m.transpose() + q * inner * q.transpose();
}

}  // namespace

Mat2 mechanical_block(const SystemParams& p) {
  const Propagator prop(p);
  const Mat4 full = mechanical_full(p, prop);
  const Mat2 block = full.bottomRightCorner<2, 2>();
  return 0.5 * (block + block.transpose());
}

FilteredState filtered_state(const SystemParams& p, const TemporalMode& f) {
  const Engine engine(p, f);

  std::size_t panels;
  int order;
  if (f.expsum()) {
    const double rate = engine.propagator().rates().cwiseAbs().maxCoeff() +
                        f.expsum()->max_abs_rate();
    panels = std::max<std::size_t>(8, static_cast<std::size_t>(std::ceil(2.0 * rate * p.tau())));
    order = kSmoothOrder;
  } else {
    panels = f.grid().points - 1;
    order = kPanelOrder;
  }
  const quad::GaussLegendre rule(order);
  const Mat4 coarse = engine.assemble(panels, rule);
  Mat4 fine = engine.assemble(2 * panels, rule);

  QuadratureReport report;
  const double scale = std::max(1.0, fine.cwiseAbs().maxCoeff());
  report.error_estimate = (fine - coarse).cwiseAbs().maxCoeff() / scale;
  report.converged = report.error_estimate <= kQuadratureFlagThreshold;

  fine.bottomRightCorner<2, 2>() =
      mechanical_full(p, engine.propagator()).bottomRightCorner<2, 2>();
  return {JointCM(fine), f, p, report};
}

Mat2 output_block(const SystemParams& p, const TemporalMode& f) {
  return filtered_state(p, f).cm.v_out();
}

Mat2 cross_block(const SystemParams& p, const TemporalMode& f) {
  return filtered_state(p, f).cm.v_c();
}

JointCM apply_loss(const JointCM& v, double eta) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw InvalidArgument("loss transmittance must lie in [0, 1]");
  const Mat2 out = eta * v.v_out() + (1.0 - eta) * Mat2::Identity();
  return JointCM(out, std::sqrt(eta) * v.v_c(), v.v_m());
}

double cm_relative_difference(const Mat4& a, const Mat4& b) {
  double worst = 0.0;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      worst = std::max(worst, std::abs(a(i, j) - b(i, j)) / std::max(std::abs(b(i, j)), 1.0));
    }
  }
  return worst;
}

}  // namespace condsq
