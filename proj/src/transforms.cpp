#include "pzc/transforms.hpp"

#include <Eigen/QR>
#include <cmath>
#include <cstdio>
#include <map>

#include "pzc/kernels.hpp"

namespace pzc {

namespace {

const ChainConstants kC;

void check_positive(double v, const char* name) {
  if (!(v > 0.0)) throw std::invalid_argument(std::string(name) + " must be > 0");
}

double release_probability(double noise_factor_eps, double sigma2) {
  const double p = noise_factor_eps * noise_factor_eps / sigma2;
  return p < 1.0 ? p : 1.0;
}

ScaleParams zero_respecting_recipe(double eps, double delta, double L,
                                   double sigma2, double l_eff) {
  ScaleParams sp;
  sp.l_effective = l_eff;
  sp.lambda = kC.lip1 / l_eff * 2.0 * eps;
  sp.T = static_cast<int>(
      std::floor(l_eff * delta / (kC.delta0 * kC.lip1 * 4.0 * eps * eps)));
  sp.p = release_probability(2.0 * kC.varsigma * eps, sigma2);
  sp.lower_bound_rounds = (sp.T - 1) / (2.0 * sp.p);
  return sp;
}

ScaleParams rotated_recipe(double eps, double delta, double L, double sigma2,
                           double l_eff) {
  ScaleParams sp;
  sp.l_effective = l_eff;
  sp.lambda = kC.lip1_rot / l_eff * 4.0 * eps;
  sp.T = static_cast<int>(std::floor(
      l_eff * delta / (kC.lip1_rot * kC.delta0 * 16.0 * eps * eps)));
  sp.p = release_probability(4.0 * kC.varsigma * eps, sigma2);
  sp.lower_bound_rounds = (sp.T - 2) / (2.0 * sp.p);
  return sp;
}

}  // namespace

ScaleParams scale_params_bounded_variance(double eps, double delta, double L,
                                          double sigma2) {
  check_positive(eps, "eps");
  check_positive(delta, "delta");
  check_positive(L, "L");
  check_positive(sigma2, "sigma2");
  const double max_eps = std::sqrt(L * delta / (12.0 * kC.delta0 * kC.lip1));
  if (eps > max_eps)
    throw InfeasibleError("bounded-variance recipe needs T >= 3", max_eps);
  return zero_respecting_recipe(eps, delta, L, sigma2, L);
}

ScaleParams scale_params_mss(double eps, double delta, double lbar,
                             double sigma2) {
  check_positive(eps, "eps");
  check_positive(delta, "delta");
  check_positive(lbar, "lbar");
  check_positive(sigma2, "sigma2");
  const double max_eps =
      std::sqrt(lbar * delta / (12.0 * kC.lip1_bar * kC.delta0));
  if (eps > max_eps)
    throw InfeasibleError("mean-squared smooth recipe infeasible", max_eps);
  const double p = release_probability(2.0 * kC.varsigma * eps, sigma2);
  const double l_eff = kC.lip1 / kC.lip1_bar * lbar * std::sqrt(p);
  return zero_respecting_recipe(eps, delta, l_eff, sigma2, l_eff);
}

ScaleParams scale_params_randomized(double eps, double delta, double L,
                                    double sigma2) {
  check_positive(eps, "eps");
  check_positive(delta, "delta");
  check_positive(L, "L");
  check_positive(sigma2, "sigma2");
  const double max_eps = std::sqrt(L * delta / (64.0 * kC.lip1_rot * kC.delta0));
  if (eps > max_eps)
    throw InfeasibleError("randomized recipe needs T >= 4", max_eps);
  return rotated_recipe(eps, delta, L, sigma2, L);
}

ScaleParams scale_params_randomized_mss(double eps, double delta, double lbar,
                                        double sigma2) {
  check_positive(eps, "eps");
  check_positive(delta, "delta");
  check_positive(lbar, "lbar");
  check_positive(sigma2, "sigma2");
  const double max_eps =
      std::sqrt(lbar * delta / (64.0 * kC.lip1_bar_rot * kC.delta0));
  if (eps > max_eps)
    throw InfeasibleError("randomized mss recipe infeasible", max_eps);
  const double p = release_probability(4.0 * kC.varsigma * eps, sigma2);
  const double l_eff = kC.lip1_rot / kC.lip1_bar_rot * lbar * std::sqrt(p);
  return rotated_recipe(eps, delta, l_eff, sigma2, l_eff);
}

RotationMatrix sample_rotation(int d, int T, std::uint64_t rng_seed) {
  if (d < T || T < 1)
    throw std::invalid_argument("sample_rotation: need d >= T >= 1");
  CounterRng rng(derive_key(rng_seed, 0x726f74ULL));
  Eigen::MatrixXd gauss(d, T);
  for (int j = 0; j < T; ++j)
    for (int i = 0; i < d; ++i) gauss(i, j) = rng.next_gaussian();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gauss);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(d, T);
  const Eigen::MatrixXd r = qr.matrixQR().topRows(T);
  for (int j = 0; j < T; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return RotationMatrix{std::move(q)};
}

SoftProjection soft_project(const Point& x, double R) {
  check_positive(R, "R");
  SoftProjection sp;
  sp.radius = R;
  sp.scale = 1.0 / std::sqrt(1.0 + x.squaredNorm() / (R * R));
  sp.rho = sp.scale * x;
  return sp;
}

CompressedInstance::CompressedInstance(ChainFunction chain, double p,
                                       RotationMatrix rotation, double radius,
                                       double eta)
    : chain_(std::move(chain)),
      p_(p),
      rotation_(std::move(rotation)),
      radius_(radius),
      eta_(eta) {
  if (rotation_.chain_dim() != chain_.length())
    throw std::invalid_argument("CompressedInstance: rotation/chain mismatch");
  check_positive(radius, "radius");
}

double CompressedInstance::value(const Point& x) const {
  if (x.size() != dimension())
    throw std::invalid_argument("CompressedInstance: dimension mismatch");
  const SoftProjection sp = soft_project(x, radius_);
  return chain_.value(rotation_.columns.transpose() * sp.rho) +
         0.5 * eta_ * x.squaredNorm();
}

Point CompressedInstance::estimate(const Point& x, int z) const {
  if (x.size() != dimension())
    throw std::invalid_argument("CompressedInstance: dimension mismatch");
  const SoftProjection sp = soft_project(x, radius_);
  const Point inner = g_smooth(chain_, p_, rotation_.columns.transpose() * sp.rho, z);
  return sp.apply_jacobian(rotation_.columns * inner) + eta_ * x;
}

Point CompressedInstance::mean_gradient(const Point& x) const {
  if (x.size() != dimension())
    throw std::invalid_argument("CompressedInstance: dimension mismatch");
  const SoftProjection sp = soft_project(x, radius_);
  const Point inner = chain_.gradient(rotation_.columns.transpose() * sp.rho);
  return sp.apply_jacobian(rotation_.columns * inner) + eta_ * x;
}

std::pair<double, Point> compressed_eval(const CompressedInstance& ci,
                                         const Point& x, int z) {
  return {ci.value(x), ci.estimate(x, z)};
}

double required_dimension(double K, double T, double p, double delta,
                          double R) {
  if (!(K > 0 && T > 0)) throw std::invalid_argument("K, T must be > 0");
  check_positive(p, "p");
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("delta must be in (0, 1)");
  const double radius = R > 0.0 ? R : 230.0 * std::sqrt(T);
  return std::ceil(18.0 * radius * radius * K * T / p *
                   std::log(2.0 * K * T * T / (p * delta)));
}

// --------------------------------------------------------------------------
// Oracle cores

namespace {

enum class ChainEstimator { Basic, Smooth, Stat };

class ChainCore final : public OracleCore {
 public:
  ChainCore(int T, ChainEstimator which, double p)
      : chain_(T), which_(which), p_(p) {}

  int dimension() const override { return chain_.length(); }
  double objective(const Point& x) const override { return chain_.value(x); }
  Point mean_gradient(const Point& x) const override {
    return chain_.gradient(x);
  }
  Point estimate(const Point& x, const Seed& z) const override {
    const int bit = std::get<int>(z);
    switch (which_) {
      case ChainEstimator::Basic:
        return g_basic(chain_, p_, x, bit);
      case ChainEstimator::Smooth:
        return g_smooth(chain_, p_, x, bit);
      case ChainEstimator::Stat:
        return g_stat(chain_, p_, x, bit);
    }
    throw std::logic_error("unreachable");
  }

  const ChainFunction& chain() const { return chain_; }

 private:
  ChainFunction chain_;
  ChainEstimator which_;
  double p_;
};

class CoordChainCore final : public OracleCore {
 public:
  CoordChainCore(int T, double p) : chain_(T), p_(p) {}
  int dimension() const override { return chain_.length(); }
  double objective(const Point& x) const override { return chain_.value(x); }
  Point mean_gradient(const Point& x) const override {
    return chain_.gradient(x);
  }
  Point estimate(const Point& x, const Seed& z) const override {
    return g_coord(chain_, p_, x, std::get<BitVector>(z));
  }

 private:
  ChainFunction chain_;
  double p_;
};

class ActiveCore final : public OracleCore {
 public:
  ActiveCore(int T, int N, Permutation pi)
      : chain_(T), N_(N), pi_(std::move(pi)) {}
  int dimension() const override { return chain_.length(); }
  double objective(const Point& x) const override { return chain_.value(x); }
  Point mean_gradient(const Point& x) const override {
    return chain_.gradient(x);
  }
  Point estimate(const Point& x, const Seed& z) const override {
    return g_active(chain_, N_, pi_, x, std::get<std::uint64_t>(z));
  }

 private:
  ChainFunction chain_;
  int N_;
  Permutation pi_;
};

class QuadCore final : public OracleCore {
 public:
  QuadCore(double r, int s, double lbar, int dim)
      : r_(r), s_(s), lbar_(lbar), dim_(dim) {}
  int dimension() const override { return dim_; }
  double objective(const Point& x) const override {
    Point shifted = x;
    shifted[0] -= r_ * s_;
    return 0.5 * lbar_ * shifted.squaredNorm();
  }
  Point mean_gradient(const Point& x) const override {
    Point g = lbar_ * x;
    g[0] -= lbar_ * r_ * s_;
    return g;
  }
  Point estimate(const Point& x, const Seed& z) const override {
    return quad_pair(x, std::get<double>(z), s_, r_, lbar_).second;
  }

 private:
  double r_;
  int s_;
  double lbar_;
  int dim_;
};

class CompressedCore final : public OracleCore {
 public:
  explicit CompressedCore(CompressedInstance instance)
      : instance_(std::move(instance)) {}
  int dimension() const override { return instance_.dimension(); }
  double objective(const Point& x) const override { return instance_.value(x); }
  Point mean_gradient(const Point& x) const override {
    return instance_.mean_gradient(x);
  }
  Point estimate(const Point& x, const Seed& z) const override {
    return instance_.estimate(x, std::get<int>(z));
  }

 private:
  CompressedInstance instance_;
};

// Affine wrapper: value_scale * F(x / lambda), (value_scale / lambda) * g(x / lambda, z).
class ScaledCore final : public OracleCore {
 public:
  ScaledCore(std::shared_ptr<const OracleCore> inner, double lambda,
             double value_scale)
      : inner_(std::move(inner)), lambda_(lambda), value_scale_(value_scale) {}
  int dimension() const override { return inner_->dimension(); }
  double objective(const Point& x) const override {
    return value_scale_ * inner_->objective(x / lambda_);
  }
  Point mean_gradient(const Point& x) const override {
    return (value_scale_ / lambda_) * inner_->mean_gradient(x / lambda_);
  }
  Point estimate(const Point& x, const Seed& z) const override {
    return (value_scale_ / lambda_) * inner_->estimate(x / lambda_, z);
  }

 private:
  std::shared_ptr<const OracleCore> inner_;
  double lambda_;
  double value_scale_;
};

}  // namespace

// --------------------------------------------------------------------------
// Builders

std::string to_string(InstanceKind kind) {
  switch (kind) {
    case InstanceKind::ZrBv: return "zr_bv";
    case InstanceKind::ZrMss: return "zr_mss";
    case InstanceKind::RandBv: return "rand_bv";
    case InstanceKind::RandMss: return "rand_mss";
    case InstanceKind::Stat: return "stat";
    case InstanceKind::Active: return "active";
    case InstanceKind::Quad: return "quad";
  }
  throw std::logic_error("unreachable");
}

InstanceKind instance_kind_from_string(const std::string& name) {
  if (name == "zr_bv") return InstanceKind::ZrBv;
  if (name == "zr_mss") return InstanceKind::ZrMss;
  if (name == "rand_bv") return InstanceKind::RandBv;
  if (name == "rand_mss") return InstanceKind::RandMss;
  if (name == "stat") return InstanceKind::Stat;
  if (name == "active") return InstanceKind::Active;
  if (name == "quad") return InstanceKind::Quad;
  throw std::invalid_argument("unknown instance kind: " + name);
}

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> instance_kv(
    const InstanceSpec& spec) {
  std::vector<std::pair<std::string, std::string>> kv;
  kv.emplace_back("kind", to_string(spec.kind));
  kv.emplace_back("eps", fmt_double(spec.eps));
  kv.emplace_back("delta", fmt_double(spec.delta));
  kv.emplace_back("smoothness", fmt_double(spec.smoothness));
  kv.emplace_back("sigma2", fmt_double(spec.sigma2));
  kv.emplace_back("T", std::to_string(spec.T));
  kv.emplace_back("p", fmt_double(spec.p));
  kv.emplace_back("N", std::to_string(spec.N));
  kv.emplace_back("d", std::to_string(spec.d));
  kv.emplace_back("quad_r", fmt_double(spec.quad_r));
  kv.emplace_back("quad_s", std::to_string(spec.quad_s));
  kv.emplace_back("seed", std::to_string(spec.seed));
  return kv;
}

InstanceSpec instance_from_kv(
    const std::vector<std::pair<std::string, std::string>>& kv) {
  InstanceSpec spec;
  for (const auto& [key, value] : kv) {
    if (key == "kind") spec.kind = instance_kind_from_string(value);
    else if (key == "eps") spec.eps = std::stod(value);
    else if (key == "delta") spec.delta = std::stod(value);
    else if (key == "smoothness") spec.smoothness = std::stod(value);
    else if (key == "sigma2") spec.sigma2 = std::stod(value);
    else if (key == "T") spec.T = std::stoi(value);
    else if (key == "p") spec.p = std::stod(value);
    else if (key == "N") spec.N = std::stoi(value);
    else if (key == "d") spec.d = std::stoi(value);
    else if (key == "quad_r") spec.quad_r = std::stod(value);
    else if (key == "quad_s") spec.quad_s = std::stoi(value);
    else if (key == "seed") spec.seed = std::stoull(value);
    else throw std::invalid_argument("unknown instance key: " + key);
  }
  return spec;
}

StochasticOracle unscaled_chain_instance(int T, double p,
                                         ChainEstimatorKind kind) {
  const ChainConstants c;
  OracleCertificate cert;
  cert.delta_bound = c.delta0 * T;
  cert.smoothness = c.lip1;
  cert.p = p;
  cert.T = T;
  cert.d = T;
  switch (kind) {
    case ChainEstimatorKind::Basic: {
      cert.variance_bound = c.varsigma * c.varsigma * (1.0 - p) / p;
      auto core = std::make_shared<ChainCore>(T, ChainEstimator::Basic, p);
      return StochasticOracle(core, SeedDistribution::bernoulli(p), cert);
    }
    case ChainEstimatorKind::Smooth: {
      cert.variance_bound = c.varsigma * c.varsigma * (1.0 - p) / p;
      cert.mss = c.lip1_bar / std::sqrt(p);
      auto core = std::make_shared<ChainCore>(T, ChainEstimator::Smooth, p);
      return StochasticOracle(core, SeedDistribution::bernoulli(p), cert);
    }
    case ChainEstimatorKind::Stat: {
      cert.variance_bound = 1e6 / p;
      cert.mss = std::sqrt((1e11 + c.lip1 * c.lip1) / p);
      auto core = std::make_shared<ChainCore>(T, ChainEstimator::Stat, p);
      return StochasticOracle(core, SeedDistribution::bernoulli(p), cert);
    }
    case ChainEstimatorKind::Coord: {
      cert.variance_bound = c.varsigma * c.varsigma * (1.0 - p) / p;
      auto core = std::make_shared<CoordChainCore>(T, p);
      return StochasticOracle(core, SeedDistribution::bit_vector(p, T), cert);
    }
  }
  throw std::logic_error("unreachable");
}

StochasticOracle build_instance(const InstanceSpec& spec) {
  const ChainConstants c;
  switch (spec.kind) {
    case InstanceKind::ZrBv:
    case InstanceKind::ZrMss: {
      const bool mss = spec.kind == InstanceKind::ZrMss;
      const ScaleParams sp =
          mss ? scale_params_mss(spec.eps, spec.delta, spec.smoothness,
                                 spec.sigma2)
              : scale_params_bounded_variance(spec.eps, spec.delta,
                                              spec.smoothness, spec.sigma2);
      const double value_scale =
          sp.l_effective * sp.lambda * sp.lambda / c.lip1;
      auto base = std::make_shared<ChainCore>(
          sp.T, mss ? ChainEstimator::Smooth : ChainEstimator::Basic, sp.p);
      auto core = std::make_shared<ScaledCore>(base, sp.lambda, value_scale);
      OracleCertificate cert;
      cert.delta_bound = c.delta0 * sp.T * value_scale;
      cert.smoothness = sp.l_effective;
      cert.mss = mss ? spec.smoothness : 0.0;
      cert.variance_bound = spec.sigma2;
      cert.p = sp.p;
      cert.T = sp.T;
      cert.d = sp.T;
      StochasticOracle oracle(core, SeedDistribution::bernoulli(sp.p), cert);
      InstanceGeometry geom;
      geom.lambda = sp.lambda;
      oracle.set_geometry(geom);
      return oracle;
    }
    case InstanceKind::RandBv:
    case InstanceKind::RandMss: {
      const bool mss = spec.kind == InstanceKind::RandMss;
      const ScaleParams sp =
          mss ? scale_params_randomized_mss(spec.eps, spec.delta,
                                            spec.smoothness, spec.sigma2)
              : scale_params_randomized(spec.eps, spec.delta, spec.smoothness,
                                        spec.sigma2);
      const int d = spec.d > 0 ? spec.d : 4 * sp.T;
      if (d < sp.T)
        throw std::invalid_argument("rotated instance needs d >= T");
      const double needed = required_dimension(1, sp.T, sp.p, 0.5);
      if (d < needed) {
        std::fprintf(stderr,
                     "warning: rotated instance built with d=%d, far below "
                     "the certified hiding dimension %.3g; mechanics and "
                     "certificates hold, the hiding guarantee does not\n",
                     d, needed);
      }
      const double radius = 230.0 * std::sqrt(static_cast<double>(sp.T));
      CompressedInstance ci(ChainFunction(sp.T), sp.p,
                            sample_rotation(d, sp.T, spec.seed), radius, 0.2);
      Eigen::MatrixXd rotation = ci.rotation().columns;
      const double value_scale =
          sp.l_effective * sp.lambda * sp.lambda / c.lip1_rot;
      auto base = std::make_shared<CompressedCore>(std::move(ci));
      auto core = std::make_shared<ScaledCore>(base, sp.lambda, value_scale);
      OracleCertificate cert;
      cert.delta_bound = c.delta0 * sp.T * value_scale;
      cert.smoothness = sp.l_effective;
      cert.mss = mss ? spec.smoothness : 0.0;
      cert.variance_bound = spec.sigma2;
      cert.p = sp.p;
      cert.T = sp.T;
      cert.d = d;
      StochasticOracle oracle(core, SeedDistribution::bernoulli(sp.p), cert);
      InstanceGeometry geom;
      geom.lambda = sp.lambda;
      geom.radius = radius;
      geom.rotation = std::move(rotation);
      oracle.set_geometry(geom);
      return oracle;
    }
    case InstanceKind::Stat: {
      if (spec.T < 1 || !(spec.p > 0.0 && spec.p <= 1.0))
        throw std::invalid_argument("stat instance needs T >= 1, p in (0,1]");
      auto core =
          std::make_shared<ChainCore>(spec.T, ChainEstimator::Stat, spec.p);
      OracleCertificate cert;
      cert.delta_bound = c.delta0 * spec.T;
      cert.smoothness = c.lip1;
      cert.mss = std::sqrt((1e11 + c.lip1 * c.lip1) / spec.p);
      cert.variance_bound = 1e6 / spec.p;
      cert.p = spec.p;
      cert.T = spec.T;
      cert.d = spec.T;
      return StochasticOracle(core, SeedDistribution::bernoulli(spec.p), cert);
    }
    case InstanceKind::Active: {
      if (spec.N < 2 || spec.T < 1)
        throw std::invalid_argument("active instance needs N >= 2, T >= 1");
      std::uint64_t size = 1;
      for (int i = 0; i < spec.T; ++i) size *= static_cast<std::uint64_t>(spec.N);
      Permutation pi = Permutation::shuffled(size, spec.seed);
      auto core = std::make_shared<ActiveCore>(spec.T, spec.N, pi);
      const double p = 1.0 / spec.N;
      OracleCertificate cert;
      cert.delta_bound = c.delta0 * spec.T;
      cert.smoothness = c.lip1;
      cert.variance_bound =
          c.varsigma * c.varsigma * (1.0 - p) / p;
      cert.p = p;
      cert.T = spec.T;
      cert.d = spec.T;
      return StochasticOracle(
          core, SeedDistribution::finite_sum(spec.N, spec.T, std::move(pi)),
          cert);
    }
    case InstanceKind::Quad: {
      if (!(spec.quad_r > 0.0) || !(spec.smoothness > 0.0) ||
          !(spec.sigma2 >= 0.0))
        throw std::invalid_argument("quad instance needs r, lbar > 0");
      const int d = spec.d > 0 ? spec.d : 2;
      auto core = std::make_shared<QuadCore>(spec.quad_r, spec.quad_s,
                                             spec.smoothness, d);
      OracleCertificate cert;
      cert.delta_bound = 0.5 * spec.smoothness * spec.quad_r * spec.quad_r;
      cert.smoothness = spec.smoothness;
      cert.mss = spec.smoothness;
      cert.variance_bound = spec.sigma2;
      cert.p = 1.0;
      cert.T = 0;
      cert.d = d;
      return StochasticOracle(
          core,
          SeedDistribution::gaussian(
              spec.quad_r * spec.quad_s,
              spec.sigma2 / (spec.smoothness * spec.smoothness)),
          cert);
    }
  }
  throw std::logic_error("unreachable");
}

}  // namespace pzc
