#include "tgbs/cv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "tgbs/parallel.hpp"

namespace tgbs {

namespace {

constexpr double kRoundoffFloor = 1e-12;
constexpr int kMaxBisections = 2200;

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_pdf(double x, double mean, double var) {
  const double d = x - mean;
  return std::exp(-0.5 * d * d / var) / std::sqrt(2.0 * std::numbers::pi * var);
}

double gaussian2(const Eigen::Vector2d& r, const Eigen::Vector2d& mean, const Eigen::Matrix2d& cov) {
  const Eigen::Vector2d d = r - mean;
  const double det = cov.determinant();
  return std::exp(-0.5 * d.dot(cov.inverse() * d)) / (2.0 * std::numbers::pi * std::sqrt(det));
}

double radical_inverse(std::uint64_t i, std::uint64_t base) {
  double result = 0.0;
  double f = 1.0 / static_cast<double>(base);
  for (; i > 0; i /= base, f /= static_cast<double>(base)) result += f * static_cast<double>(i % base);
  return result;
}

std::vector<int> remaining_indices(int modes, int position) {
  std::vector<int> idx;
  for (int half = 0; half < 2; ++half)
    for (int k = 0; k < modes; ++k)
      if (k != position) idx.push_back(k + half * modes);
  return idx;
}

// Solves F(t) = u for a nondecreasing F by bracketing then bisection.
template <typename F>
double invert(F&& cdf, double u, double center, double scale, double tol) {
  double lo = center - scale;
  double hi = center + scale;
  for (int i = 0; cdf(lo) > u; ++i) {
    if (i > 200) throw NumericalError("sample_outcome: cannot bracket the CDF");
    lo -= hi - lo;
  }
  for (int i = 0; cdf(hi) < u; ++i) {
    if (i > 200) throw NumericalError("sample_outcome: cannot bracket the CDF");
    hi += hi - lo;
  }
  for (int i = 0; i < kMaxBisections; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double f = cdf(mid);
    if (std::abs(f - u) <= tol || mid <= lo || mid >= hi) return mid;
    (f < u ? lo : hi) = mid;
  }
  throw NumericalError("sample_outcome: bisection did not converge");
}

}  // namespace

GaussianPOVM::GaussianPOVM(Eigen::Matrix2d W, Kind kind) : W_(std::move(W)), kind_(kind) {}

GaussianPOVM GaussianPOVM::homodyne(double s) {
  if (!(s > 0.0)) throw std::invalid_argument("homodyne: squeezing parameter must be positive");
  Eigen::Matrix2d W = Eigen::Matrix2d::Zero();
  W(0, 0) = 1.0 / (s * s);
  W(1, 1) = s * s;
  return GaussianPOVM(W, Kind::kHomodyne);
}

GaussianPOVM GaussianPOVM::heterodyne() { return GaussianPOVM(Eigen::Matrix2d::Identity(), Kind::kHeterodyne); }

GaussianPOVM GaussianPOVM::custom(const Eigen::Matrix2d& W) {
  if ((W - W.transpose()).cwiseAbs().maxCoeff() > kSymmetryTolerance)
    throw std::invalid_argument("GaussianPOVM: W must be symmetric");
  if (!(W.determinant() > 0.0 && W(0, 0) > 0.0)) throw std::invalid_argument("GaussianPOVM: W must be positive definite");
  return GaussianPOVM(W, Kind::kCustom);
}

std::string GaussianPOVM::label() const {
  switch (kind_) {
    case Kind::kHomodyne: return "hom";
    case Kind::kHeterodyne: return "het";
    default: return "custom";
  }
}

OutcomeDensity::OutcomeDensity(std::vector<DensityComponent> components) : components_(std::move(components)) {
  if (components_.empty()) throw std::invalid_argument("OutcomeDensity: no components");
  PairwiseSum<double> total;
  double magnitude = 0.0;
  for (const auto& c : components_) {
    if (!(c.covariance.determinant() > 0.0 && c.covariance(0, 0) > 0.0))
      throw NumericalError("OutcomeDensity: component covariance is not positive definite");
    total.add(c.weight);
    magnitude += std::abs(c.weight);
  }
  normalization_ = total.result();
  if (std::abs(normalization_ - 1.0) > kWeightSumTolerance * std::max(1.0, magnitude))
    throw NumericalError("OutcomeDensity: weights sum to " + std::to_string(normalization_));

  // Halton probe over a box of six widest standard deviations.
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  Eigen::Vector2d width = Eigen::Vector2d::Zero();
  for (const auto& c : components_) {
    center += c.mean;
    width = width.cwiseMax(c.covariance.diagonal().cwiseSqrt());
  }
  center /= static_cast<double>(components_.size());
  for (const auto& c : components_) width = width.cwiseMax((c.mean - center).cwiseAbs() / 6.0);
  min_probe_ = std::numeric_limits<double>::infinity();
  for (int i = 1; i <= kNegativityProbes; ++i) {
    const Eigen::Vector2d u(radical_inverse(i, 2), radical_inverse(i, 3));
    const Eigen::Vector2d r = center + (12.0 * u - Eigen::Vector2d::Constant(6.0)).cwiseProduct(width);
    min_probe_ = std::min(min_probe_, (*this)(r));
  }
  if (min_probe_ < -kNegativityTolerance)
    throw NumericalError("OutcomeDensity: density is negative (" + std::to_string(min_probe_) + ")");
}

double OutcomeDensity::operator()(const Eigen::Vector2d& r) const {
  PairwiseSum<double> sum;
  for (const auto& c : components_) sum.add(c.weight * gaussian2(r, c.mean, c.covariance));
  return sum.result();
}

double OutcomeDensity::marginal_x(double x) const {
  PairwiseSum<double> sum;
  for (const auto& c : components_) sum.add(c.weight * normal_pdf(x, c.mean(0), c.covariance(0, 0)));
  return sum.result();
}

double OutcomeDensity::cdf_x(double x) const {
  PairwiseSum<double> sum;
  for (const auto& c : components_) sum.add(c.weight * normal_cdf((x - c.mean(0)) / std::sqrt(c.covariance(0, 0))));
  return sum.result();
}

double OutcomeDensity::conditional_cdf_p(double p, double x) const {
  PairwiseSum<double> num;
  PairwiseSum<double> den;
  for (const auto& c : components_) {
    const double cxx = c.covariance(0, 0);
    const double w = c.weight * normal_pdf(x, c.mean(0), cxx);
    const double mean = c.mean(1) + c.covariance(0, 1) / cxx * (x - c.mean(0));
    const double var = c.covariance(1, 1) - c.covariance(0, 1) * c.covariance(0, 1) / cxx;
    num.add(w * normal_cdf((p - mean) / std::sqrt(var)));
    den.add(w);
  }
  const double d = den.result();
  if (!(d > 0.0)) throw NumericalError("OutcomeDensity: x outcome has zero marginal density");
  return num.result() / d;
}

GaussianMixture marginal(const GaussianMixture& mixture, int label) {
  const int pos = mixture.position(label);
  const int n = mixture.modes();
  const std::vector<int> b{pos, pos + n};
  std::vector<MixtureBranch> branches;
  branches.reserve(mixture.size());
  for (const auto& br : mixture.branches())
    branches.push_back({br.weight, QuadratureState(br.state.covariance()(b, b), br.state.means()(b))});
  return GaussianMixture({label}, std::move(branches), mixture.history());
}

OutcomeDensity outcome_density(const GaussianMixture& mixture, int label, const GaussianPOVM& povm) {
  const GaussianMixture single = marginal(mixture, label);
  std::vector<DensityComponent> components;
  components.reserve(single.size());
  for (const auto& br : single.branches()) {
    Eigen::Matrix2d cov = br.state.covariance();
    cov += povm.W();
    components.push_back({br.weight, cov, Eigen::Vector2d(br.state.means())});
  }
  return OutcomeDensity(std::move(components));
}

Eigen::Vector2d sample_outcome(const OutcomeDensity& density, Rng& rng, double tol) {
  double center_x = 0.0;
  double scale_x = 0.0;
  double center_p = 0.0;
  double scale_p = 0.0;
  for (const auto& c : density.components()) {
    center_x += c.mean(0);
    center_p += c.mean(1);
    scale_x = std::max(scale_x, std::sqrt(c.covariance(0, 0)));
    scale_p = std::max(scale_p, std::sqrt(c.covariance(1, 1)));
  }
  const double k = static_cast<double>(density.components().size());
  const double u1 = rng.uniform();
  const double u2 = rng.uniform();
  const double x = invert([&](double t) { return density.cdf_x(t); }, u1, center_x / k, 8.0 * scale_x, tol);
  const double p =
      invert([&](double t) { return density.conditional_cdf_p(t, x); }, u2, center_p / k, 8.0 * scale_p, tol);
  return {x, p};
}

BackactionResult backaction(const GaussianMixture& mixture, int label, const GaussianPOVM& povm,
                            const Eigen::Vector2d& outcome) {
  const int pos = mixture.position(label);
  const int n = mixture.modes();
  const std::vector<int> a = remaining_indices(n, pos);
  const std::vector<int> b{pos, pos + n};

  std::vector<MixtureBranch> next;
  next.reserve(mixture.size());
  PairwiseSum<double> total;
  double scale = 0.0;
  for (const auto& br : mixture.branches()) {
    const Matrix& V = br.state.covariance();
    const Vector& r = br.state.means();
    Eigen::Matrix2d VBW = V(b, b);
    VBW += povm.W();
    const Eigen::Matrix2d inv = VBW.inverse();
    const Eigen::Vector2d rB = r(b);
    const double q = gaussian2(outcome, rB, VBW);
    const Matrix K = V(a, b) * inv;
    Matrix VA = V(a, a);
    VA.noalias() -= K * V(a, b).transpose();
    VA = (0.5 * (VA + VA.transpose())).eval();
    Vector rA = r(a);
    rA.noalias() += K * (outcome - rB);
    next.push_back({br.weight * q, QuadratureState(std::move(VA), std::move(rA))});
    total.add(br.weight * q);
    scale += std::abs(br.weight * q);
  }
  const double p = total.result();
  if (!(p >= kImpossibleEvent) || p < kRoundoffFloor * scale)
    throw NumericalError("backaction: outcome on mode " + std::to_string(label) + " has density " +
                         std::to_string(p) + " (impossible event)");
  for (auto& br : next) br.weight /= p;

  std::vector<int> labels = mixture.labels();
  labels.erase(labels.begin() + pos);
  GaussianMixture result(std::move(labels), std::move(next), mixture.history());
  if (std::abs(result.weight_sum() - 1.0) > kWeightSumTolerance * std::max(1.0, scale / p))
    throw NumericalError("backaction: mixture weights no longer sum to one");
  return {std::move(result), p};
}

PipelineResult simulate_pipeline(const PipelineConfig& config) {
  const int l = config.state.modes();
  const bool dyne =
      config.pipeline == Pipeline::kHeraldHomodyne || config.pipeline == Pipeline::kHeraldHeterodyne;
  if (config.pipeline == Pipeline::kThreshold && !config.herald_modes.empty())
    throw std::invalid_argument("pipeline A takes no heralded modes");
  if (dyne && config.measured_modes.empty()) throw std::invalid_argument("pipeline: no modes to measure");
  if (!dyne && !config.measured_modes.empty())
    throw std::invalid_argument("pipeline: threshold pipelines measure every remaining mode");
  if (config.shots == 0) throw std::invalid_argument("pipeline: shots must be at least 1");
  require_physical(config.state);

  PipelineResult result;
  HeraldResult heralded = herald(config.state, config.herald_modes, config.herald_clicks);
  result.herald_probability = heralded.probability;
  GaussianMixture start = std::move(heralded.mixture);
  if (config.unitary) {
    if (config.unitary->dimension() != start.modes())
      throw std::invalid_argument("pipeline: unitary must act on the " + std::to_string(start.modes()) +
                                  " modes left after heralding");
    std::vector<MixtureBranch> branches;
    for (const auto& br : start.branches()) branches.push_back({br.weight, apply_interferometer(br.state, *config.unitary)});
    start = GaussianMixture(start.labels(), std::move(branches), start.history());
  }
  result.branches = start.size();
  for (int label : config.measured_modes) start.position(label);

  const GaussianPOVM povm = config.pipeline == Pipeline::kHeraldHeterodyne
                                ? GaussianPOVM::heterodyne()
                                : GaussianPOVM::homodyne(config.homodyne_squeezing);
  std::vector<int> heralded_clicks;
  for (std::size_t i = 0; i < config.herald_modes.size(); ++i)
    if (config.herald_clicks[i]) heralded_clicks.push_back(config.herald_modes[i]);

  result.records.resize(config.shots);
  parallel_for(static_cast<std::int64_t>(config.shots), config.threads, [&](std::int64_t i) {
    const auto index = static_cast<std::uint64_t>(i);
    Rng rng = Rng::substream(config.seed, index);
    PipelineRecord record;
    record.seed = config.seed;
    record.substream = index;
    GaussianMixture mixture = start;
    std::vector<int> clicked = heralded_clicks;
    if (dyne) {
      for (int label : config.measured_modes) {
        const Eigen::Vector2d r = sample_outcome(outcome_density(mixture, label, povm), rng);
        mixture = backaction(mixture, label, povm, r).mixture;
        record.cv.push_back({label, povm.label(), r});
      }
    } else {
      std::vector<int> order = mixture.labels();
      std::reverse(order.begin(), order.end());
      for (int label : order)
        if (mixture.draw(label, rng).first) clicked.push_back(label);
    }
    std::sort(clicked.begin(), clicked.end());
    record.pattern = ClickPattern(l, clicked);
    result.records[static_cast<std::size_t>(i)] = std::move(record);
  });
  return result;
}

}  // namespace tgbs
