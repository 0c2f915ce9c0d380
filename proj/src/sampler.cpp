#include "tgbs/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tgbs/parallel.hpp"

namespace tgbs {

namespace {

constexpr double kClampBand = 1e-10;
constexpr double kRoundoffFloor = 1e-12;

std::vector<int> remaining_indices(int modes, int position) {
  std::vector<int> idx;
  idx.reserve(2 * modes - 2);
  for (int half = 0; half < 2; ++half)
    for (int k = 0; k < modes; ++k)
      if (k != position) idx.push_back(k + half * modes);
  return idx;
}

double clamp_band(double p, const char* who) {
  if (!(p >= -kClampBand && p <= 1.0 + kClampBand))
    throw NumericalError(std::string(who) + ": no-click probability " + std::to_string(p) + " outside [0, 1]");
  return std::clamp(p, 0.0, 1.0);
}

}  // namespace

std::pair<double, QuadratureState> condition_no_click(const QuadratureState& state, int position) {
  const int n = state.modes();
  if (position < 0 || position >= n) throw std::invalid_argument("condition_no_click: mode out of range");
  const Matrix& V = state.covariance();
  const Vector& r = state.means();
  const std::vector<int> a = remaining_indices(n, position);
  const std::vector<int> b{position, position + n};

  Eigen::Matrix2d VB = V(b, b);
  VB += Eigen::Matrix2d::Identity();
  const double det = VB.determinant();
  if (!(det > 0.0)) throw NumericalError("condition_no_click: V_B + 1 is singular");
  const Eigen::Matrix2d VB_inv = VB.inverse();
  const Eigen::Vector2d rB = r(b);
  const double q = 2.0 * std::exp(-0.5 * rB.dot(VB_inv * rB)) / std::sqrt(det);

  const Matrix VAB = V(a, b);
  const Matrix K = VAB * VB_inv;
  Matrix VA = V(a, a);
  VA.noalias() -= K * VAB.transpose();
  VA = (0.5 * (VA + VA.transpose())).eval();
  Vector rA = r(a);
  rA.noalias() -= K * rB;
  return {q, QuadratureState(std::move(VA), std::move(rA))};
}

QuadratureState trace_out(const QuadratureState& state, int position) {
  const int n = state.modes();
  if (position < 0 || position >= n) throw std::invalid_argument("trace_out: mode out of range");
  const std::vector<int> a = remaining_indices(n, position);
  return QuadratureState(state.covariance()(a, a), state.means()(a));
}

GaussianMixture::GaussianMixture(const QuadratureState& state) {
  for (int k = 1; k <= state.modes(); ++k) labels_.push_back(k);
  branches_.push_back({1.0, state});
}

GaussianMixture::GaussianMixture(std::vector<int> labels, std::vector<MixtureBranch> branches,
                                 std::vector<std::pair<int, bool>> history)
    : labels_(std::move(labels)), branches_(std::move(branches)), history_(std::move(history)) {
  for (const auto& b : branches_)
    if (b.state.modes() != modes()) throw std::invalid_argument("GaussianMixture: branch has wrong mode count");
}

double GaussianMixture::weight_sum() const {
  PairwiseSum<double> sum;
  for (const auto& b : branches_) sum.add(b.weight);
  return sum.result();
}

int GaussianMixture::position(int label) const {
  const auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end())
    throw std::invalid_argument("GaussianMixture: mode " + std::to_string(label) + " is not available");
  return static_cast<int>(it - labels_.begin());
}

double GaussianMixture::no_click_probability(int label) const {
  const int pos = position(label);
  PairwiseSum<double> p;
  for (const auto& b : branches_) p.add(b.weight * condition_no_click(b.state, pos).first);
  return clamp_band(p.result(), "no_click_probability");
}

template <typename Decide>
double GaussianMixture::update(int label, Decide&& decide, bool& click) {
  const int pos = position(label);
  std::vector<std::pair<double, QuadratureState>> conditioned;
  conditioned.reserve(branches_.size());
  PairwiseSum<double> sum;
  double scale = 0.0;
  for (const auto& b : branches_) {
    conditioned.push_back(condition_no_click(b.state, pos));
    sum.add(b.weight * conditioned.back().first);
    scale += std::abs(b.weight * conditioned.back().first);
  }
  const double p = clamp_band(sum.result(), "sampler step");
  click = decide(p);
  const double outcome = click ? 1.0 - p : p;
  // Below the roundoff level of the signed sum an outcome cannot be told
  // apart from an impossible one.
  if (!(outcome >= kImpossibleEvent) || outcome < kRoundoffFloor * std::max(1.0, scale))
    throw NumericalError("sampler: outcome on mode " + std::to_string(label) + " has probability " +
                         std::to_string(outcome) + " (impossible event)");

  std::vector<MixtureBranch> next;
  if (click) {
    next.reserve(2 * branches_.size());
    for (std::size_t k = 0; k < branches_.size(); ++k) {
      next.push_back({branches_[k].weight / outcome, trace_out(branches_[k].state, pos)});
      next.push_back({-branches_[k].weight * conditioned[k].first / outcome, std::move(conditioned[k].second)});
    }
  } else {
    next.reserve(branches_.size());
    for (std::size_t k = 0; k < branches_.size(); ++k)
      next.push_back({branches_[k].weight * conditioned[k].first / outcome, std::move(conditioned[k].second)});
  }
  branches_ = std::move(next);
  labels_.erase(labels_.begin() + pos);
  history_.emplace_back(label, click);

  double magnitude = 0.0;
  for (const auto& b : branches_) magnitude += std::abs(b.weight);
  if (std::abs(weight_sum() - 1.0) > kWeightSumTolerance * std::max(1.0, magnitude))
    throw NumericalError("sampler: mixture weights no longer sum to one");
  return p;
}

double GaussianMixture::condition(int label, bool click) {
  bool clicked = false;
  const double p = update(label, [click](double) { return click; }, clicked);
  return click ? 1.0 - p : p;
}

std::pair<bool, double> GaussianMixture::draw(int label, Rng& rng) {
  bool clicked = false;
  const double p = update(label, [&rng](double p_no_click) { return !(rng.uniform() < p_no_click); }, clicked);
  return {clicked, p};
}

void GaussianMixture::prune(double tau) {
  if (tau <= 0.0) return;
  std::erase_if(branches_, [tau](const MixtureBranch& b) { return std::abs(b.weight) < tau; });
  if (branches_.empty()) throw NumericalError("prune: threshold removed every branch");
  const double total = weight_sum();
  for (auto& b : branches_) b.weight /= total;
}

bool GaussianMixture::valid() const {
  if (std::abs(weight_sum() - 1.0) > kWeightSumTolerance) return false;
  if (modes() == 0) return true;
  for (const auto& b : branches_)
    if (!validate_state(b.state).physical) return false;
  return true;
}

double SampleRecord::path_probability() const {
  double prob = 1.0;
  for (std::size_t i = 0; i < order.size(); ++i)
    prob *= pattern.contains(order[i]) ? 1.0 - no_click_probabilities[i] : no_click_probabilities[i];
  return prob;
}

bool step(GaussianMixture& mixture, int label, Rng& rng) { return mixture.draw(label, rng).first; }

SampleRecord sample(const QuadratureState& state, Rng& rng, const SamplerOptions& options) {
  const int l = state.modes();
  SampleRecord record;
  record.order = options.order;
  if (record.order.empty())
    for (int k = l; k >= 1; --k) record.order.push_back(k);
  std::vector<int> sorted = record.order;
  std::sort(sorted.begin(), sorted.end());
  if (static_cast<int>(sorted.size()) != l || std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end() ||
      sorted.front() < 1 || sorted.back() > l)
    throw std::invalid_argument("sample: order must be a permutation of 1..l");

  GaussianMixture mixture(state);
  std::vector<int> clicked;
  for (int label : record.order) {
    const auto [click, p] = mixture.draw(label, rng);
    record.no_click_probabilities.push_back(p);
    if (click) {
      clicked.push_back(label);
      if (options.prune_threshold > 0.0) {
        mixture.prune(options.prune_threshold);
        record.approximate = true;
      }
    }
    record.branch_counts.push_back(mixture.size());
  }
  record.pattern = ClickPattern(l, clicked);
  return record;
}

std::vector<SampleRecord> sample_batch(const QuadratureState& state, std::size_t n, std::uint64_t seed, int threads,
                                       const SamplerOptions& options, std::uint64_t first) {
  if (n == 0) throw std::invalid_argument("sample_batch: n must be at least 1");
  std::vector<SampleRecord> records(n);
  parallel_for(static_cast<std::int64_t>(n), threads, [&](std::int64_t i) {
    const std::uint64_t index = first + static_cast<std::uint64_t>(i);
    Rng rng = Rng::substream(seed, index);
    SampleRecord record = sample(state, rng, options);
    record.seed = seed;
    record.substream = index;
    records[static_cast<std::size_t>(i)] = std::move(record);
  });
  return records;
}

HeraldResult herald(const GaussianMixture& mixture, std::span<const int> labels, const std::vector<bool>& clicks) {
  if (labels.size() != clicks.size()) throw std::invalid_argument("herald: one outcome per heralded mode");
  HeraldResult result{mixture, 1.0};
  for (std::size_t i = 0; i < labels.size(); ++i) {
    result.probability *= result.mixture.condition(labels[i], clicks[i]);
    if (!(result.probability >= kImpossibleEvent))
      throw NumericalError("herald: heralding probability below 1e-300 (impossible event)");
  }
  return result;
}

HeraldResult herald(const QuadratureState& state, std::span<const int> labels, const std::vector<bool>& clicks) {
  return herald(GaussianMixture(state), labels, clicks);
}

}  // namespace tgbs
