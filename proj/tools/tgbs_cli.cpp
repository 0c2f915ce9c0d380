// tgbs: command-line front end.
//
// Primary output goes to --out (or stdout); summaries go to stdout when
// --out is set and to stderr otherwise, so stdout stays machine-readable.
// Exit codes: 0 success, 1 failed validation, 2 numerical or physicality
// failure, 3 malformed input or I/O failure.

#include <cmath>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tgbs/bench.hpp"
#include "tgbs/cv.hpp"
#include "tgbs/hafnian.hpp"
#include "tgbs/io.hpp"
#include "tgbs/log.hpp"
#include "tgbs/probabilities.hpp"
#include "tgbs/sampler.hpp"
#include "tgbs/torontonian.hpp"
#include "tgbs/validate.hpp"

using namespace tgbs;
using io::Json;

namespace {

struct Global {
  std::optional<std::uint64_t> seed;
  int threads = 1;
  double tolerance = 1e-9;
  std::string out;
  bool verbose = false;
};

void emit(const Global& g, const std::string& text) { io::write_text(g.out, text); }

std::ostream& summary(const Global& g) { return g.out.empty() || g.out == "-" ? std::cerr : std::cout; }

std::uint64_t require_seed(const Global& g, const char* command) {
  if (!g.seed) throw std::invalid_argument(std::string(command) + " is stochastic and needs --seed");
  return *g.seed;
}

std::vector<bool> to_bits(const std::vector<int>& values, const char* what) {
  std::vector<bool> bits;
  for (int v : values) {
    if (v != 0 && v != 1) throw std::invalid_argument(std::string(what) + " must be 0 or 1");
    bits.push_back(v == 1);
  }
  return bits;
}

std::string format(double v) { return Json(v).dump(); }

int cmd_prep(const Global& g, const std::vector<double>& squeezing, const std::string& unitary_file, bool haar) {
  QuadratureState state = squeezed_state(squeezing);
  const int l = state.modes();
  if (!unitary_file.empty() && haar) throw std::invalid_argument("prep: give either --unitary or --haar");
  if (!unitary_file.empty()) {
    const ComplexMatrix U = io::read_complex_matrix(unitary_file);
    if (U.rows() != l || U.cols() != l) throw FormatError("prep: unitary must be " + std::to_string(l) + " x " + std::to_string(l));
    state = apply_interferometer(state, ComplexUnitary(U));
  } else if (haar) {
    Rng rng(require_seed(g, "prep --haar"));
    state = apply_interferometer(state, haar_unitary(l, rng));
  }
  const auto report = validate_state(state);
  emit(g, io::line(io::to_json(state)));
  Json info = io::to_json(report);
  info["det_sigma"] = husimi_covariance(state).determinant();
  summary(g) << info.dump(2) << "\n";
  return report.physical ? 0 : 2;
}

ComplexMatrix kernel_input(const std::string& matrix_file, const std::string& state_file, const std::vector<int>& pattern) {
  if (!matrix_file.empty() == !state_file.empty()) throw std::invalid_argument("give exactly one of --matrix or --state");
  if (!matrix_file.empty()) return io::read_complex_matrix(matrix_file);
  const auto state = io::read_state(state_file);
  require_physical(state);
  const auto O = kernel_matrix(husimi_covariance(state));
  if (pattern.empty()) return O.matrix();
  return reduce(O.matrix(), ClickPattern(state.modes(), pattern));
}

int cmd_tor(const Global& g, const ComplexMatrix& O) {
  if (O.rows() != O.cols() || O.rows() % 2) throw FormatError("tor: matrix must be square with even dimension");
  const auto result = torontonian<double>(O, {g.threads});
  Json j;
  j["value"] = result.value;
  j["terms"] = result.terms;
  j["max_term_magnitude"] = result.max_term_magnitude;
  j["cancellation_warning"] = result.cancellation_warning;
  j["summation"] = result.summation;
  emit(g, j.dump(2) + "\n");
  if (result.cancellation_warning) summary(g) << "warning: cancellation, max term / |value| > 1e12\n";
  summary(g) << "tor = " << format(result.value) << " (" << result.terms << " terms)\n";
  return 0;
}

int cmd_haf(const Global& g, const ComplexMatrix& A) {
  if (A.rows() != A.cols() || A.rows() % 2) throw FormatError("haf: matrix must be square with even dimension");
  const Complex value = hafnian_powerset(A);
  Json j;
  j["re"] = value.real();
  j["im"] = value.imag();
  j["terms"] = std::uint64_t{1} << (A.rows() / 2);
  emit(g, j.dump(2) + "\n");
  summary(g) << "haf = " << format(value.real()) << (value.imag() < 0 ? " - " : " + ") << format(std::abs(value.imag()))
             << "i\n";
  return 0;
}

int cmd_prob(const Global& g, const std::string& state_file, const std::vector<int>& pattern,
             const std::vector<int>& counts) {
  const auto state = io::read_state(state_file);
  Json j;
  double p = 0.0;
  if (!counts.empty()) {
    if (!pattern.empty()) throw std::invalid_argument("prob: give either --pattern or --counts");
    p = pnr_prob(state, PNRPattern(counts));
    j["counts"] = counts;
  } else {
    const ClickPattern S(state.modes(), pattern);
    p = threshold_prob(state, S);
    j["pattern"] = io::to_json(S);
  }
  j["p"] = p;
  emit(g, io::line(j));
  summary(g) << "p = " << format(p) << "\n";
  return 0;
}

int cmd_dist(const Global& g, const std::string& state_file) {
  const auto dist = distribution(io::read_state(state_file), g.threads);
  emit(g, io::array_lines(io::to_json(dist)));
  summary(g) << "normalization defect " << format(dist.normalization_defect) << "\n";
  return std::abs(dist.normalization_defect) <= g.tolerance ? 0 : 2;
}

int cmd_sample(const Global& g, const std::string& state_file, std::size_t n, const std::vector<int>& order,
               double prune) {
  const auto state = io::read_state(state_file);
  require_physical(state);
  SamplerOptions options;
  options.order = order;
  options.prune_threshold = prune;
  const auto records = sample_batch(state, n, require_seed(g, "sample"), g.threads, options);
  std::string text;
  std::map<std::size_t, std::size_t> histogram;
  for (const auto& r : records) {
    text += io::line(io::to_json(r, g.verbose));
    ++histogram[r.pattern.size()];
  }
  emit(g, text);
  summary(g) << "clicks,count\n";
  for (const auto& [clicks, count] : histogram) summary(g) << clicks << ',' << count << "\n";
  return 0;
}

int cmd_herald(const Global& g, const std::string& state_file, const std::vector<int>& modes,
               const std::vector<int>& clicks) {
  const auto state = io::read_state(state_file);
  require_physical(state);
  const auto result = herald(state, modes, to_bits(clicks, "--clicks"));
  Json j;
  j["probability"] = result.probability;
  j["branches"] = result.mixture.size();
  j["mixture"] = io::to_json(result.mixture);
  emit(g, j.dump(1) + "\n");
  summary(g) << "herald probability " << format(result.probability) << ", " << result.mixture.size()
             << " branches\n";
  return 0;
}

int cmd_cv(const Global& g, PipelineConfig config, const std::string& state_file, const std::string& pipeline,
           const std::string& unitary_file, const std::vector<int>& clicks) {
  static const std::map<std::string, Pipeline> kinds{{"A", Pipeline::kThreshold},
                                                     {"B", Pipeline::kHeraldThreshold},
                                                     {"C", Pipeline::kHeraldHomodyne},
                                                     {"D", Pipeline::kHeraldHeterodyne}};
  config.pipeline = kinds.at(pipeline);
  config.state = io::read_state(state_file);
  config.herald_clicks = to_bits(clicks, "--herald-clicks");
  if (!unitary_file.empty()) config.unitary = ComplexUnitary(io::read_complex_matrix(unitary_file));
  config.seed = require_seed(g, "cv");
  config.threads = g.threads;
  const auto result = simulate_pipeline(config);
  std::string text;
  for (const auto& r : result.records) text += io::line(io::to_json(r));
  emit(g, text);
  summary(g) << "herald probability " << format(result.herald_probability) << ", " << result.branches
             << " branches\n";
  return 0;
}

int cmd_validate(const Global& g, ValidationOptions options, const std::string& inject) {
  static const std::map<std::string, Injection> kinds{
      {"none", Injection::kNone}, {"tor-sign", Injection::kTorSign}, {"haf-arrangement", Injection::kHafArrangement}};
  options.inject = kinds.at(inject);
  options.seed = require_seed(g, "validate");
  options.threads = g.threads;
  const auto result = run_validation(options);
  Json j;
  j["passed"] = result.passed();
  j["inject"] = inject;
  Json checks = Json::array();
  for (const auto& c : result.checks) {
    checks.push_back({{"name", c.name},
                      {"passed", c.passed},
                      {"residual", c.residual},
                      {"tolerance", c.tolerance},
                      {"cases", c.cases}});
    summary(g) << (c.passed ? "pass " : "FAIL ") << c.name << " residual " << format(c.residual) << " tolerance "
               << format(c.tolerance) << "\n";
  }
  j["checks"] = std::move(checks);
  emit(g, j.dump(2) + "\n");
  return result.passed() ? 0 : 1;
}

int cmd_bench(const Global& g, const std::string& kind, int min, int max, int repeats) {
  const std::uint64_t seed = g.seed.value_or(0);
  const auto result = kind == "tor" ? bench_torontonian(min, max, seed, repeats, g.threads)
                                    : bench_sampler(min, max, seed, repeats);
  emit(g, result.csv());
  summary(g) << kind << " doubling factor " << result.doubling_factor << " (fit from size " << result.fit_from
             << ")\n";
  return 0;
}

int cmd_collision(const Global& g, const std::string& state_file, int cutoff, int haar_modes,
                  const std::vector<double>& squeezing, int trials) {
  if (!state_file.empty()) {
    const auto report = collision_probability(io::read_state(state_file), cutoff, g.threads);
    emit(g, io::to_json(report).dump(2) + "\n");
    summary(g) << "epsilon " << format(report.epsilon) << ", bound " << format(report.bound) << "\n";
    return 0;
  }
  if (haar_modes < 1) throw std::invalid_argument("collision: give --state or --haar-modes");
  const auto result = haar_collision_experiment(haar_modes, squeezing, trials, require_seed(g, "collision"), g.threads);
  emit(g, io::to_json(result).dump(2) + "\n");
  summary(g) << "mean epsilon " << format(result.mean) << " +- " << format(result.standard_error) << ", bound "
             << format(result.bound) << (result.below_bound ? " (below)" : " (NOT below)") << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Threshold Gaussian boson sampling toolkit (hbar = 2, xxpp ordering)"};
  app.require_subcommand(1);
  app.fallthrough();
  Global g;
  std::uint64_t seed = 0;
  auto* seed_opt = app.add_option("--seed", seed, "Seed for stochastic commands");
  app.add_option("--threads", g.threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--tolerance", g.tolerance, "Normalization tolerance for dist")->check(CLI::PositiveNumber);
  app.add_option("--out", g.out, "Primary output file (default stdout)");
  app.add_flag("-v,--verbose", g.verbose, "Per-step sample traces and info logging");

  std::string state_file, matrix_file, unitary_file, kind = "tor", inject = "none", pipeline = "A";
  std::vector<double> squeezing;
  std::vector<int> pattern, counts, order, modes, clicks;
  bool haar = false;
  std::size_t n = 1;
  double prune = 0.0;
  int cutoff = 0, haar_modes = 0, trials = 50, min = 12, max = 20, repeats = 5;
  PipelineConfig config;
  ValidationOptions vopt;

  auto* prep = app.add_subcommand("prep", "Squeezed vacua through an interferometer; writes a state file");
  prep->add_option("--squeezing", squeezing, "Squeezing parameters, comma separated")->required()->delimiter(',');
  prep->add_option("--unitary", unitary_file, "Unitary matrix file");
  prep->add_flag("--haar", haar, "Haar-random unitary from --seed");

  auto* tor = app.add_subcommand("tor", "Torontonian of a kernel file, or of a state's reduced kernel");
  auto* haf = app.add_subcommand("haf", "Hafnian of a symmetric matrix file");
  for (auto* sub : {tor, haf}) sub->add_option("--matrix", matrix_file, "Matrix file");
  tor->add_option("--state", state_file, "State file");
  tor->add_option("--pattern", pattern, "Clicked modes (1-based)")->delimiter(',');
  haf->require_option(1);

  auto* prob = app.add_subcommand("prob", "Probability of a click pattern or photon-count pattern");
  prob->add_option("--state", state_file, "State file")->required();
  prob->add_option("--pattern", pattern, "Clicked modes (1-based)")->delimiter(',');
  prob->add_option("--counts", counts, "Photon counts per mode")->delimiter(',');

  auto* dist = app.add_subcommand("dist", "All 2^l click probabilities");
  dist->add_option("--state", state_file, "State file")->required();

  auto* sample = app.add_subcommand("sample", "Exact threshold samples as JSON lines");
  sample->add_option("--state", state_file, "State file")->required();
  sample->add_option("-n,--samples", n, "Number of samples")->check(CLI::PositiveNumber);
  sample->add_option("--order", order, "Measurement order (default l..1)")->delimiter(',');
  sample->add_option("--prune", prune, "Approximate: drop branches with |weight| below this");

  auto* her = app.add_subcommand("herald", "Condition on fixed click outcomes");
  her->add_option("--state", state_file, "State file")->required();
  her->add_option("--modes", modes, "Heralded modes in measurement order")->required()->delimiter(',');
  her->add_option("--clicks", clicks, "Outcome per heralded mode (0 or 1)")->required()->delimiter(',');

  auto* cv = app.add_subcommand("cv", "Heralding followed by threshold, homodyne or heterodyne detection");
  cv->add_option("--state", state_file, "State file")->required();
  cv->add_option("--pipeline", pipeline, "A threshold, B herald+threshold, C herald+homodyne, D herald+heterodyne")
      ->check(CLI::IsMember({"A", "B", "C", "D"}));
  cv->add_option("--herald-modes", config.herald_modes, "Heralded modes")->delimiter(',');
  cv->add_option("--herald-clicks", clicks, "Outcome per heralded mode (0 or 1)")->delimiter(',');
  cv->add_option("--measure", config.measured_modes, "Modes for homodyne/heterodyne, in order")->delimiter(',');
  cv->add_option("--unitary", unitary_file, "Unitary on the modes left after heralding");
  cv->add_option("--homodyne-s", config.homodyne_squeezing, "Homodyne squeezing s")->check(CLI::PositiveNumber);
  cv->add_option("-n,--shots", config.shots, "Number of shots")->check(CLI::PositiveNumber);

  auto* val = app.add_subcommand("validate", "Cross-check fast routes against oracles");
  val->add_option("--cases", vopt.cases, "Random inputs per check and size")->check(CLI::PositiveNumber);
  val->add_option("--samples", vopt.samples, "Samples for the chi-square check")->check(CLI::PositiveNumber);
  val->add_option("--inject", inject, "Deliberate fault")->check(CLI::IsMember({"none", "tor-sign", "haf-arrangement"}));

  auto* bench = app.add_subcommand("bench", "Timing CSV and doubling factor");
  bench->add_option("--kind", kind, "tor or sample")->check(CLI::IsMember({"tor", "sample"}));
  bench->add_option("--min", min, "Smallest size");
  bench->add_option("--max", max, "Largest size");
  bench->add_option("--repeats", repeats, "Timed runs per size")->check(CLI::PositiveNumber);

  auto* col = app.add_subcommand("collision", "Collision probability of a state, or the Haar experiment");
  col->add_option("--state", state_file, "State file");
  col->add_option("--cutoff", cutoff, "Photon cutoff for the total-variation check (l <= 4)");
  col->add_option("--haar-modes", haar_modes, "Modes of the Haar experiment");
  col->add_option("--squeezing", squeezing, "Input squeezing per mode")->delimiter(',');
  col->add_option("--trials", trials, "Haar unitaries")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 3;
  }
  if (seed_opt->count() > 0) g.seed = seed;
  set_log_level(g.verbose ? LogLevel::kInfo : LogLevel::kWarning);

  try {
    if (*prep) return cmd_prep(g, squeezing, unitary_file, haar);
    if (*tor) return cmd_tor(g, kernel_input(matrix_file, state_file, pattern));
    if (*haf) return cmd_haf(g, io::read_complex_matrix(matrix_file));
    if (*prob) return cmd_prob(g, state_file, pattern, counts);
    if (*dist) return cmd_dist(g, state_file);
    if (*sample) return cmd_sample(g, state_file, n, order, prune);
    if (*her) return cmd_herald(g, state_file, modes, clicks);
    if (*cv) return cmd_cv(g, config, state_file, pipeline, unitary_file, clicks);
    if (*val) return cmd_validate(g, vopt, inject);
    if (*bench) return cmd_bench(g, kind, min, max, repeats);
    if (*col) return cmd_collision(g, state_file, cutoff, haar_modes, squeezing, trials);
  } catch (const NumericalError& e) {
    std::cerr << "tgbs: numerical error: " << e.what() << "\n";
    return 2;
  } catch (const FormatError& e) {
    std::cerr << "tgbs: format error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "tgbs: invalid input: " << e.what() << "\n";
    return 3;
  } catch (const std::out_of_range& e) {
    std::cerr << "tgbs: invalid input: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
