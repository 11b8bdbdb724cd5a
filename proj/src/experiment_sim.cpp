#include "entlab/experiment_sim.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "entlab/errors.hpp"

namespace entlab {

namespace {

constexpr double kPi = std::numbers::pi;

bool is_computational(BasisLabel l) { return l == BasisLabel::zero || l == BasisLabel::one; }

// Reduced states: first factor (anti-Stokes) and second factor (Stokes/atom).
Mat2 reduced_first(const Mat4& rho) {
  Mat2 out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out(i, j) = rho(2 * i, 2 * j) + rho(2 * i + 1, 2 * j + 1);
  return out;
}

Mat2 reduced_second(const Mat4& rho) {
  Mat2 out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out(i, j) = rho(i, j) + rho(2 + i, 2 + j);
  return out;
}

double expectation(const Mat2& rho, const Vec2& ket) {
  return std::clamp((ket.adjoint() * rho * ket)(0, 0).real(), 0.0, 1.0);
}

double trials_in(const ExperimentConfig& c, double duration) { return c.repetition_rate * duration; }

}  // namespace

void CoincidenceTable::validate() const {
  for (const auto& r : rows) {
    if (r.coincidences > std::min(r.singles_as, r.singles_s))
      throw InvalidArgument("CoincidenceTable: coincidences exceed singles");
    if (!(r.duration_s >= 0.0)) throw InvalidArgument("CoincidenceTable: negative duration");
  }
}

long CoincidenceHistogram::window_of(std::size_t i) const {
  return std::lround(std::floor((bin_center(i) - peak_delay_ns) / period_ns + 0.5));
}

TwoQubitState dephased_state(const ExperimentConfig& config, const PureTwoQubit& source) {
  double lambda = 0.0;
  if (config.delay_dt > 0.0) lambda = 1.0 - std::exp(-config.delay_dt / (1000.0 * config.dephasing_time));
  const Mat4 rho = TwoQubitState::from_pure(source).matrix();
  Mat2 id = Mat2::Identity();
  Mat2 sz = Mat2::Zero();
  sz(0, 0) = 1.0;
  sz(1, 1) = -1.0;
  const Mat4 k0 = kron(id, id) * std::sqrt(1.0 - 0.5 * lambda);
  const Mat4 k1 = kron(id, sz) * std::sqrt(0.5 * lambda);
  Mat4 out = k0 * rho * k0.adjoint() + k1 * rho * k1.adjoint();
  out = 0.5 * (out + out.adjoint());
  return TwoQubitState(out);
}

double accidental_noise_weight(const ExperimentConfig& c) {
  const double rep = c.repetition_rate;
  const double p = c.excitation_probability;
  const double sig_as = 0.5 * p * c.efficiency_AS();
  const double sig_s = 0.5 * p * c.efficiency_S();
  const double bg = (sig_as + c.background_rate_AS / rep) * (sig_s + c.background_rate_S / rep) -
                    sig_as * sig_s;
  const double k = p * c.efficiency_AS() * c.efficiency_S();
  if (bg <= 0.0) return 0.0;
  return 4.0 * bg / (k + 4.0 * bg);
}

TwoQubitState effective_state(const ExperimentConfig& config, const PureTwoQubit& source) {
  const Mat4 rho = dephased_state(config, source).matrix();
  const double w = accidental_noise_weight(config);
  if (w == 0.0) return TwoQubitState(rho);
  return TwoQubitState((1.0 - w) * rho + w * Mat4::Identity() / 4.0);
}

PureTwoQubit configured_source(const ExperimentConfig& config) {
  return psi_gamma(std::polar(config.gamma_modulus, kPi * config.gamma_phase));
}

// --- AnalyzerBank -------------------------------------------------------------

AnalyzerBank::AnalyzerBank(double fiber_waist, double analysis_waist, const QuadratureSpec& quad) {
  AnalyzerSetting base;
  base.fiber_waist = fiber_waist;
  base.analysis_waist = analysis_waist;

  AnalyzerSetting fork = base;
  fork.hologram_charge = 1;
  balanced_ = entlab::balanced_displacement(fork, quad);

  settings_[index(BasisLabel::zero)] = base;
  settings_[index(BasisLabel::one)] = fork;
  const std::pair<BasisLabel, double> displaced[] = {{BasisLabel::plus, 0.0},
                                                    {BasisLabel::minus, kPi},
                                                    {BasisLabel::u, 0.5 * kPi},
                                                    {BasisLabel::d, -0.5 * kPi}};
  for (const auto& [label, angle] : displaced) {
    AnalyzerSetting s = fork;
    s.displacement = balanced_;
    s.orientation = angle;
    settings_[index(label)] = s;
  }
  for (std::size_t k = 0; k < settings_.size(); ++k) states_[k] = analyzer_state(settings_[k], quad);
}

MeasBasisState AnalyzerBank::basis_state(BasisLabel label) const {
  const AnalyzerState& s = state(label);
  return MeasBasisState(s.alpha, s.beta);
}

double AnalyzerBank::radial_factor(BasisLabel label) const {
  if (!is_computational(label)) return 1.0;
  const double e0 = state(BasisLabel::zero).efficiency();
  const double e1 = state(BasisLabel::one).efficiency();
  return state(label).efficiency() / std::max(e0, e1);
}

// --- Experiment ---------------------------------------------------------------

Experiment::Experiment(ExperimentConfig config, const QuadratureSpec& quad)
    : config_((config.validate(), std::move(config))),
      bank_(config_.fiber_waist, config_.analysis_waist, quad) {}

namespace {

double arm_factor(const ExperimentConfig& c, const AnalyzerBank& bank, BasisLabel l) {
  return c.radial_mismatch ? bank.radial_factor(l) : 1.0;
}

}  // namespace

double Experiment::singles_probability_as(const TwoQubitState& state, BasisLabel a) const {
  const double marg = expectation(reduced_first(state.matrix()), bank_.basis_state(a).ket());
  return config_.excitation_probability * config_.efficiency_AS() * marg *
             arm_factor(config_, bank_, a) +
         config_.background_rate_AS / config_.repetition_rate;
}

double Experiment::singles_probability_s(const TwoQubitState& state, BasisLabel b) const {
  const double marg = expectation(reduced_second(state.matrix()), bank_.basis_state(b).ket());
  return config_.excitation_probability * config_.efficiency_S() * marg *
             arm_factor(config_, bank_, b) +
         config_.background_rate_S / config_.repetition_rate;
}

CoincidenceProbability Experiment::coincidence_probability(const TwoQubitState& state, BasisLabel a,
                                                           BasisLabel b) const {
  CoincidenceProbability out;
  out.signal = config_.excitation_probability * config_.efficiency_AS() * config_.efficiency_S() *
               born_probability(state, bank_.basis_state(a), bank_.basis_state(b)) *
               arm_factor(config_, bank_, a) * arm_factor(config_, bank_, b);
  out.accidental = singles_probability_as(state, a) * singles_probability_s(state, b);
  if (out.total() > 1.0) throw DomainError("coincidence probability exceeds 1");
  return out;
}

double Experiment::multi_pair_probability(const TwoQubitState& state, BasisLabel a,
                                          BasisLabel b) const {
  const double p = config_.excitation_probability;
  const double pa = p * config_.efficiency_AS() *
                    expectation(reduced_first(state.matrix()), bank_.basis_state(a).ket()) *
                    arm_factor(config_, bank_, a);
  const double pb = p * config_.efficiency_S() *
                    expectation(reduced_second(state.matrix()), bank_.basis_state(b).ket()) *
                    arm_factor(config_, bank_, b);
  return pa * pb;
}

CoincidenceTable Experiment::simulate_counts(const TwoQubitState& state,
                                             const std::vector<SettingPair>& settings,
                                             double duration, rng::Purpose purpose,
                                             std::uint64_t stream_index) const {
  if (settings.empty()) throw InvalidArgument("simulate_counts: empty settings list");
  if (!(duration >= 0.0) || !std::isfinite(duration))
    throw InvalidArgument("simulate_counts: duration must be finite and >= 0");
  auto engine = rng::make_engine(config_.rng_seed, purpose, stream_index);
  const double trials = trials_in(config_, duration);
  CoincidenceTable table;
  table.rows.reserve(settings.size());
  for (const auto& [a, b] : settings) {
    const double mc = trials * coincidence_probability(state, a, b).total();
    const double ma = trials * singles_probability_as(state, a);
    const double ms = trials * singles_probability_s(state, b);
    CoincidenceRow row;
    row.setting_as = a;
    row.setting_s = b;
    row.duration_s = duration;
    row.coincidences = rng::poisson(engine, mc);
    row.singles_as = row.coincidences + rng::poisson(engine, std::max(0.0, ma - mc));
    row.singles_s = row.coincidences + rng::poisson(engine, std::max(0.0, ms - mc));
    table.rows.push_back(row);
  }
  return table;
}

CoincidenceTable Experiment::simulate_counts(const PureTwoQubit& source,
                                             const std::vector<SettingPair>& settings,
                                             double duration, rng::Purpose purpose,
                                             std::uint64_t stream_index) const {
  return simulate_counts(dephased_state(config_, source), settings, duration, purpose, stream_index);
}

namespace {

CoincidenceHistogram empty_histogram(int windows, double bin_width, double period, double peak) {
  if (windows < 1) throw InvalidArgument("histogram: need at least one window per side");
  if (!(bin_width > 0.0) || !(period > 0.0))
    throw InvalidArgument("histogram: bin width and period must be > 0");
  CoincidenceHistogram h;
  h.bin_width_ns = bin_width;
  h.period_ns = period;
  h.peak_delay_ns = peak;
  const double span = (2.0 * windows + 1.0) * period;
  h.first_bin_ns = peak - (windows + 0.5) * period;
  h.counts.assign(static_cast<std::size_t>(std::ceil(span / bin_width - 1e-9)), 0);
  return h;
}

std::size_t peak_bin(const CoincidenceHistogram& h) {
  const double pos = (h.peak_delay_ns - h.first_bin_ns) / h.bin_width_ns;
  return std::min(static_cast<std::size_t>(pos), h.counts.size() - 1);
}

// n true-pair events at the peak bin, one-bin jitter: ¼ early, ½ on time, ¼ late.
void place_peak(CoincidenceHistogram& h, std::uint64_t n, rng::Engine& engine) {
  const std::size_t c = peak_bin(h);
  const std::uint64_t early = rng::binomial(engine, n, 0.25);
  const std::uint64_t late = rng::binomial(engine, n - early, 1.0 / 3.0);
  h.counts[c > 0 ? c - 1 : c] += early;
  h.counts[std::min(c + 1, h.counts.size() - 1)] += late;
  h.counts[c] += n - early - late;
}

// Uniform events spread over every bin of one window.
void place_flat(CoincidenceHistogram& h, long window, double mean, rng::Engine& engine) {
  std::vector<std::size_t> bins;
  for (std::size_t i = 0; i < h.counts.size(); ++i)
    if (h.window_of(i) == window) bins.push_back(i);
  if (bins.empty()) return;
  const double per_bin = mean / static_cast<double>(bins.size());
  for (std::size_t i : bins) h.counts[i] += rng::poisson(engine, per_bin);
}

}  // namespace

CoincidenceHistogram Experiment::simulate_histogram(const TwoQubitState& state, double duration,
                                                    std::uint64_t stream_index) const {
  if (!(duration >= 0.0)) throw InvalidArgument("simulate_histogram: negative duration");
  auto engine = rng::make_engine(config_.rng_seed, rng::Purpose::histogram, stream_index);
  const int n = config_.histogram_windows;
  CoincidenceHistogram h = empty_histogram(n, config_.histogram_bin_width, config_.trial_period,
                                           config_.delay_dt);
  const auto p = coincidence_probability(state, BasisLabel::zero, BasisLabel::zero);
  const double trials = trials_in(config_, duration);
  place_peak(h, rng::poisson(engine, trials * p.signal), engine);
  for (long k = -n; k <= n; ++k) place_flat(h, k, trials * p.accidental, engine);
  return h;
}

double Experiment::expected_g2(const TwoQubitState& state) const {
  const auto p = coincidence_probability(state, BasisLabel::zero, BasisLabel::zero);
  if (p.accidental <= 0.0) throw DomainError("expected_g2: no accidental floor");
  return 1.0 + p.signal / p.accidental;
}

double calibrated_exposure(const ExperimentConfig& c, double duration,
                           bool accidentals_subtracted) {
  const double p = c.excitation_probability;
  double per_trial = p * c.efficiency_AS() * c.efficiency_S();
  if (!accidentals_subtracted) {
    // Accidentals summed over a complete product basis; the marginals sum to 1.
    per_trial += (p * c.efficiency_AS() + 2.0 * c.background_rate_AS / c.repetition_rate) *
                 (p * c.efficiency_S() + 2.0 * c.background_rate_S / c.repetition_rate);
  }
  return trials_in(c, duration) * per_trial;
}

CoincidenceProbability coincidence_probability(const TwoQubitState& state, BasisLabel a,
                                               BasisLabel b, const ExperimentConfig& config) {
  return Experiment(config).coincidence_probability(state, a, b);
}

CoincidenceTable simulate_counts(const PureTwoQubit& source, const std::vector<SettingPair>& settings,
                                 const ExperimentConfig& config) {
  return Experiment(config).simulate_counts(source, settings, config.acquisition_time,
                                            rng::Purpose::tomography_counts);
}

CoincidenceTable simulate_projective_counts(const TwoQubitState& state,
                                            const std::vector<SettingPair>& settings,
                                            double exposure, rng::Engine& engine) {
  if (settings.empty()) throw InvalidArgument("simulate_projective_counts: empty settings list");
  if (!(exposure >= 0.0)) throw InvalidArgument("simulate_projective_counts: negative exposure");
  CoincidenceTable table;
  for (const auto& [a, b] : settings) {
    CoincidenceRow row;
    row.setting_as = a;
    row.setting_s = b;
    row.duration_s = 1.0;
    row.coincidences = rng::poisson(engine, exposure * born_probability(state, a, b));
    row.singles_as = row.coincidences;
    row.singles_s = row.coincidences;
    table.rows.push_back(row);
  }
  return table;
}

CoincidenceHistogram synthesize_histogram(double peak_mean, double offpeak_mean, int windows,
                                          double bin_width_ns, double period_ns,
                                          double peak_delay_ns, rng::Engine& engine) {
  if (!(peak_mean >= 0.0) || !(offpeak_mean >= 0.0))
    throw InvalidArgument("synthesize_histogram: negative mean");
  CoincidenceHistogram h = empty_histogram(windows, bin_width_ns, period_ns, peak_delay_ns);
  place_peak(h, rng::poisson(engine, peak_mean), engine);
  for (long k = -windows; k <= windows; ++k)
    if (k != 0) place_flat(h, k, offpeak_mean, engine);
  return h;
}

G2Estimate g2_estimate(const CoincidenceHistogram& histogram) {
  std::map<long, std::uint64_t> per_window;
  for (std::size_t i = 0; i < histogram.counts.size(); ++i)
    per_window[histogram.window_of(i)] += histogram.counts[i];
  const std::uint64_t peak = per_window.count(0) ? per_window[0] : 0;
  std::size_t n_off = 0;
  std::uint64_t off = 0;
  for (const auto& [k, c] : per_window)
    if (k != 0) {
      ++n_off;
      off += c;
    }
  if (n_off < 3) throw DomainError("g2_estimate: fewer than 3 off-peak windows");
  if (off == 0) throw DomainError("g2_estimate: no off-peak coincidences");
  G2Estimate out;
  if (peak == 0) return out;
  const double mean_off = static_cast<double>(off) / static_cast<double>(n_off);
  out.value = static_cast<double>(peak) / mean_off;
  out.error = out.value * std::sqrt(1.0 / static_cast<double>(peak) + 1.0 / static_cast<double>(off));
  return out;
}

std::vector<SettingPair> tomography_settings() {
  const BasisLabel side[] = {BasisLabel::zero, BasisLabel::one, BasisLabel::plus, BasisLabel::u};
  std::vector<SettingPair> out;
  for (BasisLabel a : side)
    for (BasisLabel b : side) out.emplace_back(a, b);
  return out;
}

std::vector<SettingPair> witness_settings() {
  using B = BasisLabel;
  return {{B::plus, B::plus}, {B::plus, B::minus}, {B::minus, B::plus}, {B::minus, B::minus},
          {B::u, B::u},       {B::u, B::d},         {B::d, B::u},         {B::d, B::d}};
}

}  // namespace entlab
