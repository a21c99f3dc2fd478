#include "spikeid/encode.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "spikeid/common.hpp"

namespace spikeid::encode {

void PulseModel::validate() const {
  require(tau_rise_us > 0.0 && tau_decay_us > tau_rise_us,
          "pulse model needs 0 < tau_rise < tau_decay");
  require(volts_per_kev > 0.0, "pulse model volts_per_kev must be > 0");
  require(sample_rate_mhz > 0.0, "pulse model sample_rate_mhz must be > 0");
  require(duration_us >= 10.0 * tau_decay_us, "pulse duration must be >= 10 * tau_decay");
}

std::size_t PulseModel::n_samples() const {
  return static_cast<std::size_t>(std::floor(duration_us * sample_rate_mhz + 1e-9)) + 1;
}

double PulseModel::peak_time_us() const {
  return tau_rise_us * tau_decay_us / (tau_decay_us - tau_rise_us) *
         std::log(tau_decay_us / tau_rise_us);
}

double PulseModel::peak_factor() const {
  const double t = peak_time_us();
  return std::exp(-t / tau_decay_us) - std::exp(-t / tau_rise_us);
}

void ThresholdBank::validate(const PulseModel& model) const {
  require(!levels_v.empty(), "threshold bank is empty");
  for (std::size_t k = 0; k < levels_v.size(); ++k) {
    require(levels_v[k] > model.baseline_v, "threshold levels must lie above the baseline");
    if (k > 0) require(levels_v[k] > levels_v[k - 1], "threshold levels must be strictly increasing");
  }
}

ThresholdBank log_spaced_bank(const PulseModel& model, int count, double e_lo_kev,
                              double e_hi_kev) {
  model.validate();
  require(count >= 1, "threshold bank needs at least one level");
  require(e_lo_kev > 0.0 && e_hi_kev > e_lo_kev, "threshold bank needs 0 < e_lo < e_hi");
  ThresholdBank bank;
  for (int k = 0; k < count; ++k) {
    const double frac = count == 1 ? 0.0 : static_cast<double>(k) / (count - 1);
    const double e = e_lo_kev * std::pow(e_hi_kev / e_lo_kev, frac);
    bank.levels_v.push_back(model.baseline_v + model.peak_amplitude(e));
  }
  return bank;
}

void EventStream::sort() {
  std::stable_sort(events.begin(), events.end(), [](const SpikeEvent& a, const SpikeEvent& b) {
    return std::tie(a.time_us, a.channel, a.polarity) < std::tie(b.time_us, b.channel, b.polarity);
  });
}

bool EventStream::is_sorted() const {
  return std::is_sorted(events.begin(), events.end(), [](const SpikeEvent& a, const SpikeEvent& b) {
    return std::tie(a.time_us, a.channel, a.polarity) < std::tie(b.time_us, b.channel, b.polarity);
  });
}

std::vector<double> synth_pulse(double energy_kev, const PulseModel& model) {
  model.validate();
  require(energy_kev >= 0.0 && std::isfinite(energy_kev), "pulse energy must be finite and >= 0");
  std::vector<double> w(model.n_samples());
  const double amp = energy_kev * model.volts_per_kev;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double t = model.sample_time_us(i);
    w[i] = model.baseline_v + amp * (std::exp(-t / model.tau_decay_us) - std::exp(-t / model.tau_rise_us));
  }
  return w;
}

EventStream threshold_encode(const std::vector<double>& waveform, const ThresholdBank& bank,
                             const PulseModel& model) {
  require(!waveform.empty(), "threshold_encode: empty waveform");
  bank.validate(model);
  EventStream s;
  for (std::size_t i = 1; i < waveform.size(); ++i) {
    const double prev = waveform[i - 1];
    const double cur = waveform[i];
    for (std::size_t k = 0; k < bank.size(); ++k) {
      const double level = bank.levels_v[k];
      if (prev < level && cur >= level) {
        s.events.push_back({model.sample_time_us(i), static_cast<std::int32_t>(k), 1});
      } else if (prev >= level && cur < level) {
        s.events.push_back({model.sample_time_us(i), static_cast<std::int32_t>(k), -1});
      }
    }
  }
  s.sort();
  return s;
}

DecodedEnergy decode_energy(const EventStream& stream, const ThresholdBank& bank,
                            const PulseModel& model) {
  bank.validate(model);
  DecodedEnergy out;
  for (const auto& e : stream.events) {
    if (e.polarity > 0) out.highest_level = std::max(out.highest_level, e.channel);
  }
  if (out.highest_level < 0) {
    out.below_first_threshold = true;
    return out;
  }
  const auto& lv = bank.levels_v;
  const auto k = static_cast<std::size_t>(out.highest_level);
  require(k < lv.size(), "decode_energy: event channel outside the threshold bank");
  double amplitude;
  if (k + 1 < lv.size()) {
    amplitude = 0.5 * (lv[k] + lv[k + 1]);
  } else if (k > 0) {
    amplitude = lv[k] + 0.5 * (lv[k] - lv[k - 1]);
  } else {
    amplitude = lv[k];
  }
  out.energy_kev = (amplitude - model.baseline_v) / (model.volts_per_kev * model.peak_factor());
  return out;
}

RateCode values_to_rates(const std::vector<double>& values, double max_rate_hz) {
  require(max_rate_hz > 0.0 && std::isfinite(max_rate_hz), "max_rate_hz must be > 0");
  RateCode rc;
  rc.max_rate_hz = max_rate_hz;
  rc.rates_hz.assign(values.size(), 0.0);
  double peak = 0.0;
  for (double v : values) {
    require(v >= 0.0 && std::isfinite(v), "rate coding needs finite non-negative inputs");
    peak = std::max(peak, v);
  }
  if (peak <= 0.0) return rc;
  for (std::size_t i = 0; i < values.size(); ++i) rc.rates_hz[i] = max_rate_hz * (values[i] / peak);
  return rc;
}

RateCode histogram_to_rates(const spectra::EnergyHistogram& hist, double max_rate_hz) {
  std::vector<double> v(hist.counts.begin(), hist.counts.end());
  return values_to_rates(v, max_rate_hz);
}

std::int64_t steps_for(double duration_ms, double dt_ms) {
  require(dt_ms > 0.0 && std::isfinite(dt_ms), "dt_ms must be > 0");
  require(duration_ms >= 0.0 && std::isfinite(duration_ms), "duration_ms must be >= 0");
  return static_cast<std::int64_t>(std::floor(duration_ms / dt_ms + 1e-9));
}

std::vector<std::int32_t> poisson_spike_steps(double rate_hz, double duration_ms, double dt_ms,
                                              std::uint64_t seed) {
  require(rate_hz >= 0.0 && std::isfinite(rate_hz), "spike rate must be finite and >= 0");
  const auto steps = steps_for(duration_ms, dt_ms);
  const double p = rate_hz * dt_ms / 1000.0;
  require(p <= 1.0, "rate * dt = " + std::to_string(rate_hz * dt_ms) +
                        " exceeds 1000: per-step spike probability above 1");
  std::vector<std::int32_t> out;
  if (p == 0.0) return out;
  Rng rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (std::int64_t s = 0; s < steps; ++s) {
    if (uni(rng) < p) out.push_back(static_cast<std::int32_t>(s));
  }
  return out;
}

std::vector<double> poisson_spike_train(double rate_hz, double duration_ms, double dt_ms,
                                        std::uint64_t seed) {
  const auto steps = poisson_spike_steps(rate_hz, duration_ms, dt_ms, seed);
  std::vector<double> t(steps.size());
  for (std::size_t i = 0; i < steps.size(); ++i) t[i] = steps[i] * dt_ms;
  return t;
}

std::uint64_t input_seed(std::uint64_t root, std::size_t bin) {
  return derive_seed(root, {0x1A9u, static_cast<std::uint64_t>(bin)});
}

EventStream rates_to_event_stream(const RateCode& rates, double presentation_ms,
                                  std::uint64_t seed, double dt_ms) {
  require(presentation_ms > 0.0, "presentation_ms must be > 0");
  EventStream s;
  for (std::size_t b = 0; b < rates.rates_hz.size(); ++b) {
    for (auto step : poisson_spike_steps(rates.rates_hz[b], presentation_ms, dt_ms, input_seed(seed, b))) {
      s.events.push_back({step * dt_ms * 1000.0, static_cast<std::int32_t>(b), 1});
    }
  }
  s.sort();
  return s;
}

EventStream histogram_to_event_stream(const spectra::EnergyHistogram& hist, double presentation_ms,
                                      double max_rate_hz, std::uint64_t seed, double dt_ms) {
  return rates_to_event_stream(histogram_to_rates(hist, max_rate_hz), presentation_ms, seed, dt_ms);
}

}  // namespace spikeid::encode
