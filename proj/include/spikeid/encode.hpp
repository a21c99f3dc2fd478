#pragma once

// Entry points into the event domain: multi-threshold level-crossing encoding
// of detector pulses, and Poisson rate coding of energy histograms.

#include <cstdint>
#include <vector>

#include "spikeid/spectra.hpp"

namespace spikeid::encode {

// Bi-exponential SiPM anode pulse.
struct PulseModel {
  double tau_rise_us = 0.05;
  double tau_decay_us = 0.5;
  double volts_per_kev = 0.001;
  double baseline_v = 0.0;
  double sample_rate_mhz = 250.0;
  double duration_us = 5.0;

  void validate() const;
  std::size_t n_samples() const;
  double sample_time_us(std::size_t i) const { return static_cast<double>(i) / sample_rate_mhz; }
  // Continuous-time peak of exp(-t/tau_d) - exp(-t/tau_r).
  double peak_time_us() const;
  double peak_factor() const;
  // Continuous peak height above baseline for a given deposited energy.
  double peak_amplitude(double energy_kev) const { return energy_kev * volts_per_kev * peak_factor(); }
};

struct ThresholdBank {
  std::vector<double> levels_v;  // strictly increasing, absolute volts

  void validate(const PulseModel& model) const;
  std::size_t size() const { return levels_v.size(); }
};

// `count` levels whose continuous peak energies are log-spaced over [e_lo, e_hi].
ThresholdBank log_spaced_bank(const PulseModel& model, int count = 16, double e_lo_kev = 20.0,
                              double e_hi_kev = 3000.0);

struct SpikeEvent {
  double time_us = 0.0;
  std::int32_t channel = 0;
  std::int8_t polarity = 1;

  friend bool operator==(const SpikeEvent&, const SpikeEvent&) = default;
};

// Sorted by time, then channel, then polarity (-1 before +1).
struct EventStream {
  std::vector<SpikeEvent> events;

  void sort();
  bool is_sorted() const;
  std::size_t size() const { return events.size(); }
  bool empty() const { return events.empty(); }
};

std::vector<double> synth_pulse(double energy_kev, const PulseModel& model);

// +1 on each upward crossing of a level (prev < L <= cur), -1 on each downward
// crossing (prev >= L > cur). Times are sample times (no interpolation).
EventStream threshold_encode(const std::vector<double>& waveform, const ThresholdBank& bank,
                             const PulseModel& model);

struct DecodedEnergy {
  double energy_kev = 0.0;
  bool below_first_threshold = false;
  int highest_level = -1;
};

// Energy whose peak sits midway between the highest crossed level and the next
// one (the top level extrapolates by the last gap).
DecodedEnergy decode_energy(const EventStream& stream, const ThresholdBank& bank,
                            const PulseModel& model);

struct RateCode {
  std::vector<double> rates_hz;
  double max_rate_hz = 1000.0;
};

// Per-histogram max normalization: rate_i = max_rate * c_i / max_j c_j.
RateCode histogram_to_rates(const spectra::EnergyHistogram& hist, double max_rate_hz);
// Same normalization for already-conditioned (non-negative) inputs.
RateCode values_to_rates(const std::vector<double>& values, double max_rate_hz);

// Bernoulli approximation: one draw per timestep with p = rate * dt / 1000.
// Returns the indices of the steps that carry a spike.
std::vector<std::int32_t> poisson_spike_steps(double rate_hz, double duration_ms, double dt_ms,
                                              std::uint64_t seed);
// Spike times in ms.
std::vector<double> poisson_spike_train(double rate_hz, double duration_ms, double dt_ms,
                                        std::uint64_t seed);

std::int64_t steps_for(double duration_ms, double dt_ms);

// Per-bin seed used by both the event-stream encoder and the simulator's input layer.
std::uint64_t input_seed(std::uint64_t root, std::size_t bin);

EventStream histogram_to_event_stream(const spectra::EnergyHistogram& hist, double presentation_ms,
                                      double max_rate_hz, std::uint64_t seed, double dt_ms = 1.0);
EventStream rates_to_event_stream(const RateCode& rates, double presentation_ms,
                                  std::uint64_t seed, double dt_ms = 1.0);

}  // namespace spikeid::encode
