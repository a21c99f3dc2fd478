#pragma once

// Synthetic gamma-ray energy histograms: isotope templates, a scintillator
// detector model, acquisition geometry and Poisson counting noise.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace spikeid::spectra {

struct EmissionLine {
  double energy_kev = 0.0;
  double relative_intensity = 1.0;  // relative to the isotope's strongest line
};

// Expected spectral shape of one class. Line areas are proportional to their
// relative intensity; the continuum density amplitude * exp(-E / decay) is in
// the same units (per keV, per unit line intensity) before the spectrum is
// normalized to the source rate.
struct IsotopeTemplate {
  std::string name;
  std::vector<EmissionLine> lines;
  double continuum_amplitude = 0.0;
  double continuum_decay_kev = 500.0;
};

using TemplateSet = std::vector<IsotopeTemplate>;

// Built-in six-class set (Am241, Ba133, Co60, Cs137, Eu152, Background) with
// line energies/intensities from standard decay tables.
TemplateSet default_templates();
void validate_templates(const TemplateSet& set, double e_min_kev, double e_max_kev);
// Index of the template named "Background", if present.
std::optional<std::size_t> find_background(const TemplateSet& set);

struct DetectorModel {
  int n_raw_channels = 4096;
  int n_calibrated_bins = 3238;
  double e_min_kev = 20.0;
  double e_max_kev = 3000.0;
  double resolution_a = 2.0;  // FWHM(E) = a * sqrt(E) + b
  double resolution_b = 5.0;
  // Linear raw calibration E(c) = raw_offset_kev + raw_gain_kev * (c + 0.5).
  // Unset values default to spanning [e_min, e_max] over the raw channels.
  std::optional<double> raw_offset_kev;
  std::optional<double> raw_gain_kev;

  double fwhm(double energy_kev) const;
  double raw_to_energy(int channel) const;
  double bin_width() const;
  double bin_low_edge(int bin) const;
  // Calibrated bin holding `energy_kev`, clamped to [0, n_calibrated_bins).
  int bin_of(double energy_kev) const;
  void validate() const;
};

// Full-resolution detector with `bins` calibrated bins (the bin_scale knob).
DetectorModel detector_with_bins(int bins);

struct AcquisitionConfig {
  double distance_m = 0.10;
  bool phantom = false;
  double integration_time_s = 1.0;
  double source_rate_ref = 50000.0;  // full-spectrum counts/s at 0.10 m, no phantom
  double phantom_attenuation = 0.7;
  double ambient_rate_cps = 30.0;    // room background, not distance-scaled

  void validate() const;
};

inline const std::vector<double> kDefaultDistances{0.10, 0.25, 0.50, 1.0, 1.5};

// Every (distance, phantom) combination with the remaining fields from `base`.
std::vector<AcquisitionConfig> default_geometry_grid(const AcquisitionConfig& base);

struct EnergyHistogram {
  std::vector<std::int64_t> counts;
  std::optional<int> label;
  AcquisitionConfig meta;

  std::int64_t total() const;
};

// Unit-area spectral shape of a template on the calibrated axis (all zeros for
// a template with no lines and no continuum).
std::vector<double> template_shape(const IsotopeTemplate& tmpl, const DetectorModel& det);

// Expected counts per calibrated bin: source term scaled by the inverse-square
// law, phantom attenuation and integration time, plus the ambient term shaped
// by `ambient` (skipped when null or when ambient_rate_cps is zero).
std::vector<double> expected_spectrum(const IsotopeTemplate& tmpl, const DetectorModel& det,
                                      const AcquisitionConfig& acq,
                                      const IsotopeTemplate* ambient);

EnergyHistogram sample_histogram(const std::vector<double>& lambda, std::uint64_t seed);

// Rebin raw ADC channels onto the calibrated axis. Exactly count-conserving.
EnergyHistogram calibrate(const std::vector<std::int64_t>& raw_counts, const DetectorModel& det);

struct Dataset {
  std::vector<std::string> class_names;
  std::vector<EnergyHistogram> samples;
};

struct DatasetSplit {
  Dataset train;
  Dataset test;
};

// per_cell histograms for every (class, geometry) cell, split per cell so
// class and geometry balance carry into both halves. Each histogram's seed is
// derive_seed(root, class, geometry, index).
DatasetSplit generate_dataset(const TemplateSet& templates, const DetectorModel& det,
                              const std::vector<AcquisitionConfig>& acq_grid, int per_cell,
                              double split, std::uint64_t seed);

}  // namespace spikeid::spectra
