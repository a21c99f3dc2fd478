#include "spikeid/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "spikeid/common.hpp"

namespace spikeid::spectra {

TemplateSet default_templates() {
  // Intensities normalized to the strongest line of each isotope.
  return {
      {"Am241", {{59.54, 1.0}, {26.34, 0.067}}, 0.0005, 100.0},
      {"Ba133", {{356.01, 1.0}, {81.00, 0.530}, {302.85, 0.296}, {383.85, 0.144}, {276.40, 0.115}},
       0.004, 250.0},
      {"Co60", {{1332.49, 1.0}, {1173.23, 0.999}}, 0.002, 600.0},
      {"Cs137", {{661.66, 1.0}, {32.19, 0.066}}, 0.003, 300.0},
      {"Eu152",
       {{121.78, 1.0}, {344.28, 0.932}, {1408.01, 0.732}, {964.08, 0.509}, {1112.08, 0.479},
        {778.90, 0.453}, {1085.84, 0.354}, {244.70, 0.265}},
       0.006, 400.0},
      {"Background", {}, 1.0, 500.0},
  };
}

void validate_templates(const TemplateSet& set, double e_min_kev, double e_max_kev) {
  require(!set.empty(), "template set is empty");
  std::set<std::string> names;
  for (const auto& t : set) {
    require(!t.name.empty(), "template with empty name");
    require(names.insert(t.name).second, "duplicate template name '" + t.name + "'");
    require(t.continuum_amplitude >= 0.0 && std::isfinite(t.continuum_amplitude),
            t.name + ": continuum_amplitude must be finite and >= 0");
    require(t.continuum_decay_kev > 0.0, t.name + ": continuum_decay_kev must be > 0");
    bool has_unit = t.lines.empty();
    for (const auto& l : t.lines) {
      require(l.energy_kev >= e_min_kev && l.energy_kev <= e_max_kev,
              t.name + ": line at " + std::to_string(l.energy_kev) + " keV lies outside [" +
                  std::to_string(e_min_kev) + ", " + std::to_string(e_max_kev) + "] keV");
      require(l.relative_intensity > 0.0 && l.relative_intensity <= 1.0,
              t.name + ": relative_intensity must lie in (0, 1]");
      if (l.relative_intensity == 1.0) has_unit = true;
    }
    require(has_unit, t.name + ": no line has relative_intensity 1");
    if (t.name == "Background") {
      require(t.lines.empty(), "Background template must not have emission lines");
      require(t.continuum_amplitude > 0.0, "Background template needs a nonzero continuum");
    }
  }
}

std::optional<std::size_t> find_background(const TemplateSet& set) {
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (set[i].name == "Background") return i;
  }
  return std::nullopt;
}

double DetectorModel::fwhm(double energy_kev) const {
  return resolution_a * std::sqrt(std::max(energy_kev, 0.0)) + resolution_b;
}

double DetectorModel::raw_to_energy(int channel) const {
  const double offset = raw_offset_kev.value_or(e_min_kev);
  const double gain = raw_gain_kev.value_or((e_max_kev - e_min_kev) / n_raw_channels);
  return offset + gain * (channel + 0.5);
}

double DetectorModel::bin_width() const { return (e_max_kev - e_min_kev) / n_calibrated_bins; }

double DetectorModel::bin_low_edge(int bin) const { return e_min_kev + bin * bin_width(); }

int DetectorModel::bin_of(double energy_kev) const {
  const double pos = std::floor((energy_kev - e_min_kev) / bin_width());
  if (!(pos >= 0.0)) return 0;
  return static_cast<int>(std::min<double>(pos, n_calibrated_bins - 1));
}

void DetectorModel::validate() const {
  require(n_calibrated_bins >= 1, "detector needs at least one calibrated bin");
  require(n_raw_channels >= n_calibrated_bins,
          "detector needs n_raw_channels >= n_calibrated_bins");
  require(e_min_kev >= 0.0 && e_max_kev > e_min_kev, "detector energy axis must satisfy 0 <= e_min < e_max");
  require(raw_gain_kev.value_or(1.0) > 0.0, "raw_to_energy must be strictly increasing");
  require(fwhm(e_min_kev) > 0.0 && fwhm(e_max_kev) > 0.0 && resolution_a >= 0.0,
          "detector FWHM must be positive over the energy axis");
}

DetectorModel detector_with_bins(int bins) {
  DetectorModel det;
  det.n_calibrated_bins = bins;
  det.validate();
  return det;
}

void AcquisitionConfig::validate() const {
  require(distance_m > 0.0 && std::isfinite(distance_m), "distance_m must be > 0");
  require(integration_time_s > 0.0 && std::isfinite(integration_time_s),
          "integration_time_s must be > 0");
  require(source_rate_ref > 0.0, "source_rate_ref must be > 0");
  require(phantom_attenuation > 0.0 && phantom_attenuation <= 1.0,
          "phantom_attenuation must lie in (0, 1]");
  require(ambient_rate_cps >= 0.0, "ambient_rate_cps must be >= 0");
}

std::vector<AcquisitionConfig> default_geometry_grid(const AcquisitionConfig& base) {
  std::vector<AcquisitionConfig> grid;
  for (bool phantom : {false, true}) {
    for (double d : kDefaultDistances) {
      AcquisitionConfig a = base;
      a.distance_m = d;
      a.phantom = phantom;
      grid.push_back(a);
    }
  }
  return grid;
}

std::int64_t EnergyHistogram::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

std::vector<double> template_shape(const IsotopeTemplate& tmpl, const DetectorModel& det) {
  det.validate();
  const int n = det.n_calibrated_bins;
  std::vector<double> shape(static_cast<std::size_t>(n), 0.0);
  for (const auto& line : tmpl.lines) {
    require(line.energy_kev >= det.e_min_kev && line.energy_kev <= det.e_max_kev,
            tmpl.name + ": line at " + std::to_string(line.energy_kev) +
                " keV lies outside the detector range [" + std::to_string(det.e_min_kev) + ", " +
                std::to_string(det.e_max_kev) + "] keV");
    const double sigma = det.fwhm(line.energy_kev) / 2.355;
    const double inv = 1.0 / (sigma * std::sqrt(2.0));
    // Only bins within 8 sigma carry non-negligible mass.
    const int lo = det.bin_of(line.energy_kev - 8.0 * sigma);
    const int hi = det.bin_of(line.energy_kev + 8.0 * sigma);
    for (int b = lo; b <= hi; ++b) {
      const double e0 = det.bin_low_edge(b);
      const double e1 = e0 + det.bin_width();
      const double mass =
          0.5 * (std::erf((e1 - line.energy_kev) * inv) - std::erf((e0 - line.energy_kev) * inv));
      shape[static_cast<std::size_t>(b)] += line.relative_intensity * mass;
    }
  }
  if (tmpl.continuum_amplitude > 0.0) {
    const double a = tmpl.continuum_amplitude;
    const double d = tmpl.continuum_decay_kev;
    for (int b = 0; b < n; ++b) {
      const double e0 = det.bin_low_edge(b);
      const double e1 = e0 + det.bin_width();
      shape[static_cast<std::size_t>(b)] += a * d * (std::exp(-e0 / d) - std::exp(-e1 / d));
    }
  }
  const double total = std::accumulate(shape.begin(), shape.end(), 0.0);
  if (total > 0.0) {
    for (auto& s : shape) s /= total;
  }
  return shape;
}

std::vector<double> expected_spectrum(const IsotopeTemplate& tmpl, const DetectorModel& det,
                                      const AcquisitionConfig& acq,
                                      const IsotopeTemplate* ambient) {
  acq.validate();
  auto lambda = template_shape(tmpl, det);
  const double ratio = 0.10 / acq.distance_m;
  const double scale = acq.source_rate_ref * ratio * ratio *
                       (acq.phantom ? acq.phantom_attenuation : 1.0) * acq.integration_time_s;
  for (auto& l : lambda) l *= scale;
  if (ambient != nullptr && acq.ambient_rate_cps > 0.0) {
    const auto amb = template_shape(*ambient, det);
    const double amb_scale = acq.ambient_rate_cps * acq.integration_time_s;
    for (std::size_t i = 0; i < lambda.size(); ++i) lambda[i] += amb_scale * amb[i];
  }
  return lambda;
}

EnergyHistogram sample_histogram(const std::vector<double>& lambda, std::uint64_t seed) {
  EnergyHistogram h;
  h.counts.resize(lambda.size(), 0);
  Rng rng(seed);
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    const double l = lambda[i];
    require(std::isfinite(l) && l >= 0.0,
            "expected count in bin " + std::to_string(i) + " is negative or non-finite");
    if (l > 0.0) {
      std::poisson_distribution<std::int64_t> pois(l);
      h.counts[i] = pois(rng);
    }
  }
  return h;
}

EnergyHistogram calibrate(const std::vector<std::int64_t>& raw_counts, const DetectorModel& det) {
  det.validate();
  require(static_cast<int>(raw_counts.size()) == det.n_raw_channels,
          "raw histogram has " + std::to_string(raw_counts.size()) + " channels, detector expects " +
              std::to_string(det.n_raw_channels));
  EnergyHistogram h;
  h.counts.assign(static_cast<std::size_t>(det.n_calibrated_bins), 0);
  for (int c = 0; c < det.n_raw_channels; ++c) {
    const auto n = raw_counts[static_cast<std::size_t>(c)];
    require(n >= 0, "raw channel " + std::to_string(c) + " has a negative count");
    h.counts[static_cast<std::size_t>(det.bin_of(det.raw_to_energy(c)))] += n;
  }
  return h;
}

DatasetSplit generate_dataset(const TemplateSet& templates, const DetectorModel& det,
                              const std::vector<AcquisitionConfig>& acq_grid, int per_cell,
                              double split, std::uint64_t seed) {
  require(!templates.empty(), "template set is empty");
  require(templates.size() >= 2, "dataset needs at least 2 classes");
  require(per_cell >= 1, "per_cell must be >= 1");
  require(split > 0.0 && split < 1.0, "split must lie in (0, 1)");
  require(!acq_grid.empty(), "acquisition grid is empty");
  det.validate();
  validate_templates(templates, det.e_min_kev, det.e_max_kev);

  const auto bg = find_background(templates);
  const IsotopeTemplate* ambient = bg ? &templates[*bg] : nullptr;
  const int n_train = std::clamp(static_cast<int>(std::lround(split * per_cell)), 0, per_cell);

  DatasetSplit out;
  for (const auto& t : templates) {
    out.train.class_names.push_back(t.name);
    out.test.class_names.push_back(t.name);
  }
  for (std::size_t c = 0; c < templates.size(); ++c) {
    for (std::size_t g = 0; g < acq_grid.size(); ++g) {
      const auto lambda = expected_spectrum(templates[c], det, acq_grid[g], ambient);
      for (int i = 0; i < per_cell; ++i) {
        auto h = sample_histogram(lambda, derive_seed(seed, {c, g, static_cast<std::uint64_t>(i)}));
        h.label = static_cast<int>(c);
        h.meta = acq_grid[g];
        (i < n_train ? out.train : out.test).samples.push_back(std::move(h));
      }
    }
  }
  return out;
}

}  // namespace spikeid::spectra
