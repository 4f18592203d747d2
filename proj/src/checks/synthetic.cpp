#include <chrono>
#include <cmath>
#include <numbers>

#include "eegbench/checks.hpp"
#include "eegbench/rng.hpp"

namespace eegbench::checks {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kRate = static_cast<double>(kSamplesPerRecord);  // one second per record

double gaussian(Rng& rng) {
  // Box-Muller; one draw per call keeps the stream simple.
  const double u = 1.0 - rng.uniform01();
  return std::sqrt(-2.0 * std::log(u)) * std::cos(kTwoPi * rng.uniform01());
}

Waveform make_wave(ClassLabel label, Rng& rng) {
  Waveform w{};
  const double phase = rng.uniform(0, kTwoPi);
  const double jitter = rng.uniform(0.85, 1.15);
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double t = static_cast<double>(i) / kRate;
    double v = 0.0;
    switch (label) {
      case ClassLabel::Seizure: {
        // Large rhythmic spike-and-wave around 3 Hz.
        const double f = 3.0 * jitter;
        const double cyc = std::fmod(f * t + phase / kTwoPi, 1.0);
        v = 450.0 * jitter * (std::exp(-cyc * 14.0) - 0.35 * std::sin(kTwoPi * cyc)) + 40.0 * gaussian(rng);
        break;
      }
      case ClassLabel::TumorArea:
        v = 70.0 * std::sin(kTwoPi * 1.5 * jitter * t + phase) + 25.0 * std::sin(kTwoPi * 6.0 * t) + 18.0 * gaussian(rng);
        break;
      case ClassLabel::HealthArea:
        v = 55.0 * std::sin(kTwoPi * 4.5 * jitter * t + phase) + 20.0 * gaussian(rng);
        break;
      case ClassLabel::EyesClosed:
        v = 60.0 * std::sin(kTwoPi * 10.0 * jitter * t + phase) * (0.7 + 0.3 * std::sin(kTwoPi * t)) + 15.0 * gaussian(rng);
        break;
      case ClassLabel::EyesOpen:
        v = 22.0 * std::sin(kTwoPi * 19.0 * jitter * t + phase) + 18.0 * gaussian(rng);
        break;
    }
    w[i] = std::round(v);
  }
  return w;
}

}  // namespace

EegDataset synthetic_dataset(std::size_t per_class, std::uint64_t seed) {
  std::vector<EegRecord> records;
  records.reserve(per_class * kAllLabels.size());
  Rng rng(seed);
  // Interleave classes so file order carries no label structure.
  for (std::size_t i = 0; i < per_class; ++i) {
    for (ClassLabel label : kAllLabels) {
      EegRecord r;
      r.id = "S" + std::to_string(label_code(label)) + "." + std::to_string(i + 1);
      r.samples = make_wave(label, rng);
      r.label = label;
      records.push_back(std::move(r));
    }
  }
  return EegDataset(std::move(records), Provenance{"synthetic", std::chrono::system_clock::now()});
}

}  // namespace eegbench::checks
