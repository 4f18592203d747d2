#pragma once

#include <array>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace eegbench {

/// Voltage samples per one-second chunk in the UCI seizure recognition file.
inline constexpr std::size_t kSamplesPerRecord = 178;
inline constexpr int kNumActivityClasses = 5;

/// Brain-activity label. The enumerator value is the code used in the `y`
/// column of the source CSV.
enum class ClassLabel : int {
  Seizure = 1,
  TumorArea = 2,
  HealthArea = 3,
  EyesClosed = 4,
  EyesOpen = 5,
};

inline constexpr std::array<ClassLabel, kNumActivityClasses> kAllLabels = {
    ClassLabel::Seizure, ClassLabel::TumorArea, ClassLabel::HealthArea,
    ClassLabel::EyesClosed, ClassLabel::EyesOpen};

constexpr int label_code(ClassLabel label) noexcept { return static_cast<int>(label); }
std::string_view label_name(ClassLabel label) noexcept;
std::optional<ClassLabel> label_from_code(int code) noexcept;
std::optional<ClassLabel> label_from_name(std::string_view name) noexcept;

using Waveform = std::array<double, kSamplesPerRecord>;

/// One subject-second of EEG.
struct EegRecord {
  std::string id;
  Waveform samples{};
  ClassLabel label = ClassLabel::Seizure;

  bool operator==(const EegRecord&) const = default;
};

struct Provenance {
  std::string source;
  std::chrono::system_clock::time_point loaded_at;
};

/// Immutable, non-empty, ordered collection of records. Equality ignores
/// provenance.
class EegDataset {
 public:
  EegDataset(std::vector<EegRecord> records, Provenance provenance);

  const std::vector<EegRecord>& records() const noexcept { return records_; }
  std::size_t size() const noexcept { return records_.size(); }
  const EegRecord& operator[](std::size_t i) const { return records_[i]; }
  const Provenance& provenance() const noexcept { return provenance_; }

  bool operator==(const EegDataset& other) const { return records_ == other.records_; }

 private:
  std::vector<EegRecord> records_;
  Provenance provenance_;
};

/// Parses the `id,X1,...,X178,y` layout. A blank first header cell is accepted
/// as the id column. Throws SchemaError, ParseError, EmptyInputError, IoError.
EegDataset load_csv(const std::filesystem::path& path);
EegDataset load_csv(std::istream& in, std::string source);

/// Writes a dataset back in the layout `load_csv` reads.
void write_csv(const EegDataset& ds, const std::filesystem::path& path);
void write_csv(const EegDataset& ds, std::ostream& out);

/// Counts per label; every label is present as a key, possibly with 0.
std::map<ClassLabel, std::size_t> class_distribution(const EegDataset& ds);

/// One record per class in label order, chosen uniformly with a seeded
/// generator. Throws InsufficientClassError naming the first absent class.
std::vector<EegRecord> sample_per_class(const EegDataset& ds, std::uint64_t seed);

/// Writes columns `t,<id1>,<id2>,...` with t = 1..178 and raw samples.
void export_waveform_csv(std::span<const EegRecord> records, const std::filesystem::path& path);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

}  // namespace eegbench
