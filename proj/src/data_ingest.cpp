#include "eegbench/data_ingest.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "eegbench/errors.hpp"
#include "eegbench/rng.hpp"

namespace eegbench {

namespace {

constexpr std::array<std::string_view, kNumActivityClasses> kLabelNames = {
    "Seizure", "TumorArea", "HealthArea", "EyesClosed", "EyesOpen"};

// Splits one CSV line. Double-quoted cells may contain commas and "" escapes.
std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cell.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else {
      cell.push_back(c);
    }
  }
  cells.push_back(std::move(cell));
  return cells;
}

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return std::string(s.substr(b, e - b));
}

std::string quote_if_needed(const std::string& cell) {
  if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::vector<std::string> expected_header() {
  std::vector<std::string> names;
  names.reserve(kSamplesPerRecord + 2);
  names.emplace_back("id");
  for (std::size_t j = 1; j <= kSamplesPerRecord; ++j) names.push_back("X" + std::to_string(j));
  names.emplace_back("y");
  return names;
}

void validate_header(const std::vector<std::string>& header) {
  const auto expected = expected_header();
  // Position 0 is the id column and may carry any name, including none.
  auto present = [&](const std::string& name) {
    for (std::size_t i = 1; i < header.size(); ++i)
      if (header[i] == name) return true;
    return false;
  };
  for (std::size_t i = 1; i < expected.size(); ++i) {
    if (!present(expected[i])) throw SchemaError("missing column '" + expected[i] + "'");
  }
  for (std::size_t i = 1; i < header.size(); ++i) {
    bool known = false;
    for (std::size_t k = 1; k < expected.size(); ++k) known = known || header[i] == expected[k];
    if (!known) throw SchemaError("unexpected column '" + header[i] + "'");
  }
  if (header.size() != expected.size()) {
    throw SchemaError("duplicate column in header (expected " +
                      std::to_string(expected.size()) + " columns, found " +
                      std::to_string(header.size()) + ")");
  }
  for (std::size_t i = 1; i < expected.size(); ++i) {
    if (header[i] != expected[i]) {
      throw SchemaError("column '" + expected[i] + "' out of order (found '" + header[i] +
                        "' at position " + std::to_string(i + 1) + ")");
    }
  }
}

}  // namespace

std::string_view label_name(ClassLabel label) noexcept {
  return kLabelNames[static_cast<std::size_t>(label_code(label) - 1)];
}

std::optional<ClassLabel> label_from_code(int code) noexcept {
  if (code < 1 || code > kNumActivityClasses) return std::nullopt;
  return static_cast<ClassLabel>(code);
}

std::optional<ClassLabel> label_from_name(std::string_view name) noexcept {
  for (std::size_t i = 0; i < kLabelNames.size(); ++i)
    if (kLabelNames[i] == name) return static_cast<ClassLabel>(static_cast<int>(i) + 1);
  return std::nullopt;
}

EegDataset::EegDataset(std::vector<EegRecord> records, Provenance provenance)
    : records_(std::move(records)), provenance_(std::move(provenance)) {
  if (records_.empty()) throw EmptyInputError("dataset has no records");
  for (const auto& r : records_) {
    for (double v : r.samples)
      if (!std::isfinite(v)) throw ParseError("record '" + r.id + "' has a non-finite sample");
  }
}

std::string format_double(double v) {
  std::array<char, 32> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

EegDataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return load_csv(in, path.string());
}

EegDataset load_csv(std::istream& in, std::string source) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    if (!trim(line).empty()) {
      header = split_csv_line(line);
      break;
    }
  }
  if (header.empty()) throw EmptyInputError("'" + source + "' is empty");
  for (auto& h : header) h = trim(h);
  validate_header(header);

  std::vector<EegRecord> records;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto where = [&] {
      return "line " + std::to_string(line_no) + " (data row " + std::to_string(records.size() + 1) + ")";
    };
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw ParseError(where() + ": expected " + std::to_string(header.size()) + " cells, found " +
                       std::to_string(cells.size()));
    }
    EegRecord rec;
    rec.id = trim(cells.front());
    for (std::size_t j = 0; j < kSamplesPerRecord; ++j) {
      const std::string cell = trim(cells[j + 1]);
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
        throw ParseError(where() + ": non-numeric sample '" + cell + "' in column X" +
                         std::to_string(j + 1));
      }
      rec.samples[j] = v;
    }
    const std::string ycell = trim(cells.back());
    int code = 0;
    const auto [ptr, ec] = std::from_chars(ycell.data(), ycell.data() + ycell.size(), code);
    const auto label = (ec == std::errc() && ptr == ycell.data() + ycell.size())
                           ? label_from_code(code)
                           : std::nullopt;
    if (!label) throw ParseError(where() + ": label y='" + ycell + "' is not in {1,...,5}");
    rec.label = *label;
    records.push_back(std::move(rec));
  }
  if (records.empty()) throw EmptyInputError("'" + source + "' has a header but no data rows");
  return EegDataset(std::move(records), Provenance{std::move(source), std::chrono::system_clock::now()});
}

void write_csv(const EegDataset& ds, std::ostream& out) {
  const auto names = expected_header();
  out << "\"\"";
  for (std::size_t i = 1; i < names.size(); ++i) out << ',' << names[i];
  out << '\n';
  for (const auto& r : ds.records()) {
    out << quote_if_needed(r.id);
    for (double v : r.samples) out << ',' << format_double(v);
    out << ',' << label_code(r.label) << '\n';
  }
}

void write_csv(const EegDataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  write_csv(ds, out);
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::map<ClassLabel, std::size_t> class_distribution(const EegDataset& ds) {
  std::map<ClassLabel, std::size_t> counts;
  for (auto label : kAllLabels) counts[label] = 0;
  for (const auto& r : ds.records()) ++counts[r.label];
  return counts;
}

std::vector<EegRecord> sample_per_class(const EegDataset& ds, std::uint64_t seed) {
  std::vector<EegRecord> picks;
  picks.reserve(kAllLabels.size());
  for (auto label : kAllLabels) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < ds.size(); ++i)
      if (ds[i].label == label) members.push_back(i);
    if (members.empty()) {
      throw InsufficientClassError("no record of class " + std::string(label_name(label)));
    }
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(label_code(label))));
    picks.push_back(ds[members[rng.below(members.size())]]);
  }
  return picks;
}

void export_waveform_csv(std::span<const EegRecord> records, const std::filesystem::path& path) {
  if (records.empty()) throw EmptyInputError("no records to export");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << 't';
  for (const auto& r : records) out << ',' << quote_if_needed(r.id);
  out << '\n';
  for (std::size_t t = 0; t < kSamplesPerRecord; ++t) {
    out << (t + 1);
    for (const auto& r : records) out << ',' << format_double(r.samples[t]);
    out << '\n';
  }
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace eegbench
