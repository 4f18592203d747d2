#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "eegbench/data_ingest.hpp"
#include "eegbench/preprocess.hpp"

namespace fixtures {

inline std::string csv_header() {
  std::string h = "id";
  for (std::size_t j = 1; j <= eegbench::kSamplesPerRecord; ++j) h += ",X" + std::to_string(j);
  return h + ",y\n";
}

/// One CSV data row whose samples are fill, fill + 1, ...
inline std::string csv_row(const std::string& id, double fill, const std::string& y) {
  std::ostringstream row;
  row << id;
  for (std::size_t j = 0; j < eegbench::kSamplesPerRecord; ++j) row << ',' << fill + static_cast<double>(j);
  row << ',' << y << '\n';
  return row.str();
}

/// One row per class, codes 1..5 in file order.
inline std::string five_row_csv() {
  std::string s = csv_header();
  for (int c = 1; c <= 5; ++c) s += csv_row("r" + std::to_string(c), 10.0 * c, std::to_string(c));
  return s;
}

inline eegbench::EegDataset load_string(const std::string& text) {
  std::istringstream in(text);
  return eegbench::load_csv(in, "fixture");
}

inline eegbench::LabeledData make_data(const std::vector<std::vector<double>>& rows, const std::vector<int>& labels,
                                       int num_classes) {
  eegbench::LabeledData d;
  d.rows = rows.size();
  d.cols = rows.empty() ? 0 : rows.front().size();
  d.num_classes = num_classes;
  for (const auto& r : rows) d.features.insert(d.features.end(), r.begin(), r.end());
  d.labels = labels;
  return d;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("eegbench-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace fixtures
