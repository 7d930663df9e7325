#pragma once

#include <cstdio>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace gordonse {

/// Minimal CSV writer. Doubles are written in full-precision scientific
/// notation so reruns are byte-comparable.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path,
            const std::vector<std::string>& columns)
      : cols_(columns.size()) {
    f_ = std::fopen(path.string().c_str(), "wb");
    if (!f_) throw std::runtime_error("cannot open " + path.string());
    for (std::size_t i = 0; i < columns.size(); ++i)
      std::fprintf(f_, "%s%s", columns[i].c_str(),
                   i + 1 < columns.size() ? "," : "\n");
  }
  ~CsvWriter() {
    if (f_) std::fclose(f_);
  }
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  CsvWriter& field(double v) {
    sep();
    std::fprintf(f_, "%.17e", v);
    return *this;
  }
  CsvWriter& field(long long v) {
    sep();
    std::fprintf(f_, "%lld", v);
    return *this;
  }
  CsvWriter& field(int v) { return field(static_cast<long long>(v)); }
  CsvWriter& field(const std::string& v) {
    sep();
    std::fprintf(f_, "%s", v.c_str());
    return *this;
  }
  void end_row() {
    if (in_row_ != cols_)
      throw std::logic_error("csv row has wrong number of fields");
    std::fprintf(f_, "\n");
    in_row_ = 0;
  }

 private:
  void sep() {
    if (in_row_ > 0) std::fprintf(f_, ",");
    ++in_row_;
  }
  std::FILE* f_ = nullptr;
  std::size_t cols_;
  std::size_t in_row_ = 0;
};

}  // namespace gordonse
