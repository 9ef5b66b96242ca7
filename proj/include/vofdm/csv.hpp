#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <type_traits>
#include <vector>

#include "vofdm/common.hpp"

namespace vofdm {

// Row-oriented CSV buffer.  Doubles print as %.8e so reruns diff cleanly;
// every row is checked against the header width.
class CsvWriter {
 public:
  void set_comment(std::string comment) { comment_ = std::move(comment); }

  void header(const std::vector<std::string>& names) {
    detail::require(columns_ == 0, "header already written");
    detail::require(!names.empty(), "empty header");
    columns_ = names.size();
    names_ = names;
    header_ = join(names);
  }

  const std::vector<std::string>& header_names() const { return names_; }

  template <class... Ts>
  void row(const Ts&... values) {
    detail::require(sizeof...(values) == columns_,
                    "row width does not match header");
    std::string line;
    ((line += format(values), line += ','), ...);
    line.pop_back();
    body_ += line;
    body_ += '\n';
    ++n_rows_;
  }

  std::uint64_t n_rows() const { return n_rows_; }
  std::size_t columns() const { return columns_; }

  std::string str() const {
    std::string out;
    if (!comment_.empty()) {
      out += "# ";
      out += comment_;
      out += '\n';
    }
    out += header_;
    out += '\n';
    out += body_;
    return out;
  }

  void write_file(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    detail::require(f.good(), "cannot open output file: " + path);
    std::string text = str();
    f.write(text.data(), static_cast<std::streamsize>(text.size()));
    detail::require(f.good(), "write failed: " + path);
  }

 private:
  static std::string join(const std::vector<std::string>& names) {
    std::string out;
    for (const std::string& n : names) {
      out += n;
      out += ',';
    }
    out.pop_back();
    return out;
  }

  static std::string format(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.8e", v);
    return buf;
  }
  static std::string format(bool v) { return v ? "1" : "0"; }
  template <class T, std::enable_if_t<std::is_integral_v<T>, int> = 0>
  static std::string format(T v) {
    return std::to_string(v);
  }
  static std::string format(const char* v) { return v; }
  static std::string format(const std::string& v) { return v; }

  std::string comment_;
  std::vector<std::string> names_;
  std::string header_;
  std::string body_;
  std::size_t columns_ = 0;
  std::uint64_t n_rows_ = 0;
};

}  // namespace vofdm
