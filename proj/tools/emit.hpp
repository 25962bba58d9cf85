// CSV/JSON emission with deterministic number formatting.
#pragma once

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace qcli {

using json = nlohmann::ordered_json;

inline std::string num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline std::string num(long long x) { return std::to_string(x); }
inline std::string num(int x) { return std::to_string(x); }
inline std::string num(size_t x) { return std::to_string(x); }
inline std::string num(const std::string& s) { return s; }
inline std::string num(const char* s) { return s; }

/// First line "# manifest: {...}", second line the header, then rows; LF only.
class Csv {
 public:
  Csv(const json& manifest, const std::vector<std::string>& header) {
    text_ = "# manifest: " + manifest.dump() + "\n";
    line(header);
    width_ = header.size();
  }

  template <class... T>
  void row(const T&... cells) {
    static_assert(sizeof...(T) > 0);
    std::vector<std::string> v{num(cells)...};
    if (v.size() != width_) throw std::logic_error("csv row width mismatch");
    line(v);
  }

  void row(const std::vector<std::string>& cells) {
    if (cells.size() != width_) throw std::logic_error("csv row width mismatch");
    line(cells);
  }

  const std::string& text() const { return text_; }

 private:
  void line(const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
      if (i) text_ += ',';
      text_ += cells[i];
    }
    text_ += '\n';
  }

  std::string text_;
  size_t width_ = 0;
};

/// JSON doubles: NaN/inf are not representable, write null.
inline json jnum(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

inline void write_file(const std::filesystem::path& dir, const std::string& name, const std::string& content) {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
  out << content;
}

inline std::string dump_document(const json& doc) { return doc.dump(2) + "\n"; }

}  // namespace qcli
