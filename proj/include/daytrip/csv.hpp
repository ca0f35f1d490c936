#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "daytrip/common.hpp"

namespace daytrip {

// Minimal CSV: comma separated, double-quote escaping, '#' comment lines and
// blank lines skipped. First non-comment row is the header.
namespace csv_detail {

inline std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  out.push_back(std::move(field));
  return out;
}

inline bool needs_quoting(std::string_view s) {
  return s.find_first_of(",\"\n") != std::string_view::npos;
}

// True when the line ends inside an unterminated quoted field, meaning the
// logical record continues on the next physical line.
inline bool ends_inside_quote(std::string_view line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (!quoted) {
      if (line[i] == '"') quoted = true;
    } else if (line[i] == '"') {
      if (i + 1 < line.size() && line[i + 1] == '"')
        ++i;
      else
        quoted = false;
    }
  }
  return quoted;
}

}  // namespace csv_detail

class CsvRow {
 public:
  CsvRow(const std::vector<std::string>* header_index_keys,
         const std::unordered_map<std::string, std::size_t>* index,
         std::vector<std::string> fields, const std::string& file, std::size_t line_no)
      : keys_(header_index_keys), index_(index), fields_(std::move(fields)), file_(&file),
        line_no_(line_no) {}

  const std::string& get(const std::string& col) const {
    auto it = index_->find(col);
    if (it == index_->end() || it->second >= fields_.size())
      throw Error(*file_ + ":" + std::to_string(line_no_) + ": missing column '" + col + "'");
    return fields_[it->second];
  }

  bool has(const std::string& col) const {
    auto it = index_->find(col);
    return it != index_->end() && it->second < fields_.size() && !fields_[it->second].empty();
  }

  double get_double(const std::string& col) const {
    const std::string& s = get(col);
    try {
      std::size_t pos = 0;
      double v = std::stod(s, &pos);
      if (pos != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw Error(*file_ + ":" + std::to_string(line_no_) + ": column '" + col +
                  "' is not a number: '" + s + "'");
    }
  }

  std::int64_t get_int(const std::string& col) const {
    const std::string& s = get(col);
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
      throw Error(*file_ + ":" + std::to_string(line_no_) + ": column '" + col +
                  "' is not an integer: '" + s + "'");
    return v;
  }

  bool get_bool(const std::string& col) const {
    const std::string& s = get(col);
    if (s == "1" || s == "true") return true;
    if (s == "0" || s == "false") return false;
    throw Error(*file_ + ":" + std::to_string(line_no_) + ": column '" + col +
                "' is not a boolean: '" + s + "'");
  }

  std::size_t line_number() const { return line_no_; }
  const std::vector<std::string>& fields() const { return fields_; }

 private:
  const std::vector<std::string>* keys_;
  const std::unordered_map<std::string, std::size_t>* index_;
  std::vector<std::string> fields_;
  const std::string* file_;
  std::size_t line_no_;
};

class CsvReader {
 public:
  explicit CsvReader(const std::string& path) : path_(path), in_(path) {
    if (!in_) throw Error("cannot open " + path);
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (line.empty() || line[0] == '#') continue;
      header_ = csv_detail::split_line(line);
      for (std::size_t i = 0; i < header_.size(); ++i) index_[header_[i]] = i;
      return;
    }
    throw Error(path + ": empty file, header expected");
  }

  // Returns false at end of file.
  bool next(CsvRow& out) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (line.empty() || line[0] == '#') continue;
      std::string more;
      while (csv_detail::ends_inside_quote(line) && std::getline(in_, more)) {
        ++line_no_;
        line += '\n';
        line += more;
      }
      out = CsvRow(&header_, &index_, csv_detail::split_line(line), path_, line_no_);
      return true;
    }
    return false;
  }

  template <typename Fn>
  void for_each(Fn&& fn) {
    CsvRow row(&header_, &index_, {}, path_, 0);
    while (next(row)) fn(row);
  }

  const std::vector<std::string>& header() const { return header_; }

 private:
  std::string path_;
  std::ifstream in_;
  std::vector<std::string> header_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t line_no_ = 0;
};

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header) : out_(path) {
    if (!out_) throw Error("cannot open " + path + " for writing");
    write_row(header);
  }

  void write_row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out_ << ',';
      if (csv_detail::needs_quoting(fields[i])) {
        out_ << '"';
        for (char c : fields[i]) {
          if (c == '"') out_ << '"';
          out_ << c;
        }
        out_ << '"';
      } else {
        out_ << fields[i];
      }
    }
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

}  // namespace daytrip
