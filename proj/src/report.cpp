#include "hodgeforms/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

namespace hodge {

std::string format_g17(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void JsonWriter::indent() {
  out_.append(2 * stack_.size(), ' ');
}

void JsonWriter::before_item() {
  if (pending_key_) {
    pending_key_ = false;
    return;
  }
  if (stack_.empty()) {
    if (!out_.empty())
      throw Error(ErrorCode::invalid_argument, "json: two top-level values");
    return;
  }
  if (stack_.back() == 'o')
    throw Error(ErrorCode::invalid_argument, "json: value in an object needs a key");
  if (has_items_.back()) out_ += ",";
  out_ += "\n";
  has_items_.back() = true;
  indent();
}

JsonWriter& JsonWriter::key(const std::string& name) {
  if (stack_.empty() || stack_.back() != 'o')
    throw Error(ErrorCode::invalid_argument, "json: key outside an object");
  if (pending_key_)
    throw Error(ErrorCode::invalid_argument, "json: key after key");
  if (has_items_.back()) out_ += ",";
  out_ += "\n";
  has_items_.back() = true;
  indent();
  append_string(name);
  out_ += ": ";
  pending_key_ = true;
  return *this;
}

JsonWriter& JsonWriter::begin_object() {
  before_item();
  out_ += "{";
  stack_.push_back('o');
  has_items_.push_back(false);
  return *this;
}

JsonWriter& JsonWriter::end_object() {
  if (stack_.empty() || stack_.back() != 'o')
    throw Error(ErrorCode::invalid_argument, "json: mismatched end_object");
  const bool had = has_items_.back();
  stack_.pop_back();
  has_items_.pop_back();
  if (had) {
    out_ += "\n";
    indent();
  }
  out_ += "}";
  return *this;
}

JsonWriter& JsonWriter::begin_array() {
  before_item();
  out_ += "[";
  stack_.push_back('a');
  has_items_.push_back(false);
  return *this;
}

JsonWriter& JsonWriter::end_array() {
  if (stack_.empty() || stack_.back() != 'a')
    throw Error(ErrorCode::invalid_argument, "json: mismatched end_array");
  const bool had = has_items_.back();
  stack_.pop_back();
  has_items_.pop_back();
  if (had) {
    out_ += "\n";
    indent();
  }
  out_ += "]";
  return *this;
}

JsonWriter& JsonWriter::value(double v) {
  before_item();
  out_ += format_g17(v);
  return *this;
}

JsonWriter& JsonWriter::value(int v) {
  before_item();
  out_ += std::to_string(v);
  return *this;
}

JsonWriter& JsonWriter::value(bool v) {
  before_item();
  out_ += v ? "true" : "false";
  return *this;
}

JsonWriter& JsonWriter::value(const char* v) { return value(std::string(v)); }

JsonWriter& JsonWriter::value(const std::string& v) {
  before_item();
  append_string(v);
  return *this;
}

void JsonWriter::append_string(const std::string& v) {
  out_ += '"';
  for (const char c : v) {
    switch (c) {
      case '"': out_ += "\\\""; break;
      case '\\': out_ += "\\\\"; break;
      case '\n': out_ += "\\n"; break;
      case '\t': out_ += "\\t"; break;
      case '\r': out_ += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out_ += buf;
        } else {
          out_ += c;
        }
    }
  }
  out_ += '"';
}

std::string JsonWriter::str() const {
  if (!stack_.empty())
    throw Error(ErrorCode::invalid_argument, "json: unclosed container");
  return out_ + "\n";
}

void write_report(const std::string& json_text, const std::string& csv_text,
                  const ReportPaths& paths) {
  if (paths.json.empty()) {
    std::cout << json_text;
  } else {
    std::ofstream out(paths.json);
    if (!out) throw Error(ErrorCode::io, "cannot write '" + paths.json + "'");
    out << json_text;
    if (!out.good()) throw Error(ErrorCode::io, "write failed for '" + paths.json + "'");
  }
  if (!csv_text.empty()) {
    if (paths.csv.empty()) {
      std::cout << csv_text;
    } else {
      std::ofstream out(paths.csv);
      if (!out) throw Error(ErrorCode::io, "cannot write '" + paths.csv + "'");
      out << csv_text;
      if (!out.good()) throw Error(ErrorCode::io, "write failed for '" + paths.csv + "'");
    }
  }
}

}  // namespace hodge
