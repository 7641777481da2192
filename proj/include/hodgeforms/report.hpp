#pragma once

// Report serialization. JSON is written by hand so that key order and
// number formatting are pinned: insertion order, two-space indent, doubles
// with 17 significant digits. Identical inputs give identical bytes.

#include <string>
#include <vector>

#include "hodgeforms/errors.hpp"

namespace hodge {

/// printf %.17g; non-finite values become null.
std::string format_g17(double v);

/// Streaming JSON builder. Keys appear in call order.
class JsonWriter {
public:
  JsonWriter& begin_object();
  JsonWriter& end_object();
  JsonWriter& begin_array();
  JsonWriter& end_array();
  JsonWriter& key(const std::string& name);
  JsonWriter& value(double v);
  JsonWriter& value(int v);
  JsonWriter& value(const std::string& v);
  JsonWriter& value(const char* v);
  JsonWriter& value(bool v);

  /// The finished document; throws if containers are still open.
  std::string str() const;

private:
  void before_item();
  void indent();
  void append_string(const std::string& v);

  std::string out_;
  std::vector<char> stack_;        ///< 'o' or 'a'
  std::vector<bool> has_items_;
  bool pending_key_ = false;
};

struct ReportPaths {
  std::string json;  ///< empty: write the document to stdout
  std::string csv;   ///< ignored when there is no CSV text
};

/// Writes the JSON document and, when present, the CSV table.
void write_report(const std::string& json_text, const std::string& csv_text,
                  const ReportPaths& paths);

}  // namespace hodge
