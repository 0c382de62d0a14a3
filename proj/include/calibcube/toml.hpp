#ifndef CALIBCUBE_TOML_HPP
#define CALIBCUBE_TOML_HPP

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "calibcube/error.hpp"

namespace calibcube::toml {

/// Minimal TOML reader covering what the config files use: bare keys,
/// dotted [table.headers], strings, integers, floats, booleans, and
/// (nested) arrays that may span lines. Dates and inline tables are not
/// supported. Parse failures throw ParseError with file:line context.
class Value {
 public:
  enum class Kind { Integer, Float, Boolean, String, Array, Table };

  using Array = std::vector<Value>;
  using Table = std::map<std::string, Value>;

  Value() : kind_(Kind::Table), table_(std::make_shared<Table>()) {}
  static Value integer(int64_t v);
  static Value floating(double v);
  static Value boolean(bool v);
  static Value string(std::string v);
  static Value array(Array v);
  static Value table(Table v);

  Kind kind() const { return kind_; }
  bool is_table() const { return kind_ == Kind::Table; }
  bool is_array() const { return kind_ == Kind::Array; }
  bool is_number() const { return kind_ == Kind::Integer || kind_ == Kind::Float; }

  int64_t as_int(const std::string& context = "") const;
  /// Integers promote to double.
  double as_double(const std::string& context = "") const;
  bool as_bool(const std::string& context = "") const;
  const std::string& as_string(const std::string& context = "") const;
  const Array& as_array(const std::string& context = "") const;
  const Table& as_table(const std::string& context = "") const;

  bool contains(const std::string& key) const;
  /// Table lookup; throws ConfigError naming the missing key.
  const Value& at(const std::string& key) const;

  /// Typed getters with defaults for optional keys.
  double get_double(const std::string& key) const;
  double get_double_or(const std::string& key, double fallback) const;
  int64_t get_int(const std::string& key) const;
  int64_t get_int_or(const std::string& key, int64_t fallback) const;
  std::string get_string(const std::string& key) const;
  std::string get_string_or(const std::string& key, const std::string& fallback) const;
  std::vector<double> get_double_array(const std::string& key) const;

  Table& mutable_table();

 private:
  Kind kind_;
  int64_t int_ = 0;
  double float_ = 0.0;
  bool bool_ = false;
  std::string string_;
  std::shared_ptr<Array> array_;
  std::shared_ptr<Table> table_;
};

Value parse(const std::string& text, const std::string& origin = "<string>");
Value parse_file(const std::string& path);

}  // namespace calibcube::toml

#endif  // CALIBCUBE_TOML_HPP
