#include "calibcube/toml.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace calibcube::toml {

Value Value::integer(int64_t v) {
  Value out;
  out.kind_ = Kind::Integer;
  out.int_ = v;
  return out;
}

Value Value::floating(double v) {
  Value out;
  out.kind_ = Kind::Float;
  out.float_ = v;
  return out;
}

Value Value::boolean(bool v) {
  Value out;
  out.kind_ = Kind::Boolean;
  out.bool_ = v;
  return out;
}

Value Value::string(std::string v) {
  Value out;
  out.kind_ = Kind::String;
  out.string_ = std::move(v);
  return out;
}

Value Value::array(Array v) {
  Value out;
  out.kind_ = Kind::Array;
  out.array_ = std::make_shared<Array>(std::move(v));
  return out;
}

Value Value::table(Table v) {
  Value out;
  out.kind_ = Kind::Table;
  out.table_ = std::make_shared<Table>(std::move(v));
  return out;
}

namespace {
[[noreturn]] void type_error(const std::string& want, const std::string& context) {
  throw CalibError(Errc::ConfigError,
                   "expected " + want + (context.empty() ? "" : " for '" + context + "'"));
}
}  // namespace

int64_t Value::as_int(const std::string& context) const {
  if (kind_ != Kind::Integer) type_error("integer", context);
  return int_;
}

double Value::as_double(const std::string& context) const {
  if (kind_ == Kind::Integer) return static_cast<double>(int_);
  if (kind_ != Kind::Float) type_error("number", context);
  return float_;
}

bool Value::as_bool(const std::string& context) const {
  if (kind_ != Kind::Boolean) type_error("boolean", context);
  return bool_;
}

const std::string& Value::as_string(const std::string& context) const {
  if (kind_ != Kind::String) type_error("string", context);
  return string_;
}

const Value::Array& Value::as_array(const std::string& context) const {
  if (kind_ != Kind::Array) type_error("array", context);
  return *array_;
}

const Value::Table& Value::as_table(const std::string& context) const {
  if (kind_ != Kind::Table) type_error("table", context);
  return *table_;
}

bool Value::contains(const std::string& key) const {
  return is_table() && table_->count(key) > 0;
}

const Value& Value::at(const std::string& key) const {
  const Table& t = as_table(key);
  auto it = t.find(key);
  if (it == t.end())
    throw CalibError(Errc::ConfigError, "missing key '" + key + "'");
  return it->second;
}

double Value::get_double(const std::string& key) const { return at(key).as_double(key); }

double Value::get_double_or(const std::string& key, double fallback) const {
  return contains(key) ? at(key).as_double(key) : fallback;
}

int64_t Value::get_int(const std::string& key) const { return at(key).as_int(key); }

int64_t Value::get_int_or(const std::string& key, int64_t fallback) const {
  return contains(key) ? at(key).as_int(key) : fallback;
}

std::string Value::get_string(const std::string& key) const {
  return at(key).as_string(key);
}

std::string Value::get_string_or(const std::string& key, const std::string& fallback) const {
  return contains(key) ? at(key).as_string(key) : fallback;
}

std::vector<double> Value::get_double_array(const std::string& key) const {
  const Array& a = at(key).as_array(key);
  std::vector<double> out;
  out.reserve(a.size());
  for (const Value& v : a) out.push_back(v.as_double(key));
  return out;
}

Value::Table& Value::mutable_table() {
  if (!is_table()) throw CalibError(Errc::ConfigError, "not a table");
  return *table_;
}

namespace {

class Parser {
 public:
  Parser(const std::string& text, std::string origin)
      : text_(text), origin_(std::move(origin)) {}

  Value run() {
    Value root;
    Value::Table* current = &root.mutable_table();
    std::string current_path;
    while (!eof()) {
      skip_ws_and_comments();
      if (eof()) break;
      if (peek() == '[') {
        current = open_table(root, current_path);
      } else {
        parse_key_value(*current, current_path);
      }
    }
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw CalibError(Errc::ParseError,
                     origin_ + ":" + std::to_string(line_) + ": " + msg);
  }

  bool eof() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }

  char take() {
    char c = text_[pos_++];
    if (c == '\n') ++line_;
    return c;
  }

  void skip_ws_and_comments() {
    while (!eof()) {
      char c = peek();
      if (c == '#') {
        while (!eof() && peek() != '\n') take();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        take();
      } else {
        break;
      }
    }
  }

  void skip_inline_ws() {
    while (!eof() && (peek() == ' ' || peek() == '\t')) take();
  }

  std::string parse_bare_key() {
    std::string key;
    while (!eof()) {
      char c = peek();
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-') {
        key.push_back(take());
      } else {
        break;
      }
    }
    if (key.empty()) fail("expected key");
    return key;
  }

  Value::Table* open_table(Value& root, std::string& current_path) {
    take();  // '['
    if (!eof() && peek() == '[') fail("arrays of tables are not supported");
    Value::Table* node = &root.mutable_table();
    std::string path;
    while (true) {
      skip_inline_ws();
      std::string key = parse_bare_key();
      path = path.empty() ? key : path + "." + key;
      auto [it, inserted] = node->try_emplace(key, Value());
      if (!inserted && !it->second.is_table())
        fail("'" + path + "' is already a value");
      node = &it->second.mutable_table();
      skip_inline_ws();
      if (eof()) fail("unterminated table header");
      char c = take();
      if (c == ']') break;
      if (c != '.') fail("expected '.' or ']' in table header");
    }
    current_path = path;
    return node;
  }

  void parse_key_value(Value::Table& table, const std::string& path) {
    std::string key = parse_bare_key();
    skip_inline_ws();
    if (eof() || take() != '=') fail("expected '=' after key '" + key + "'");
    skip_inline_ws();
    Value v = parse_value();
    std::string full = path.empty() ? key : path + "." + key;
    if (!table.emplace(key, std::move(v)).second)
      fail("duplicate key '" + full + "'");
    skip_inline_ws();
    if (!eof() && peek() == '#')
      while (!eof() && peek() != '\n') take();
    if (!eof() && peek() != '\n') fail("unexpected trailing characters after value");
  }

  Value parse_value() {
    if (eof()) fail("expected value");
    char c = peek();
    if (c == '"') return parse_string();
    if (c == '[') return parse_array();
    if (std::isalpha(static_cast<unsigned char>(c))) return parse_boolean();
    return parse_number();
  }

  Value parse_string() {
    take();  // opening quote
    std::string out;
    while (true) {
      if (eof()) fail("unterminated string");
      char c = take();
      if (c == '"') break;
      if (c == '\n') fail("newline in string");
      if (c == '\\') {
        if (eof()) fail("unterminated escape");
        char e = take();
        switch (e) {
          case 'n': out.push_back('\n'); break;
          case 't': out.push_back('\t'); break;
          case 'r': out.push_back('\r'); break;
          case '"': out.push_back('"'); break;
          case '\\': out.push_back('\\'); break;
          default: fail(std::string("unsupported escape '\\") + e + "'");
        }
      } else {
        out.push_back(c);
      }
    }
    return Value::string(out);
  }

  Value parse_array() {
    take();  // '['
    Value::Array items;
    while (true) {
      skip_ws_and_comments();
      if (eof()) fail("unterminated array");
      if (peek() == ']') {
        take();
        break;
      }
      items.push_back(parse_value());
      skip_ws_and_comments();
      if (eof()) fail("unterminated array");
      if (peek() == ',') {
        take();
      } else if (peek() != ']') {
        fail("expected ',' or ']' in array");
      }
    }
    return Value::array(std::move(items));
  }

  Value parse_boolean() {
    std::string word = parse_bare_key();
    if (word == "true") return Value::boolean(true);
    if (word == "false") return Value::boolean(false);
    fail("unexpected token '" + word + "'");
  }

  Value parse_number() {
    size_t start = pos_;
    bool is_float = false;
    if (peek() == '+' || peek() == '-') take();
    while (!eof()) {
      char c = peek();
      if (std::isdigit(static_cast<unsigned char>(c))) {
        take();
      } else if (c == '.' || c == 'e' || c == 'E') {
        is_float = true;
        take();
        if (!eof() && (peek() == '+' || peek() == '-')) take();
      } else {
        break;
      }
    }
    std::string token = text_.substr(start, pos_ - start);
    if (token.empty() || token == "+" || token == "-") fail("expected number");
    if (is_float) {
      double v = 0.0;
      auto [p, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
      if (ec != std::errc() || p != token.data() + token.size())
        fail("invalid float '" + token + "'");
      return Value::floating(v);
    }
    int64_t v = 0;
    auto [p, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc() || p != token.data() + token.size())
      fail("invalid integer '" + token + "'");
    return Value::integer(v);
  }

  const std::string& text_;
  std::string origin_;
  size_t pos_ = 0;
  int line_ = 1;
};

}  // namespace

Value parse(const std::string& text, const std::string& origin) {
  return Parser(text, origin).run();
}

Value parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CalibError(Errc::IoError, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path);
}

}  // namespace calibcube::toml
