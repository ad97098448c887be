#include "spinlab/config.hpp"

#include <cctype>
#include <charconv>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <variant>
#include <vector>

namespace spinlab {
namespace {

struct Value {
  std::variant<double, std::string, std::vector<double>> v;
  int line = 0;
};

using Table = std::map<std::string, Value>;

[[noreturn]] void fail(int line, const std::string& what) {
  throw ConfigError("config: line " + std::to_string(line) + ": " + what);
}

std::string_view strip(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

double parse_number(std::string_view tok, int line) {
  const std::string t(strip(tok));
  if (t.empty())
    fail(line, "expected a number");
  char* end = nullptr;
  const double x = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size() || !std::isfinite(x))
    fail(line, "malformed number '" + t + "'");
  return x;
}

Value parse_value(std::string_view raw, int line) {
  std::string_view s = strip(raw);
  if (s.empty())
    fail(line, "missing value after '='");
  if (s.front() == '"') {
    if (s.size() < 2 || s.back() != '"')
      fail(line, "unterminated string");
    return {std::string(s.substr(1, s.size() - 2)), line};
  }
  if (s.front() == '[') {
    if (s.back() != ']')
      fail(line, "unterminated array");
    std::vector<double> xs;
    std::string_view body = s.substr(1, s.size() - 2);
    while (!strip(body).empty()) {
      const std::size_t comma = body.find(',');
      xs.push_back(parse_number(body.substr(0, comma), line));
      if (comma == std::string_view::npos)
        break;
      body.remove_prefix(comma + 1);
    }
    if (xs.empty())
      fail(line, "array must not be empty");
    return {xs, line};
  }
  return {parse_number(s, line), line};
}

// key = value lines, one optional [section] level, dotted keys, # comments.
Table parse_document(const std::string& text) {
  Table table;
  std::istringstream in(text);
  std::string lbuf;
  std::string section;
  int line = 0;
  while (std::getline(in, lbuf)) {
    ++line;
    std::string_view s(lbuf);
    if (const std::size_t hash = s.find('#'); hash != std::string_view::npos) {
      // keep # inside quoted strings
      const std::size_t q1 = s.find('"');
      if (q1 == std::string_view::npos || hash < q1)
        s = s.substr(0, hash);
    }
    s = strip(s);
    if (s.empty())
      continue;
    if (s.front() == '[') {
      if (s.back() != ']' || s.size() < 3)
        fail(line, "malformed section header");
      section = std::string(strip(s.substr(1, s.size() - 2)));
      if (section.empty())
        fail(line, "empty section name");
      continue;
    }
    const std::size_t eq = s.find('=');
    if (eq == std::string_view::npos)
      fail(line, "expected 'key = value'");
    std::string key(strip(s.substr(0, eq)));
    if (key.empty())
      fail(line, "empty key");
    if (!section.empty())
      key = section + "." + key;
    if (table.count(key))
      fail(line, "duplicate key '" + key + "'");
    table.emplace(std::move(key), parse_value(s.substr(eq + 1), line));
  }
  return table;
}

class Schema {
public:
  explicit Schema(Table t) : table_(std::move(t)) {}

  std::optional<Value> take(const std::string& key) {
    auto it = table_.find(key);
    if (it == table_.end())
      return std::nullopt;
    Value v = std::move(it->second);
    table_.erase(it);
    return v;
  }

  Value require(const std::string& key) {
    auto v = take(key);
    if (!v)
      throw ConfigError("config: missing required key '" + key + "'");
    return *v;
  }

  double number(const std::string& key) {
    Value v = require(key);
    if (const double* x = std::get_if<double>(&v.v))
      return *x;
    fail(v.line, "key '" + key + "' must be a number");
  }

  std::vector<double> numbers(const std::string& key) {
    Value v = require(key);
    if (const auto* xs = std::get_if<std::vector<double>>(&v.v))
      return *xs;
    fail(v.line, "key '" + key + "' must be an array of numbers");
  }

  void finish() const {
    if (table_.empty())
      return;
    const auto& [key, val] = *table_.begin();
    fail(val.line, "unknown key '" + key + "'");
  }

private:
  Table table_;
};

SingleSitePotential parse_potential(Schema& schema, const std::string& base_dir) {
  Value kind_v = schema.require("potential.kind");
  const std::string* kind = std::get_if<std::string>(&kind_v.v);
  if (!kind)
    fail(kind_v.line, "potential.kind must be a string");
  if (*kind == "zero")
    return SingleSitePotential::zero();
  if (*kind == "cosine") {
    const double a = schema.number("potential.a");
    const double b = schema.number("potential.b");
    return SingleSitePotential::cosine(a, b);
  }
  if (*kind == "custom") {
    const double bound = schema.number("potential.bound_sup");
    std::vector<double> z, v, d1, d2;
    if (auto path_v = schema.take("potential.table_path")) {
      const std::string* rel = std::get_if<std::string>(&path_v->v);
      if (!rel)
        fail(path_v->line, "potential.table_path must be a string");
      std::filesystem::path p(*rel);
      if (p.is_relative() && !base_dir.empty())
        p = std::filesystem::path(base_dir) / p;
      std::ifstream in(p);
      if (!in)
        throw ConfigError("config: cannot open potential table '" + p.string() + "'");
      double a, b, c, d;
      while (in >> a >> b >> c >> d) {
        z.push_back(a);
        v.push_back(b);
        d1.push_back(c);
        d2.push_back(d);
      }
      if (!in.eof())
        throw ConfigError("config: malformed potential table '" + p.string() +
                          "', expected rows of 'z value d1 d2'");
    } else {
      // Inline alternative to table_path; this is also the serialized form.
      z = schema.numbers("potential.table_z");
      v = schema.numbers("potential.table_value");
      d1 = schema.numbers("potential.table_d1");
      d2 = schema.numbers("potential.table_d2");
    }
    return SingleSitePotential::tabulated(std::move(z), std::move(v), std::move(d1),
                                          std::move(d2), bound);
  }
  fail(kind_v.line, "potential.kind must be one of zero|cosine|custom");
}

LatticeModel load_model_impl(const std::string& text, const std::string& base_dir) {
  Schema schema(parse_document(text));
  Value k_v = schema.require("K");
  const double* k_num = std::get_if<double>(&k_v.v);
  if (!k_num || *k_num != std::floor(*k_num) || *k_num < 1 || *k_num > 1e9)
    fail(k_v.line, "K must be a positive integer");
  const int K = static_cast<int>(*k_num);
  const double J = schema.number("J");
  Value s_v = schema.require("s");
  std::vector<double> s;
  if (const double* x = std::get_if<double>(&s_v.v))
    s = {*x};
  else if (const auto* xs = std::get_if<std::vector<double>>(&s_v.v))
    s = *xs;
  else
    fail(s_v.line, "s must be a number or an array of numbers");
  const double sigma = schema.number("sigma");
  SingleSitePotential pot = parse_potential(schema, base_dir);
  schema.finish();
  return LatticeModel::make(K, J, std::move(s), sigma, std::move(pot));
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

} // namespace

LatticeModel load_model(const std::string& text) { return load_model_impl(text, ""); }

LatticeModel load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return load_model_impl(ss.str(), std::filesystem::path(path).parent_path().string());
}

std::string serialize_model(const LatticeModel& model) {
  std::ostringstream out;
  out << "K = " << model.K << "\n";
  out << "J = " << fmt(model.J) << "\n";
  bool uniform = true;
  for (double si : model.s)
    uniform = uniform && si == model.s[0];
  if (uniform) {
    out << "s = " << fmt(model.s.empty() ? 0.0 : model.s[0]) << "\n";
  } else {
    out << "s = [";
    for (std::size_t i = 0; i < model.s.size(); ++i)
      out << (i ? ", " : "") << fmt(model.s[i]);
    out << "]\n";
  }
  out << "sigma = " << fmt(model.sigma) << "\n\n[potential]\n";
  switch (model.potential.kind()) {
  case PerturbationKind::Zero:
    out << "kind = \"zero\"\n";
    break;
  case PerturbationKind::Cosine:
    out << "kind = \"cosine\"\n";
    out << "a = " << fmt(model.potential.cosine_a()) << "\n";
    out << "b = " << fmt(model.potential.cosine_b()) << "\n";
    break;
  case PerturbationKind::Custom: {
    out << "kind = \"custom\"\n";
    out << "bound_sup = " << fmt(model.potential.bound_sup()) << "\n";
    const auto emit = [&out](const char* key, const std::vector<double>& xs) {
      out << key << " = [";
      for (std::size_t i = 0; i < xs.size(); ++i)
        out << (i ? ", " : "") << fmt(xs[i]);
      out << "]\n";
    };
    emit("table_z", model.potential.table_z());
    emit("table_value", model.potential.table_value());
    emit("table_d1", model.potential.table_d1());
    emit("table_d2", model.potential.table_d2());
    break;
  }
  }
  return out.str();
}

std::string config_digest(const LatticeModel& model) {
  const std::string canon = serialize_model(model);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canon) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

} // namespace spinlab
