#include "config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace okr::harness {

double Value::as_real() const {
  if (kind == Kind::real) return d;
  if (kind == Kind::integer) return double(i);
  throw ConfigError(line, "expected a number");
}

long long Value::as_integer() const {
  if (kind == Kind::integer) return i;
  throw ConfigError(line, "expected an integer");
}

const std::string& Value::as_string() const {
  if (kind == Kind::string) return s;
  throw ConfigError(line, "expected a string");
}

const Value& Value::at(const std::string& key) const {
  if (kind != Kind::table) throw ConfigError(line, "expected a table");
  const auto it = tbl.find(key);
  if (it == tbl.end()) throw ConfigError(line, "missing key '" + key + "'");
  return it->second;
}

const Value* Value::find(const std::string& key) const {
  if (kind != Kind::table) return nullptr;
  const auto it = tbl.find(key);
  return it == tbl.end() ? nullptr : &it->second;
}

namespace {

struct Lexer {
  const std::string& text;
  std::size_t pos = 0;
  int line = 1;

  explicit Lexer(const std::string& t) : text(t) {}

  void skip_space(bool skip_newlines) {
    while (pos < text.size()) {
      const char c = text[pos];
      if (c == '#') {
        while (pos < text.size() && text[pos] != '\n') ++pos;
      } else if (c == '\n') {
        if (!skip_newlines) return;
        ++line;
        ++pos;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos;
      } else {
        return;
      }
    }
  }

  bool eof() {
    skip_space(true);
    return pos >= text.size();
  }

  char peek() const { return pos < text.size() ? text[pos] : '\0'; }

  void expect(char c) {
    if (peek() != c)
      throw ConfigError(line, std::string("expected '") + c + "', found '" + peek() + "'");
    ++pos;
  }

  std::string identifier() {
    skip_space(true);
    std::size_t start = pos;
    while (pos < text.size() &&
           (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_'))
      ++pos;
    if (pos == start) throw ConfigError(line, "expected an identifier");
    return text.substr(start, pos - start);
  }
};

Value parse_value(Lexer& lx);

Value parse_table(Lexer& lx) {
  Value v;
  v.kind = Value::Kind::table;
  v.line = lx.line;
  lx.expect('{');
  lx.skip_space(true);
  if (lx.peek() == '}') {
    ++lx.pos;
    return v;
  }
  while (true) {
    const std::string key = lx.identifier();
    lx.skip_space(true);
    lx.expect('=');
    Value member = parse_value(lx);
    if (!v.tbl.emplace(key, std::move(member)).second)
      throw ConfigError(lx.line, "duplicate key '" + key + "'");
    lx.skip_space(true);
    if (lx.peek() == ',') {
      ++lx.pos;
      continue;
    }
    lx.expect('}');
    return v;
  }
}

Value parse_array(Lexer& lx) {
  Value v;
  v.kind = Value::Kind::array;
  v.line = lx.line;
  lx.expect('[');
  lx.skip_space(true);
  if (lx.peek() == ']') {
    ++lx.pos;
    return v;
  }
  while (true) {
    v.arr.push_back(parse_value(lx));
    lx.skip_space(true);
    if (lx.peek() == ',') {
      ++lx.pos;
      lx.skip_space(true);
      continue;
    }
    lx.expect(']');
    return v;
  }
}

Value parse_scalar(Lexer& lx) {
  Value v;
  v.line = lx.line;
  const char c = lx.peek();
  if (c == '"') {
    ++lx.pos;
    std::string out;
    while (lx.pos < lx.text.size() && lx.text[lx.pos] != '"') {
      if (lx.text[lx.pos] == '\n') throw ConfigError(lx.line, "unterminated string");
      out.push_back(lx.text[lx.pos++]);
    }
    if (lx.pos >= lx.text.size()) throw ConfigError(lx.line, "unterminated string");
    ++lx.pos;
    v.kind = Value::Kind::string;
    v.s = std::move(out);
    return v;
  }
  std::size_t start = lx.pos;
  while (lx.pos < lx.text.size()) {
    const char ch = lx.text[lx.pos];
    if (std::isalnum(static_cast<unsigned char>(ch)) || ch == '+' || ch == '-' || ch == '.' ||
        ch == '_')
      ++lx.pos;
    else
      break;
  }
  const std::string tok = lx.text.substr(start, lx.pos - start);
  if (tok.empty()) throw ConfigError(lx.line, "expected a value");
  if (tok == "true" || tok == "false") {
    v.kind = Value::Kind::boolean;
    v.b = (tok == "true");
    return v;
  }
  // number: integer unless it carries a point or exponent
  const bool real = tok.find_first_of(".eE") != std::string::npos;
  try {
    std::size_t used = 0;
    if (real) {
      v.kind = Value::Kind::real;
      v.d = std::stod(tok, &used);
    } else {
      v.kind = Value::Kind::integer;
      v.i = std::stoll(tok, &used);
    }
    if (used != tok.size()) throw std::invalid_argument(tok);
  } catch (const std::exception&) {
    throw ConfigError(lx.line, "cannot parse value '" + tok + "'");
  }
  return v;
}

Value parse_value(Lexer& lx) {
  lx.skip_space(true);
  switch (lx.peek()) {
    case '{':
      return parse_table(lx);
    case '[':
      return parse_array(lx);
    default:
      return parse_scalar(lx);
  }
}

void print_value(const Value& v, std::string& out) {
  char buf[64];
  switch (v.kind) {
    case Value::Kind::integer:
      std::snprintf(buf, sizeof(buf), "%lld", v.i);
      out += buf;
      return;
    case Value::Kind::real:
      std::snprintf(buf, sizeof(buf), "%.17g", v.d);
      out += buf;
      return;
    case Value::Kind::boolean:
      out += v.b ? "true" : "false";
      return;
    case Value::Kind::string:
      out += '"';
      out += v.s;
      out += '"';
      return;
    case Value::Kind::array: {
      out += '[';
      for (std::size_t i = 0; i < v.arr.size(); ++i) {
        if (i) out += ", ";
        print_value(v.arr[i], out);
      }
      out += ']';
      return;
    }
    case Value::Kind::table: {
      out += "{ ";
      bool first = true;
      for (const auto& [k, member] : v.tbl) {
        if (!first) out += ", ";
        first = false;
        out += k;
        out += " = ";
        print_value(member, out);
      }
      out += " }";
      return;
    }
  }
}

}  // namespace

Value parse_config(const std::string& text) {
  Lexer lx(text);
  Value root;
  root.kind = Value::Kind::table;
  root.line = 1;
  while (!lx.eof()) {
    const int key_line = lx.line;
    const std::string key = lx.identifier();
    lx.skip_space(true);
    lx.expect('=');
    Value v = parse_value(lx);
    if (!root.tbl.emplace(key, std::move(v)).second)
      throw ConfigError(key_line, "duplicate key '" + key + "'");
  }
  return root;
}

Value parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string canonical_form(const Value& root) {
  std::string out;
  for (const auto& [k, v] : root.tbl) {
    out += k;
    out += " = ";
    print_value(v, out);
    out += '\n';
  }
  return out;
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

KernelD kernel_from_value(const Value& v) {
  const std::string family = v.at("family").as_string();
  const double lo = v.find("lo") ? v.at("lo").as_real() : 0.0;
  const double hi = v.find("hi") ? v.at("hi").as_real() : 1.0;
  try {
    if (family == "gaussian") return KernelD::gaussian(v.at("bandwidth").as_real(), lo, hi);
    if (family == "polynomial")
      return KernelD::polynomial(int(v.at("degree").as_integer()), v.at("offset").as_real(), lo, hi);
    if (family == "linear") return KernelD::linear(lo, hi);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(v.line, e.what());
  }
  throw ConfigError(v.line, "unknown kernel family '" + family + "'");
}

CopulaD copula_from_value(const Value& v) {
  const std::string family = v.at("family").as_string();
  try {
    if (family == "independence") return CopulaD::independence();
    if (family == "fgm") return CopulaD::fgm(v.at("rho").as_real());
    if (family == "mixture")
      return CopulaD::mixture(v.at("eps").as_real(), copula_from_value(v.at("base")));
    if (family == "grid") {
      const std::string preset = v.at("preset").as_string();
      if (preset == "poly_decay_k2") return make_polynomial_decay_fixture<double>();
      throw ConfigError(v.line, "unknown grid preset '" + preset + "'");
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(v.line, e.what());
  }
  throw ConfigError(v.line, "unknown copula family '" + family + "'");
}

std::vector<long> checkpoints_from_value(const Value& v) {
  std::vector<long> cps;
  if (v.kind == Value::Kind::string) {
    // "log:lo:hi:count" shorthand
    long lo = 0, hi = 0, count = 0;
    if (std::sscanf(v.s.c_str(), "log:%ld:%ld:%ld", &lo, &hi, &count) != 3 || lo < 1 || hi < lo ||
        count < 2)
      throw ConfigError(v.line, "checkpoints string must be log:<lo>:<hi>:<count>");
    for (long k = 0; k < count; ++k) {
      const double x = std::log(double(lo)) +
                       (std::log(double(hi)) - std::log(double(lo))) * double(k) / double(count - 1);
      cps.push_back(std::lround(std::exp(x)));
    }
    cps.front() = lo;
    cps.back() = hi;
  } else if (v.kind == Value::Kind::array) {
    for (const auto& e : v.arr) cps.push_back(long(e.as_integer()));
  } else {
    throw ConfigError(v.line, "checkpoints must be an array or a log:<lo>:<hi>:<count> string");
  }
  std::sort(cps.begin(), cps.end());
  cps.erase(std::unique(cps.begin(), cps.end()), cps.end());
  if (cps.empty() || cps.front() < 1) throw ConfigError(v.line, "checkpoints must be >= 1");
  return cps;
}

namespace {

std::vector<std::uint64_t> seeds_from(const Value& root, std::uint64_t seed_base, int line) {
  std::vector<std::uint64_t> seeds;
  if (const Value* sv = root.find("seeds")) {
    if (sv->kind != Value::Kind::array) throw ConfigError(sv->line, "seeds must be an array");
    for (const auto& e : sv->arr) seeds.push_back(std::uint64_t(e.as_integer()));
  } else if (const Value* nv = root.find("num_seeds")) {
    const long long n = nv->as_integer();
    if (n < 1) throw ConfigError(nv->line, "num_seeds must be >= 1");
    for (long long k = 0; k < n; ++k) seeds.push_back(seed_base + std::uint64_t(k));
  } else {
    throw ConfigError(line, "config needs either seeds = [...] or num_seeds = N");
  }
  std::vector<std::uint64_t> sorted = seeds;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw ConfigError(line, "seeds must be distinct");
  if (seeds.empty()) throw ConfigError(line, "seeds must be nonempty");
  return seeds;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (checkpoints.empty()) throw std::invalid_argument("experiment: no checkpoints");
  if (chain_length < checkpoints.back())
    throw std::invalid_argument("experiment: chain_length must cover the last checkpoint");
  if (seeds.empty()) throw std::invalid_argument("experiment: no seeds");
  if (!(delta > 0 && delta < 1)) throw std::invalid_argument("experiment: delta must lie in (0,1)");
  if (!(target_nu > 0 && target_nu <= 1))
    throw std::invalid_argument("experiment: nu must lie in (0,1]");
  if (noise_sd < 0) throw std::invalid_argument("experiment: noise_sd must be nonnegative");
}

ExperimentConfig experiment_from_value(const Value& root, std::uint64_t seed_base) {
  ExperimentConfig cfg;
  cfg.kernel = kernel_from_value(root.at("kernel"));
  cfg.copula = copula_from_value(root.at("copula"));
  const Value& target = root.at("target");
  cfg.target_g = target.at("g").as_string();
  cfg.target_nu = target.at("nu").as_real();
  cfg.lambda = root.at("lambda").as_real();
  cfg.theta = root.at("theta").as_real();
  cfg.M = root.at("M").as_real();
  cfg.noise_sd = root.find("noise_sd") ? root.at("noise_sd").as_real() : 0.0;
  cfg.delta = root.find("delta") ? root.at("delta").as_real() : 0.1;
  cfg.chain_length = long(root.at("chain_length").as_integer());
  cfg.checkpoints = checkpoints_from_value(root.at("checkpoints"));
  cfg.seeds = seeds_from(root, seed_base, root.line);
  if (const Value* v = root.find("output_dir")) cfg.output_dir = v->as_string();
  if (const Value* v = root.find("quadrature_n")) cfg.quadrature_n = int(v->as_integer());
  if (const Value* v = root.find("mixing_grid_n")) cfg.mixing_grid_n = int(v->as_integer());
  if (const Value* v = root.find("mixing_tmax")) cfg.mixing_tmax = int(v->as_integer());
  cfg.canonical = canonical_form(root);
  cfg.hash = hash_hex(fnv1a64(cfg.canonical));
  cfg.validate();
  return cfg;
}

void SsmgdConfig::validate() const {
  if (dim < 1) throw std::invalid_argument("ssmgd: dim must be >= 1");
  if (!(kappa > 0 && eta >= kappa)) throw std::invalid_argument("ssmgd: need 0 < kappa <= eta");
  if (checkpoints.empty()) throw std::invalid_argument("ssmgd: no checkpoints");
  if (chain_length < checkpoints.back())
    throw std::invalid_argument("ssmgd: chain_length must cover the last checkpoint");
  if (seeds.empty()) throw std::invalid_argument("ssmgd: no seeds");
  if (!(delta > 0 && delta < 1)) throw std::invalid_argument("ssmgd: delta must lie in (0,1)");
}

SsmgdConfig ssmgd_from_value(const Value& root, std::uint64_t seed_base) {
  SsmgdConfig cfg;
  cfg.dim = int(root.at("dim").as_integer());
  if (const Value* v = root.find("kappa")) cfg.kappa = v->as_real();
  if (const Value* v = root.find("eta")) cfg.eta = v->as_real();
  cfg.theta = root.at("theta").as_real();
  cfg.delta = root.find("delta") ? root.at("delta").as_real() : 0.1;
  cfg.copula = copula_from_value(root.at("copula"));
  cfg.chain_length = long(root.at("chain_length").as_integer());
  cfg.checkpoints = checkpoints_from_value(root.at("checkpoints"));
  cfg.seeds = seeds_from(root, seed_base, root.line);
  if (const Value* v = root.find("problem_seed")) cfg.problem_seed = std::uint64_t(v->as_integer());
  if (const Value* v = root.find("output_dir")) cfg.output_dir = v->as_string();
  if (const Value* v = root.find("mixing_grid_n")) cfg.mixing_grid_n = int(v->as_integer());
  if (const Value* v = root.find("mixing_tmax")) cfg.mixing_tmax = int(v->as_integer());
  cfg.canonical = canonical_form(root);
  cfg.hash = hash_hex(fnv1a64(cfg.canonical));
  cfg.validate();
  return cfg;
}

}  // namespace okr::harness
