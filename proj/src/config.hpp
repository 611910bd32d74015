#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "okr/chain.hpp"
#include "okr/copula.hpp"
#include "okr/kernel.hpp"

namespace okr::harness {

/// Config syntax error, carrying the 1-based line it happened on.
struct ConfigError : std::runtime_error {
  int line;
  ConfigError(int line_, const std::string& what)
      : std::runtime_error("config line " + std::to_string(line_) + ": " + what), line(line_) {}
};

/// Parsed config value: scalar, array, or inline table. Tables keep sorted
/// keys so the canonical form (and hence the config hash) is order-free.
struct Value {
  enum class Kind { integer, real, string, boolean, array, table };
  Kind kind = Kind::integer;
  long long i = 0;
  double d = 0;
  std::string s;
  bool b = false;
  std::vector<Value> arr;
  std::map<std::string, Value> tbl;
  int line = 0;

  bool is_number() const { return kind == Kind::integer || kind == Kind::real; }
  double as_real() const;
  long long as_integer() const;
  const std::string& as_string() const;
  const Value& at(const std::string& key) const;  // table member or ConfigError
  const Value* find(const std::string& key) const;
};

/// Parses the flat `key = value` format with inline tables and arrays.
Value parse_config(const std::string& text);
Value parse_config_file(const std::string& path);

/// Canonical printed form: top-level keys sorted, one per line; numbers in
/// %.17g / decimal form. Hash of this text is the experiment identity.
std::string canonical_form(const Value& root);
std::uint64_t fnv1a64(const std::string& text);
std::string hash_hex(std::uint64_t h);

/// Typed accessors for the domain objects named in configs.
KernelD kernel_from_value(const Value& v);
CopulaD copula_from_value(const Value& v);
std::vector<long> checkpoints_from_value(const Value& v);

struct ExperimentConfig {
  KernelD kernel = KernelD::gaussian(0.5);
  CopulaD copula = CopulaD::independence();
  std::string target_g = "sin";
  double target_nu = 0.5;
  double lambda = 0.1;
  double theta = 0.75;
  double M = 2.0;
  double noise_sd = 0.0;
  double delta = 0.1;
  long chain_length = 1000;
  std::vector<long> checkpoints;
  std::vector<std::uint64_t> seeds;
  std::string output_dir = "out";
  int quadrature_n = 256;
  int mixing_grid_n = 512;
  int mixing_tmax = 6;

  std::string canonical;
  std::string hash;

  void validate() const;
};

/// Builds an experiment config. Seeds come from `seeds = [...]` or, when
/// absent, from `num_seeds = N` as seed_base .. seed_base + N - 1.
ExperimentConfig experiment_from_value(const Value& root, std::uint64_t seed_base);

struct SsmgdConfig {
  int dim = 5;
  double kappa = 0.5;
  double eta = 2.0;
  double theta = 0.75;
  double delta = 0.1;
  CopulaD copula = CopulaD::independence();
  long chain_length = 1000;
  std::vector<long> checkpoints;
  std::vector<std::uint64_t> seeds;
  std::uint64_t problem_seed = 1;
  std::string output_dir = "out";
  int mixing_grid_n = 512;
  int mixing_tmax = 6;

  std::string canonical;
  std::string hash;

  void validate() const;
};

SsmgdConfig ssmgd_from_value(const Value& root, std::uint64_t seed_base);

}  // namespace okr::harness
