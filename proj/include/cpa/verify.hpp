#ifndef CPA_VERIFY_HPP
#define CPA_VERIFY_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "cpa/measure.hpp"

namespace cpa {

struct PropertyResult {
  std::string name;
  long checked = 0;
  long failed = 0;
  nlohmann::json first_counterexample;  // null until the first failure

  void record(bool ok, const nlohmann::json& witness);
};

struct SuiteResult {
  std::string suite;
  std::uint64_t seed = 0;
  std::vector<PropertyResult> properties;

  bool passed() const;
  PropertyResult& property(const std::string& name);
  nlohmann::json to_json() const;
};

struct SuiteOptions {
  std::uint64_t seed = 1;
  int instances = 200;
  bool parallel = false;
};

/// measure-algebra, newton, charlier, lemmas, bounds-vs-oracle
const std::vector<std::string>& suite_names();

/// Throws ValidationError for an unknown suite name.
SuiteResult run_suite(const std::string& name, const SuiteOptions& opts = {});

SuiteResult verify_measure_algebra(const SuiteOptions& opts);
SuiteResult verify_newton(const SuiteOptions& opts);
SuiteResult verify_charlier(const SuiteOptions& opts);
SuiteResult verify_lemmas(const SuiteOptions& opts);
SuiteResult verify_bounds_vs_oracle(const SuiteOptions& opts);

nlohmann::json measure_to_json(const SignedMeasure& v);

/// sum over k-subsets S of {0..n-1} of prod_{j in S} V_j, by enumeration.
SignedMeasure elementary_symmetric_bruteforce(const std::vector<SignedMeasure>& v, int k);

}  // namespace cpa

#endif  // CPA_VERIFY_HPP
