#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "misscov/truncation.hpp"

namespace misscov {

struct BatteryResult {
  std::string name;
  std::size_t checks = 0;
  std::size_t failures = 0;
  std::vector<std::string> notes;  // first few failure details

  bool pass() const { return failures == 0; }
};

BatteryResult battery_matrix_identities(std::uint64_t seed);
BatteryResult battery_generator_moments(std::uint64_t seed);
// `trunc` is an injection point for mutation tests; the production truncation
// is the default.
BatteryResult battery_truncation_inequalities(std::uint64_t seed,
                                              const std::function<double(double)>& trunc = psi,
                                              std::size_t draws = 10000);
BatteryResult battery_robust_mean(std::uint64_t seed);
BatteryResult battery_net_properties(std::uint64_t seed);
BatteryResult battery_form_tables(std::uint64_t seed);
BatteryResult battery_fit_optimality(std::uint64_t seed);
BatteryResult battery_equivariances(std::uint64_t seed);
BatteryResult battery_masked_form_moments(std::uint64_t seed, std::size_t triples = 6,
                                          std::size_t samples = 100000);
BatteryResult battery_sub_estimator_bands(std::uint64_t seed);

std::vector<BatteryResult> run_invariant_suite(std::uint64_t seed);
void print_suite(std::ostream& out, const std::vector<BatteryResult>& results);
bool suite_passed(const std::vector<BatteryResult>& results);

}  // namespace misscov
