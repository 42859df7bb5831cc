// Frozen reference values for the test suites.
#ifndef ENTAILPROF_TESTS_FIXTURES_HPP_
#define ENTAILPROF_TESTS_FIXTURES_HPP_

#include <cstddef>

namespace fixtures {

// ln 2 and ln(e^10 + 2) - 10, evaluated outside the library.
inline constexpr double kLn2 = 0.6931471805599453;
inline constexpr double kLossTenIdentity3 = 9.079573746717529e-05;

// Denominator floor for relative gradient errors.
inline constexpr double kGradientFloor = 1e-8;

// Synthetic two-class corpus, seed 0, five folds.
inline constexpr double kSeed0ZeroShotF1 = 1.0;
inline constexpr double kSeed0Ra1F1 = 1.0;
inline constexpr double kSeed0Ra50F1 = 1.0;
inline constexpr double kSeed0IsF1 = 1.0;
inline constexpr std::size_t kSeed0IsS = 301;
inline constexpr std::size_t kSeed0Ra50S = 320;

}  // namespace fixtures

#endif  // ENTAILPROF_TESTS_FIXTURES_HPP_
