#pragma once

#include <cstdarg>
#include <cstdio>
#include <cstdlib>

// Each acceptance binary checks one numbered criterion and ends with a single
// "criterion N: PASS - ..." line; the first failed requirement prints [FAIL]
// with its location and exits nonzero so ctest flags the whole criterion.

#define ACC_REQUIRE(cond)                                                     \
  do {                                                                        \
    if (!(cond)) {                                                            \
      std::fprintf(stderr, "[FAIL] %s:%d: %s\n", __FILE__, __LINE__, #cond);  \
      std::exit(1);                                                           \
    }                                                                         \
  } while (0)

#define ACC_REQUIRE_MSG(cond, ...)                                            \
  do {                                                                        \
    if (!(cond)) {                                                            \
      std::fprintf(stderr, "[FAIL] %s:%d: %s: ", __FILE__, __LINE__, #cond);  \
      std::fprintf(stderr, __VA_ARGS__);                                      \
      std::fputc('\n', stderr);                                               \
      std::exit(1);                                                           \
    }                                                                         \
  } while (0)

inline void acc_pass(int criterion, const char* fmt, ...) {
  std::printf("criterion %d: PASS - ", criterion);
  va_list ap;
  va_start(ap, fmt);
  std::vprintf(fmt, ap);
  va_end(ap);
  std::printf("\n");
  std::fflush(stdout);
}
