// Copyright (c) 2026, Koodos contributors
// SPDX-License-Identifier: Apache-2.0

#include <cstdlib>
#include <string>

#include "koodos/kernels.hpp"

namespace koodos::simd {

std::string_view level_name(Level level) {
  switch (level) {
    case Level::Scalar: return "scalar";
    case Level::Avx2: return "avx2";
    case Level::Avx512: return "avx512";
  }
  return "unknown";
}

bool cpu_supports(Level level) {
#if defined(__x86_64__) || defined(__i386__)
  switch (level) {
    case Level::Scalar: return true;
    case Level::Avx2: return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    case Level::Avx512: return __builtin_cpu_supports("avx512f");
  }
  return false;
#else
  return level == Level::Scalar;
#endif
}

namespace {

const KernelTable* usable(const KernelTable* table) {
  return table != nullptr && cpu_supports(table->level) ? table : nullptr;
}

const KernelTable& select() {
  const char* forced = std::getenv("KOODOS_SIMD");
  const std::string want = forced ? forced : "";
  if (want == "scalar") return scalar_kernels();
  if (want == "avx2") {
    if (const auto* t = usable(avx2_kernels())) return *t;
    return scalar_kernels();
  }
  if (want != "avx512") {
    // Auto: widest available.
    if (const auto* t = usable(avx512_kernels())) return *t;
    if (const auto* t = usable(avx2_kernels())) return *t;
    return scalar_kernels();
  }
  if (const auto* t = usable(avx512_kernels())) return *t;
  return scalar_kernels();
}

}  // namespace

const KernelTable& active() {
  static const KernelTable& table = select();
  return table;
}

}  // namespace koodos::simd
