// SPDX-License-Identifier: Apache-2.0
#include "spirk/error.hpp"
#include "spirk/kernels.hpp"

#include <cstdlib>
#include <string>

namespace spirk::kernels {

std::string_view to_string(Isa isa)
{
  switch (isa)
  {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
    case Isa::neon:
      return "neon";
  }
  return "unknown";
}

bool supported(Isa isa)
{
  switch (isa)
  {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(SPIRK_HAVE_AVX2)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::neon:
#if defined(SPIRK_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const KernelTable &table(Isa isa)
{
  if (!supported(isa))
    throw ConfigError("kernel ISA '" + std::string(to_string(isa)) + "' not available");
  switch (isa)
  {
#if defined(SPIRK_HAVE_AVX2)
    case Isa::avx2:
      return detail::avx2_table;
#endif
#if defined(SPIRK_HAVE_NEON)
    case Isa::neon:
      return detail::neon_table;
#endif
    default:
      return detail::scalar_table;
  }
}

namespace {

const KernelTable &select()
{
  if (const char *forced = std::getenv("SPIRK_ISA"))
  {
    const std::string_view name(forced);
    for (Isa isa : {Isa::scalar, Isa::avx2, Isa::neon})
      if (name == to_string(isa))
        return table(isa);
    throw ConfigError("SPIRK_ISA: unknown kernel ISA '" + std::string(name) + "'");
  }
  for (Isa isa : {Isa::avx2, Isa::neon})
    if (supported(isa))
      return table(isa);
  return detail::scalar_table;
}

}  // namespace

const KernelTable &active()
{
  static const KernelTable &chosen = select();
  return chosen;
}

}  // namespace spirk::kernels
