#pragma once

#include <cstdint>
#include <utility>

#include "cualign/cudf.hpp"

namespace cualign {

// Knobs for the seeded random-instance generator used by tests, demos, and
// the CLI's --seed input.
struct GenParams {
  int max_packages = 12;
  int max_sources = 4;
  int max_source_versions = 3;
  bool with_request = true;
  // Per mille knobs; the defaults give instances that mix aligned and
  // unaligned clusters with a satisfiable request most of the time.
  int depends_per_mille = 550;
  int conflicts_per_mille = 250;
  int recommends_per_mille = 250;
  int installed_per_mille = 450;
  int source_per_mille = 850;
  int unknown_name_per_mille = 40;
};

// Deterministic for a given (seed, params) on every platform.
std::pair<Universe, Request> generate_instance(std::uint32_t seed, const GenParams& params = {});

}  // namespace cualign
