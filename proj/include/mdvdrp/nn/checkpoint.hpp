#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mdvdrp/nn/params.hpp"

namespace mdvdrp::nn {

/// Parameter snapshot with its index map. `meta` is free-form text (the policy stores its
/// architecture there as JSON).
struct Checkpoint {
  std::string meta;
  ParamLayout layout;
  Vector<double> values;
};

// Binary layout, little-endian:
//   "MDVDRPCK" | u32 version=1 | u32 meta_len | meta bytes | u32 n_blocks |
//   n_blocks x (u32 name_len | name | u64 offset | u64 rows | u64 cols) | u64 n_values | n_values x f64
inline constexpr std::uint32_t kCheckpointVersion = 1;

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& in);

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace mdvdrp::nn
