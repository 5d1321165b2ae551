#pragma once

// Text checkpoint container:
//
//   SEKIRA-CKPT v1
//   config <n>              n lines "key value"
//   best_valid_f1 <hex>
//   tagset <list>           lists: "<count>\n" then "<bytes> <item>\n" each
//   words <list>
//   chars <list>
//   tensors <n>
//   <name> <rows> <cols>    then one line of rows*cols hex float literals
//   end
//
// Floats are written as lowercase hexadecimal literals (e.g. -0x1.8p+1), so
// save -> load is exact and save -> load -> save is byte-identical.

#include <istream>
#include <ostream>
#include <string>

#include "sekira/tagger.hpp"
#include "sekira/trainer.hpp"

namespace sekira {

inline constexpr std::string_view kCheckpointMagic = "SEKIRA-CKPT";
inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  TrainConfig config;
  TaggerModel model;
  double best_valid_f1 = 0.0;
};

void save_checkpoint(const Checkpoint& checkpoint, std::ostream& sink);

// Throws CorruptCheckpoint, VersionMismatch or ShapeMismatch.
Checkpoint load_checkpoint(std::istream& source);

void save_checkpoint_file(const Checkpoint& checkpoint, const std::string& path);
Checkpoint load_checkpoint_file(const std::string& path);

std::string hex_double(double v);
// Parses what hex_double writes; throws CorruptCheckpoint otherwise.
double parse_hex_double(std::string_view s);

}  // namespace sekira
