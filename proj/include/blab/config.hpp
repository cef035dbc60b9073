#pragma once

#include <string>
#include <vector>

#include "blab/symbols.hpp"
#include "blab/weights.hpp"

namespace blab {

// One maps[] entry as read from a run config. Map factories run a numerical
// self-map certificate, so an entry can fail construction while the config as
// a whole stays usable; classify writes an error report for such entries
// instead of aborting the batch.
struct MapEntry {
  std::string source;  // canonical JSON text of the entry
  std::string label;
  bool valid = false;
  std::string error;
  MapSpec map;
};

struct MultiplierEntry {
  std::string source;
  std::string label;
  MultiplierSpec multiplier;
};

struct QuadratureConfig {
  int n_radial = 160;
  int n_angular = 64;
};

// Boundary gaps for the ring schemes, deepest last. delta sizes the adapted
// disks in verify runs; zero means half the weight's admissible maximum.
struct RingConfig {
  std::vector<double> epsilons{0.1, 0.05, 0.01};
  double delta = 0.0;
};

// target_radius is the per-argument evaluation radius for the kernel table
// (zero picks the table default); tolerance is the ceiling the built table's
// certified tail ratio must meet.
struct KernelConfig {
  double target_radius = 0.0;
  double tolerance = 1e-12;
};

struct RunConfig {
  WeightSpec weight;
  std::vector<MapEntry> maps;
  std::vector<MultiplierEntry> multipliers;
  QuadratureConfig quadrature;
  RingConfig rings;
  KernelConfig kernel;
  std::vector<double> schatten_p{1.0, 2.0};
  std::string output = "blab_out";
};

// Throws ConfigError for anything structurally wrong: unreadable file, bad
// JSON, unknown keys or kinds, values outside module preconditions. Map
// entries whose numeric values fail the self-map certificate are kept with
// valid == false rather than rejected.
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);

// Canonical JSON text; parse(serialize(cfg)) reproduces cfg exactly and
// serialize is a fixed point on parsed configs.
std::string serialize_run_config(const RunConfig& cfg);

}  // namespace blab
