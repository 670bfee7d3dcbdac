#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "dpfed/coeff_tree.hpp"
#include "dpfed/federation.hpp"
#include "dpfed/harness.hpp"

namespace dpfed {

// All parsers throw std::invalid_argument on malformed or unknown input.

std::string coeff_tree_to_json(const CoeffTree& tree);
CoeffTree coeff_tree_from_json(std::string_view text);

/// One JSON line per transcript, no trailing newline.
struct TranscriptCodec {
  static std::string encode(const GlobalTranscript& t);
  static std::string encode(const PointTranscript& t);
  static GlobalTranscript decode_global(std::string_view line);
  static PointTranscript decode_point(std::string_view line);
  /// "global" or "point", read from the line's target field.
  static TargetKind kind_of(std::string_view line);
};

ExperimentConfig config_from_json(std::string_view text);
std::string config_to_json(const ExperimentConfig& config);
ExperimentConfig load_config(const std::string& path);

/// A bare array of {n, eps, delta[, count]} or an object with a "servers" key.
std::vector<ServerSpec> servers_from_json(std::string_view text, double eps_cap = PrivacyBudget::kDefaultEpsCap);

std::string read_file(const std::string& path);

}  // namespace dpfed
