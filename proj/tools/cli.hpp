// Copyright (C) 2026 The PinPoint Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "pinpoint/config.hpp"
#include "pinpoint/metrics.hpp"
#include "pinpoint/selection.hpp"
#include "pinpoint/synthetic.hpp"
#include "pinpoint/training.hpp"

namespace pinpoint::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;
inline constexpr int kExitNumerical = 2;

/// Every knob a subcommand may read, resolved from defaults, the config file, overrides and --seed.
struct RunConfig {
    TrainConfig train = TrainConfig::desk();
    SynthConfig synth;
    CoverageMode coverage = CoverageMode::hull;
    RegionAccuracyMode region_mode = RegionAccuracyMode::center;
    std::size_t text_tokens = 64;
    double encoder_mixing = 1.0;
    double encoder_sharpness = 1.0;

    /// Throws ConfigError on a key no subcommand understands.
    static RunConfig resolve(const KeyValueConfig& kv);
    KeyValueConfig to_key_values() const;
};

/// Runs one invocation (argv[0] is the program name). Output files go under --out.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pinpoint::cli
