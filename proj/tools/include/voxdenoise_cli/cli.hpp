// Copyright 2026 The voxdenoise Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iostream>
#include <string>
#include <vector>

namespace voxdenoise::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitIo = 3,
  kExitNumeric = 4,
};

/// Runs one subcommand. `args` excludes the program name, e.g.
/// {"add-noise", "--in", "a.vol", "--level", "0.15", "--seed", "1", "--out", "b.vol"}.
int run_cli(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr);

}  // namespace voxdenoise::cli
