// Copyright 2026 The voxdenoise Authors
// SPDX-License-Identifier: Apache-2.0

#include "voxdenoise_cli/cli.hpp"

int main(int argc, char** argv) {
  return voxdenoise::cli::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
