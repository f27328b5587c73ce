// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The rtune Authors

#include <iostream>

#include "cli/commands.hpp"

int main(int argc, char** argv) {
  return rtune::cli::run(argc, argv, std::cout, std::cerr);
}
