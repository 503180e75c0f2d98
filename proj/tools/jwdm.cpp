// Copyright (c) 2026, The jwdm authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "jwdm/cli.hpp"

int main(int argc, char** argv) {
    return jwdm::run_cli(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
