// SPDX-License-Identifier: Apache-2.0
#include <iostream>

#include "robin/cli.hpp"

int main(int argc, char** argv) { return robin::cli::main_entry(argc, argv, std::cout, std::cerr); }
