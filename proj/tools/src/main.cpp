// SPDX-FileCopyrightText: © 2026 pscat authors
//
// SPDX-License-Identifier: Apache-2.0

#include "commands.hpp"

int main(int argc, char** argv) { return pscat::cli::run(argc, argv); }
