#pragma once

#include "thetanorm/experiments.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace thetanorm::cli {

enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,
  kData = 3,
  kDivergence = 4,
};

/// Runs one command. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err);
int run(int argc, char** argv, std::istream& in, std::ostream& out, std::ostream& err);

/// Whitespace-separated decimals forming one vector.
Vector read_vector(std::istream& in);
/// One matrix row per non-empty line, whitespace-separated.
Matrix read_matrix(std::istream& in);

/// Parses the INI-style experiment file described in the README. Values
/// absent from the file keep the defaults of `base`.
ExperimentSpec parse_config(std::istream& in, ExperimentSpec base = {});

}  // namespace thetanorm::cli
