#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sublift/errors.hpp"
#include "sublift/projections.hpp"
#include "sublift/solver.hpp"

namespace sublift {

enum class Subcommand { Rof, Robust, Stereo, Unwrap, Dff, Verify };

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitNumerical = 2, kExitIo = 3 };

class UsageError : public Error {
 public:
  using Error::Error;
};

struct RunConfig {
  Subcommand command = Subcommand::Rof;
  std::filesystem::path input;               // rof, robust, unwrap
  std::filesystem::path left, right;         // stereo
  std::vector<std::filesystem::path> stack;  // dff
  std::filesystem::path costs;               // stereo, dff: precomputed CVOL/CSV volume
  std::filesystem::path output_dir = "out";

  int labels = 8;
  double gamma_min = 0.0;
  double gamma_max = 1.0;
  double lambda = 1.0;
  Method method = Method::Sublabel;
  RegularizerKind regularizer = RegularizerKind::Isotropic;
  int max_iters = 20000;
  double tol = 1e-6;
  bool adaptive = false;
  bool deterministic = true;
  int sublabels = 8;

  double alpha = 25.0;  // robust
  double nu = 0.025;    // robust
  int min_disparity = 0;
  int max_disparity = 16;
  double truncation = 0.5;
  int dff_window = 3;
  std::uint64_t seed = 1;  // verify

  void validate() const;
};

// Parses argv[1..]. Throws UsageError on unknown flags, malformed values,
// missing inputs or invalid settings. Returns nullopt after printing --help.
std::optional<RunConfig> parse_args(int argc, const char* const* argv, std::ostream& out);

// Executes a parsed configuration; returns an ExitCode.
int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

// parse_args + run with exception-to-exit-code mapping.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sublift
