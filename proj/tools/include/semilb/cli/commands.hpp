#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "semilb/cli/run.hpp"

namespace semilb::cli {

/// Files named gnp_n<n>_<index>.dimacs; seeds derive from (seed, index).
std::vector<std::filesystem::path> generate_corpus(int n, double p, int count, std::uint64_t seed,
                                                   const std::filesystem::path& outdir);
std::uint64_t corpus_file_seed(std::uint64_t seed, int index);

struct VerifyEntry {
  std::string file;
  std::string config;  // "sequential", "semi/basic", ...
  int expected = 0;
  std::optional<int> got;
  [[nodiscard]] bool ok() const { return got == expected; }
};

struct VerifyReport {
  std::vector<VerifyEntry> entries;
  [[nodiscard]] std::size_t mismatches() const;
  [[nodiscard]] std::size_t files() const;
};

/// Returns the cover size one configuration finds. Replaceable for fault injection.
using VerifySolver = std::function<std::optional<int>(const vc::Graph&, Scheduler, vc::Encoding)>;

VerifySolver default_verify_solver(int workers, std::uint64_t seed);

/// Checks every instance in `dir` (n <= 26) against brute force under
/// sequential and all scheduler x encoding configurations.
VerifyReport verify_directory(const std::filesystem::path& dir, const VerifySolver& solver);

struct BenchGrid {
  RunConfig base;
  std::vector<Scheduler> schedulers{Scheduler::Semi, Scheduler::Central};
  std::vector<vc::Encoding> encodings{vc::Encoding::Optimized};
  std::vector<int> workers{1, 2, 4, 8};
  /// Reference time for every speedup instead of the workers=1 rows.
  std::optional<double> sequential_seconds;
};

struct BenchRow {
  RunRow run;
  std::optional<double> speedup;
};

std::string bench_header();
std::string bench_row(const BenchRow& row);

/// Runs the grid in order; `on_row` sees each row as soon as it is complete.
std::vector<BenchRow> run_bench(const BenchGrid& grid, const LoadedInstance& instance,
                                const std::function<void(const BenchRow&)>& on_row = {});
/// Fills speedup = reference / wall_seconds per scheduler+encoding group.
void fill_speedups(std::vector<BenchRow>& rows, std::optional<double> sequential_seconds);

/// Parses argv and runs a subcommand; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace semilb::cli
