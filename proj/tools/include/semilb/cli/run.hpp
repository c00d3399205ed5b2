#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "semilb/center.hpp"
#include "semilb/vcover/encoding.hpp"
#include "semilb/vcover/graph.hpp"

namespace semilb::cli {

enum class Scheduler : std::uint8_t { Sequential, Semi, Central };
enum class TransportKind : std::uint8_t { Sim, Tcp };

std::string_view scheduler_name(Scheduler s);
Scheduler parse_scheduler(std::string_view text);

/// G(n, p) parameters; printed and parsed as "n,p,seed".
struct GenSpec {
  int n = 0;
  double p = 0.0;
  std::uint64_t seed = 1;

  static GenSpec parse(std::string_view text);
  [[nodiscard]] std::string to_string() const;
};

struct RunConfig {
  std::optional<std::filesystem::path> instance;
  std::optional<GenSpec> gen;
  Scheduler scheduler = Scheduler::Semi;
  vc::Encoding encoding = vc::Encoding::Optimized;
  int workers = 1;
  int threads = 1;  // exploration threads per worker
  TransportKind transport = TransportKind::Sim;
  std::uint64_t seed = 1;
  double timeout_s = 0.0;  // wall clock; 0 = none
  AssignmentPolicy policy = AssignmentPolicy::Random;
  double termination_timeout_s = 0.1;
  std::int64_t tasks_per_worker = 1000;  // baseline queue capacity per worker
  /// Executable started for each tcp worker; defaults to this process's image.
  std::optional<std::filesystem::path> worker_binary;
};

class TimeoutError : public std::runtime_error {
 public:
  TimeoutError() : std::runtime_error("time limit reached") {}
};

struct RunRow {
  std::string instance;
  int n = 0;
  std::int64_t m = 0;
  Scheduler scheduler = Scheduler::Semi;
  vc::Encoding encoding = vc::Encoding::Optimized;
  int workers = 1;
  double wall_seconds = 0.0;
  std::optional<int> mvc_size;  // empty on timeout
  std::int64_t tasks_sent = 0;
  std::uint64_t bestval_broadcasts = 0;
  std::uint64_t failed_requests = 0;
  std::uint64_t termination_attempts = 0;
  std::optional<vc::VertexSet> cover;

  [[nodiscard]] bool timed_out() const { return !mvc_size.has_value(); }
};

std::string csv_header();
std::string csv_row(const RunRow& row);
/// Appends one row, writing the header first if the file is new or empty.
void append_csv(const std::filesystem::path& path, const RunRow& row, const std::string& header = csv_header(),
                const std::string& extra = {});

struct LoadedInstance {
  std::string name;
  vc::Graph graph;
};

LoadedInstance load_instance(const RunConfig& config);

/// Runs one configuration to completion or timeout. Throws on failure.
RunRow solve(const RunConfig& config, const LoadedInstance& instance);

/// Body of one tcp worker process.
int run_tcp_worker(const std::filesystem::path& rank_file, int rank, const RunConfig& config);

/// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitTimeout = 2;

}  // namespace semilb::cli
