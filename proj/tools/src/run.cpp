#include "semilb/cli/run.hpp"

#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <charconv>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <memory>
#include <thread>

#include "semilb/central.hpp"
#include "semilb/sim_cluster.hpp"
#include "semilb/transport/tcp_transport.hpp"
#include "semilb/vcover/dimacs.hpp"
#include "semilb/vcover/generate.hpp"
#include "semilb/vcover/problem.hpp"
#include "semilb/worker.hpp"

extern char** environ;

namespace semilb::cli {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

/// Forwards to the wrapped problem, but gives up once the deadline passed.
template <BranchingProblem P>
class DeadlineProblem {
 public:
  using Instance = InstanceOf<P>;
  using Solution = SolutionOf<P>;

  DeadlineProblem(const P& inner, std::optional<Clock::time_point> deadline) : inner_(&inner), deadline_(deadline) {}

  [[nodiscard]] OutcomeOf<P> branch(const Instance& i, Value best) const {
    if (deadline_ && Clock::now() >= *deadline_) throw TimeoutError();
    return inner_->branch(i, best);
  }
  [[nodiscard]] Bytes serialize(const Instance& i) const { return inner_->serialize(i); }
  [[nodiscard]] Instance deserialize(std::span<const std::uint8_t> b) const { return inner_->deserialize(b); }
  [[nodiscard]] std::int64_t priority(const Instance& i) const { return inner_->priority(i); }
  [[nodiscard]] Value solution_value(const Solution& s) const { return inner_->solution_value(s); }
  [[nodiscard]] Bytes serialize_solution(const Solution& s) const { return inner_->serialize_solution(s); }
  [[nodiscard]] Solution deserialize_solution(std::span<const std::uint8_t> b) const {
    return inner_->deserialize_solution(b);
  }
  [[nodiscard]] int max_branching_factor() const { return inner_->max_branching_factor(); }
  [[nodiscard]] Instance root() const { return inner_->root(); }
  [[nodiscard]] bool explore_after_solution() const { return inner_->explore_after_solution(); }

 private:
  const P* inner_;
  std::optional<Clock::time_point> deadline_;
};

std::optional<Clock::time_point> deadline_for(const RunConfig& c, Clock::time_point start) {
  if (c.timeout_s <= 0) return std::nullopt;
  return start + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(c.timeout_s));
}

RunRow blank_row(const RunConfig& c, const LoadedInstance& inst) {
  RunRow row;
  row.instance = inst.name;
  row.n = inst.graph.vertex_count();
  row.m = inst.graph.edge_count();
  row.scheduler = c.scheduler;
  row.encoding = c.encoding;
  row.workers = c.scheduler == Scheduler::Sequential ? 1 : c.workers;
  return row;
}

void set_cover(RunRow& row, const vc::Graph& g, vc::VertexSet cover, Value value) {
  if (!g.is_cover(cover) || static_cast<Value>(cover.count()) != value) {
    throw std::runtime_error("solver returned an invalid cover");
  }
  row.mvc_size = static_cast<int>(value);
  row.cover = std::move(cover);
}

void solve_sequential_row(RunRow& row, const vc::VertexCoverProblem& problem, std::optional<Clock::time_point> deadline) {
  const DeadlineProblem wrapped(problem, deadline);
  auto r = solve_sequential(wrapped, wrapped.root());
  if (!r.best_solution) throw std::runtime_error("sequential search found no cover");
  set_cover(row, problem.base(), std::move(*r.best_solution), r.best_value);
}

void solve_sim_row(RunRow& row, const RunConfig& c, const vc::VertexCoverProblem& problem,
                   std::optional<Clock::time_point> deadline) {
  const DeadlineProblem wrapped(problem, deadline);
  SimClusterConfig cfg;
  cfg.workers = c.workers;
  cfg.mode = c.scheduler == Scheduler::Central ? SchedulerMode::Centralized : SchedulerMode::SemiCentralized;
  cfg.seed = c.seed;
  cfg.network.seed = c.seed;
  cfg.center.seed = c.seed;
  cfg.center.policy = c.policy;
  cfg.center.max_branching = problem.max_branching_factor();
  cfg.center.termination.timeout_s = c.termination_timeout_s;
  cfg.central.tasks_per_worker = c.tasks_per_worker;
  cfg.worker.threads = c.threads;
  cfg.worker.emit_metadata = c.policy == AssignmentPolicy::Metadata;
  SimCluster<DeadlineProblem<vc::VertexCoverProblem>> cluster(wrapped, cfg);
  const auto r = cluster.run();
  if (r.deadlocked) throw std::runtime_error("simulated run did not terminate");
  if (!r.center.solution) throw std::runtime_error("no solution was fetched");
  row.bestval_broadcasts = r.center.counters.bestval_broadcasts;
  row.failed_requests = r.center.counters.failed_requests;
  row.termination_attempts = r.center.counters.termination_attempts;
  if (c.scheduler == Scheduler::Central) {
    row.tasks_sent = r.center.tasks_sent;
  } else {
    for (const auto& w : r.workers) row.tasks_sent += w.tasks_sent;
  }
  set_cover(row, problem.base(), problem.deserialize_solution(*r.center.solution), r.center.best_value);
}

/// Worker processes of one tcp run. Whatever is still alive on destruction is killed.
class ChildGroup {
 public:
  ChildGroup() = default;
  ChildGroup(const ChildGroup&) = delete;
  ChildGroup& operator=(const ChildGroup&) = delete;
  ~ChildGroup() { kill_all(); }

  void spawn(const std::vector<std::string>& args) {
    std::vector<char*> argv;
    for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
    argv.push_back(nullptr);
    pid_t pid = 0;
    if (posix_spawn(&pid, argv[0], nullptr, nullptr, argv.data(), environ) != 0) {
      throw std::runtime_error("cannot start worker process " + args[0]);
    }
    pids_.push_back(pid);
  }

  /// Throws if a worker exited while the run is still going.
  void check_alive() {
    for (auto& pid : pids_) {
      if (pid == 0) continue;
      int status = 0;
      if (waitpid(pid, &status, WNOHANG) == pid) {
        pid = 0;
        throw std::runtime_error("a worker process exited early (status " + std::to_string(status) + ")");
      }
    }
  }

  /// Reaps workers after shutdown; false if one failed or had to be killed.
  bool join(std::chrono::milliseconds grace) {
    const auto until = Clock::now() + grace;
    bool clean = true;
    for (auto& pid : pids_) {
      if (pid == 0) continue;
      int status = 0;
      while (waitpid(pid, &status, WNOHANG) == 0) {
        if (Clock::now() >= until) {
          ::kill(pid, SIGKILL);
          waitpid(pid, &status, 0);
          clean = false;
          break;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(2));
      }
      if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) clean = false;
      pid = 0;
    }
    return clean;
  }

  void kill_all() {
    for (auto& pid : pids_) {
      if (pid == 0) continue;
      ::kill(pid, SIGKILL);
      int status = 0;
      waitpid(pid, &status, 0);
      pid = 0;
    }
  }

 private:
  std::vector<pid_t> pids_;
};

std::filesystem::path self_binary() { return std::filesystem::read_symlink("/proc/self/exe"); }

/// Removes the rank file when the run ends.
struct TempFile {
  std::filesystem::path path;
  ~TempFile() {
    std::error_code ec;
    std::filesystem::remove(path, ec);
  }
};

std::vector<std::string> worker_args(const RunConfig& c, const std::filesystem::path& rank_file, int rank) {
  std::vector<std::string> args{
      (c.worker_binary ? *c.worker_binary : self_binary()).string(),
      "worker",
      "--rank-file",
      rank_file.string(),
      "--rank",
      std::to_string(rank),
      "--scheduler",
      std::string(scheduler_name(c.scheduler)),
      "--encoding",
      std::string(vc::encoding_name(c.encoding)),
      "--threads",
      std::to_string(c.threads),
      "--policy",
      c.policy == AssignmentPolicy::Metadata ? "metadata" : "random",
  };
  if (c.instance) {
    args.insert(args.end(), {"--instance", std::filesystem::absolute(*c.instance).string()});
  } else {
    args.insert(args.end(), {"--gen", c.gen->to_string()});
  }
  return args;
}

void solve_tcp_row(RunRow& row, const RunConfig& c, const vc::VertexCoverProblem& problem,
                   std::optional<Clock::time_point> deadline) {
  static int run_counter = 0;
  const auto ports = pick_free_ports(c.workers + 1);
  std::vector<RankAddress> entries;
  for (int r = 0; r <= c.workers; ++r) entries.push_back({Rank{r}, "127.0.0.1", ports[static_cast<std::size_t>(r)]});
  const RankFile ranks(entries);
  TempFile file{std::filesystem::temp_directory_path() /
                ("semilb-" + std::to_string(::getpid()) + "-" + std::to_string(run_counter++) + ".ranks")};
  {
    std::ofstream out(file.path);
    out << ranks.to_string();
    if (!out) throw std::runtime_error("cannot write rank file " + file.path.string());
  }

  ChildGroup children;
  for (int r = 1; r <= c.workers; ++r) children.spawn(worker_args(c, file.path, r));

  auto connect = std::chrono::milliseconds(60'000);
  if (deadline) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(*deadline - Clock::now());
    connect = std::clamp(left, std::chrono::milliseconds(1), connect);
  }
  std::unique_ptr<TcpEndpoint> endpoint;
  try {
    endpoint = std::make_unique<TcpEndpoint>(ranks, kCenterRank, connect);
  } catch (const TransportError&) {
    if (deadline && Clock::now() >= *deadline) throw TimeoutError();
    throw;
  }

  std::unique_ptr<Coordinator> coordinator;
  if (c.scheduler == Scheduler::Central) {
    CentralConfig cc;
    cc.workers = c.workers;
    cc.tasks_per_worker = c.tasks_per_worker;
    coordinator = std::make_unique<CentralCenter>(cc);
  } else {
    CenterConfig cc;
    cc.workers = c.workers;
    cc.max_branching = problem.max_branching_factor();
    cc.policy = c.policy;
    cc.seed = c.seed;
    cc.termination.timeout_s = c.termination_timeout_s;
    coordinator = std::make_unique<Center>(cc);
  }

  const auto start = Clock::now();
  coordinator->start(*endpoint, 0.0);
  int idle_polls = 0;
  while (!coordinator->done()) {
    if (deadline && Clock::now() >= *deadline) throw TimeoutError();
    if (coordinator->poll(*endpoint, seconds_since(start))) {
      idle_polls = 0;
      continue;
    }
    if (++idle_polls % 256 == 0) children.check_alive();
    std::this_thread::sleep_for(std::chrono::microseconds(100));
  }
  endpoint->flush(std::chrono::seconds(5));
  if (!children.join(std::chrono::seconds(10))) throw std::runtime_error("a worker process failed");

  const FinalResult r = coordinator->result();
  if (!r.solution) throw std::runtime_error("no solution was fetched");
  row.tasks_sent = r.tasks_sent;
  row.bestval_broadcasts = r.counters.bestval_broadcasts;
  row.failed_requests = r.counters.failed_requests;
  row.termination_attempts = r.counters.termination_attempts;
  set_cover(row, problem.base(), problem.deserialize_solution(*r.solution), r.best_value);
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string_view scheduler_name(Scheduler s) {
  switch (s) {
    case Scheduler::Sequential: return "sequential";
    case Scheduler::Semi: return "semi";
    case Scheduler::Central: return "central";
  }
  return "?";
}

Scheduler parse_scheduler(std::string_view text) {
  if (text == "sequential" || text == "seq") return Scheduler::Sequential;
  if (text == "semi") return Scheduler::Semi;
  if (text == "central") return Scheduler::Central;
  throw std::invalid_argument("unknown scheduler '" + std::string(text) + "'");
}

GenSpec GenSpec::parse(std::string_view text) {
  GenSpec g;
  const auto c1 = text.find(',');
  const auto c2 = c1 == std::string_view::npos ? c1 : text.find(',', c1 + 1);
  if (c2 == std::string_view::npos) throw std::invalid_argument("generator spec must be n,p,seed");
  const auto field = [&](std::size_t from, std::size_t to, auto& value) {
    const char* first = text.data() + from;
    const char* last = text.data() + to;
    const auto res = std::from_chars(first, last, value);
    if (res.ec != std::errc() || res.ptr != last) {
      throw std::invalid_argument("bad generator spec '" + std::string(text) + "'");
    }
  };
  field(0, c1, g.n);
  field(c1 + 1, c2, g.p);
  field(c2 + 1, text.size(), g.seed);
  if (g.n < 0 || g.p < 0.0 || g.p > 1.0) throw std::invalid_argument("generator needs n >= 0 and p in [0, 1]");
  return g;
}

std::string GenSpec::to_string() const { return std::to_string(n) + "," + format_double(p) + "," + std::to_string(seed); }

std::string csv_header() {
  return "instance,n,m,scheduler,encoding,workers,wall_seconds,mvc_size,tasks_sent,bestval_broadcasts,"
         "failed_requests,termination_attempts";
}

std::string csv_row(const RunRow& row) {
  char wall[32];
  std::snprintf(wall, sizeof wall, "%.6f", row.wall_seconds);
  std::string name = row.instance;
  if (name.find_first_of(",\"") != std::string::npos) {
    std::string quoted = "\"";
    for (char ch : name) quoted += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    name = quoted + "\"";
  }
  return name + "," + std::to_string(row.n) + "," + std::to_string(row.m) + "," +
         std::string(scheduler_name(row.scheduler)) + "," + std::string(vc::encoding_name(row.encoding)) + "," +
         std::to_string(row.workers) + "," + wall + "," +
         (row.mvc_size ? std::to_string(*row.mvc_size) : std::string("TIMEOUT")) + "," +
         std::to_string(row.tasks_sent) + "," + std::to_string(row.bestval_broadcasts) + "," +
         std::to_string(row.failed_requests) + "," + std::to_string(row.termination_attempts);
}

void append_csv(const std::filesystem::path& path, const RunRow& row, const std::string& header,
                const std::string& extra) {
  std::error_code ec;
  const bool fresh = !std::filesystem::exists(path, ec) || std::filesystem::file_size(path, ec) == 0;
  std::ofstream out(path, std::ios::app);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for appending");
  if (fresh) out << header << '\n';
  out << csv_row(row) << extra << '\n';
}

LoadedInstance load_instance(const RunConfig& config) {
  if (config.instance && config.gen) throw std::invalid_argument("give either an instance file or a generator spec");
  if (config.instance) return {config.instance->filename().string(), vc::load_dimacs(*config.instance).graph};
  if (config.gen) {
    const GenSpec& g = *config.gen;
    return {"gnp-n" + std::to_string(g.n) + "-p" + format_double(g.p) + "-s" + std::to_string(g.seed),
            vc::gen_gnp(g.n, g.p, g.seed)};
  }
  throw std::invalid_argument("no instance given");
}

RunRow solve(const RunConfig& config, const LoadedInstance& instance) {
  if (config.workers < 1) throw std::invalid_argument("workers must be at least 1");
  if (config.threads < 1) throw std::invalid_argument("threads must be at least 1");
  RunRow row = blank_row(config, instance);
  const vc::VertexCoverProblem problem(instance.graph, config.encoding);
  const auto start = Clock::now();
  const auto deadline = deadline_for(config, start);
  try {
    if (config.scheduler == Scheduler::Sequential) {
      solve_sequential_row(row, problem, deadline);
    } else if (config.transport == TransportKind::Sim) {
      solve_sim_row(row, config, problem, deadline);
    } else {
      solve_tcp_row(row, config, problem, deadline);
    }
  } catch (const TimeoutError&) {
    row.mvc_size.reset();
    row.cover.reset();
  }
  row.wall_seconds = seconds_since(start);
  return row;
}

int run_tcp_worker(const std::filesystem::path& rank_file, int rank, const RunConfig& config) {
  const LoadedInstance instance = load_instance(config);
  const vc::VertexCoverProblem problem(instance.graph, config.encoding);
  const RankFile ranks = RankFile::load(rank_file);
  TcpEndpoint endpoint(ranks, Rank{rank}, std::chrono::seconds(60));
  WorkerConfig wc;
  wc.mode = config.scheduler == Scheduler::Central ? SchedulerMode::Centralized : SchedulerMode::SemiCentralized;
  wc.threads = config.threads;
  wc.emit_metadata = config.policy == AssignmentPolicy::Metadata;
  run_worker(endpoint, problem, wc);
  endpoint.flush(std::chrono::seconds(5));
  return kExitOk;
}

}  // namespace semilb::cli
