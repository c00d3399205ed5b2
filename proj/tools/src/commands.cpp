#include "semilb/cli/commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>

#include "semilb/transport/tcp_transport.hpp"
#include "semilb/vcover/dimacs.hpp"
#include "semilb/vcover/generate.hpp"

namespace semilb::cli {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string config_name(Scheduler s, vc::Encoding e) {
  if (s == Scheduler::Sequential) return "sequential";
  return std::string(scheduler_name(s)) + "/" + std::string(vc::encoding_name(e));
}

}  // namespace

std::uint64_t corpus_file_seed(std::uint64_t seed, int index) {
  return splitmix(seed ^ splitmix(static_cast<std::uint64_t>(index)));
}

std::vector<std::filesystem::path> generate_corpus(int n, double p, int count, std::uint64_t seed,
                                                   const std::filesystem::path& outdir) {
  if (n < 0 || count < 0 || p < 0.0 || p > 1.0) throw std::invalid_argument("gen needs n >= 0, count >= 0, p in [0, 1]");
  std::error_code ec;
  std::filesystem::create_directories(outdir, ec);
  if (!std::filesystem::is_directory(outdir)) throw std::runtime_error("cannot create directory " + outdir.string());
  const int width = std::max(3, static_cast<int>(std::to_string(std::max(count - 1, 0)).size()));
  std::vector<std::filesystem::path> files;
  for (int i = 0; i < count; ++i) {
    const std::uint64_t s = corpus_file_seed(seed, i);
    const GenSpec spec{n, p, s};
    std::string index = std::to_string(i);
    index.insert(0, static_cast<std::size_t>(std::max(0, width - static_cast<int>(index.size()))), '0');
    const auto path = outdir / ("gnp_n" + std::to_string(n) + "_" + index + ".dimacs");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << vc::to_dimacs(vc::gen_gnp(n, p, s), "G(n,p) " + spec.to_string());
    if (!out) throw std::runtime_error("cannot write " + path.string());
    files.push_back(path);
  }
  return files;
}

std::size_t VerifyReport::mismatches() const {
  return static_cast<std::size_t>(std::count_if(entries.begin(), entries.end(), [](const VerifyEntry& e) { return !e.ok(); }));
}

std::size_t VerifyReport::files() const {
  std::vector<std::string> names;
  for (const auto& e : entries) names.push_back(e.file);
  std::sort(names.begin(), names.end());
  return static_cast<std::size_t>(std::unique(names.begin(), names.end()) - names.begin());
}

VerifySolver default_verify_solver(int workers, std::uint64_t seed) {
  return [workers, seed](const vc::Graph& g, Scheduler s, vc::Encoding e) -> std::optional<int> {
    RunConfig c;
    c.scheduler = s;
    c.encoding = e;
    c.workers = workers;
    c.seed = seed;
    c.termination_timeout_s = 0.02;
    c.tasks_per_worker = 4;
    return solve(c, LoadedInstance{"verify", g}).mvc_size;
  };
}

VerifyReport verify_directory(const std::filesystem::path& dir, const VerifySolver& solver) {
  if (!std::filesystem::is_directory(dir)) throw std::runtime_error(dir.string() + " is not a directory");
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  VerifyReport report;
  for (const auto& path : files) {
    const vc::Graph g = vc::load_dimacs(path).graph;
    if (g.vertex_count() > vc::kBruteForceLimit) {
      throw std::invalid_argument(path.filename().string() + " has " + std::to_string(g.vertex_count()) +
                                  " vertices; verify handles at most " + std::to_string(vc::kBruteForceLimit));
    }
    const int expected = vc::brute_force_mvc(g);
    const std::string name = path.filename().string();
    report.entries.push_back({name, "sequential", expected, solver(g, Scheduler::Sequential, vc::Encoding::Optimized)});
    for (Scheduler s : {Scheduler::Semi, Scheduler::Central}) {
      for (vc::Encoding e : {vc::Encoding::Basic, vc::Encoding::Optimized}) {
        report.entries.push_back({name, config_name(s, e), expected, solver(g, s, e)});
      }
    }
  }
  return report;
}

std::string bench_header() { return csv_header() + ",speedup"; }

std::string bench_row(const BenchRow& row) {
  std::string s = csv_row(row.run) + ",";
  if (row.speedup) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", *row.speedup);
    s += buf;
  }
  return s;
}

void fill_speedups(std::vector<BenchRow>& rows, std::optional<double> sequential_seconds) {
  std::map<std::pair<Scheduler, vc::Encoding>, double> reference;
  if (!sequential_seconds) {
    for (const auto& r : rows) {
      if (r.run.workers == 1 && !r.run.timed_out()) reference.emplace(std::pair(r.run.scheduler, r.run.encoding), r.run.wall_seconds);
    }
  }
  for (auto& r : rows) {
    r.speedup.reset();
    if (r.run.timed_out() || r.run.wall_seconds <= 0) continue;
    std::optional<double> ref = sequential_seconds;
    if (!ref) {
      const auto it = reference.find({r.run.scheduler, r.run.encoding});
      if (it != reference.end()) ref = it->second;
    }
    if (ref) r.speedup = *ref / r.run.wall_seconds;
  }
}

std::vector<BenchRow> run_bench(const BenchGrid& grid, const LoadedInstance& instance,
                                const std::function<void(const BenchRow&)>& on_row) {
  std::vector<BenchRow> rows;
  for (Scheduler s : grid.schedulers) {
    for (vc::Encoding e : grid.encodings) {
      for (int w : grid.workers) {
        if (s == Scheduler::Sequential && w != 1) continue;
        RunConfig c = grid.base;
        c.scheduler = s;
        c.encoding = e;
        c.workers = w;
        rows.push_back({solve(c, instance), std::nullopt});
        fill_speedups(rows, grid.sequential_seconds);
        if (on_row) on_row(rows.back());
      }
    }
  }
  return rows;
}

namespace {

void add_instance_options(CLI::App& cmd, RunConfig& c, std::string& gen) {
  cmd.add_option("--instance", c.instance, "DIMACS edge file");
  cmd.add_option("--gen", gen, "generate G(n,p) instead: n,p,seed");
}

void add_run_options(CLI::App& cmd, RunConfig& c, std::string& encoding, std::string& transport,
                     std::string& policy) {
  cmd.add_option("--encoding", encoding, "basic or optimized")->capture_default_str();
  cmd.add_option("--threads", c.threads, "exploration threads per worker")->capture_default_str();
  cmd.add_option("--transport", transport, "sim or tcp")->capture_default_str();
  cmd.add_option("--seed", c.seed, "seed for every random choice")->capture_default_str();
  cmd.add_option("--timeout", c.timeout_s, "wall-clock limit in seconds, 0 for none")->capture_default_str();
  cmd.add_option("--policy", policy, "center assignment policy: random or metadata")->capture_default_str();
  cmd.add_option("--termination-timeout", c.termination_timeout_s, "quiet seconds before a termination vote")
      ->capture_default_str();
  cmd.add_option("--tasks-per-worker", c.tasks_per_worker, "baseline queue capacity per worker")
      ->capture_default_str();
  cmd.add_option("--worker-binary", c.worker_binary, "executable for tcp workers (default: this one)");
}

void finish_run_config(RunConfig& c, const std::string& gen, const std::string& encoding,
                       const std::string& transport, const std::string& policy) {
  if (!gen.empty()) c.gen = GenSpec::parse(gen);
  c.encoding = vc::parse_encoding(encoding);
  if (transport == "sim") {
    c.transport = TransportKind::Sim;
  } else if (transport == "tcp") {
    c.transport = TransportKind::Tcp;
  } else {
    throw std::invalid_argument("unknown transport '" + transport + "'");
  }
  if (policy == "random") {
    c.policy = AssignmentPolicy::Random;
  } else if (policy == "metadata") {
    c.policy = AssignmentPolicy::Metadata;
  } else {
    throw std::invalid_argument("unknown policy '" + policy + "'");
  }
}

template <class T, class F>
std::vector<T> parse_list(const std::string& text, F parse_one) {
  std::vector<T> out;
  std::size_t from = 0;
  while (from <= text.size()) {
    const auto comma = text.find(',', from);
    const auto end = comma == std::string::npos ? text.size() : comma;
    if (end > from) out.push_back(parse_one(text.substr(from, end - from)));
    if (comma == std::string::npos) break;
    from = comma + 1;
  }
  if (out.empty()) throw std::invalid_argument("empty list '" + text + "'");
  return out;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Parallel branch-and-bound runtime with a semi-centralized scheduler, and an exact vertex cover solver"};
  app.require_subcommand(1);

  RunConfig run;
  std::string gen;
  std::string encoding = "optimized";
  std::string transport = "sim";
  std::string policy = "random";
  std::string scheduler = "semi";
  std::optional<std::filesystem::path> csv;

  auto* solve_cmd = app.add_subcommand("solve", "solve one instance and print a CSV row");
  add_instance_options(*solve_cmd, run, gen);
  solve_cmd->add_option("--scheduler", scheduler, "sequential, semi or central")->capture_default_str();
  solve_cmd->add_option("--workers", run.workers, "worker ranks")->capture_default_str();
  add_run_options(*solve_cmd, run, encoding, transport, policy);
  solve_cmd->add_option("--csv", csv, "append the row to this file");

  int gen_n = 0;
  std::optional<double> gen_p;
  std::optional<double> gen_degree;
  int gen_count = 1;
  std::uint64_t gen_seed = 1;
  std::filesystem::path gen_out;
  auto* gen_cmd = app.add_subcommand("gen", "write a corpus of random G(n,p) graphs");
  gen_cmd->add_option("--n", gen_n, "vertices")->required();
  auto* p_opt = gen_cmd->add_option("--p", gen_p, "edge probability");
  gen_cmd->add_option("--avg-degree", gen_degree, "expected degree d, so p = d/(n-1)")->excludes(p_opt);
  gen_cmd->add_option("--count", gen_count, "number of graphs")->capture_default_str();
  gen_cmd->add_option("--seed", gen_seed, "corpus seed")->capture_default_str();
  gen_cmd->add_option("--out", gen_out, "output directory")->required();

  std::filesystem::path verify_dir;
  int verify_workers = 4;
  std::uint64_t verify_seed = 1;
  auto* verify_cmd = app.add_subcommand("verify", "check every configuration against brute force");
  verify_cmd->add_option("--dir", verify_dir, "directory of DIMACS files with n <= 26")->required();
  verify_cmd->add_option("--workers", verify_workers, "simulated workers")->capture_default_str();
  verify_cmd->add_option("--seed", verify_seed, "seed")->capture_default_str();

  std::string bench_schedulers = "semi,central";
  std::string bench_encodings = "optimized";
  std::string bench_workers = "1,2,4,8";
  std::optional<double> sequential_time;
  auto* bench_cmd = app.add_subcommand("bench", "run a grid of configurations and report speedups");
  add_instance_options(*bench_cmd, run, gen);
  bench_cmd->add_option("--schedulers", bench_schedulers, "comma list")->capture_default_str();
  bench_cmd->add_option("--encodings", bench_encodings, "comma list")->capture_default_str();
  bench_cmd->add_option("--workers", bench_workers, "comma list of worker counts")->capture_default_str();
  bench_cmd->add_option("--sequential-time", sequential_time, "reference seconds for speedups");
  add_run_options(*bench_cmd, run, encoding, transport, policy);
  bench_cmd->add_option("--csv", csv, "append rows to this file");

  std::filesystem::path rank_file;
  std::optional<int> rank;
  auto* worker_cmd = app.add_subcommand("worker", "one tcp worker rank (started by solve/bench)");
  add_instance_options(*worker_cmd, run, gen);
  worker_cmd->add_option("--rank-file", rank_file, "rank file")->required();
  worker_cmd->add_option("--rank", rank, "this rank (default: $SEMILB_RANK)");
  worker_cmd->add_option("--scheduler", scheduler, "semi or central")->capture_default_str();
  worker_cmd->add_option("--encoding", encoding, "basic or optimized")->capture_default_str();
  worker_cmd->add_option("--threads", run.threads, "exploration threads")->capture_default_str();
  worker_cmd->add_option("--policy", policy, "random or metadata")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitFailure;
  }

  try {
    if (*solve_cmd) {
      run.scheduler = parse_scheduler(scheduler);
      finish_run_config(run, gen, encoding, transport, policy);
      const LoadedInstance instance = load_instance(run);
      const RunRow row = solve(run, instance);
      out << csv_header() << '\n' << csv_row(row) << '\n';
      if (csv) append_csv(*csv, row);
      return row.timed_out() ? kExitTimeout : kExitOk;
    }
    if (*gen_cmd) {
      double p = 0.0;
      if (gen_p) {
        p = *gen_p;
      } else if (gen_degree) {
        p = gen_n > 1 ? *gen_degree / static_cast<double>(gen_n - 1) : 0.0;
      } else {
        throw std::invalid_argument("gen needs --p or --avg-degree");
      }
      const auto files = generate_corpus(gen_n, p, gen_count, gen_seed, gen_out);
      out << "wrote " << files.size() << " graphs to " << gen_out.string() << '\n';
      return kExitOk;
    }
    if (*verify_cmd) {
      const VerifyReport report = verify_directory(verify_dir, default_verify_solver(verify_workers, verify_seed));
      for (const auto& e : report.entries) {
        if (!e.ok()) {
          out << "MISMATCH " << e.file << " " << e.config << ": expected " << e.expected << ", got "
              << (e.got ? std::to_string(*e.got) : std::string("nothing")) << '\n';
        }
      }
      out << report.files() << " instances, " << report.entries.size() << " checks, " << report.mismatches()
          << " mismatches\n";
      return report.mismatches() == 0 ? kExitOk : kExitFailure;
    }
    if (*bench_cmd) {
      finish_run_config(run, gen, encoding, transport, policy);
      BenchGrid grid;
      grid.base = run;
      grid.schedulers = parse_list<Scheduler>(bench_schedulers, [](const std::string& s) { return parse_scheduler(s); });
      grid.encodings = parse_list<vc::Encoding>(bench_encodings, [](const std::string& s) { return vc::parse_encoding(s); });
      grid.workers = parse_list<int>(bench_workers, [](const std::string& s) { return std::stoi(s); });
      grid.sequential_seconds = sequential_time;
      const LoadedInstance instance = load_instance(run);
      out << bench_header() << '\n' << std::flush;
      auto rows = run_bench(grid, instance, [&](const BenchRow& r) {
        out << bench_row(r) << '\n' << std::flush;
      });
      if (!grid.sequential_seconds) {
        // Reference rows may come after the rows they serve; print the final column.
        out << "# final speedups\n";
        for (const auto& r : rows) out << bench_row(r) << '\n';
      }
      if (csv) {
        for (const auto& r : rows) {
          const std::string full = bench_row(r);
          append_csv(*csv, r.run, bench_header(), full.substr(csv_row(r.run).size()));
        }
      }
      const bool any_timeout = std::any_of(rows.begin(), rows.end(), [](const BenchRow& r) { return r.run.timed_out(); });
      return any_timeout ? kExitTimeout : kExitOk;
    }
    if (*worker_cmd) {
      run.scheduler = parse_scheduler(scheduler);
      finish_run_config(run, gen, encoding, "tcp", policy);
      if (!rank) {
        const auto env = rank_from_environment();
        if (!env) throw std::invalid_argument("worker needs --rank or SEMILB_RANK");
        rank = env->value;
      }
      return run_tcp_worker(rank_file, *rank, run);
    }
  } catch (const std::exception& e) {
    err << "semilb: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace semilb::cli
