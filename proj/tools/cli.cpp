#include "cli.hpp"

#include "rosa/rosa.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace rosa::cli {
namespace {

constexpr int exit_ok = 0;
constexpr int exit_failure = 1;
constexpr int exit_usage = 2;

struct BenchOptions {
    forksim::BenchConfig cfg;
    std::vector<int> forkers;
    std::optional<int> threads;
    std::string out;
    int native_forks = 0;
};

struct KernelOptions {
    std::string script;
    std::string context = "1";
    bool hash_ids = false;
    std::uint64_t seed = 0;
};

struct ConvertOptions {
    std::string input;
    std::string out;
    bool stats = false;
    std::string semiring = "plus.times";
    std::string universe;
};

// --threads wins over ROSA_THREADS, which wins over the detected core count.
std::optional<int> resolve_threads(const std::optional<int>& flag, std::ostream& err) {
    if (flag) {
        return *flag;
    }
    if (const char* env = std::getenv("ROSA_THREADS"); env != nullptr && *env != '\0') {
        std::int64_t v = 0;
        if (!parse_canonical_int(env, v) || v < 1 || v > 4096) {
            err << "ROSA_THREADS must be a positive integer, got '" << env << "'\n";
            return std::nullopt;
        }
        return static_cast<int>(v);
    }
    return forksim::physical_core_count();
}

int cmd_bench(BenchOptions& o, std::ostream& out, std::ostream& err) {
    const auto threads = resolve_threads(o.threads, err);
    if (!threads) {
        return exit_usage;
    }
    if (o.forkers.empty()) {
        o.forkers = forksim::default_sweep(*threads);
    }
    try {
        o.cfg.validate();
    } catch (const Error& e) {
        err << "bench: " << e.what() << '\n';
        return exit_usage;
    }

    const auto results = forksim::run_sweep(o.cfg, o.forkers);

    char line[160];
    std::snprintf(line, sizeof(line), "%8s %8s %18s %16s %12s %16s\n", "forkers", "log2_n", "processes", "forks",
                  "seconds", "forks/s");
    out << line;
    bool ok = true;
    for (const auto& r : results) {
        if (!r.valid) {
            err << "bench: aborted at " << r.forkers << " forkers: " << r.error << '\n';
            ok = false;
            continue;
        }
        std::snprintf(line, sizeof(line), "%8d %8d %18llu %16llu %12.6g %16.6g\n", r.forkers, r.log2_n,
                      static_cast<unsigned long long>(r.processes_managed),
                      static_cast<unsigned long long>(r.total_forks), r.elapsed_seconds, r.fork_rate_per_second);
        out << line;
    }

    if (!o.out.empty()) {
        std::ofstream csv(o.out, std::ios::binary | std::ios::trunc);
        if (!csv) {
            err << "bench: cannot write '" << o.out << "'\n";
            return exit_failure;
        }
        forksim::write_results_csv(csv, results);
    }

    if (o.native_forks > 0) {
        try {
            out << "native fork baseline: " << forksim::native_fork_rate(o.native_forks) << " forks/s\n";
        } catch (const Error& e) {
            err << "bench: native baseline failed: " << e.what() << '\n';
            return exit_failure;
        }
    }
    return ok ? exit_ok : exit_failure;
}

int cmd_kernel(const KernelOptions& o, std::ostream& out, std::ostream& err) {
    std::ifstream in(o.script, std::ios::binary);
    if (!in) {
        err << "kernel: cannot open '" << o.script << "'\n";
        return exit_usage;
    }
    std::vector<script::Command> commands;
    try {
        commands = script::parse(in);
    } catch (const ParseError& e) {
        err << "kernel: " << o.script << ": " << e.what() << '\n';
        return exit_usage;
    }
    Kernel::Options kopts;
    kopts.context = o.context;
    kopts.id_mode = o.hash_ids ? IdAllocator::Mode::hash : IdAllocator::Mode::counter;
    kopts.seed = o.seed;
    Kernel kernel(kopts);
    try {
        script::execute(commands, kernel, out);
    } catch (const script::CommandError& e) {
        err << "kernel: " << e.what() << '\n';
        return exit_failure;
    }
    return exit_ok;
}

int cmd_convert(const ConvertOptions& o, std::ostream& out, std::ostream& err) {
    Semiring s = plus_times();
    try {
        std::vector<std::string> items;
        std::stringstream ss(o.universe);
        for (std::string item; std::getline(ss, item, ',');) {
            if (!item.empty()) {
                items.push_back(item);
            }
        }
        s = preset(o.semiring, ValueSet(std::move(items)));
    } catch (const Error& e) {
        err << "convert: " << e.what() << '\n';
        return exit_usage;
    }

    AssociativeArray a(s);
    try {
        a = load_tsv(std::filesystem::path(o.input), s);
    } catch (const ParseError& e) {
        err << "convert: " << o.input << ": " << e.what() << '\n';
        return exit_usage;
    } catch (const DomainError& e) {
        err << "convert: " << o.input << ": " << e.what() << '\n';
        return exit_usage;
    } catch (const Error& e) {
        err << "convert: " << e.what() << '\n';
        return exit_usage;
    }

    const auto cols = a.col_keys();
    out << "nnz\t" << a.nnz() << '\n';
    out << "rows\t" << a.row_count() << '\n';
    out << "cols\t" << cols.size() << '\n';
    if (o.stats) {
        std::map<Key, std::size_t> per_col;
        a.for_each([&](const Key&, const Key& c, const Value&) { ++per_col[c]; });
        out << "column\tentries\n";
        for (const auto& [c, n] : per_col) {
            out << to_string(c) << '\t' << n << '\n';
        }
    }
    if (!o.out.empty()) {
        try {
            save_tsv(a, std::filesystem::path(o.out));
        } catch (const Error& e) {
            err << "convert: " << e.what() << '\n';
            return exit_failure;
        }
    }
    return exit_ok;
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Tabular OS kernel simulator and associative-array fork benchmark", "rosa"};
    app.require_subcommand(1);

    BenchOptions bench;
    auto* b = app.add_subcommand("bench", "Run the fork-simulation scaling sweep");
    b->add_option("--log2-size", bench.cfg.log2_n, "Process array is 2^N x 2^N")
        ->capture_default_str()
        ->check(CLI::Range(4, 22));
    b->add_option("--nnz-per-row", bench.cfg.nnz_per_row, "Nonzeros per process row")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    b->add_option("--forkers", bench.forkers, "Comma separated worker counts (default 1,2,4,... up to 2x threads)")
        ->delimiter(',')
        ->check(CLI::PositiveNumber);
    b->add_option("--steps", bench.cfg.steps, "Timed fork steps per worker")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    b->add_option("--seed", bench.cfg.seed, "Random seed")->capture_default_str();
    b->add_option("--semiring", bench.cfg.semiring, "Value algebra")
        ->capture_default_str()
        ->check(CLI::IsMember(std::vector<std::string>(preset_names.begin(), preset_names.end())));
    b->add_option("--threads", bench.threads, "Thread count for the default sweep (overrides ROSA_THREADS)")
        ->check(CLI::Range(1, 4096));
    b->add_option("--out", bench.out, "Results CSV path");
    b->add_option("--native-baseline", bench.native_forks, "Also time N native fork()/waitpid() calls")
        ->check(CLI::NonNegativeNumber);

    KernelOptions kernel;
    auto* k = app.add_subcommand("kernel", "Execute a kernel script against a fresh state");
    k->add_option("script", kernel.script, "Script path")->required();
    k->add_option("--context", kernel.context, "Context id written into current|<context>")->capture_default_str();
    k->add_flag("--hash-ids", kernel.hash_ids, "Allocate ids by seeded hashing instead of a counter");
    k->add_option("--seed", kernel.seed, "Seed for --hash-ids")->capture_default_str();

    ConvertOptions convert;
    auto* c = app.add_subcommand("convert", "Validate a triple file, print statistics, optionally rewrite it");
    c->add_option("input", convert.input, "Triple file")->required();
    c->add_flag("--stats", convert.stats, "Print per-column entry counts");
    c->add_option("--out", convert.out, "Write the canonical form of the loaded array here");
    c->add_option("--semiring", convert.semiring, "Value algebra used to read values")->capture_default_str();
    c->add_option("--universe", convert.universe, "Comma separated universe for union.intersection");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_usage;
    }

    if (*b) {
        return cmd_bench(bench, out, err);
    }
    if (*k) {
        return cmd_kernel(kernel, out, err);
    }
    return cmd_convert(convert, out, err);
}

} // namespace rosa::cli
