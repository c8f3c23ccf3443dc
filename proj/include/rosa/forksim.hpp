#pragma once

#include "rosa/assoc.hpp"
#include "rosa/error.hpp"
#include "rosa/random.hpp"

#include <algorithm>
#include <barrier>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

namespace rosa::forksim {

struct BenchConfig {
    int log2_n = 14;
    int nnz_per_row = 10;
    int forkers = 1;
    int steps = 4;
    std::uint64_t seed = 1;
    std::string semiring = "plus.times";
    /// Instrumentation: invoked with the worker index at the start of each worker.
    std::function<void(int)> worker_hook;

    void validate() const {
        if (log2_n < 4 || log2_n > 22) {
            throw ArgumentError("log2 size must be in [4, 22], got " + std::to_string(log2_n));
        }
        if (nnz_per_row < 1 || nnz_per_row > (1 << log2_n)) {
            throw ArgumentError("nnz per row must be in [1, 2^log2_size], got " + std::to_string(nnz_per_row));
        }
        if (forkers < 1) {
            throw ArgumentError("forkers must be at least 1");
        }
        if (steps < 1) {
            throw ArgumentError("steps must be at least 1");
        }
        (void)preset(semiring);
    }
};

struct BenchResult {
    int forkers = 0;
    int log2_n = 0;
    int nnz_per_row = 0;
    std::uint64_t processes_managed = 0;
    std::uint64_t total_forks = 0;
    double elapsed_seconds = 0;
    double fork_rate_per_second = 0;
    bool valid = true;
    std::string error;
};

/// Metadata surrogate column j, zero padded so text order matches numeric order.
inline Key metadata_key(std::uint64_t j) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "meta|%07llu", static_cast<unsigned long long>(j));
    return Key{std::string(buf)};
}

/**
 * @brief 2^m x 2^m process array with `nnz_per_row` ones per row.
 *
 * Rows are process ids 0 .. 2^m - 1; each row draws distinct columns
 * uniformly from the 2^m metadata surrogates.
 */
inline AssociativeArray build_process_array(int m, int nnz_per_row, std::uint64_t seed,
                                            const Semiring& s = plus_times()) {
    const std::uint64_t n = std::uint64_t{1} << m;
    if (nnz_per_row < 1 || static_cast<std::uint64_t>(nnz_per_row) > n) {
        throw ArgumentError("nnz per row must be in [1, 2^m]");
    }
    auto rng = make_rng(seed, 0x50);
    AssociativeArray::Builder b(s);
    b.reserve(n, n * static_cast<std::uint64_t>(nnz_per_row));
    std::vector<std::uint64_t> cols;
    for (std::uint64_t r = 0; r < n; ++r) {
        cols.clear();
        while (cols.size() < static_cast<std::size_t>(nnz_per_row)) {
            const auto c = uniform_below(rng, n);
            if (std::find(cols.begin(), cols.end(), c) == cols.end()) {
                cols.push_back(c);
            }
        }
        std::sort(cols.begin(), cols.end());
        b.begin_row(Key{static_cast<std::int64_t>(r)});
        for (auto c : cols) {
            b.push_col(metadata_key(c), s.one());
        }
    }
    return std::move(b).finish();
}

/// Fisher-Yates shuffle of 0 .. 2^m - 1; element i is the new id of process i.
inline std::vector<std::int64_t> permutation_images(int m, std::uint64_t seed) {
    const std::uint64_t n = std::uint64_t{1} << m;
    std::vector<std::int64_t> idx(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        idx[i] = static_cast<std::int64_t>(i);
    }
    auto rng = make_rng(seed, 0x70);
    for (std::uint64_t i = n - 1; i > 0; --i) {
        std::swap(idx[i], idx[uniform_below(rng, i + 1)]);
    }
    return idx;
}

/// Selector I(new, old) with exactly one 1 in every row and column.
inline AssociativeArray build_permutation(int m, std::uint64_t seed, const Semiring& s = plus_times()) {
    const auto images = permutation_images(m, seed);
    std::vector<std::int64_t> source_of(images.size());
    for (std::size_t i = 0; i < images.size(); ++i) {
        source_of[static_cast<std::size_t>(images[i])] = static_cast<std::int64_t>(i);
    }
    AssociativeArray::Builder b(s);
    b.reserve(images.size(), images.size());
    for (std::size_t r = 0; r < source_of.size(); ++r) {
        b.begin_row(Key{static_cast<std::int64_t>(r)});
        b.push_col(Key{source_of[r]}, s.one());
    }
    return std::move(b).finish();
}

/// One simulated fork of every process: perm * P.
inline AssociativeArray fork_step(const AssociativeArray& p, const AssociativeArray& perm) {
    rosa::detail::require_same_semiring(perm, p, "fork_step");
    if (perm.nnz() != perm.row_count() || perm.row_count() != p.row_count()) {
        throw ShapeError("fork_step: permutation with " + std::to_string(perm.row_count()) +
                         " rows does not match a process array with " + std::to_string(p.row_count()) + " rows");
    }
    return array_mult(perm, p);
}

namespace detail {

struct WorkerOutcome {
    double seconds = 0;
    bool ok = true;
    std::string error;
};

} // namespace detail

/**
 * @brief Runs cfg.forkers independent workers and times their fork steps.
 *
 * Each worker builds its own process array and permutation, performs one
 * untimed warm-up step, waits for every other worker, then times
 * cfg.steps steps (P = perm * P) with a monotonic clock. Elapsed time is
 * the slowest worker's loop. A throwing worker marks the result invalid.
 */
inline BenchResult run_point(const BenchConfig& cfg) {
    cfg.validate();
    const Semiring s = preset(cfg.semiring);
    const std::uint64_t n = std::uint64_t{1} << cfg.log2_n;

    std::vector<detail::WorkerOutcome> outcomes(static_cast<std::size_t>(cfg.forkers));
    std::barrier start(cfg.forkers);
    std::vector<std::thread> workers;
    workers.reserve(outcomes.size());
    for (int w = 0; w < cfg.forkers; ++w) {
        workers.emplace_back([&, w] {
            auto& out = outcomes[static_cast<std::size_t>(w)];
            AssociativeArray p(s), perm(s);
            try {
                if (cfg.worker_hook) {
                    cfg.worker_hook(w);
                }
                const std::uint64_t wseed = splitmix64(cfg.seed + static_cast<std::uint64_t>(w));
                p = build_process_array(cfg.log2_n, cfg.nnz_per_row, wseed, s);
                perm = build_permutation(cfg.log2_n, wseed, s);
                p = fork_step(p, perm);
            } catch (const std::exception& e) {
                out.ok = false;
                out.error = e.what();
            } catch (...) {
                out.ok = false;
                out.error = "unknown exception";
            }
            start.arrive_and_wait();
            if (!out.ok) {
                return;
            }
            try {
                const auto t0 = std::chrono::steady_clock::now();
                for (int step = 0; step < cfg.steps; ++step) {
                    p = fork_step(p, perm);
                }
                const auto t1 = std::chrono::steady_clock::now();
                out.seconds = std::chrono::duration<double>(t1 - t0).count();
            } catch (const std::exception& e) {
                out.ok = false;
                out.error = e.what();
            } catch (...) {
                out.ok = false;
                out.error = "unknown exception";
            }
        });
    }
    for (auto& t : workers) {
        t.join();
    }

    BenchResult r;
    r.forkers = cfg.forkers;
    r.log2_n = cfg.log2_n;
    r.nnz_per_row = cfg.nnz_per_row;
    r.processes_managed = static_cast<std::uint64_t>(cfg.forkers) * n;
    r.total_forks = static_cast<std::uint64_t>(cfg.forkers) * static_cast<std::uint64_t>(cfg.steps) * n;
    for (std::size_t w = 0; w < outcomes.size(); ++w) {
        if (!outcomes[w].ok) {
            r.valid = false;
            r.error = "worker " + std::to_string(w) + ": " + outcomes[w].error;
            return r;
        }
        r.elapsed_seconds = std::max(r.elapsed_seconds, outcomes[w].seconds);
    }
    r.elapsed_seconds = std::max(r.elapsed_seconds, 1e-9);
    r.fork_rate_per_second = static_cast<double>(r.total_forks) / r.elapsed_seconds;
    return r;
}

inline std::vector<BenchResult> run_benchmark(const BenchConfig& cfg) { return {run_point(cfg)}; }

/// One point per forker count; stops after the first invalid point.
inline std::vector<BenchResult> run_sweep(const BenchConfig& base, std::span<const int> forkers) {
    std::vector<BenchResult> out;
    for (int f : forkers) {
        BenchConfig cfg = base;
        cfg.forkers = f;
        out.push_back(run_point(cfg));
        if (!out.back().valid) {
            break;
        }
    }
    return out;
}

/// 1, 2, 4, ... up to twice the thread count.
inline std::vector<int> default_sweep(int threads) {
    std::vector<int> out;
    for (int f = 1; f <= 2 * std::max(threads, 1); f *= 2) {
        out.push_back(f);
    }
    return out;
}

/// Physical cores usable by this process (never more than hardware_concurrency).
inline int physical_core_count() {
    const int logical = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    std::ifstream in("/proc/cpuinfo");
    if (!in) {
        return logical;
    }
    std::set<std::pair<std::string, std::string>> cores;
    std::string line, physical = "0";
    while (std::getline(in, line)) {
        const auto colon = line.find(':');
        if (colon == std::string::npos) {
            continue;
        }
        const auto value = colon + 2 <= line.size() ? line.substr(colon + 2) : std::string();
        if (line.starts_with("physical id")) {
            physical = value;
        } else if (line.starts_with("core id")) {
            cores.emplace(physical, value);
        }
    }
    if (cores.empty()) {
        return logical;
    }
    return std::min(logical, static_cast<int>(cores.size()));
}

inline constexpr std::string_view results_csv_header =
    "forkers,log2_n,nnz_per_row,processes_managed,total_forks,elapsed_seconds,fork_rate_per_second";

/// Writes the header plus one row per valid result; floats use 6 significant digits.
inline void write_results_csv(std::ostream& out, std::span<const BenchResult> results) {
    out << results_csv_header << '\n';
    char buf[64];
    for (const auto& r : results) {
        if (!r.valid) {
            continue;
        }
        out << r.forkers << ',' << r.log2_n << ',' << r.nnz_per_row << ',' << r.processes_managed << ','
            << r.total_forks << ',';
        std::snprintf(buf, sizeof(buf), "%.6g", r.elapsed_seconds);
        out << buf << ',';
        std::snprintf(buf, sizeof(buf), "%.6g", r.fork_rate_per_second);
        out << buf << '\n';
    }
}

/// Native baseline: forks and reaps `count` OS processes, returns forks per second.
inline double native_fork_rate(int count) {
    if (count < 1) {
        throw ArgumentError("native fork count must be positive");
    }
    const auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < count; ++i) {
        const pid_t child = ::fork();
        if (child < 0) {
            throw ResourceError("fork() failed");
        }
        if (child == 0) {
            ::_exit(0);
        }
        int status = 0;
        ::waitpid(child, &status, 0);
    }
    const auto t1 = std::chrono::steady_clock::now();
    return count / std::max(std::chrono::duration<double>(t1 - t0).count(), 1e-9);
}

} // namespace rosa::forksim
