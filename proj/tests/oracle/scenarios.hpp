#pragma once

// Kernel lifecycle scenarios with table states worked out by hand from the
// array equations, one expected table per step. Shared by the unit tests
// and the acceptance binary.

#include "oracle/dense.hpp"
#include "rosa/kernel.hpp"
#include "rosa/tsv.hpp"

#include <string>
#include <vector>

namespace oracle {

struct Cell {
    Key row;
    Key col;
    Value val;
};

inline AssociativeArray table(std::initializer_list<Cell> cells) {
    std::vector<Key> rows, cols;
    std::vector<Value> vals;
    for (const auto& c : cells) {
        rows.push_back(c.row);
        cols.push_back(c.col);
        vals.push_back(c.val);
    }
    return rosa::construct(rows, cols, vals, rosa::plus_times());
}

/// Collects "step: reason" lines for every mismatch.
class StepLog {
public:
    void expect_table(const std::string& step, const AssociativeArray& actual, const AssociativeArray& expected) {
        if (!exact_equal(actual, expected)) {
            failures_.push_back(step + ": table differs, got\n" + rosa::to_tsv(actual));
        }
    }
    void expect_ids(const std::string& step, const std::vector<std::int64_t>& actual,
                    const std::vector<std::int64_t>& expected) {
        if (actual != expected) {
            failures_.push_back(step + ": ids differ");
        }
    }
    void fail(const std::string& step, const std::string& why) { failures_.push_back(step + ": " + why); }
    const std::vector<std::string>& failures() const { return failures_; }

private:
    std::vector<std::string> failures_;
};

constexpr std::int64_t one = 1;

/// spawn, fork, getpid, sbrk, sleep, chdir, exec, kill, wait.
inline std::vector<std::string> process_lifecycle() {
    StepLog log;
    rosa::Kernel k;
    const auto P = [&] { return *k.processes(); };

    const auto root = k.spawn(100);
    log.expect_ids("spawn", {root}, {1});
    log.expect_table("spawn", P(), table({{1, "current|1", one}, {1, "memory", std::int64_t{100}}}));

    const std::int64_t parent[] = {1};
    log.expect_ids("fork", k.fork(parent), {2});
    log.expect_table("fork", P(),
                     table({{1, "child|2", one},
                            {1, "current|1", one},
                            {1, "memory", std::int64_t{100}},
                            {2, "current|1", one},
                            {2, "memory", std::int64_t{100}},
                            {2, "parent|1", one}}));

    log.expect_ids("getpid", k.getpid(), {1, 2});

    const std::int64_t child[] = {2};
    k.sbrk(child, 50);
    k.sleep(child, 3);
    k.chdir(child, "/home");
    k.chdir(child, "/tmp");
    log.expect_table("sbrk+sleep+chdir", P(),
                     table({{1, "child|2", one},
                            {1, "current|1", one},
                            {1, "memory", std::int64_t{100}},
                            {2, "current|1", one},
                            {2, "cwd|/tmp", one},
                            {2, "memory", std::int64_t{150}},
                            {2, "parent|1", one},
                            {2, "sleep", std::int64_t{3}}}));

    const auto f1 = k.allocfile(1).front();
    k.exec(child, table({{f1, "instr|ls", one}, {f1, "instr|wc", one}}));
    const auto f2 = k.allocfile(1).front();
    k.exec(child, table({{f2, "instr|cat", one}}));
    log.expect_ids("exec file ids", {f1, f2}, {1, 2});
    log.expect_table("exec P", P(),
                     table({{1, "child|2", one},
                            {1, "current|1", one},
                            {1, "memory", std::int64_t{100}},
                            {2, "current|1", one},
                            {2, "cwd|/tmp", one},
                            {2, "instr|cat", one},
                            {2, "memory", std::int64_t{150}},
                            {2, "parent|1", one},
                            {2, "sleep", std::int64_t{3}}}));
    log.expect_table("exec F", *k.files(),
                     table({{1, "instr|ls", one},
                            {1, "instr|wc", one},
                            {1, "open|1", one},
                            {2, "instr|cat", one},
                            {2, "open|1", one}}));

    try {
        (void)k.wait_children(parent, 3);
        log.fail("wait before kill", "expected a timeout");
    } catch (const rosa::TimeoutError&) {
    }

    k.kill(child);
    log.expect_table("kill", P(),
                     table({{1, "child|2", one}, {1, "current|1", one}, {1, "memory", std::int64_t{100}}}));
    log.expect_ids("wait", k.wait_children(parent, 1), {2});
    log.expect_ids("getpid after kill", k.getpid(), {1});

    if (k.collect_dangling() != 1) {
        log.fail("gc", "expected one dangling child indicator");
    }
    log.expect_table("gc", P(), table({{1, "current|1", one}, {1, "memory", std::int64_t{100}}}));
    log.expect_ids("wait without children", k.wait_children(parent, 1), {});
    return log.failures();
}

/// open, fstat, dup, close, link, unlink, mkdir, mknod, pipe, write, read.
inline std::vector<std::string> file_lifecycle() {
    StepLog log;
    rosa::Kernel k;
    const auto F = [&] { return *k.files(); };

    const auto f = k.allocfile(1).front();
    log.expect_ids("open", k.open(table({{f, "path|/etc/motd", one}, {f, "size", std::int64_t{512}}})), {1});
    const auto motd_open =
        table({{1, "open|1", one}, {1, "path|/etc/motd", one}, {1, "size", std::int64_t{512}}});
    log.expect_table("open", F(), motd_open);

    const std::int64_t f1[] = {1};
    log.expect_table("fstat", k.fstat(f1), motd_open);

    log.expect_ids("dup", k.dup(f1), {2});
    k.close(f1);
    log.expect_table("dup+close", F(),
                     table({{1, "path|/etc/motd", one},
                            {1, "size", std::int64_t{512}},
                            {2, "open|1", one},
                            {2, "path|/etc/motd", one},
                            {2, "size", std::int64_t{512}}}));

    k.link(table({{1, "path|/tmp/motd", one}}));
    k.unlink(table({{1, "path|/etc/motd", one}}));

    const auto d = k.allocfile(1).front();
    log.expect_ids("mkdir", k.mkdir(table({{d, "path|/home", one}})), {3});
    const auto n = k.allocfile(1).front();
    log.expect_ids("mknod", k.mknod(table({{n, "path|/dev/null", one}})), {4});
    const auto p = k.allocfile(1).front();
    log.expect_ids("pipe", k.pipe(table({{p, "path|pipe:5", one}})), {5});

    log.expect_table("link+unlink+mkdir+mknod+pipe", F(),
                     table({{1, "path|/tmp/motd", one},
                            {1, "size", std::int64_t{512}},
                            {2, "open|1", one},
                            {2, "path|/etc/motd", one},
                            {2, "size", std::int64_t{512}},
                            {3, "kind|directory", one},
                            {3, "path|/home", one},
                            {4, "kind|device-node", one},
                            {4, "path|/dev/null", one},
                            {5, "kind|pipe", one},
                            {5, "path|pipe:5", one}}));

    const auto buf = table({{0, "x", std::int64_t{5}}, {1, "y", std::int64_t{7}}});
    k.write_file(1, buf, rosa::KeyPattern::all(), rosa::KeyPattern::all());
    k.write_file(1, buf, rosa::KeyPattern::keys({Key{0}}), rosa::KeyPattern::all());
    const auto contents = k.contents(1);
    if (!contents) {
        log.fail("write", "no contents for file 1");
    } else {
        log.expect_table("write", *contents, table({{0, "x", std::int64_t{10}}, {1, "y", std::int64_t{7}}}));
    }
    log.expect_table("read row", k.read_file(1, rosa::KeyPattern::keys({Key{0}}), rosa::KeyPattern::all()),
                     table({{0, "x", std::int64_t{10}}}));
    log.expect_table("read col", k.read_file(1, rosa::KeyPattern::all(), rosa::KeyPattern::keys({Key{"y"}})),
                     table({{1, "y", std::int64_t{7}}}));
    log.expect_table("read unwritten", k.read_file(3, rosa::KeyPattern::all(), rosa::KeyPattern::all()), table({}));
    return log.failures();
}

} // namespace oracle
