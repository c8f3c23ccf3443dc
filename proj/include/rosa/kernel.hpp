#pragma once

#include "rosa/assoc.hpp"
#include "rosa/error.hpp"
#include "rosa/random.hpp"

#include <algorithm>
#include <climits>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_set>
#include <utility>
#include <vector>

namespace rosa {

using Pid = std::int64_t;
using FileId = std::int64_t;

/// Indicator column "field|value" of the hybrid schema.
inline Key indicator(std::string_view field, std::string_view value) {
    std::string k;
    k.reserve(field.size() + value.size() + 1);
    k.append(field).append("|").append(value);
    return Key{std::move(k)};
}

inline Key indicator(std::string_view field, std::int64_t value) {
    return indicator(field, std::to_string(value));
}

inline bool is_indicator(const Key& col) {
    const auto* s = std::get_if<std::string>(&col);
    return s != nullptr && s->find('|') != std::string::npos;
}

inline std::vector<Key> to_keys(std::span<const std::int64_t> ids) {
    return std::vector<Key>(ids.begin(), ids.end());
}

/**
 * @brief Issues process or file IDs that never repeat within one allocator.
 *
 * Counter mode hands out 1, 2, 3, ...; hash mode draws splitmix64 hashes
 * of a seeded counter and skips anything already issued or reserved.
 */
class IdAllocator {
public:
    enum class Mode { counter, hash };

    explicit IdAllocator(Mode mode = Mode::counter, std::uint64_t seed = 0) : mode_(mode), seed_(seed) {}

    Mode mode() const noexcept { return mode_; }

    std::vector<std::int64_t> allocate(std::size_t count) {
        std::vector<std::int64_t> out;
        out.reserve(count);
        if (mode_ == Mode::counter) {
            if (next_ > INT64_MAX - static_cast<std::int64_t>(count)) {
                throw ResourceError("id allocator exhausted");
            }
            for (std::size_t i = 0; i < count; ++i) {
                out.push_back(next_++);
            }
            return out;
        }
        for (std::size_t i = 0; i < count; ++i) {
            out.push_back(draw());
        }
        return out;
    }

    /// Marks an externally chosen ID as taken.
    void reserve(std::int64_t id) {
        if (mode_ == Mode::counter) {
            if (id >= next_) {
                if (id == INT64_MAX) {
                    throw ResourceError("id allocator exhausted");
                }
                next_ = id + 1;
            }
        } else {
            issued_.insert(id);
        }
    }

private:
    std::int64_t draw() {
        constexpr int max_attempts = 64;
        for (int attempt = 0; attempt < max_attempts; ++attempt) {
            const auto id = static_cast<std::int64_t>(splitmix64(seed_ + draws_++) & INT64_MAX);
            if (id != 0 && issued_.insert(id).second) {
                return id;
            }
        }
        throw ResourceError("id allocator exhausted");
    }

    Mode mode_;
    std::uint64_t seed_;
    std::int64_t next_ = 1;
    std::uint64_t draws_ = 0;
    std::unordered_set<std::int64_t> issued_;
};

/// Pure forms of the fork equations over explicit (new pid, source pid) pairs.
namespace fork_equations {

/**
 * Five-step form: Pd = I(new,src) P; Pd += I(new, parent|src);
 * Pd += I(src, child|new); P += Pd. Repeated sources fan out, repeated
 * targets merge.
 */
inline AssociativeArray stepwise(const AssociativeArray& p, std::span<const Pid> targets,
                                 std::span<const Pid> sources) {
    if (targets.size() != sources.size()) {
        throw ArityError("fork: target and source lists differ in length");
    }
    const Semiring& s = p.semiring();
    const auto new_keys = to_keys(targets);
    const auto src_keys = to_keys(sources);
    std::vector<Key> parent_cols, child_cols;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        parent_cols.push_back(indicator("parent", sources[i]));
        child_cols.push_back(indicator("child", targets[i]));
    }

    AssociativeArray pd = array_mult(ones(new_keys, src_keys, s), p);
    pd = ewise_add(pd, ones(new_keys, parent_cols, s));
    pd = ewise_add(pd, ones(src_keys, child_cols, s));
    return ewise_add(p, pd);
}

/// Single-equation form: P += I(new,src) P + I(new, parent|src) + I(src, child|new).
inline AssociativeArray compressed(const AssociativeArray& p, std::span<const Pid> targets,
                                   std::span<const Pid> sources) {
    if (targets.size() != sources.size()) {
        throw ArityError("fork: target and source lists differ in length");
    }
    const Semiring& s = p.semiring();
    std::vector<Key> new_keys, src_keys, parent_cols, child_cols;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        new_keys.emplace_back(targets[i]);
        src_keys.emplace_back(sources[i]);
        parent_cols.push_back(indicator("parent", sources[i]));
        child_cols.push_back(indicator("child", targets[i]));
    }
    return ewise_add(p, ewise_add(array_mult(ones(new_keys, src_keys, s), p),
                                  ewise_add(ones(new_keys, parent_cols, s), ones(src_keys, child_cols, s))));
}

} // namespace fork_equations

enum class FileKind { directory, device_node, pipe };

inline std::string_view to_string(FileKind k) {
    switch (k) {
    case FileKind::directory:
        return "directory";
    case FileKind::device_node:
        return "device-node";
    case FileKind::pipe:
        return "pipe";
    }
    return "unknown";
}

/**
 * Lists schema violations of a process or file table: indicator columns
 * ("field|value") must hold exactly 1, other columns positive numbers.
 */
inline std::vector<std::string> schema_violations(const AssociativeArray& table) {
    std::vector<std::string> out;
    table.for_each([&](const Key& r, const Key& c, const Value& v) {
        const std::string where = "(" + to_string(r) + ", " + to_string(c) + ")";
        if (!is_integer(r)) {
            out.push_back(where + ": row key is not an integer id");
        }
        if (is_indicator(c)) {
            if (!values_equal(v, Value{std::int64_t{1}})) {
                out.push_back(where + ": indicator holds " + to_string(v));
            }
        } else if (!is_number(v) || !(as_double(v) > 0)) {
            out.push_back(where + ": numeric field holds " + to_string(v));
        }
    });
    return out;
}

/**
 * @brief Tabular kernel state: process table P, file table F, file contents.
 *
 * Every system call is evaluated as array equations over plus.times.
 * Mutations are serialized by an internal mutex; readers receive immutable
 * snapshots and never block writers for longer than a pointer copy.
 *
 * After each update, indicator columns are clamped back to 1 so repeated
 * additions of the same fact (merging processes, reopening a file) keep
 * the schema intact.
 */
class Kernel {
public:
    struct Options {
        std::string context = "1";
        IdAllocator::Mode id_mode = IdAllocator::Mode::counter;
        std::uint64_t seed = 0;
    };

    Kernel() : Kernel(Options{}) {}

    explicit Kernel(Options opts)
        : opts_(std::move(opts)),
          s_(plus_times()),
          p_(std::make_shared<const AssociativeArray>(s_)),
          f_(std::make_shared<const AssociativeArray>(s_)),
          pids_(opts_.id_mode, opts_.seed),
          fids_(opts_.id_mode, splitmix64(opts_.seed)) {}

    const Semiring& semiring() const noexcept { return s_; }
    const std::string& context() const noexcept { return opts_.context; }

    std::shared_ptr<const AssociativeArray> processes() const {
        std::lock_guard lock(mu_);
        return p_;
    }

    std::shared_ptr<const AssociativeArray> files() const {
        std::lock_guard lock(mu_);
        return f_;
    }

    /// Contents array of file `f`, if any has been written.
    std::optional<AssociativeArray> contents(FileId f) const {
        std::lock_guard lock(mu_);
        auto it = contents_.find(f);
        if (it == contents_.end()) {
            return std::nullopt;
        }
        return it->second;
    }

    /// Replaces P and F wholesale; their row IDs are reserved in the allocators.
    void load(AssociativeArray processes, AssociativeArray files) {
        detail::require_same_semiring(processes, AssociativeArray(s_), "load");
        detail::require_same_semiring(files, AssociativeArray(s_), "load");
        std::lock_guard lock(mu_);
        for (const auto& r : processes.rows()) {
            pids_.reserve(require_id(r, "process"));
        }
        for (const auto& r : files.rows()) {
            fids_.reserve(require_id(r, "file"));
        }
        p_ = std::make_shared<const AssociativeArray>(std::move(processes));
        f_ = std::make_shared<const AssociativeArray>(std::move(files));
    }

    std::vector<Pid> allocproc(std::size_t count) {
        if (count == 0) {
            throw ArgumentError("allocproc: count must be at least 1");
        }
        std::lock_guard lock(mu_);
        return pids_.allocate(count);
    }

    std::vector<FileId> allocfile(std::size_t count) {
        std::lock_guard lock(mu_);
        return fids_.allocate(count);
    }

    /// Creates a root process in the current context holding `memory` bytes.
    Pid spawn(std::int64_t memory = 0) {
        if (memory < 0) {
            throw InvalidSizeError("spawn: memory must be nonnegative");
        }
        std::lock_guard lock(mu_);
        const Pid pid = pids_.allocate(1).front();
        std::vector<Key> rows{Key{pid}};
        std::vector<Key> cols{indicator("current", opts_.context)};
        std::vector<Value> vals{std::int64_t{1}};
        if (memory > 0) {
            rows.emplace_back(pid);
            cols.emplace_back("memory");
            vals.emplace_back(memory);
        }
        commit_p(ewise_add(*p_, construct(rows, cols, vals, s_)));
        return pid;
    }

    /// fork(): each pid in `p` gets `fanout` copies; returns the new pids.
    std::vector<Pid> fork(std::span<const Pid> p, std::size_t fanout = 1) {
        if (fanout == 0) {
            throw ArgumentError("fork: fanout must be positive");
        }
        std::lock_guard lock(mu_);
        require_live(p);
        if (p.empty()) {
            return {};
        }
        const auto targets = pids_.allocate(p.size() * fanout);
        std::vector<Pid> sources;
        sources.reserve(targets.size());
        for (Pid src : p) {
            sources.insert(sources.end(), fanout, src);
        }
        commit_p(fork_equations::stepwise(*p_, targets, sources));
        return targets;
    }

    /// Combines each group of processes into one new process.
    std::vector<Pid> merge_fork(std::span<const std::vector<Pid>> groups) {
        std::lock_guard lock(mu_);
        std::vector<Pid> sources;
        for (const auto& g : groups) {
            if (g.empty()) {
                throw ArgumentError("merge_fork: empty group");
            }
            require_live(g);
        }
        if (groups.empty()) {
            return {};
        }
        const auto fresh = pids_.allocate(groups.size());
        std::vector<Pid> targets;
        for (std::size_t i = 0; i < groups.size(); ++i) {
            for (Pid m : groups[i]) {
                targets.push_back(fresh[i]);
                sources.push_back(m);
            }
        }
        commit_p(fork_equations::stepwise(*p_, targets, sources));
        return fresh;
    }

    /// P -= I(p) P. Absent pids are ignored; indicators naming p elsewhere remain.
    void exit(std::span<const Pid> p) { remove_rows(p); }
    void kill(std::span<const Pid> p) { remove_rows(p); }

    /// row(P I(current|*)).
    std::vector<Pid> getpid() const {
        auto p = processes();
        const auto cols = col_keys(*p);
        const auto sel = array_mult(*p, selector(KeyPattern::prefix("current|"), cols, s_));
        return to_pids(row_keys(sel));
    }

    /**
     * @brief Polls I(p) P I(child|*) until some listed child row is gone.
     *
     * Returns the exited children found on the first poll that sees any,
     * or an empty list when `p` has no child indicators at all. Yields the
     * thread between polls so other actors can mutate the table.
     *
     * @throws TimeoutError after `max_polls` polls with every child live.
     */
    std::vector<Pid> wait_children(std::span<const Pid> p, std::size_t max_polls) const {
        if (max_polls == 0) {
            throw ArgumentError("wait: max_polls must be at least 1");
        }
        const auto sel_p = identity(unique_keys(p), s_);
        for (std::size_t poll = 0; poll < max_polls; ++poll) {
            auto snapshot = processes();
            const auto children_arr =
                array_mult(array_mult(sel_p, *snapshot),
                           selector(KeyPattern::prefix("child|"), col_keys(*snapshot), s_));
            std::vector<Pid> children;
            for (const auto& c : col_keys(children_arr)) {
                std::int64_t id = 0;
                if (parse_canonical_int(std::get<std::string>(c).substr(6), id)) {
                    children.push_back(id);
                }
            }
            if (children.empty()) {
                return {};
            }
            std::vector<Pid> exited;
            for (Pid c : children) {
                if (!snapshot->has_row(Key{c})) {
                    exited.push_back(c);
                }
            }
            if (!exited.empty()) {
                return exited;
            }
            std::this_thread::yield();
        }
        throw TimeoutError("wait: children still running after " + std::to_string(max_polls) + " polls");
    }

    /// P += A(p, sleep, n).
    void sleep(std::span<const Pid> p, std::int64_t seconds) {
        if (seconds <= 0) {
            throw ArgumentError("sleep: seconds must be positive");
        }
        std::lock_guard lock(mu_);
        require_live(p);
        commit_p(ewise_add(*p_, numeric_column(p, "sleep", seconds)));
    }

    /// P += A(p, memory, n). Negative n shrinks; memory may not drop below zero.
    void sbrk(std::span<const Pid> p, std::int64_t bytes) {
        if (bytes == 0) {
            throw ArgumentError("sbrk: size must be nonzero");
        }
        std::lock_guard lock(mu_);
        require_live(p);
        for (Pid pid : unique_pids(p)) {
            const Value* cur = p_->get(Key{pid}, Key{"memory"});
            const double now = cur ? as_double(*cur) : 0.0;
            if (now + static_cast<double>(bytes) < 0) {
                throw InvalidSizeError("sbrk: memory of process " + std::to_string(pid) + " would drop below zero");
            }
        }
        commit_p(ewise_add(*p_, numeric_column(p, "memory", bytes)));
    }

    /// Drops rows' cwd|* indicators, then P += I(p, cwd|dir).
    void chdir(std::span<const Pid> p, std::string_view dir) {
        std::lock_guard lock(mu_);
        require_live(p);
        if (p.empty()) {
            return;
        }
        const auto keys = unique_keys(p);
        auto next = remove_prefix_cols(*p_, keys, "cwd|");
        std::vector<Key> cols(keys.size(), indicator("cwd", dir));
        commit_p(ewise_add(next, ones(keys, cols, s_)));
    }

    /// F += Fd + I(f, open|1); returns the row ids f of Fd.
    std::vector<FileId> open(const AssociativeArray& fragment) {
        std::lock_guard lock(mu_);
        return open_locked(fragment);
    }

    /// F -= I(f, open|1). Files that are not open are ignored.
    void close(std::span<const FileId> f) {
        std::lock_guard lock(mu_);
        close_locked(f);
    }

    /// I(f) F.
    AssociativeArray fstat(std::span<const FileId> f) const {
        auto files_snapshot = files();
        return array_mult(identity(unique_keys(f), s_), *files_snapshot);
    }

    /// F += I(fd, f) F with fresh ids fd; returns fd.
    std::vector<FileId> dup(std::span<const FileId> f) {
        std::lock_guard lock(mu_);
        for (FileId id : f) {
            if (!f_->has_row(Key{id})) {
                throw NoSuchFileError("dup: no such file " + std::to_string(id));
            }
        }
        if (f.empty()) {
            return {};
        }
        const auto fresh = fids_.allocate(f.size());
        commit_f(ewise_add(*f_, array_mult(ones(to_keys(fresh), to_keys(f), s_), *f_)));
        return fresh;
    }

    /// F += Fd.
    void link(const AssociativeArray& fragment) {
        std::lock_guard lock(mu_);
        reserve_file_rows(fragment);
        commit_f(ewise_add(*f_, fragment));
    }

    /// F -= Fd (structural removal of Fd's coordinates).
    void unlink(const AssociativeArray& fragment) {
        std::lock_guard lock(mu_);
        commit_f(remove(*f_, fragment));
    }

    /// close(open(Fd)) with Fd tagged kind|<kind>; returns the created ids.
    std::vector<FileId> create_file_objects(FileKind kind, const AssociativeArray& fragment) {
        std::lock_guard lock(mu_);
        if (fragment.empty()) {
            return {};
        }
        const auto rows = row_keys(fragment);
        std::vector<Key> kind_cols(rows.size(), indicator("kind", to_string(kind)));
        const auto ids = open_locked(ewise_add(fragment, ones(rows, kind_cols, s_)));
        close_locked(ids);
        return ids;
    }

    std::vector<FileId> mkdir(const AssociativeArray& fragment) {
        return create_file_objects(FileKind::directory, fragment);
    }
    std::vector<FileId> mknod(const AssociativeArray& fragment) {
        return create_file_objects(FileKind::device_node, fragment);
    }
    std::vector<FileId> pipe(const AssociativeArray& fragment) {
        return create_file_objects(FileKind::pipe, fragment);
    }

    /**
     * exec: opens Fd, drops the instr|* columns of rows p, then
     * P += I(p, f) Fd, pairing p[i] with the i-th sorted row of Fd.
     */
    void exec(std::span<const Pid> p, const AssociativeArray& fragment) {
        std::lock_guard lock(mu_);
        if (p.size() != fragment.row_count()) {
            throw ArityError("exec: " + std::to_string(p.size()) + " processes but " +
                             std::to_string(fragment.row_count()) + " file rows");
        }
        require_live(p);
        const auto ids = open_locked(fragment);
        if (p.empty()) {
            return;
        }
        const auto keys = to_keys(p);
        auto next = remove_prefix_cols(*p_, keys, "instr|");
        commit_p(ewise_add(next, array_mult(identity_pairs(keys, to_keys(ids), s_), fragment)));
    }

    /// A_buf = I(row) A_f I(col).
    AssociativeArray read_file(FileId f, const KeyPattern& rows, const KeyPattern& cols) const {
        std::lock_guard lock(mu_);
        auto it = contents_.find(f);
        if (it == contents_.end()) {
            if (!f_->has_row(Key{f})) {
                throw NoSuchFileError("read: no such file " + std::to_string(f));
            }
            return AssociativeArray(s_);
        }
        return select(it->second, rows, cols);
    }

    /// A_f += I(row) A_buf I(col). A file listed in F but never written starts empty.
    void write_file(FileId f, const AssociativeArray& buf, const KeyPattern& rows, const KeyPattern& cols) {
        std::lock_guard lock(mu_);
        auto it = contents_.find(f);
        if (it == contents_.end()) {
            if (!f_->has_row(Key{f})) {
                throw NoSuchFileError("write: no such file " + std::to_string(f));
            }
            it = contents_.emplace(f, AssociativeArray(buf.semiring())).first;
        }
        it->second = ewise_add(it->second, select(buf, rows, cols));
    }

    /// Removes parent|x and child|x indicators naming processes no longer in P.
    std::size_t collect_dangling() {
        std::lock_guard lock(mu_);
        std::vector<Key> rows, cols;
        p_->for_each([&](const Key& r, const Key& c, const Value&) {
            const auto* s = std::get_if<std::string>(&c);
            if (s == nullptr) {
                return;
            }
            std::string_view id_text;
            if (s->starts_with("parent|")) {
                id_text = std::string_view(*s).substr(7);
            } else if (s->starts_with("child|")) {
                id_text = std::string_view(*s).substr(6);
            } else {
                return;
            }
            std::int64_t id = 0;
            if (parse_canonical_int(id_text, id) && !p_->has_row(Key{id})) {
                rows.push_back(r);
                cols.push_back(c);
            }
        });
        if (!rows.empty()) {
            commit_p(remove(*p_, ones(rows, cols, s_)));
        }
        return rows.size();
    }

private:
    static std::int64_t require_id(const Key& k, const char* what) {
        const auto* id = std::get_if<std::int64_t>(&k);
        if (id == nullptr) {
            throw ArgumentError(std::string(what) + " table rows must be integer ids, got '" + to_string(k) + "'");
        }
        return *id;
    }

    static std::vector<Pid> to_pids(const std::vector<Key>& keys) {
        std::vector<Pid> out;
        out.reserve(keys.size());
        for (const auto& k : keys) {
            out.push_back(std::get<std::int64_t>(k));
        }
        return out;
    }

    static std::vector<Pid> unique_pids(std::span<const Pid> p) {
        std::vector<Pid> out(p.begin(), p.end());
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    static std::vector<Key> unique_keys(std::span<const std::int64_t> ids) { return to_keys(unique_pids(ids)); }

    void require_live(std::span<const Pid> p) const {
        for (Pid pid : p) {
            if (!p_->has_row(Key{pid})) {
                throw NoSuchProcessError("no such process " + std::to_string(pid));
            }
        }
    }

    AssociativeArray numeric_column(std::span<const Pid> p, const char* field, std::int64_t n) const {
        const auto keys = to_keys(p);
        std::vector<Key> cols(keys.size(), Key{field});
        return construct(keys, cols, Value{n}, s_);
    }

    AssociativeArray remove_prefix_cols(const AssociativeArray& table, const std::vector<Key>& rows,
                                        const char* prefix) const {
        const auto cols = col_keys(table);
        const auto hit = array_mult(array_mult(identity(unique_keys(to_pids(rows)), s_), table),
                                    selector(KeyPattern::prefix(prefix), cols, s_));
        return remove(table, hit);
    }

    void remove_rows(std::span<const Pid> p) {
        std::lock_guard lock(mu_);
        if (p.empty()) {
            return;
        }
        commit_p(remove(*p_, array_mult(identity(unique_keys(p), s_), *p_)));
    }

    void reserve_file_rows(const AssociativeArray& fragment) {
        for (const auto& r : fragment.rows()) {
            fids_.reserve(require_id(r, "file"));
        }
    }

    std::vector<FileId> open_locked(const AssociativeArray& fragment) {
        reserve_file_rows(fragment);
        const auto rows = row_keys(fragment);
        std::vector<Key> open_cols(rows.size(), indicator("open", 1));
        commit_f(ewise_add(*f_, ewise_add(fragment, ones(rows, open_cols, s_))));
        return to_pids(rows);
    }

    void close_locked(std::span<const FileId> f) {
        if (f.empty()) {
            return;
        }
        const auto keys = to_keys(f);
        std::vector<Key> open_cols(keys.size(), indicator("open", 1));
        commit_f(remove(*f_, ones(keys, open_cols, s_)));
    }

    AssociativeArray saturate(const AssociativeArray& t) const {
        return transform(t, [&](const Key&, const Key& c, const Value& v) -> Value {
            return is_indicator(c) ? s_.one() : v;
        });
    }

    void commit_p(const AssociativeArray& next) { p_ = std::make_shared<const AssociativeArray>(saturate(next)); }
    void commit_f(const AssociativeArray& next) { f_ = std::make_shared<const AssociativeArray>(saturate(next)); }

    Options opts_;
    Semiring s_;
    mutable std::mutex mu_;
    std::shared_ptr<const AssociativeArray> p_;
    std::shared_ptr<const AssociativeArray> f_;
    std::map<FileId, AssociativeArray> contents_;
    IdAllocator pids_;
    IdAllocator fids_;
};

} // namespace rosa
