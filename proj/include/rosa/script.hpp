#pragma once

#include "rosa/kernel.hpp"
#include "rosa/tsv.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

// Line-oriented kernel scripts: one command per line, `#` starts a comment,
// blank lines are skipped. A whole script is parsed before anything runs.
//
//   spawn [memory]               getpid
//   fork <pid>...                forkn <fanout> <pid>...
//   merge <pid,pid,...>...       exit <pid>...     kill <pid>...
//   wait <pid>...                sleep <pid> <n>   sbrk <pid> <n>
//   chdir <pid> <dir>            exec <pid> <instr>...
//   open <col[=num]>...          close <fid>...    fstat <fid>...
//   dup <fid>...                 link <fid> <col[=num]>...
//   unlink <fid> <col>...        mkdir <path>      mknod <path>   pipe [name]
//   write <fid> <row> <col> <num>
//   read <fid> <rowpattern> <colpattern>
//   dump P|F|A:<fid> <path>      gc

namespace rosa::script {

/// A kernel call inside a script failed; carries the line and command text.
class CommandError : public Error {
public:
    CommandError(std::size_t line, const std::string& command, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + command + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

struct Command {
    std::size_t line = 0;
    std::string text;
    std::function<void(Kernel&, std::ostream&)> run;
};

namespace detail {

inline std::vector<std::string> split_ws(std::string_view line) {
    std::vector<std::string> out;
    std::istringstream in{std::string(line)};
    std::string tok;
    while (in >> tok) {
        out.push_back(tok);
    }
    return out;
}

inline std::int64_t parse_int(std::string_view tok, std::size_t line, const char* what) {
    std::int64_t v = 0;
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size()) {
        throw ParseError(line, std::string("expected ") + what + ", got '" + std::string(tok) + "'");
    }
    return v;
}

inline std::vector<std::int64_t> parse_ids(std::span<const std::string> toks, std::size_t line) {
    std::vector<std::int64_t> out;
    for (const auto& t : toks) {
        out.push_back(parse_int(t, line, "an integer id"));
    }
    return out;
}

struct ColumnSpec {
    Key col;
    Value val;
};

/// "name" → (name, 1); "name=42" → (name, 42) when the part after '=' is numeric.
inline ColumnSpec parse_column(const std::string& tok) {
    const auto eq = tok.rfind('=');
    if (eq != std::string::npos && eq > 0) {
        Value v;
        if (parse_number(std::string_view(tok).substr(eq + 1), v)) {
            return {Key{tok.substr(0, eq)}, v};
        }
    }
    return {Key{tok}, Value{std::int64_t{1}}};
}

inline AssociativeArray fragment(FileId id, std::span<const ColumnSpec> cols, const Semiring& s) {
    std::vector<Key> rows(cols.size(), Key{id});
    std::vector<Key> keys;
    std::vector<Value> vals;
    for (const auto& c : cols) {
        keys.push_back(c.col);
        vals.push_back(c.val);
    }
    return construct(rows, keys, vals, s);
}

inline std::string join(std::span<const std::int64_t> ids) {
    std::string out;
    for (auto id : ids) {
        if (!out.empty()) {
            out += ' ';
        }
        out += std::to_string(id);
    }
    return out.empty() ? "(none)" : out;
}

inline void print_triples(std::ostream& out, const AssociativeArray& a) {
    a.for_each([&](const Key& r, const Key& c, const Value& v) {
        out << "  " << to_string(r) << '\t' << to_string(c) << '\t' << to_string(v) << '\n';
    });
}

inline void need(const std::vector<std::string>& tok, std::size_t min, std::size_t max, std::size_t line) {
    const std::size_t n = tok.size() - 1;
    if (n < min || n > max) {
        throw ParseError(line, "'" + tok[0] + "' takes " +
                                   (min == max ? std::to_string(min)
                                               : std::to_string(min) + (max == SIZE_MAX ? "+" : "-" + std::to_string(max))) +
                                   " argument(s), got " + std::to_string(n));
    }
}

} // namespace detail

/**
 * @brief Parses a script into runnable commands.
 * @throws ParseError naming the line of the first malformed command.
 */
inline std::vector<Command> parse(std::istream& in) {
    using namespace detail;
    std::vector<Command> out;
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string_view text(raw);
        if (auto hash = text.find('#'); hash != std::string_view::npos) {
            text = text.substr(0, hash);
        }
        auto tok = split_ws(text);
        if (tok.empty()) {
            continue;
        }
        const std::string& name = tok[0];
        const std::span<const std::string> args(tok.data() + 1, tok.size() - 1);
        Command cmd{line, std::string(text.substr(text.find_first_not_of(" \t"))), {}};
        while (!cmd.text.empty() && (cmd.text.back() == ' ' || cmd.text.back() == '\t' || cmd.text.back() == '\r')) {
            cmd.text.pop_back();
        }

        if (name == "spawn") {
            need(tok, 0, 1, line);
            const auto mem = args.empty() ? 0 : parse_int(args[0], line, "a memory size");
            cmd.run = [mem](Kernel& k, std::ostream& o) { o << k.spawn(mem); };
        } else if (name == "fork") {
            need(tok, 1, SIZE_MAX, line);
            cmd.run = [p = parse_ids(args, line)](Kernel& k, std::ostream& o) { o << join(k.fork(p)); };
        } else if (name == "forkn") {
            need(tok, 2, SIZE_MAX, line);
            const auto fanout = parse_int(args[0], line, "a fanout");
            if (fanout < 1) {
                throw ParseError(line, "fanout must be positive");
            }
            cmd.run = [fanout, p = parse_ids(args.subspan(1), line)](Kernel& k, std::ostream& o) {
                o << join(k.fork(p, static_cast<std::size_t>(fanout)));
            };
        } else if (name == "merge") {
            need(tok, 1, SIZE_MAX, line);
            std::vector<std::vector<Pid>> groups;
            for (const auto& g : args) {
                std::vector<Pid> members;
                std::size_t start = 0;
                while (start <= g.size()) {
                    auto end = g.find(',', start);
                    if (end == std::string::npos) {
                        end = g.size();
                    }
                    members.push_back(parse_int(std::string_view(g).substr(start, end - start), line, "a pid"));
                    start = end + 1;
                }
                groups.push_back(std::move(members));
            }
            cmd.run = [groups](Kernel& k, std::ostream& o) { o << join(k.merge_fork(groups)); };
        } else if (name == "exit" || name == "kill") {
            need(tok, 1, SIZE_MAX, line);
            const bool is_exit = name == "exit";
            cmd.run = [is_exit, p = parse_ids(args, line)](Kernel& k, std::ostream& o) {
                is_exit ? k.exit(p) : k.kill(p);
                o << "ok";
            };
        } else if (name == "getpid") {
            need(tok, 0, 0, line);
            cmd.run = [](Kernel& k, std::ostream& o) { o << join(k.getpid()); };
        } else if (name == "wait") {
            need(tok, 1, SIZE_MAX, line);
            cmd.run = [p = parse_ids(args, line)](Kernel& k, std::ostream& o) { o << join(k.wait_children(p, 1)); };
        } else if (name == "sleep" || name == "sbrk") {
            need(tok, 2, 2, line);
            const Pid pid = parse_int(args[0], line, "a pid");
            const auto n = parse_int(args[1], line, "an integer amount");
            const bool is_sleep = name == "sleep";
            cmd.run = [is_sleep, pid, n](Kernel& k, std::ostream& o) {
                const Pid p[] = {pid};
                is_sleep ? k.sleep(p, n) : k.sbrk(p, n);
                o << "ok";
            };
        } else if (name == "chdir") {
            need(tok, 2, 2, line);
            cmd.run = [pid = parse_int(args[0], line, "a pid"), dir = args[1]](Kernel& k, std::ostream& o) {
                const Pid p[] = {pid};
                k.chdir(p, dir);
                o << "ok";
            };
        } else if (name == "exec") {
            need(tok, 2, SIZE_MAX, line);
            const Pid pid = parse_int(args[0], line, "a pid");
            std::vector<ColumnSpec> cols;
            for (const auto& instr : args.subspan(1)) {
                cols.push_back({indicator("instr", instr), Value{std::int64_t{1}}});
            }
            cmd.run = [pid, cols](Kernel& k, std::ostream& o) {
                const FileId f = k.allocfile(1).front();
                const Pid p[] = {pid};
                k.exec(p, fragment(f, cols, k.semiring()));
                o << "file " << f;
            };
        } else if (name == "open") {
            need(tok, 1, SIZE_MAX, line);
            std::vector<ColumnSpec> cols;
            for (const auto& c : args) {
                cols.push_back(parse_column(c));
            }
            cmd.run = [cols](Kernel& k, std::ostream& o) {
                const FileId f = k.allocfile(1).front();
                o << join(k.open(fragment(f, cols, k.semiring())));
            };
        } else if (name == "close") {
            need(tok, 1, SIZE_MAX, line);
            cmd.run = [f = parse_ids(args, line)](Kernel& k, std::ostream& o) {
                k.close(f);
                o << "ok";
            };
        } else if (name == "fstat") {
            need(tok, 1, SIZE_MAX, line);
            cmd.run = [f = parse_ids(args, line)](Kernel& k, std::ostream& o) {
                const auto st = k.fstat(f);
                o << st.nnz() << " entries\n";
                print_triples(o, st);
            };
        } else if (name == "dup") {
            need(tok, 1, SIZE_MAX, line);
            cmd.run = [f = parse_ids(args, line)](Kernel& k, std::ostream& o) { o << join(k.dup(f)); };
        } else if (name == "link" || name == "unlink") {
            need(tok, 2, SIZE_MAX, line);
            const FileId f = parse_int(args[0], line, "a file id");
            std::vector<ColumnSpec> cols;
            for (const auto& c : args.subspan(1)) {
                cols.push_back(parse_column(c));
            }
            const bool is_link = name == "link";
            cmd.run = [is_link, f, cols](Kernel& k, std::ostream& o) {
                const auto frag = fragment(f, cols, k.semiring());
                is_link ? k.link(frag) : k.unlink(frag);
                o << "ok";
            };
        } else if (name == "mkdir" || name == "mknod" || name == "pipe") {
            const FileKind kind = name == "mkdir" ? FileKind::directory
                                  : name == "mknod" ? FileKind::device_node
                                                    : FileKind::pipe;
            if (kind == FileKind::pipe) {
                need(tok, 0, 1, line);
            } else {
                need(tok, 1, 1, line);
            }
            const std::string path = args.empty() ? std::string() : args[0];
            cmd.run = [kind, path](Kernel& k, std::ostream& o) {
                const FileId f = k.allocfile(1).front();
                const std::string label = path.empty() ? "pipe:" + std::to_string(f) : path;
                const ColumnSpec col{indicator("path", label), Value{std::int64_t{1}}};
                o << join(k.create_file_objects(kind, fragment(f, std::span(&col, 1), k.semiring())));
            };
        } else if (name == "write") {
            need(tok, 4, 4, line);
            const FileId f = parse_int(args[0], line, "a file id");
            Value v;
            if (!parse_number(args[3], v)) {
                throw ParseError(line, "expected a number, got '" + args[3] + "'");
            }
            cmd.run = [f, r = parse_key(args[1]), c = parse_key(args[2]), v](Kernel& k, std::ostream& o) {
                const Key rows[] = {r};
                const Key cols[] = {c};
                const Value vals[] = {v};
                k.write_file(f, construct(rows, cols, vals, k.semiring()), KeyPattern::all(), KeyPattern::all());
                o << "ok";
            };
        } else if (name == "read") {
            need(tok, 3, 3, line);
            cmd.run = [f = parse_int(args[0], line, "a file id"), rp = KeyPattern::parse(args[1]),
                       cp = KeyPattern::parse(args[2])](Kernel& k, std::ostream& o) {
                const auto buf = k.read_file(f, rp, cp);
                o << buf.nnz() << " entries\n";
                print_triples(o, buf);
            };
        } else if (name == "dump") {
            need(tok, 2, 2, line);
            const std::string which = args[0];
            FileId fid = 0;
            if (which != "P" && which != "F") {
                if (!which.starts_with("A:")) {
                    throw ParseError(line, "dump target must be P, F or A:<fid>");
                }
                fid = parse_int(std::string_view(which).substr(2), line, "a file id");
            }
            cmd.run = [which, fid, path = args[1]](Kernel& k, std::ostream& o) {
                if (which == "P") {
                    save_tsv(*k.processes(), std::filesystem::path(path));
                } else if (which == "F") {
                    save_tsv(*k.files(), std::filesystem::path(path));
                } else {
                    auto a = k.contents(fid);
                    if (!a) {
                        throw NoSuchFileError("no contents for file " + std::to_string(fid));
                    }
                    save_tsv(*a, std::filesystem::path(path));
                }
                o << "wrote " << path;
            };
        } else if (name == "gc") {
            need(tok, 0, 0, line);
            cmd.run = [](Kernel& k, std::ostream& o) { o << k.collect_dangling() << " removed"; };
        } else {
            throw ParseError(line, "unknown command '" + name + "'");
        }
        out.push_back(std::move(cmd));
    }
    return out;
}

/**
 * @brief Runs commands in order, printing "<command> => <result>" per line.
 * @throws CommandError on the first failing kernel call.
 */
inline void execute(std::span<const Command> commands, Kernel& kernel, std::ostream& out) {
    for (const auto& cmd : commands) {
        std::ostringstream result;
        try {
            cmd.run(kernel, result);
        } catch (const Error& e) {
            throw CommandError(cmd.line, cmd.text, e.what());
        }
        std::string text = result.str();
        while (!text.empty() && text.back() == '\n') {
            text.pop_back();
        }
        out << cmd.text << " => " << text << '\n';
    }
}

inline void run(std::istream& in, Kernel& kernel, std::ostream& out) {
    const auto commands = parse(in);
    execute(commands, kernel, out);
}

} // namespace rosa::script
