#pragma once

// Splitter, adaptive store-collect map, and the grafarius object.

#include <ofuc/registers.hpp>

#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace ofuc {

// ---------------------------------------------------------------------------
// Splitter
//
// Owner-then-door protocol over two registers, X (last owner) and Y (door).
// A solo call costs exactly four accesses. `right` means the door was already
// closed, `down` means another caller overwrote X; both lose.

enum class SplitOutcome { stop, right, down };

inline Task<SplitOutcome> split_direction(Mem m, std::string name)
{
    const Bytes me = m.proc().id().str();
    co_await m.write(name + ":X", me);
    if (co_await m.read(name + ":Y", "0") == "1") {
        co_return SplitOutcome::right;
    }
    co_await m.write(name + ":Y", "1");
    if (co_await m.read(name + ":X", kBottom) == me) {
        co_return SplitOutcome::stop;
    }
    co_return SplitOutcome::down;
}

inline Task<bool> split(Mem m, std::string name)
{
    co_return (co_await split_direction(m, std::move(name))) == SplitOutcome::stop;
}

// ---------------------------------------------------------------------------
// Adaptive collect map L : Π → values.
//
// A process registers once by walking a grid of splitters from cell (0,0)
// (right → column+1, down → row+1) until it stops at a cell it then owns.
// Every cell a process passes through has its door closed, so the closed
// cells form a region reachable from the origin; collect walks that region
// breadth-first and reads the value slot of each closed cell.

struct Cell {
    std::uint32_t row = 0;
    std::uint32_t col = 0;

    friend auto operator<=>(const Cell&, const Cell&) = default;
};

inline std::string cell_name(const std::string& map, Cell c)
{
    return map + ":cell:" + std::to_string(c.row) + ":" + std::to_string(c.col);
}

inline Task<void> collect_store(Mem m, std::string map, Bytes value)
{
    if (is_bottom(value)) {
        throw std::invalid_argument("collect_store: empty value");
    }
    auto& slot = m.proc().local<std::optional<Cell>>(m.scope(map) + "@slot");
    if (!slot) {
        Cell c;
        for (;;) {
            const auto out = co_await split_direction(m, cell_name(map, c));
            if (out == SplitOutcome::stop) {
                break;
            }
            if (out == SplitOutcome::right) {
                ++c.col;
            } else {
                ++c.row;
            }
        }
        slot = c;
    }
    co_await m.write(cell_name(map, *slot) + ":V", std::move(value));
}

// Collect: every slot read once, atomically per slot (not a snapshot).
inline Task<std::vector<Bytes>> collect(Mem m, std::string map)
{
    std::vector<Bytes> values;
    std::set<Cell> seen;
    std::vector<Cell> frontier{Cell{}};
    seen.insert(Cell{});
    for (std::size_t i = 0; i < frontier.size(); ++i) {
        const Cell c = frontier[i];
        const auto name = cell_name(map, c);
        if (co_await m.read(name + ":Y", "0") != "1") {
            continue;
        }
        auto v = co_await m.read(name + ":V", kBottom);
        if (!is_bottom(v)) {
            values.push_back(std::move(v));
        }
        for (Cell next : {Cell{c.row, c.col + 1}, Cell{c.row + 1, c.col}}) {
            if (seen.insert(next).second) {
                frontier.push_back(next);
            }
        }
    }
    co_return values;
}

inline Task<std::set<std::uint64_t>> collect_codomain(Mem m, std::string map)
{
    std::set<std::uint64_t> out;
    for (const auto& v : co_await collect(m, std::move(map))) {
        out.insert(decode_nat(v));
    }
    co_return out;
}

// ---------------------------------------------------------------------------
// Grafarius
//
// Registers: a splitter, collision flag c, decision d. The winner publishes
// its proposal in d before checking c; a loser raises c before reading d, and
// fills d with its own proposal when it finds it empty, so d ≠ ⊥ once any
// call has returned.

enum class Flag { adopt, commit };

struct AdoptCommit {
    Flag flag = Flag::adopt;
    Bytes value;

    friend bool operator==(const AdoptCommit&, const AdoptCommit&) = default;
};

inline const char* to_string(Flag f) { return f == Flag::commit ? "commit" : "adopt"; }

inline Task<AdoptCommit> adopt_commit(Mem m, std::string name, Bytes u)
{
    if (is_bottom(u)) {
        throw std::invalid_argument("adopt_commit: empty proposal");
    }
    if (!co_await split(m, name + ":split")) {
        co_await m.write(name + ":c", "1");
        auto d = co_await m.read(name + ":d", kBottom);
        if (!is_bottom(d)) {
            co_return AdoptCommit{Flag::adopt, std::move(d)};
        }
        co_await m.write(name + ":d", u);
        co_return AdoptCommit{Flag::adopt, std::move(u)};
    }
    co_await m.write(name + ":d", u);
    const auto c = co_await m.read(name + ":c", "0");
    co_return AdoptCommit{c == "1" ? Flag::adopt : Flag::commit, std::move(u)};
}

inline Task<Bytes> grafarius_decision(Mem m, std::string name) { co_return co_await m.read(name + ":d", kBottom); }

}  // namespace ofuc
