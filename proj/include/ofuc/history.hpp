#pragma once

// Recorded histories: one Event per invocation or response, serialized as JSONL
// with the fields (seq, kind, proc, obj, op, args, res, epoch, steps).

#include <ofuc/types.hpp>

#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace ofuc {

using json = nlohmann::json;

enum class EventKind { invoke, response };

struct Event {
    std::uint64_t seq = 0;
    EventKind kind = EventKind::invoke;
    ProcessId proc;
    std::string obj;
    std::string op;
    json args;
    json res;
    std::optional<std::uint64_t> epoch;
    // Register accesses performed by the operation (0 on invocations).
    std::uint64_t steps = 0;
};

using History = std::vector<Event>;

inline json to_json(const Event& e)
{
    json j;
    j["seq"] = e.seq;
    j["kind"] = e.kind == EventKind::invoke ? "invoke" : "response";
    j["proc"] = e.proc.value;
    j["obj"] = e.obj;
    j["op"] = e.op;
    j["args"] = e.args;
    j["res"] = e.res;
    j["epoch"] = e.epoch ? json(*e.epoch) : json(nullptr);
    j["steps"] = e.steps;
    return j;
}

inline Event event_from_json(const json& j)
{
    Event e;
    e.seq = j.at("seq").get<std::uint64_t>();
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "invoke") {
        e.kind = EventKind::invoke;
    } else if (kind == "response") {
        e.kind = EventKind::response;
    } else {
        throw std::invalid_argument("bad event kind: " + kind);
    }
    e.proc = ProcessId{j.at("proc").get<std::uint32_t>()};
    e.obj = j.at("obj").get<std::string>();
    e.op = j.at("op").get<std::string>();
    e.args = j.value("args", json(nullptr));
    e.res = j.value("res", json(nullptr));
    if (j.contains("epoch") && !j.at("epoch").is_null()) {
        e.epoch = j.at("epoch").get<std::uint64_t>();
    }
    e.steps = j.value("steps", std::uint64_t{0});
    return e;
}

inline void write_jsonl(std::ostream& out, const History& h)
{
    for (const auto& e : h) {
        out << to_json(e).dump() << '\n';
    }
}

inline History read_jsonl(std::istream& in)
{
    History h;
    std::string line;
    std::uint64_t last = 0;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        Event e = event_from_json(json::parse(line));
        if (!first && e.seq <= last) {
            throw std::invalid_argument("history seq must be strictly increasing");
        }
        first = false;
        last = e.seq;
        h.push_back(std::move(e));
    }
    return h;
}

// A matched invocation/response pair. `response` is empty for pending calls.
struct Operation {
    ProcessId proc;
    std::string obj;
    std::string op;
    json args;
    std::optional<json> res;
    std::uint64_t invoke_seq = 0;
    std::optional<std::uint64_t> response_seq;
    std::optional<std::uint64_t> epoch;
    std::uint64_t steps = 0;

    bool complete() const { return response_seq.has_value(); }

    // Real-time order: this operation responded before `other` was invoked.
    bool precedes(const Operation& other) const { return response_seq && *response_seq < other.invoke_seq; }
};

// Pairs events of the given object (all objects when `obj` is empty). Calls of a
// process on one object never overlap, so a response closes the latest open
// invocation of the same (process, object).
inline std::vector<Operation> operations(const History& h, const std::string& obj = {})
{
    std::vector<Operation> ops;
    std::map<std::pair<ProcessId, std::string>, std::size_t> open;
    for (const auto& e : h) {
        if (!obj.empty() && e.obj != obj) {
            continue;
        }
        const auto key = std::make_pair(e.proc, e.obj);
        if (e.kind == EventKind::invoke) {
            if (open.contains(key)) {
                throw std::invalid_argument("overlapping calls by " + e.proc.str() + " on " + e.obj);
            }
            Operation op;
            op.proc = e.proc;
            op.obj = e.obj;
            op.op = e.op;
            op.args = e.args;
            op.invoke_seq = e.seq;
            op.epoch = e.epoch;
            open[key] = ops.size();
            ops.push_back(std::move(op));
        } else {
            auto it = open.find(key);
            if (it == open.end()) {
                throw std::invalid_argument("response without invocation by " + e.proc.str() + " on " + e.obj);
            }
            auto& op = ops[it->second];
            op.res = e.res;
            op.response_seq = e.seq;
            op.steps = e.steps;
            if (e.epoch) {
                op.epoch = e.epoch;
            }
            open.erase(it);
        }
    }
    return ops;
}

// Rebuilds an event history from operations (used for derived sequential histories).
inline History history_of(const std::vector<Operation>& ops)
{
    std::vector<Event> events;
    for (const auto& op : ops) {
        Event inv;
        inv.seq = op.invoke_seq;
        inv.kind = EventKind::invoke;
        inv.proc = op.proc;
        inv.obj = op.obj;
        inv.op = op.op;
        inv.args = op.args;
        inv.epoch = op.epoch;
        events.push_back(inv);
        if (op.response_seq) {
            Event res = inv;
            res.seq = *op.response_seq;
            res.kind = EventKind::response;
            res.args = json(nullptr);
            res.res = *op.res;
            res.steps = op.steps;
            events.push_back(std::move(res));
        }
    }
    std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) { return a.seq < b.seq; });
    return events;
}

inline std::string fingerprint(const History& h)
{
    std::ostringstream out;
    for (const auto& e : h) {
        out << (e.kind == EventKind::invoke ? 'i' : 'r') << e.proc.value << '|' << e.obj << '|' << e.op << '|'
            << e.args.dump() << '|' << e.res.dump() << ';';
    }
    return out.str();
}

}  // namespace ofuc
