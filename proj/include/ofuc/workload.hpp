#pragma once

// Process bodies issuing recorded operations on a consensus object or on a
// universal-construction replica of a built-in serial type.

#include <ofuc/checkers.hpp>
#include <ofuc/universal.hpp>

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace ofuc {

enum class Construction { consensus, runiv, buniv };

inline Construction parse_construction(const std::string& s)
{
    if (s == "consensus") {
        return Construction::consensus;
    }
    if (s == "runiv") {
        return Construction::runiv;
    }
    if (s == "buniv") {
        return Construction::buniv;
    }
    throw std::invalid_argument("unknown construction: " + s);
}

inline const char* to_string(Construction c)
{
    switch (c) {
    case Construction::consensus:
        return "consensus";
    case Construction::runiv:
        return "runiv";
    default:
        return "buniv";
    }
}

struct Workload {
    Construction construction = Construction::buniv;
    // Built-in serial type (counter, register, cas, queue); unused for consensus.
    std::string type = "cas";
    std::string object = "o";
    // Operation texts per process id, e.g. "cas 0 1" or "propose a".
    std::map<std::uint32_t, std::vector<std::string>> ops;
    UniversalLimits limits;
};

namespace detail {

inline Task<void> run_consensus_ops(Proc& p, std::string object, std::vector<std::string> ops, ConsensusLimits limits)
{
    for (const auto& text : ops) {
        std::istringstream in(text);
        std::string name;
        std::string value;
        in >> name >> value;
        if (name != "propose" || value.empty()) {
            throw std::invalid_argument("consensus: expected 'propose <value>', got '" + text + "'");
        }
        const auto token = p.begin_op(object, "propose", value);
        const auto decision = co_await propose(Mem{p}, object, value, limits);
        if (!decision) {
            p.abandon_op(token);
            co_return;
        }
        p.end_op(token, *decision);
    }
}

template <SerialType T>
Task<void> run_universal_ops(Proc& p, Construction c, std::string object, T type, std::vector<std::string> ops,
                             UniversalLimits limits)
{
    for (const auto& text : ops) {
        const OpCall call = parse_op_text(text);
        const json call_args(call.args);
        const auto op = type.parse_op(call.name, call_args);
        const auto token = p.begin_op(object, type.op_name(op), type.op_args(op));
        std::optional<typename T::Response> r;
        if (c == Construction::runiv) {
            r = co_await invoke_runiv(Mem{p}, object, type, op, limits);
        } else {
            r = co_await invoke_buniv(Mem{p}, object, type, op, limits);
        }
        if (!r) {
            p.abandon_op(token);
            co_return;
        }
        p.end_op(token, type.response_json(*r));
    }
}

}  // namespace detail

// One body for all processes; process i runs w.ops[i] in order and stops at
// the first starved call.
inline Proc::Body workload_body(const Workload& w)
{
    return [w](Proc& p) -> Task<void> {
        const auto it = w.ops.find(p.id().value);
        const std::vector<std::string> mine = it == w.ops.end() ? std::vector<std::string>{} : it->second;
        if (w.construction == Construction::consensus) {
            co_await detail::run_consensus_ops(p, w.object, mine, w.limits.consensus);
            co_return;
        }
        co_await with_builtin_type(w.type, [&](auto type) {
            return detail::run_universal_ops(p, w.construction, w.object, type, mine, w.limits);
        });
    };
}

// The sequential model that histories of the workload's object must satisfy.
inline std::unique_ptr<Model> workload_model(const Workload& w)
{
    if (w.construction == Construction::consensus) {
        return std::make_unique<ConsensusModel>();
    }
    return with_builtin_type(w.type, [](auto type) -> std::unique_ptr<Model> {
        return std::make_unique<SerialModel<decltype(type)>>(type);
    });
}

}  // namespace ofuc
