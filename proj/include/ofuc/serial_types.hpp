#pragma once

// Serial data types: automata (states, initial state, operations, responses,
// total transition function) replicated by the universal constructions.

#include <ofuc/history.hpp>

#include <concepts>
#include <cstdint>
#include <deque>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace ofuc {

template <typename T>
concept SerialType = requires(const T& type, const typename T::State& s, const typename T::Op& op, const Bytes& b,
                              const typename T::Response& r, const json& j, const std::string& name) {
    { type.initial() } -> std::same_as<typename T::State>;
    { type.apply(s, op) } -> std::same_as<std::pair<typename T::State, typename T::Response>>;
    { type.encode_state(s) } -> std::same_as<Bytes>;
    { type.decode_state(b) } -> std::same_as<typename T::State>;
    { type.op_name(op) } -> std::convertible_to<std::string>;
    { type.op_args(op) } -> std::same_as<json>;
    { type.parse_op(name, j) } -> std::same_as<typename T::Op>;
    { type.response_json(r) } -> std::same_as<json>;
};

// Operation shape shared by the built-in types: a name and integer arguments.
struct OpCall {
    std::string name;
    std::vector<std::int64_t> args;

    friend bool operator==(const OpCall&, const OpCall&) = default;
};

// "cas 0 1" -> {cas, [0, 1]}
inline OpCall parse_op_text(const std::string& text)
{
    std::istringstream in(text);
    OpCall op;
    in >> op.name;
    std::int64_t v;
    while (in >> v) {
        op.args.push_back(v);
    }
    if (op.name.empty()) {
        throw std::invalid_argument("empty operation");
    }
    return op;
}

namespace detail {

inline void expect_arity(const OpCall& op, std::size_t n)
{
    if (op.args.size() != n) {
        throw std::invalid_argument(op.name + ": expected " + std::to_string(n) + " argument(s)");
    }
}

struct OpCallCodec {
    using Op = OpCall;
    using Response = json;

    std::string op_name(const Op& op) const { return op.name; }
    json op_args(const Op& op) const { return json(op.args); }
    Op parse_op(const std::string& name, const json& args) const
    {
        Op op{name, {}};
        if (args.is_array()) {
            op.args = args.get<std::vector<std::int64_t>>();
        }
        return op;
    }
    json response_json(const Response& r) const { return r; }
};

struct IntStateCodec {
    Bytes encode_state(std::int64_t s) const { return std::to_string(s); }
    std::int64_t decode_state(const Bytes& b) const { return std::stoll(b); }
};

}  // namespace detail

// inc -> null; read -> value.
struct CounterType : detail::OpCallCodec, detail::IntStateCodec {
    using State = std::int64_t;

    State initial() const { return 0; }

    std::pair<State, Response> apply(const State& s, const Op& op) const
    {
        if (op.name == "inc") {
            detail::expect_arity(op, 0);
            return {s + 1, nullptr};
        }
        if (op.name == "read") {
            detail::expect_arity(op, 0);
            return {s, s};
        }
        throw std::invalid_argument("counter: unknown op " + op.name);
    }
};

// write v -> null; read -> value.
struct RegisterType : detail::OpCallCodec, detail::IntStateCodec {
    using State = std::int64_t;

    State initial() const { return 0; }

    std::pair<State, Response> apply(const State& s, const Op& op) const
    {
        if (op.name == "write") {
            detail::expect_arity(op, 1);
            return {op.args[0], nullptr};
        }
        if (op.name == "read") {
            detail::expect_arity(op, 0);
            return {s, s};
        }
        throw std::invalid_argument("register: unknown op " + op.name);
    }
};

// cas u v -> true iff the state was u (and becomes v); read -> value.
struct CasType : detail::OpCallCodec, detail::IntStateCodec {
    using State = std::int64_t;

    State initial() const { return 0; }

    std::pair<State, Response> apply(const State& s, const Op& op) const
    {
        if (op.name == "cas") {
            detail::expect_arity(op, 2);
            if (s == op.args[0]) {
                return {op.args[1], true};
            }
            return {s, false};
        }
        if (op.name == "read") {
            detail::expect_arity(op, 0);
            return {s, s};
        }
        throw std::invalid_argument("cas: unknown op " + op.name);
    }
};

// enq v -> null; deq -> head or null when empty.
struct QueueType : detail::OpCallCodec {
    using State = std::deque<std::int64_t>;

    State initial() const { return {}; }

    std::pair<State, Response> apply(const State& s, const Op& op) const
    {
        if (op.name == "enq") {
            detail::expect_arity(op, 1);
            State next = s;
            next.push_back(op.args[0]);
            return {std::move(next), nullptr};
        }
        if (op.name == "deq") {
            detail::expect_arity(op, 0);
            if (s.empty()) {
                return {s, nullptr};
            }
            State next = s;
            const auto head = next.front();
            next.pop_front();
            return {std::move(next), head};
        }
        throw std::invalid_argument("queue: unknown op " + op.name);
    }

    Bytes encode_state(const State& s) const { return json(std::vector<std::int64_t>(s.begin(), s.end())).dump(); }

    State decode_state(const Bytes& b) const
    {
        const auto v = json::parse(b).get<std::vector<std::int64_t>>();
        return State(v.begin(), v.end());
    }
};

static_assert(SerialType<CounterType>);
static_assert(SerialType<RegisterType>);
static_assert(SerialType<CasType>);
static_assert(SerialType<QueueType>);

// Calls f with the built-in type registered under `name`.
template <typename F>
decltype(auto) with_builtin_type(const std::string& name, F&& f)
{
    if (name == "counter") {
        return f(CounterType{});
    }
    if (name == "register") {
        return f(RegisterType{});
    }
    if (name == "cas") {
        return f(CasType{});
    }
    if (name == "queue") {
        return f(QueueType{});
    }
    throw std::invalid_argument("unknown object type: " + name);
}

}  // namespace ofuc
