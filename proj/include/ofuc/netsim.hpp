#pragma once

// Asynchronous message passing with crash-stop servers, and the register
// substrate on top of it: every register access a process makes becomes an
// ABD read or write against majority quorums.
//
// Single-threaded discrete-event loop. Events are ordered by (time, insertion
// order), so a run is a pure function of the configuration and seed.

#include <ofuc/registers.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <random>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

namespace ofuc {

// Register contents are raw bytes; histories store them as JSON strings.
inline std::string printable(const Bytes& b)
{
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    for (unsigned char c : b) {
        if (c >= 0x20 && c < 0x7f && c != '\\') {
            out += static_cast<char>(c);
        } else {
            out += "\\x";
            out += kHex[c >> 4];
            out += kHex[c & 0xf];
        }
    }
    return out;
}

struct Tag {
    std::uint64_t seq = 0;
    std::uint32_t writer = 0;

    friend auto operator<=>(const Tag&, const Tag&) = default;
};

struct NetConfig {
    std::uint32_t n_servers = 3;
    std::uint64_t seed = 1;
    // Mean one-way message delay (exponential); 0 delivers in send order.
    double mean_delay = 1.0;

    std::uint32_t quorum() const { return n_servers / 2 + 1; }
    std::uint32_t f_max() const { return (n_servers + 1) / 2 - 1; }
};

struct Message {
    enum class Kind { read_query, read_reply, write_query, write_ack };

    Kind kind = Kind::read_query;
    RegisterId key;
    Tag tag;
    Bytes value;
    // Initial value of the register, for servers that have not seen it yet.
    Bytes init;
    std::uint32_t client = 0;
    std::uint32_t server = 0;
    std::uint64_t nonce = 0;
};

struct NetStats {
    std::uint64_t delivered = 0;
    std::uint64_t dropped = 0;
    std::uint64_t register_ops = 0;
};

class NetSim {
public:
    explicit NetSim(NetConfig cfg) : cfg_{cfg}, rng_{cfg.seed}, servers_(cfg.n_servers), crashed_(cfg.n_servers, false)
    {
        if (cfg.n_servers == 0) {
            throw std::invalid_argument("netsim: need at least one server");
        }
        reg_recorder_ = std::make_unique<Recorder>();
    }

    NetSim(const NetSim&) = delete;
    NetSim& operator=(const NetSim&) = delete;

    const NetConfig& config() const { return cfg_; }
    Recorder& recorder() { return app_recorder_; }
    const History& history() const { return app_recorder_.events; }
    const History& register_history() const { return reg_recorder_->events; }
    const NetStats& stats() const { return stats_; }
    double now() const { return now_; }

    // Adds a process running `body`. Operation i (counted by begin_op calls)
    // does not start before start_times[i]; later operations start as soon
    // as the previous one returns.
    Proc& add_process(Proc::Body body, std::vector<double> start_times = {}, Hooks* hooks = nullptr)
    {
        const ProcessId id{static_cast<std::uint32_t>(clients_.size())};
        auto c = std::make_unique<Client>();
        c->proc = std::make_unique<Proc>(id, &app_recorder_, hooks);
        c->start_times = std::move(start_times);
        c->body = std::move(body);
        clients_.push_back(std::move(c));
        push(0.0, Pending::Kind::wake, id.value);
        return *clients_.back()->proc;
    }

    void crash_at(double time, std::uint32_t server)
    {
        if (server >= cfg_.n_servers) {
            throw std::invalid_argument("netsim: no server " + std::to_string(server));
        }
        push(time, Pending::Kind::crash, server);
    }

    // Processes one event; false when nothing is left.
    bool step()
    {
        if (queue_.empty()) {
            return false;
        }
        Pending ev = queue_.top();
        queue_.pop();
        now_ = std::max(now_, ev.time);
        switch (ev.kind) {
        case Pending::Kind::crash:
            crashed_[ev.target] = true;
            break;
        case Pending::Kind::wake:
            advance(*clients_[ev.target]);
            break;
        case Pending::Kind::deliver:
            deliver(messages_.at(ev.message));
            messages_.erase(ev.message);
            break;
        }
        return true;
    }

    // Runs until quiescent or past max_time; true iff every process finished.
    bool run(double max_time = 1e12)
    {
        while (!queue_.empty() && queue_.top().time <= max_time) {
            step();
        }
        return all_finished();
    }

    bool all_finished() const
    {
        for (const auto& c : clients_) {
            if (!c->started || !c->proc->finished()) {
                return false;
            }
        }
        return true;
    }

    std::size_t crashed() const { return static_cast<std::size_t>(std::count(crashed_.begin(), crashed_.end(), true)); }

    Proc& proc(ProcessId id) { return *clients_.at(id.value)->proc; }
    std::size_t processes() const { return clients_.size(); }

    // Registers held by one server (key -> tag, value).
    const std::unordered_map<RegisterId, std::pair<Tag, Bytes>>& server_state(std::uint32_t s) const
    {
        return servers_.at(s);
    }

private:
    struct Pending {
        enum class Kind { deliver, wake, crash };

        double time = 0;
        std::uint64_t order = 0;
        Kind kind = Kind::deliver;
        std::uint32_t target = 0;
        std::uint64_t message = 0;

        bool operator>(const Pending& o) const { return time != o.time ? time > o.time : order > o.order; }
    };

    struct Call {
        Access access;
        bool second_phase = false;
        std::uint64_t nonce = 0;
        std::set<std::uint32_t> replied;
        Tag max_tag;
        Bytes max_value;
        bool have_max = false;
        Bytes result;
        Proc::OpToken token = 0;
    };

    struct Client {
        std::unique_ptr<Proc> proc;
        Proc::Body body;
        std::vector<double> start_times;
        std::size_t ops_started = 0;
        bool started = false;
        std::optional<Call> call;
    };

    void push(double time, Pending::Kind kind, std::uint32_t target, std::uint64_t message = 0)
    {
        queue_.push(Pending{time, order_++, kind, target, message});
    }

    double delay()
    {
        if (cfg_.mean_delay <= 0) {
            return 0;
        }
        std::exponential_distribution<double> d{1.0 / cfg_.mean_delay};
        return d(rng_);
    }

    void send(Message m, bool to_server)
    {
        const auto id = next_message_++;
        const auto target = to_server ? m.server : m.client;
        messages_.emplace(id, std::move(m));
        push(now_ + delay(), Pending::Kind::deliver, target, id);
    }

    void broadcast(Client& c, Message::Kind kind)
    {
        Call& call = *c.call;
        call.nonce = next_nonce_++;
        call.replied.clear();
        for (std::uint32_t s = 0; s < cfg_.n_servers; ++s) {
            Message m;
            m.kind = kind;
            m.key = call.access.key;
            m.client = c.proc->id().value;
            m.server = s;
            m.nonce = call.nonce;
            if (kind == Message::Kind::read_query) {
                m.init = call.access.is_write() ? Bytes{} : call.access.value;
            } else {
                m.tag = call.max_tag;
                m.value = call.max_value;
            }
            send(std::move(m), true);
        }
    }

    // Moves a process forward: starts its body, or its next register access.
    void advance(Client& c)
    {
        if (!c.started) {
            c.started = true;
            c.proc->start(c.body);
        }
        if (c.call || !c.proc->has_pending()) {
            return;
        }
        if (c.proc->has_pending_invoke()) {
            if (c.ops_started < c.start_times.size() && c.start_times[c.ops_started] > now_) {
                push(c.start_times[c.ops_started], Pending::Kind::wake, c.proc->id().value);
                c.start_times[c.ops_started] = now_;  // wake exactly once
                return;
            }
            ++c.ops_started;
        }
        Call call;
        call.access = c.proc->pending();
        const bool write = call.access.is_write();
        json args{{"init", printable(write ? Bytes{} : call.access.value)}};
        if (write) {
            args["v"] = printable(call.access.value);
        }
        Event e;
        e.kind = EventKind::invoke;
        e.proc = c.proc->id();
        e.obj = call.access.key;
        e.op = write ? "write" : "read";
        e.args = std::move(args);
        reg_recorder_->emit(std::move(e));
        c.call = std::move(call);
        broadcast(c, Message::Kind::read_query);
    }

    void deliver(const Message& m)
    {
        switch (m.kind) {
        case Message::Kind::read_query:
        case Message::Kind::write_query:
            serve(m);
            break;
        case Message::Kind::read_reply:
        case Message::Kind::write_ack:
            reply(m);
            break;
        }
        ++stats_.delivered;
    }

    void serve(const Message& m)
    {
        if (crashed_[m.server]) {
            ++stats_.dropped;
            return;
        }
        auto& regs = servers_[m.server];
        Message r;
        r.key = m.key;
        r.client = m.client;
        r.server = m.server;
        r.nonce = m.nonce;
        if (m.kind == Message::Kind::read_query) {
            auto it = regs.find(m.key);
            r.kind = Message::Kind::read_reply;
            if (it == regs.end()) {
                r.tag = Tag{};
                r.value = m.init;
            } else {
                r.tag = it->second.first;
                r.value = it->second.second;
            }
        } else {
            auto it = regs.find(m.key);
            if (it == regs.end() || it->second.first < m.tag) {
                regs[m.key] = {m.tag, m.value};
            }
            r.kind = Message::Kind::write_ack;
        }
        send(std::move(r), false);
    }

    void reply(const Message& m)
    {
        Client& c = *clients_.at(m.client);
        if (!c.call || c.call->nonce != m.nonce) {
            return;
        }
        Call& call = *c.call;
        if (!call.replied.insert(m.server).second) {
            return;
        }
        if (!call.second_phase) {
            // Untouched registers report tag 0 with the reader's initial value.
            if (!call.have_max || call.max_tag < m.tag) {
                call.max_tag = m.tag;
                call.max_value = m.value;
                call.have_max = true;
            }
            if (call.replied.size() < cfg_.quorum()) {
                return;
            }
            call.second_phase = true;
            if (call.access.is_write()) {
                call.max_tag = Tag{call.max_tag.seq + 1, c.proc->id().value};
                call.max_value = call.access.value;
                call.result = {};
            } else {
                call.result = call.max_value;
            }
            broadcast(c, Message::Kind::write_query);
            return;
        }
        if (call.replied.size() < cfg_.quorum()) {
            return;
        }
        finish(c);
    }

    void finish(Client& c)
    {
        Call call = std::move(*c.call);
        c.call.reset();
        Event e;
        e.kind = EventKind::response;
        e.proc = c.proc->id();
        e.obj = call.access.key;
        e.op = call.access.is_write() ? "write" : "read";
        e.res = call.access.is_write() ? json(nullptr) : json(printable(call.result));
        e.steps = 1;
        reg_recorder_->emit(std::move(e));
        ++stats_.register_ops;
        c.proc->complete(std::move(call.result), stats_.register_ops);
        advance(c);
    }

    NetConfig cfg_;
    std::mt19937_64 rng_;
    std::vector<std::unordered_map<RegisterId, std::pair<Tag, Bytes>>> servers_;
    std::vector<bool> crashed_;
    std::vector<std::unique_ptr<Client>> clients_;
    std::priority_queue<Pending, std::vector<Pending>, std::greater<>> queue_;
    std::unordered_map<std::uint64_t, Message> messages_;
    Recorder app_recorder_;
    std::unique_ptr<Recorder> reg_recorder_;
    NetStats stats_;
    double now_ = 0;
    std::uint64_t order_ = 0;
    std::uint64_t next_message_ = 0;
    std::uint64_t next_nonce_ = 1;
};

}  // namespace ofuc
