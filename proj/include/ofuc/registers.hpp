#pragma once

// Register substrate.
//
// Algorithms never touch memory directly: each read or write suspends the
// calling coroutine with a pending Access, and whoever drives the process
// (the exhaustive scheduler, the netsim ABD client, or run_sync) serves it as
// one indivisible step and resumes the coroutine.

#include <ofuc/history.hpp>
#include <ofuc/task.hpp>
#include <ofuc/types.hpp>

#include <any>
#include <cassert>
#include <coroutine>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace ofuc {

// ---------------------------------------------------------------------------
// Timestamped register contents.

struct StampedCell {
    Timestamp stamp;
    Bytes value;

    friend bool operator==(const StampedCell&, const StampedCell&) = default;
};

inline Bytes encode_stamped(const StampedCell& cell)
{
    Bytes out(8, '\0');
    for (int i = 0; i < 8; ++i) {
        out[i] = static_cast<char>((cell.stamp.value >> (8 * (7 - i))) & 0xff);
    }
    out += cell.value;
    return out;
}

inline StampedCell decode_stamped(const Bytes& raw)
{
    if (raw.size() < 8) {
        throw std::invalid_argument("stamped register holds a raw value");
    }
    StampedCell cell;
    for (int i = 0; i < 8; ++i) {
        cell.stamp.value = (cell.stamp.value << 8) | static_cast<unsigned char>(raw[i]);
    }
    cell.value = raw.substr(8);
    return cell;
}

// Reading at stamp t: the stored value if it was written at t' >= t, else init.
inline Bytes stamped_view(const StampedCell& cell, Timestamp t, const Bytes& init)
{
    return t <= cell.stamp ? cell.value : init;
}

// ---------------------------------------------------------------------------

struct Access {
    enum class Kind { read, write };

    Kind kind = Kind::read;
    RegisterId key;
    // Initial value for reads (registers are created lazily), new value for writes.
    Bytes value;

    bool is_write() const { return kind == Kind::write; }
};

class Proc;

// Harness probes. Algorithms call these at points where a checker wants to
// inspect global state; the default does nothing.
class Hooks {
public:
    virtual ~Hooks() = default;
    virtual void lap_entered(Proc&, const std::string& racing, const std::string& lap, std::uint64_t index) {}
};

// Shared sink for history events. One per world.
struct Recorder {
    History events;
    std::uint64_t next_seq = 0;
    // Also record operations on inner objects (recycled consensus instances).
    bool trace_inner = false;

    void emit(Event e)
    {
        e.seq = next_seq++;
        events.push_back(std::move(e));
    }
};

class Proc {
public:
    using Body = std::function<Task<void>(Proc&)>;

    explicit Proc(ProcessId id, Recorder* recorder = nullptr, Hooks* hooks = nullptr)
        : id_{id}, recorder_{recorder}, hooks_{hooks}
    {
    }

    Proc(const Proc&) = delete;
    Proc& operator=(const Proc&) = delete;

    ProcessId id() const { return id_; }
    Hooks* hooks() const { return hooks_; }

    // -- awaitables ---------------------------------------------------------

    struct ReadAwaiter {
        Proc* proc;
        Access access;
        std::optional<Timestamp> stamp;
        Bytes init;

        bool await_ready() const noexcept { return false; }
        void await_suspend(std::coroutine_handle<> h) { proc->suspend_on(std::move(access), h); }
        Bytes await_resume()
        {
            Bytes raw = proc->take_result();
            if (!stamp) {
                return raw;
            }
            return stamped_view(decode_stamped(raw), *stamp, init);
        }
    };

    struct WriteAwaiter {
        Proc* proc;
        Access access;

        bool await_ready() const noexcept { return false; }
        void await_suspend(std::coroutine_handle<> h) { proc->suspend_on(std::move(access), h); }
        void await_resume() { proc->take_result(); }
    };

    // -- driver side ----------------------------------------------------------

    void start(Body body)
    {
        body_ = std::move(body);
        task_ = body_(*this);
        task_.handle().resume();
        rethrow_if_failed();
    }

    bool finished() const { return task_.done() && !waiting_; }
    bool has_pending() const { return pending_.has_value(); }
    const Access& pending() const { return *pending_; }

    // Serves the pending access and runs the process up to its next access.
    void complete(Bytes result, std::uint64_t clock = 0)
    {
        assert(pending_);
        flush_invokes();
        pending_.reset();
        result_ = std::move(result);
        ++steps_;
        last_clock_ = clock;
        auto h = std::exchange(waiting_, {});
        h.resume();
        rethrow_if_failed();
    }

    std::uint64_t steps() const { return steps_; }
    std::uint64_t last_clock() const { return last_clock_; }

    // -- process-local state --------------------------------------------------

    template <typename T>
    T& local(const std::string& key)
    {
        auto& slot = locals_[key];
        if (!slot.has_value()) {
            slot = T{};
        }
        return std::any_cast<T&>(slot);
    }

    template <typename T>
    T* find_local(const std::string& key)
    {
        auto it = locals_.find(key);
        return it == locals_.end() ? nullptr : std::any_cast<T>(&it->second);
    }

    // -- history --------------------------------------------------------------

    using OpToken = std::uint64_t;

    bool recording() const { return recorder_ != nullptr; }
    bool tracing() const { return recorder_ && recorder_->trace_inner; }

    // The invocation event is emitted when the next access is served, so an
    // invocation can be delayed by the scheduler like any other step.
    OpToken begin_op(std::string obj, std::string op, json args, std::optional<std::uint64_t> epoch = {})
    {
        Event e;
        e.kind = EventKind::invoke;
        e.proc = id_;
        e.obj = std::move(obj);
        e.op = std::move(op);
        e.args = std::move(args);
        e.epoch = epoch;
        const OpToken token = next_token_++;
        open_[token] = OpenCall{e.obj, e.op, e.epoch, steps_};
        pending_invokes_.push_back(std::move(e));
        return token;
    }

    void end_op(OpToken token, json res)
    {
        auto it = open_.find(token);
        assert(it != open_.end());
        flush_invokes();
        if (recorder_) {
            Event e;
            e.kind = EventKind::response;
            e.proc = id_;
            e.obj = it->second.obj;
            e.op = it->second.op;
            e.res = std::move(res);
            e.epoch = it->second.epoch;
            e.steps = steps_ - it->second.start_steps;
            recorder_->emit(std::move(e));
            ++responses_;
        }
        open_.erase(it);
    }

    // Abandons a call without a response (starved or truncated runs).
    void abandon_op(OpToken token) { open_.erase(token); }

    void flush_invokes()
    {
        while (!pending_invokes_.empty()) {
            if (recorder_) {
                recorder_->emit(std::move(pending_invokes_.front()));
                ++invokes_;
            }
            pending_invokes_.pop_front();
        }
    }

    // Counters of emitted events; the scheduler uses them to classify steps.
    std::uint64_t emitted() const { return invokes_ + responses_; }
    bool has_pending_invoke() const { return !pending_invokes_.empty(); }

private:
    struct OpenCall {
        std::string obj;
        std::string op;
        std::optional<std::uint64_t> epoch;
        std::uint64_t start_steps = 0;
    };

    void suspend_on(Access a, std::coroutine_handle<> h)
    {
        pending_ = std::move(a);
        waiting_ = h;
    }

    Bytes take_result() { return std::move(result_); }

    void rethrow_if_failed()
    {
        if (task_.done()) {
            task_.take_result();
        }
    }

    ProcessId id_;
    Recorder* recorder_ = nullptr;
    Hooks* hooks_ = nullptr;
    Body body_;
    Task<void> task_;
    std::optional<Access> pending_;
    std::coroutine_handle<> waiting_;
    Bytes result_;
    std::uint64_t steps_ = 0;
    std::uint64_t last_clock_ = 0;
    std::unordered_map<std::string, std::any> locals_;
    std::deque<Event> pending_invokes_;
    std::unordered_map<OpToken, OpenCall> open_;
    OpToken next_token_ = 0;
    std::uint64_t invokes_ = 0;
    std::uint64_t responses_ = 0;
};

// A process's view of shared memory, optionally at a timestamp epoch. Stamped
// views implement the recycled-register rule on top of plain registers.
class Mem {
public:
    explicit Mem(Proc& p) : proc_{&p} {}
    Mem(Proc& p, Timestamp epoch) : proc_{&p}, epoch_{epoch} {}

    Proc& proc() const { return *proc_; }
    std::optional<Timestamp> epoch() const { return epoch_; }
    Mem at_epoch(Timestamp t) const { return Mem{*proc_, t}; }
    Mem plain() const { return Mem{*proc_}; }

    Proc::ReadAwaiter read(RegisterId key, Bytes init) const
    {
        if (epoch_) {
            Bytes raw_init = encode_stamped({Timestamp{0}, init});
            return {proc_, Access{Access::Kind::read, std::move(key), std::move(raw_init)}, epoch_, std::move(init)};
        }
        return {proc_, Access{Access::Kind::read, std::move(key), std::move(init)}, std::nullopt, {}};
    }

    Proc::WriteAwaiter write(RegisterId key, Bytes value) const
    {
        if (epoch_) {
            value = encode_stamped({*epoch_, std::move(value)});
        }
        return {proc_, Access{Access::Kind::write, std::move(key), std::move(value)}};
    }

    // Key for process-local state attached to a (possibly recycled) object.
    std::string scope(const std::string& name) const
    {
        return epoch_ ? name + "#" + std::to_string(epoch_->value) : name;
    }

private:
    Proc* proc_;
    std::optional<Timestamp> epoch_;
};

inline Proc::ReadAwaiter ts_read(Proc& p, RegisterId key, Timestamp t, Bytes init)
{
    return Mem{p, t}.read(std::move(key), std::move(init));
}

inline Proc::WriteAwaiter ts_write(Proc& p, RegisterId key, Timestamp t, Bytes value)
{
    return Mem{p, t}.write(std::move(key), std::move(value));
}

// ---------------------------------------------------------------------------
// Memories serving accesses.

// Sequentially atomic cells, created lazily with the first accessor's initial value.
class AtomicMemory {
public:
    Bytes read(const RegisterId& key, const Bytes& init)
    {
        auto [it, inserted] = cells_.try_emplace(key, init);
        return it->second;
    }

    void write(const RegisterId& key, Bytes value) { cells_[key] = std::move(value); }

    Bytes serve(const Access& a)
    {
        if (a.is_write()) {
            write(a.key, a.value);
            return {};
        }
        return read(a.key, a.value);
    }

    std::size_t size() const { return cells_.size(); }
    const std::unordered_map<RegisterId, Bytes>& cells() const { return cells_; }

    std::optional<Bytes> peek(const RegisterId& key) const
    {
        auto it = cells_.find(key);
        if (it == cells_.end()) {
            return std::nullopt;
        }
        return it->second;
    }

private:
    std::unordered_map<RegisterId, Bytes> cells_;
};

// The same contract, safe for concurrent callers on real threads.
class ConcurrentMemory {
public:
    Bytes serve(const Access& a)
    {
        std::lock_guard lock{mutex_};
        return inner_.serve(a);
    }

    std::size_t size() const
    {
        std::lock_guard lock{mutex_};
        return inner_.size();
    }

private:
    mutable std::mutex mutex_;
    AtomicMemory inner_;
};

// Drives a body to completion, serving each access immediately.
template <typename Memory>
void run_sync(Proc& proc, Proc::Body body, Memory& memory)
{
    proc.start(std::move(body));
    while (proc.has_pending()) {
        proc.complete(memory.serve(proc.pending()));
    }
}

}  // namespace ofuc
