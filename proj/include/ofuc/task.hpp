#pragma once

// Lazily-started coroutine task with symmetric transfer.
//
// Every algorithm in this library is a chain of nested Task<> coroutines whose
// leaves suspend on a register access. The driver owning the outermost task
// resumes the innermost suspended frame once the access has been served.

#include <coroutine>
#include <exception>
#include <optional>
#include <utility>

namespace ofuc {

template <typename T>
class Task;

namespace detail {

struct FinalAwaiter {
    bool await_ready() const noexcept { return false; }

    template <typename Promise>
    std::coroutine_handle<> await_suspend(std::coroutine_handle<Promise> h) const noexcept
    {
        if (auto next = h.promise().continuation) {
            return next;
        }
        return std::noop_coroutine();
    }

    void await_resume() const noexcept {}
};

struct PromiseBase {
    std::coroutine_handle<> continuation;
    std::exception_ptr error;

    std::suspend_always initial_suspend() const noexcept { return {}; }
    FinalAwaiter final_suspend() const noexcept { return {}; }
    void unhandled_exception() noexcept { error = std::current_exception(); }

    void rethrow_if_failed() const
    {
        if (error) {
            std::rethrow_exception(error);
        }
    }
};

}  // namespace detail

template <typename T>
class [[nodiscard]] Task {
public:
    struct promise_type : detail::PromiseBase {
        std::optional<T> value;

        Task get_return_object() { return Task{std::coroutine_handle<promise_type>::from_promise(*this)}; }

        template <typename U>
        void return_value(U&& v)
        {
            value.emplace(std::forward<U>(v));
        }
    };

    using handle_type = std::coroutine_handle<promise_type>;

    Task() = default;
    explicit Task(handle_type h) : handle_{h} {}
    Task(Task&& other) noexcept : handle_{std::exchange(other.handle_, {})} {}
    Task& operator=(Task&& other) noexcept
    {
        if (this != &other) {
            destroy();
            handle_ = std::exchange(other.handle_, {});
        }
        return *this;
    }
    Task(const Task&) = delete;
    Task& operator=(const Task&) = delete;
    ~Task() { destroy(); }

    bool await_ready() const noexcept { return false; }

    std::coroutine_handle<> await_suspend(std::coroutine_handle<> parent) noexcept
    {
        handle_.promise().continuation = parent;
        return handle_;
    }

    T await_resume()
    {
        handle_.promise().rethrow_if_failed();
        return std::move(*handle_.promise().value);
    }

    handle_type handle() const noexcept { return handle_; }
    bool done() const noexcept { return !handle_ || handle_.done(); }

    // Only meaningful for a top-level task after done().
    T take_result()
    {
        handle_.promise().rethrow_if_failed();
        return std::move(*handle_.promise().value);
    }

private:
    void destroy()
    {
        if (handle_) {
            handle_.destroy();
            handle_ = {};
        }
    }

    handle_type handle_{};
};

template <>
class [[nodiscard]] Task<void> {
public:
    struct promise_type : detail::PromiseBase {
        Task get_return_object() { return Task{std::coroutine_handle<promise_type>::from_promise(*this)}; }
        void return_void() noexcept {}
    };

    using handle_type = std::coroutine_handle<promise_type>;

    Task() = default;
    explicit Task(handle_type h) : handle_{h} {}
    Task(Task&& other) noexcept : handle_{std::exchange(other.handle_, {})} {}
    Task& operator=(Task&& other) noexcept
    {
        if (this != &other) {
            destroy();
            handle_ = std::exchange(other.handle_, {});
        }
        return *this;
    }
    Task(const Task&) = delete;
    Task& operator=(const Task&) = delete;
    ~Task() { destroy(); }

    bool await_ready() const noexcept { return false; }

    std::coroutine_handle<> await_suspend(std::coroutine_handle<> parent) noexcept
    {
        handle_.promise().continuation = parent;
        return handle_;
    }

    void await_resume() { handle_.promise().rethrow_if_failed(); }

    handle_type handle() const noexcept { return handle_; }
    bool done() const noexcept { return !handle_ || handle_.done(); }

    void take_result() { handle_.promise().rethrow_if_failed(); }

private:
    void destroy()
    {
        if (handle_) {
            handle_.destroy();
            handle_ = {};
        }
    }

    handle_type handle_{};
};

}  // namespace ofuc
