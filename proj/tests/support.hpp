#pragma once

#include <ofuc/registers.hpp>

#include <functional>
#include <optional>
#include <utility>

namespace ofuc::testing {

// Runs f solo on p to completion and returns its result.
template <typename R>
R run_solo(AtomicMemory& mem, Proc& p, std::function<Task<R>(Mem)> f)
{
    std::optional<R> out;
    run_sync(p, [&out, f](Proc& self) -> Task<void> { out = co_await f(Mem{self}); }, mem);
    return std::move(*out);
}

inline void run_solo(AtomicMemory& mem, Proc& p, std::function<Task<void>(Mem)> f)
{
    run_sync(p, [f](Proc& self) -> Task<void> { co_await f(Mem{self}); }, mem);
}

}  // namespace ofuc::testing
