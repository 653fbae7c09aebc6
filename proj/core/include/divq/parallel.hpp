#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

namespace divq {

/// Worker cap: DIVQUOT_THREADS when set (minimum 1), otherwise the hardware
/// concurrency.
std::size_t thread_budget();

/// Runs fn(i) for i in [0, count) on up to thread_budget() workers pulling
/// indices from a shared counter. Exceptions propagate to the caller.
void parallel_for_index(std::size_t count, const std::function<void(std::size_t)>& fn);

/// SplitMix64 step; used to derive independent per-block RNG seeds.
std::uint64_t splitmix64(std::uint64_t& state);

/// Seed for a (stream, block) pair, decorrelated from neighbouring blocks.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t block);

}  // namespace divq
