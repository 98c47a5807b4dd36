#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace echochamber {

using Rng = std::mt19937_64;

/// SplitMix64 mixing of (base, stream); gives independent seeds per run/tree/chunk.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

/// Shortest round-trip decimal representation.
std::string format_double(double x);

/// FNV-1a 64-bit hash, hex encoded.
std::string fnv1a_hex(std::string_view data);

/// Run `fn(i)` for i in [0, count) on up to `threads` workers. Work items must
/// write to disjoint outputs; the caller reduces in index order.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn);

/// Worker count: requested, or hardware concurrency when 0.
unsigned resolve_threads(unsigned requested);

std::vector<std::string> split(std::string_view s, char sep);
std::string trim(std::string_view s);

}  // namespace echochamber
