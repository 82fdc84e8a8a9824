// SPDX-FileCopyrightText: 2026 The voxnt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace voxnt {

// Splits [0, count) into at most `workers` contiguous chunks and runs body(begin, end)
// on each. Chunk boundaries depend only on count and workers; the first exception
// thrown by any chunk is rethrown after every thread has joined.
template <typename Body>
void parallel_for_chunks(std::uint64_t count, unsigned workers, Body&& body) {
    workers = std::max(1u, workers);
    if (workers == 1 || count < 2) {
        if (count > 0) body(std::uint64_t{0}, count);
        return;
    }
    const std::uint64_t chunks = std::min<std::uint64_t>(workers, count);
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
        std::vector<std::jthread> threads;
        threads.reserve(chunks);
        for (std::uint64_t c = 0; c < chunks; ++c) {
            const std::uint64_t begin = count * c / chunks;
            const std::uint64_t end = count * (c + 1) / chunks;
            threads.emplace_back([&, begin, end] {
                try {
                    body(begin, end);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            });
        }
    }
    if (failure) std::rethrow_exception(failure);
}

}  // namespace voxnt
