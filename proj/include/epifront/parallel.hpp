// Copyright 2026 The epifront Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <condition_variable>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace epifront {

/// Worker count from the EPIFRONT_THREADS environment variable (default 1).
std::size_t threads_from_env();

/// Fixed-size pool running static-chunked parallel loops.
///
/// Chunk boundaries depend only on (count, size()), and every index is
/// processed exactly once, so callers that write to per-index slots get
/// schedule-independent results.
class ThreadPool {
public:
    explicit ThreadPool(std::size_t threads);
    ~ThreadPool();

    ThreadPool(const ThreadPool&) = delete;
    ThreadPool& operator=(const ThreadPool&) = delete;

    std::size_t size() const { return workers_.size() + 1; }

    /// Calls body(begin, end) over a partition of [0, count). Blocks until done;
    /// rethrows the first exception raised by any chunk.
    void parallel_for(std::size_t count, const std::function<void(std::size_t, std::size_t)>& body);

private:
    void worker_loop(std::size_t worker);
    void run_chunk(std::size_t chunk);

    std::vector<std::thread> workers_;
    std::mutex mutex_;
    std::condition_variable wake_;
    std::condition_variable done_;
    const std::function<void(std::size_t, std::size_t)>* body_ = nullptr;
    std::size_t count_ = 0;
    std::size_t generation_ = 0;
    std::size_t pending_ = 0;
    bool stop_ = false;
    std::exception_ptr error_;
};

/// Runs body over [0, count) on `pool` when given, inline otherwise.
void for_each_index(ThreadPool* pool, std::size_t count,
                    const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace epifront
