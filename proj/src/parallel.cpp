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

#include "epifront/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>

namespace epifront {

std::size_t threads_from_env() {
    const char* value = std::getenv("EPIFRONT_THREADS");
    if (value == nullptr || *value == '\0') {
        return 1;
    }
    try {
        const long parsed = std::stol(value);
        return parsed > 0 ? static_cast<std::size_t>(parsed) : 1;
    } catch (const std::exception&) {
        return 1;
    }
}

ThreadPool::ThreadPool(std::size_t threads) {
    const std::size_t extra = threads > 1 ? threads - 1 : 0;
    workers_.reserve(extra);
    for (std::size_t w = 0; w < extra; ++w) {
        workers_.emplace_back([this, w] { worker_loop(w + 1); });
    }
}

ThreadPool::~ThreadPool() {
    {
        std::lock_guard lock(mutex_);
        stop_ = true;
    }
    wake_.notify_all();
    for (auto& worker : workers_) {
        worker.join();
    }
}

void ThreadPool::run_chunk(std::size_t chunk) {
    const std::size_t chunks = size();
    const std::size_t begin = count_ * chunk / chunks;
    const std::size_t end = count_ * (chunk + 1) / chunks;
    if (begin == end) {
        return;
    }
    try {
        (*body_)(begin, end);
    } catch (...) {
        std::lock_guard lock(mutex_);
        if (!error_) {
            error_ = std::current_exception();
        }
    }
}

void ThreadPool::worker_loop(std::size_t worker) {
    std::size_t seen = 0;
    for (;;) {
        {
            std::unique_lock lock(mutex_);
            wake_.wait(lock, [&] { return stop_ || generation_ != seen; });
            if (stop_) {
                return;
            }
            seen = generation_;
        }
        run_chunk(worker);
        {
            std::lock_guard lock(mutex_);
            if (--pending_ == 0) {
                done_.notify_one();
            }
        }
    }
}

void ThreadPool::parallel_for(std::size_t count,
                              const std::function<void(std::size_t, std::size_t)>& body) {
    if (workers_.empty() || count < 2) {
        if (count > 0) {
            body(0, count);
        }
        return;
    }
    {
        std::lock_guard lock(mutex_);
        body_ = &body;
        count_ = count;
        pending_ = workers_.size();
        error_ = nullptr;
        ++generation_;
    }
    wake_.notify_all();
    run_chunk(0);
    std::exception_ptr error;
    {
        std::unique_lock lock(mutex_);
        done_.wait(lock, [&] { return pending_ == 0; });
        error = error_;
        body_ = nullptr;
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

void for_each_index(ThreadPool* pool, std::size_t count,
                    const std::function<void(std::size_t, std::size_t)>& body) {
    if (pool != nullptr) {
        pool->parallel_for(count, body);
    } else if (count > 0) {
        body(0, count);
    }
}

}  // namespace epifront
