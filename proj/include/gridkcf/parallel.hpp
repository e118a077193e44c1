#pragma once

#include <atomic>
#include <condition_variable>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace gridkcf {

// Persistent pool for index-parallel loops. parallel_for(n, fn) runs fn(0..n-1)
// with the calling thread participating; result slots are owned per index by
// the caller, so output is bit-identical regardless of thread count or schedule.
//
// Nested parallel_for calls from inside a worker run inline on that worker.
class ThreadPool {
public:
    // threads = total concurrency during parallel_for (caller included).
    // threads <= 1 means fully inline execution, no worker threads at all.
    explicit ThreadPool(int threads);
    ~ThreadPool();

    ThreadPool(const ThreadPool&) = delete;
    ThreadPool& operator=(const ThreadPool&) = delete;

    int concurrency() const { return static_cast<int>(workers_.size()) + 1; }

    void parallel_for(int n, const std::function<void(int)>& fn);

private:
    struct Job {
        const std::function<void(int)>* fn = nullptr;
        int n = 0;
        std::atomic<int> next{0};
        std::atomic<int> active{0};
        std::mutex err_mu;
        std::exception_ptr error;
    };

    static void run_indices(Job& job);
    void worker_loop();

    std::vector<std::thread> workers_;
    std::mutex mu_;
    std::condition_variable cv_;
    std::condition_variable done_cv_;
    Job* job_ = nullptr;
    std::uint64_t epoch_ = 0;
    bool stop_ = false;
};

} // namespace gridkcf
