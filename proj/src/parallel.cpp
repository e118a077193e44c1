#include "gridkcf/parallel.hpp"

namespace gridkcf {

namespace {
thread_local bool inside_pool_worker = false;
}

ThreadPool::ThreadPool(int threads) {
    int extra = threads > 1 ? threads - 1 : 0;
    workers_.reserve(extra);
    for (int i = 0; i < extra; ++i)
        workers_.emplace_back([this] { worker_loop(); });
}

ThreadPool::~ThreadPool() {
    {
        std::lock_guard lk(mu_);
        stop_ = true;
    }
    cv_.notify_all();
    for (auto& w : workers_) w.join();
}

void ThreadPool::run_indices(Job& job) {
    for (;;) {
        int i = job.next.fetch_add(1, std::memory_order_relaxed);
        if (i >= job.n) break;
        try {
            (*job.fn)(i);
        } catch (...) {
            std::lock_guard lk(job.err_mu);
            if (!job.error) job.error = std::current_exception();
            job.next.store(job.n); // best effort: stop handing out work
        }
    }
}

void ThreadPool::worker_loop() {
    inside_pool_worker = true;
    std::uint64_t seen = 0;
    for (;;) {
        Job* job = nullptr;
        {
            std::unique_lock lk(mu_);
            cv_.wait(lk, [&] { return stop_ || (job_ != nullptr && epoch_ != seen); });
            if (stop_) return;
            seen = epoch_;
            job = job_;
            job->active.fetch_add(1);
        }
        run_indices(*job);
        {
            std::lock_guard lk(mu_);
            job->active.fetch_sub(1);
            done_cv_.notify_all();
        }
    }
}

void ThreadPool::parallel_for(int n, const std::function<void(int)>& fn) {
    if (n <= 0) return;
    if (workers_.empty() || n == 1 || inside_pool_worker) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    Job job;
    job.fn = &fn;
    job.n = n;
    {
        std::lock_guard lk(mu_);
        job_ = &job;
        ++epoch_;
    }
    cv_.notify_all();
    run_indices(job);
    {
        std::unique_lock lk(mu_);
        done_cv_.wait(lk, [&] { return job.active.load() == 0; });
        job_ = nullptr;
    }
    if (job.error) std::rethrow_exception(job.error);
}

} // namespace gridkcf
