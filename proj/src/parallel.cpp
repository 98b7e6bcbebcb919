#include "ipmix/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace ipmix
{

int thread_count()
{
    if (const char* env = std::getenv("IPMIX_THREADS"))
    {
        try
        {
            const int n = std::stoi(env);
            if (n > 0)
                return n;
        }
        catch (const std::exception&)
        {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(int n, const std::function<void(int)>& fn)
{
    const int workers = std::min(thread_count(), std::max(n, 1));
    if (workers <= 1)
    {
        for (int i = 0; i < n; ++i)
            fn(i);
        return;
    }

    std::exception_ptr error;
    std::mutex mutex;
    std::vector<std::thread> threads;
    const int chunk = (n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w)
    {
        const int begin = w * chunk;
        const int end   = std::min(n, begin + chunk);
        if (begin >= end)
            break;
        threads.emplace_back([&, begin, end] {
            try
            {
                for (int i = begin; i < end; ++i)
                    fn(i);
            }
            catch (...)
            {
                std::lock_guard lock(mutex);
                if (!error)
                    error = std::current_exception();
            }
        });
    }
    for (auto& t : threads)
        t.join();
    if (error)
        std::rethrow_exception(error);
}

} // namespace ipmix
