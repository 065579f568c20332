#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace banditservo
{
// body(0) .. body(count - 1) across up to jobs threads, indices handed out in
// claim order. After the first exception the remaining indices are skipped
// and that exception is rethrown on the caller. Callers are responsible for
// making body(i) independent of scheduling (index-keyed output slots).
inline void parallel_for_index(int count, int jobs, const std::function<void(int)>& body)
{
  std::atomic<int> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;

  const auto worker = [&]()
  {
    while (true)
    {
      const int index = next.fetch_add(1);
      if (index >= count)
      {
        return;
      }
      {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (first_error)
        {
          return;
        }
      }
      try
      {
        body(index);
      }
      catch (...)
      {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error)
        {
          first_error = std::current_exception();
        }
        return;
      }
    }
  };

  const int threads = std::min(jobs, count);
  if (threads <= 1)
  {
    worker();
  }
  else
  {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; t++)
    {
      pool.emplace_back(worker);
    }
    for (auto& thread : pool)
    {
      thread.join();
    }
  }
  if (first_error)
  {
    std::rethrow_exception(first_error);
  }
}
}
