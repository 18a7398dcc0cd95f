#include "inspag/distsim.hpp"

#include <algorithm>
#include <exception>
#include <future>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "inspag/error.hpp"

namespace inspag {

std::vector<Index> WorkerPool::rows(Index j) const {
  if (j < 0 || j >= m) throw InputError(fmt::format("no worker {}", j));
  return {order.begin() + ranges[j].first, order.begin() + ranges[j].second};
}

WorkerPool partition(const SparseDataset& data, Index m, std::uint64_t seed) {
  const Index n = data.size();
  if (m < 1) throw InputError("partition needs m >= 1");
  if (m > n)
    throw InputError(fmt::format("cannot split {} rows across {} workers", n, m));
  WorkerPool pool;
  pool.m = m;
  pool.seed = seed;
  pool.order.resize(n);
  std::iota(pool.order.begin(), pool.order.end(), Index{0});
  // Fisher-Yates with an explicit draw so the order is the same on every
  // standard library (std::shuffle is implementation-defined).
  std::mt19937_64 rng(seed);
  for (Index i = n - 1; i > 0; --i) {
    Index j = static_cast<Index>(rng() % static_cast<std::uint64_t>(i + 1));
    std::swap(pool.order[i], pool.order[j]);
  }
  const Index base = n / m, extra = n % m;
  Index begin = 0;
  for (Index j = 0; j < m; ++j) {
    Index len = base + (j < extra ? 1 : 0);
    pool.ranges.emplace_back(begin, begin + len);
    begin += len;
  }
  return pool;
}

void CommLedger::charge(Index m, Index down_len, Index up_len) {
  long down = static_cast<long>(m * down_len * 8);
  long up = static_cast<long>(m * up_len * 8);
  ++rounds;
  bytes_down += down;
  bytes_up += up;
  per_round.push_back({rounds, down + up});
}

Vec broadcast_reduce(const WorkerPool& pool, const Vec& point,
                     const WorkerTask& task, CommLedger& ledger) {
  if (pool.m < 1 || static_cast<Index>(pool.ranges.size()) != pool.m)
    throw InputError("worker pool is not initialized");
  std::vector<Vec> results(pool.m);
  std::vector<std::exception_ptr> errors(pool.m);
  auto run = [&](Index j) {
    try {
      results[j] = task(j, point);
    } catch (...) {
      errors[j] = std::current_exception();
    }
  };
  if (pool.parallel && pool.m > 1) {
    std::vector<std::future<void>> jobs;
    jobs.reserve(pool.m);
    for (Index j = 0; j < pool.m; ++j) jobs.push_back(std::async(std::launch::async, run, j));
    for (auto& job : jobs) job.get();
  } else {
    for (Index j = 0; j < pool.m; ++j) run(j);
  }
  for (Index j = 0; j < pool.m; ++j) {
    if (!errors[j]) continue;
    try {
      std::rethrow_exception(errors[j]);
    } catch (const std::exception& e) {
      throw WorkerError(j, e.what());
    } catch (...) {
      throw WorkerError(j, "unknown failure");
    }
  }
  const Index len = results[0].size();
  Vec acc = Vec::Zero(len);
  const double total = static_cast<double>(pool.total());
  for (Index j = 0; j < pool.m; ++j) {
    if (results[j].size() != len)
      throw WorkerError(j, "result length differs from worker 0");
    acc += (static_cast<double>(pool.shard_size(j)) / total) * results[j];
  }
  ledger.charge(pool.m, point.size(), len);
  return acc;
}

}  // namespace inspag
