#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "inspag/sparse_dataset.hpp"

namespace inspag {

struct WorkerPool {
  Index m = 0;
  std::vector<Index> order;                      // seed-shuffled row order
  std::vector<std::pair<Index, Index>> ranges;   // [begin, end) into order
  std::uint64_t seed = 0;
  bool parallel = true;

  Index total() const { return static_cast<Index>(order.size()); }
  Index shard_size(Index j) const { return ranges[j].second - ranges[j].first; }
  std::vector<Index> rows(Index j) const;
};

// Shuffle with the seed, then split into m contiguous blocks whose sizes
// differ by at most one (the first N mod m blocks get the extra row).
WorkerPool partition(const SparseDataset& data, Index m, std::uint64_t seed);

struct RoundCharge {
  long round = 0;
  long payload = 0;  // bytes down + bytes up
};

struct CommLedger {
  long rounds = 0;
  long bytes_up = 0;
  long bytes_down = 0;
  std::vector<RoundCharge> per_round;

  // One broadcast of down_len doubles and one reduce of up_len doubles,
  // each to/from m workers.
  void charge(Index m, Index down_len, Index up_len);
};

class WorkerError : public std::runtime_error {
 public:
  WorkerError(Index worker, const std::string& what)
      : std::runtime_error("worker " + std::to_string(worker) + ": " + what),
        worker_(worker) {}
  Index worker() const { return worker_; }

 private:
  Index worker_;
};

using WorkerTask = std::function<Vec(Index worker, const Vec& point)>;

// Runs task on every worker and folds the results in ascending worker order,
// weighted by shard size: sum_j n_j r_j / N. With equal shards this is the
// plain m-average. A failing task aborts the round (no ledger charge) and
// raises WorkerError for the lowest failing id.
Vec broadcast_reduce(const WorkerPool& pool, const Vec& point,
                     const WorkerTask& task, CommLedger& ledger);

}  // namespace inspag
