// SPDX-FileCopyrightText: (c) 2026 dfft contributors
//
// SPDX-License-Identifier: Apache-2.0

// Shared message-matching machinery for the in-process and socket backends.
// Not installed; backend implementation detail only.

#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "dfft/errors.hpp"
#include "dfft/transport.hpp"

namespace dfft::transport::detail {

// Raised inside a worker when another worker already failed; unwinds the
// thread without reporting a second error.
struct AbortSignal {};

struct RecvState {
  bool ready = false;
  Envelope env;
};

struct AbortState {
  std::atomic<bool> flag{false};
  std::mutex mu;
  int rank = -1;
  std::string what;

  void trip(int failing_rank, const std::string& message) {
    std::lock_guard<std::mutex> lock(mu);
    if (!flag.load()) {
      rank = failing_rank;
      what = message;
      flag.store(true);
    }
  }

  std::pair<int, std::string> info() {
    std::lock_guard<std::mutex> lock(mu);
    return {rank, what};
  }
};

/// Per-rank inbox. Matching is per (group, source, tag) FIFO; a message is
/// delivered exactly once, to the oldest posted receive for its key.
class Mailbox {
 public:
  explicit Mailbox(AbortState* abort) : abort_(abort) {}

  void deliver(const MatchKey& key, Envelope env) {
    std::lock_guard<std::mutex> lock(mu_);
    auto posted = posted_.find(key);
    if (posted != posted_.end() && !posted->second.empty()) {
      auto state = posted->second.front();
      posted->second.pop_front();
      state->env = std::move(env);
      state->ready = true;
      cv_.notify_all();
      return;
    }
    arrived_[key].push_back(std::move(env));
  }

  std::shared_ptr<RecvState> post(const MatchKey& key) {
    std::lock_guard<std::mutex> lock(mu_);
    auto state = std::make_shared<RecvState>();
    auto arrived = arrived_.find(key);
    if (arrived != arrived_.end() && !arrived->second.empty()) {
      state->env = std::move(arrived->second.front());
      arrived->second.pop_front();
      state->ready = true;
      return state;
    }
    posted_[key].push_back(state);
    return state;
  }

  std::vector<std::byte> wait(const std::shared_ptr<RecvState>& state,
                              double timeout_s, Clock* clock,
                              ErrorCode timeout_code, const std::string& what) {
    std::unique_lock<std::mutex> lock(mu_);
    const auto deadline = std::chrono::steady_clock::now() +
                          std::chrono::duration<double>(timeout_s);
    while (!state->ready) {
      if (abort_ != nullptr && abort_->flag.load()) throw AbortSignal{};
      if (cv_.wait_until(lock, deadline) == std::cv_status::timeout &&
          !state->ready) {
        raise(timeout_code, "receive timed out: " + what);
      }
    }
    if (clock != nullptr) clock->advance_to(state->env.arrival_vtime);
    return std::move(state->env.payload);
  }

  void interrupt() {
    std::lock_guard<std::mutex> lock(mu_);
    cv_.notify_all();
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::map<MatchKey, std::deque<Envelope>> arrived_;
  std::map<MatchKey, std::deque<std::shared_ptr<RecvState>>> posted_;
  AbortState* abort_;
};

inline std::uint32_t scoped_group_id(int world_rank, std::uint16_t& counter) {
  const std::uint32_t id =
      ((static_cast<std::uint32_t>(world_rank) << 10) | counter) + 1;
  ++counter;
  if (id > kMaxGroups || counter > 0x3FF) {
    raise(ErrorCode::TooLarge, "group id space exhausted");
  }
  return id;
}

}  // namespace dfft::transport::detail
