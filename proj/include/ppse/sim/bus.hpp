#pragma once

#include <deque>
#include <utility>

#include "ppse/protocol/message.hpp"
#include "ppse/protocol/transcript.hpp"

namespace ppse::sim {

/// Synchronous in-memory channel. Sending records the message in the
/// receiver's view; messages are immutable once queued.
class Bus {
 public:
  explicit Bus(protocol::Transcript* transcript) : transcript_(transcript) {}

  void send(protocol::Message m) {
    if (transcript_) transcript_->received(m);
    queue_.push_back(std::move(m));
  }

  /// Hands every queued message to `deliver` in send order, including
  /// messages sent while draining.
  template <typename Deliver>
  void drain(Deliver&& deliver) {
    while (!queue_.empty()) {
      const protocol::Message m = std::move(queue_.front());
      queue_.pop_front();
      deliver(m);
    }
  }

  bool empty() const { return queue_.empty(); }

 private:
  protocol::Transcript* transcript_;
  std::deque<protocol::Message> queue_;
};

}  // namespace ppse::sim
