#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hana/protocol/messages.hpp"

namespace hana {

/// In-process A2A bus. Delivery follows one total order:
/// (priority desc, t_sent asc, msg_id asc), so a reactive event always
/// overtakes pending internal goals regardless of send interleaving.
class Bus {
 public:
  void register_recipient(const std::string& id) { queues_[id]; }

  bool known(const std::string& id) const { return queues_.count(id) > 0; }

  /// Returns an error string for unknown recipients; the message is not
  /// queued in that case.
  std::optional<std::string> send(A2AMessage msg) {
    auto it = queues_.find(msg.recipient);
    if (it == queues_.end())
      return "unknown recipient: " + msg.recipient;
    msg.msg_id = next_msg_id_++;
    it->second.push_back(std::move(msg));
    return std::nullopt;
  }

  /// Drains the recipient's pending messages in delivery order.
  std::vector<A2AMessage> poll(const std::string& recipient) {
    auto it = queues_.find(recipient);
    if (it == queues_.end()) return {};
    std::vector<A2AMessage> out = std::move(it->second);
    it->second.clear();
    std::sort(out.begin(), out.end(), [](const A2AMessage& a, const A2AMessage& b) {
      if (a.priority != b.priority) return a.priority > b.priority;
      if (a.t_sent != b.t_sent) return a.t_sent < b.t_sent;
      return a.msg_id < b.msg_id;
    });
    return out;
  }

  std::uint64_t next_msg_id() const { return next_msg_id_; }

 private:
  std::uint64_t next_msg_id_ = 1;
  std::map<std::string, std::vector<A2AMessage>> queues_;
};

}  // namespace hana
