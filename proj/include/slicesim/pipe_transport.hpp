#pragma once

#include <deque>
#include <optional>
#include <string>

#include "slicesim/control.hpp"

namespace slicesim {

// Spawns `command` via /bin/sh -c and exchanges newline-delimited messages
// over its stdin/stdout. Reads are non-blocking; a dead peer turns sends
// into no-ops, which the protocol layer sees as silence.
class PipeTransport : public OptimizerTransport {
 public:
  explicit PipeTransport(const std::string& command);  // throws std::runtime_error
  ~PipeTransport() override;

  PipeTransport(const PipeTransport&) = delete;
  PipeTransport& operator=(const PipeTransport&) = delete;

  void send_line(const std::string& line) override;
  std::optional<std::string> poll_line() override;
  bool alive() override;

  void shutdown();  // close pipes and reap the child

 private:
  void pump();

  long pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
  std::deque<std::string> lines_;
  bool reaped_ = false;
};

}  // namespace slicesim
