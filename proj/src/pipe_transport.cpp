#include "slicesim/pipe_transport.hpp"

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <stdexcept>

namespace slicesim {

PipeTransport::PipeTransport(const std::string& command) {
  int to_pipe[2], from_pipe[2];
  if (pipe(to_pipe) != 0) throw std::runtime_error("pipe failed");
  if (pipe(from_pipe) != 0) {
    close(to_pipe[0]);
    close(to_pipe[1]);
    throw std::runtime_error("pipe failed");
  }

  pid_t pid = fork();
  if (pid < 0) {
    for (int fd : {to_pipe[0], to_pipe[1], from_pipe[0], from_pipe[1]}) close(fd);
    throw std::runtime_error("fork failed");
  }
  if (pid == 0) {
    dup2(to_pipe[0], STDIN_FILENO);
    dup2(from_pipe[1], STDOUT_FILENO);
    for (int fd : {to_pipe[0], to_pipe[1], from_pipe[0], from_pipe[1]}) close(fd);
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }

  pid_ = pid;
  to_child_ = to_pipe[1];
  from_child_ = from_pipe[0];
  close(to_pipe[0]);
  close(from_pipe[1]);
  int flags = fcntl(from_child_, F_GETFL, 0);
  fcntl(from_child_, F_SETFL, flags | O_NONBLOCK);
  signal(SIGPIPE, SIG_IGN);
}

PipeTransport::~PipeTransport() { shutdown(); }

void PipeTransport::shutdown() {
  if (to_child_ >= 0) {
    close(to_child_);
    to_child_ = -1;
  }
  if (from_child_ >= 0) {
    close(from_child_);
    from_child_ = -1;
  }
  if (pid_ > 0 && !reaped_) {
    int status = 0;
    pid_t r = waitpid(static_cast<pid_t>(pid_), &status, WNOHANG);
    if (r == 0) {
      kill(static_cast<pid_t>(pid_), SIGTERM);
      waitpid(static_cast<pid_t>(pid_), &status, 0);
    }
    reaped_ = true;
  }
}

void PipeTransport::send_line(const std::string& line) {
  if (to_child_ < 0) return;
  std::string out = line;
  out.push_back('\n');
  size_t off = 0;
  while (off < out.size()) {
    ssize_t n = write(to_child_, out.data() + off, out.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      close(to_child_);  // peer is gone; protocol-level silence takes over
      to_child_ = -1;
      return;
    }
    off += static_cast<size_t>(n);
  }
}

void PipeTransport::pump() {
  if (from_child_ < 0) return;
  char chunk[4096];
  for (;;) {
    ssize_t n = read(from_child_, chunk, sizeof(chunk));
    if (n > 0) {
      buffer_.append(chunk, static_cast<size_t>(n));
      continue;
    }
    if (n < 0 && errno == EINTR) continue;
    break;  // EAGAIN (no data) or EOF
  }
  size_t pos;
  while ((pos = buffer_.find('\n')) != std::string::npos) {
    lines_.push_back(buffer_.substr(0, pos));
    buffer_.erase(0, pos + 1);
  }
}

std::optional<std::string> PipeTransport::poll_line() {
  pump();
  if (lines_.empty()) return std::nullopt;
  std::string line = std::move(lines_.front());
  lines_.pop_front();
  return line;
}

bool PipeTransport::alive() {
  if (pid_ <= 0 || reaped_) return false;
  int status = 0;
  pid_t r = waitpid(static_cast<pid_t>(pid_), &status, WNOHANG);
  if (r == static_cast<pid_t>(pid_)) {
    reaped_ = true;
    return false;
  }
  return r == 0;
}

}  // namespace slicesim
