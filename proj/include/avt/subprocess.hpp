#pragma once

// Minimal child-process wrapper: /bin/sh -c <command> with optional stdin and
// stdout pipes. Pipes are created close-on-exec so concurrent spawns from
// worker threads never leak descriptors into unrelated children.

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "avt/error.hpp"

extern char** environ;

namespace avt {

/// Quotes `s` for a POSIX shell command line.
inline std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  out += "'";
  return out;
}

/// Replaces every `{key}` in `tmpl` by the shell-quoted value.
inline std::string expand_template(std::string tmpl, const std::map<std::string, std::string>& values) {
  for (const auto& [key, value] : values) {
    const std::string needle = "{" + key + "}";
    const std::string quoted = shell_quote(value);
    for (std::size_t pos = tmpl.find(needle); pos != std::string::npos;
         pos = tmpl.find(needle, pos + quoted.size())) {
      tmpl.replace(pos, needle.size(), quoted);
    }
  }
  return tmpl;
}

class Subprocess {
 public:
  struct Options {
    bool pipe_stdin = false;
    bool pipe_stdout = true;
    bool silence_stderr = false;
    std::map<std::string, std::string> extra_env;
  };

  Subprocess(const std::string& command, const Options& opts) {
    static std::once_flag ignore_sigpipe;
    std::call_once(ignore_sigpipe, [] { ::signal(SIGPIPE, SIG_IGN); });
    int in_pipe[2] = {-1, -1};
    int out_pipe[2] = {-1, -1};
    if (opts.pipe_stdin && ::pipe2(in_pipe, O_CLOEXEC) != 0) {
      throw Error(ErrorKind::IoError, std::string("pipe: ") + std::strerror(errno));
    }
    if (opts.pipe_stdout && ::pipe2(out_pipe, O_CLOEXEC) != 0) {
      close_pair(in_pipe);
      throw Error(ErrorKind::IoError, std::string("pipe: ") + std::strerror(errno));
    }

    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    if (opts.pipe_stdin) posix_spawn_file_actions_adddup2(&actions, in_pipe[0], STDIN_FILENO);
    if (opts.pipe_stdout) posix_spawn_file_actions_adddup2(&actions, out_pipe[1], STDOUT_FILENO);
    if (opts.silence_stderr) {
      posix_spawn_file_actions_addopen(&actions, STDERR_FILENO, "/dev/null", O_WRONLY, 0);
    }

    std::vector<std::string> env_storage;
    for (char** e = environ; e && *e; ++e) {
      std::string entry(*e);
      const std::string key = entry.substr(0, entry.find('='));
      if (!opts.extra_env.contains(key)) env_storage.push_back(std::move(entry));
    }
    for (const auto& [k, v] : opts.extra_env) env_storage.push_back(k + "=" + v);
    std::vector<char*> envp;
    for (auto& s : env_storage) envp.push_back(s.data());
    envp.push_back(nullptr);

    std::string sh = "/bin/sh";
    std::string dash_c = "-c";
    std::string cmd = command;
    char* argv[] = {sh.data(), dash_c.data(), cmd.data(), nullptr};

    // Own process group, so kill() also reaches whatever the shell started.
    posix_spawnattr_t attr;
    posix_spawnattr_init(&attr);
    posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETPGROUP);
    posix_spawnattr_setpgroup(&attr, 0);
    const int rc = posix_spawn(&pid_, "/bin/sh", &actions, &attr, argv, envp.data());
    posix_spawnattr_destroy(&attr);
    posix_spawn_file_actions_destroy(&actions);
    if (opts.pipe_stdin) ::close(in_pipe[0]);
    if (opts.pipe_stdout) ::close(out_pipe[1]);
    if (rc != 0) {
      if (opts.pipe_stdin) ::close(in_pipe[1]);
      if (opts.pipe_stdout) ::close(out_pipe[0]);
      throw Error(ErrorKind::IoError, "spawn failed: " + std::string(std::strerror(rc)));
    }
    stdin_fd_ = opts.pipe_stdin ? in_pipe[1] : -1;
    stdout_fd_ = opts.pipe_stdout ? out_pipe[0] : -1;
  }

  Subprocess(const Subprocess&) = delete;
  Subprocess& operator=(const Subprocess&) = delete;

  ~Subprocess() {
    if (!status_) {
      kill();
      wait();
    }
    close_fd(stdin_fd_);
    close_fd(stdout_fd_);
  }

  /// Reads up to buf.size() bytes; 0 at end of stream.
  std::size_t read_some(std::span<std::uint8_t> buf) {
    for (;;) {
      const ssize_t n = ::read(stdout_fd_, buf.data(), buf.size());
      if (n >= 0) return static_cast<std::size_t>(n);
      if (errno != EINTR) throw Error(ErrorKind::IoError, std::string("read: ") + std::strerror(errno));
    }
  }

  /// Fills buf completely unless the stream ends; returns bytes read.
  std::size_t read_full(std::span<std::uint8_t> buf) {
    std::size_t got = 0;
    while (got < buf.size()) {
      const std::size_t n = read_some(buf.subspan(got));
      if (n == 0) break;
      got += n;
    }
    return got;
  }

  /// Returns false if the child closed its stdin.
  bool write_all(std::string_view data) {
    std::size_t off = 0;
    while (off < data.size()) {
      const ssize_t n = ::write(stdin_fd_, data.data() + off, data.size() - off);
      if (n < 0) {
        if (errno == EINTR) continue;
        return false;
      }
      off += static_cast<std::size_t>(n);
    }
    return true;
  }

  /// True if stdout has bytes (or EOF) ready within `timeout_ms`.
  bool readable(int timeout_ms) const {
    pollfd p{stdout_fd_, POLLIN, 0};
    return ::poll(&p, 1, timeout_ms) > 0;
  }

  /// True if unread bytes are already waiting on stdout.
  bool has_pending_data() const {
    pollfd p{stdout_fd_, POLLIN, 0};
    return ::poll(&p, 1, 0) > 0 && (p.revents & POLLIN) != 0;
  }

  void close_stdin() { close_fd(stdin_fd_); }
  void close_stdout() { close_fd(stdout_fd_); }

  void kill() {
    if (!status_ && pid_ > 0) ::kill(-pid_, SIGKILL);
  }

  /// Waits for exit; returns the exit code, or 128+signal.
  int wait() {
    if (status_) return *status_;
    int st = 0;
    while (::waitpid(pid_, &st, 0) < 0) {
      if (errno != EINTR) {
        status_ = 127;
        return *status_;
      }
    }
    status_ = WIFEXITED(st) ? WEXITSTATUS(st) : 128 + (WIFSIGNALED(st) ? WTERMSIG(st) : 0);
    return *status_;
  }

 private:
  static void close_fd(int& fd) {
    if (fd >= 0) ::close(fd);
    fd = -1;
  }
  static void close_pair(int (&p)[2]) {
    close_fd(p[0]);
    close_fd(p[1]);
  }

  pid_t pid_ = -1;
  int stdin_fd_ = -1;
  int stdout_fd_ = -1;
  std::optional<int> status_;
};

/// Runs a command to completion and returns (exit code, stdout).
inline std::pair<int, std::string> run_capture(const std::string& command, bool silence_stderr = true) {
  Subprocess proc(command, Subprocess::Options{false, true, silence_stderr, {}});
  std::string out;
  std::vector<std::uint8_t> buf(4096);
  for (std::size_t n; (n = proc.read_some(buf)) > 0;) out.append(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(n));
  return {proc.wait(), out};
}

}  // namespace avt
