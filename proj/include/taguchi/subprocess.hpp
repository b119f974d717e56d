#pragma once

// POSIX child-process execution with a wall-clock timeout.

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <optional>
#include <string>
#include <thread>

namespace taguchi {

struct ProcessResult {
  bool started = false;
  bool timed_out = false;
  std::optional<int> exit_status;  // set when the child exited normally
  std::optional<int> signal;       // set when the child was killed by a signal
  double wall_seconds = 0.0;
};

/// Runs `command` through /bin/sh in `work_dir` with stdout discarded. The
/// child leads its own process group so a timeout kills the whole pipeline.
/// A timeout of zero or less waits forever.
inline ProcessResult run_shell(const std::string& command, const std::string& work_dir,
                               double timeout_seconds) {
  ProcessResult result;
  const auto start = std::chrono::steady_clock::now();
  const pid_t pid = ::fork();
  if (pid < 0) return result;
  if (pid == 0) {
    ::setpgid(0, 0);
    if (!work_dir.empty() && ::chdir(work_dir.c_str()) != 0) ::_exit(126);
    const int devnull = ::open("/dev/null", O_WRONLY);
    if (devnull >= 0) {
      ::dup2(devnull, STDOUT_FILENO);
      ::close(devnull);
    }
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::setpgid(pid, pid);
  result.started = true;

  int status = 0;
  auto backoff = std::chrono::microseconds(200);
  while (true) {
    const pid_t done = ::waitpid(pid, &status, WNOHANG);
    if (done == pid) break;
    if (done < 0 && errno != EINTR) return result;
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (timeout_seconds > 0.0 && elapsed > timeout_seconds) {
      ::kill(-pid, SIGKILL);
      ::waitpid(pid, &status, 0);
      result.timed_out = true;
      break;
    }
    std::this_thread::sleep_for(backoff);
    if (backoff < std::chrono::milliseconds(20)) backoff *= 2;
  }
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (WIFEXITED(status)) result.exit_status = WEXITSTATUS(status);
  if (WIFSIGNALED(status)) result.signal = WTERMSIG(status);
  return result;
}

}  // namespace taguchi
