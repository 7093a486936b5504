#include "t4p/process.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cerrno>
#include <cstring>

#include "t4p/error.hpp"

extern char** environ;

namespace t4p {
namespace {

using Clock = std::chrono::steady_clock;

class Fd {
 public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  Fd(Fd&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}
  ~Fd() { reset(); }

  int get() const { return fd_; }
  void reset() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_ = -1;
};

struct Pipe {
  Fd read;
  Fd write;
};

Pipe make_pipe() {
  int fds[2];
  if (::pipe2(fds, O_CLOEXEC) != 0) {
    throw Error(ErrorKind::kEnvironment, std::string("pipe: ") + std::strerror(errno));
  }
  return {Fd(fds[0]), Fd(fds[1])};
}

std::vector<std::string> merged_environment(const std::map<std::string, std::string>& overlay) {
  std::map<std::string, std::string> merged;
  for (char** entry = environ; *entry != nullptr; ++entry) {
    std::string kv(*entry);
    auto eq = kv.find('=');
    if (eq == std::string::npos) continue;
    merged[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  for (const auto& [key, value] : overlay) merged[key] = value;
  std::vector<std::string> out;
  out.reserve(merged.size());
  for (const auto& [key, value] : merged) out.push_back(key + "=" + value);
  return out;
}

// Child side: only async-signal-safe calls between fork and exec.
[[noreturn]] void exec_child(char* const* argv, char* const* envp, const char* cwd, int out_fd,
                             int err_fd, int status_fd) {
  ::setpgid(0, 0);
  int null_fd = ::open("/dev/null", O_RDONLY);
  if (null_fd >= 0) {
    ::dup2(null_fd, STDIN_FILENO);
    if (null_fd != STDIN_FILENO) ::close(null_fd);
  }
  ::dup2(out_fd, STDOUT_FILENO);
  ::dup2(err_fd, STDERR_FILENO);
  if (cwd[0] != '\0' && ::chdir(cwd) != 0) {
    int err = errno;
    (void)!::write(status_fd, &err, sizeof(err));
    ::_exit(127);
  }
  ::execvpe(argv[0], argv, envp);
  int err = errno;
  (void)!::write(status_fd, &err, sizeof(err));
  ::_exit(127);
}

int decode_status(int status) {
  if (WIFEXITED(status)) return WEXITSTATUS(status);
  if (WIFSIGNALED(status)) return 128 + WTERMSIG(status);
  return -1;
}

}  // namespace

ProcessResult run_process(const ProcessRequest& request) {
  if (request.argv.empty()) throw Error(ErrorKind::kEnvironment, "empty command");

  std::vector<std::string> env_strings = merged_environment(request.env);
  std::vector<char*> envp;
  for (auto& s : env_strings) envp.push_back(s.data());
  envp.push_back(nullptr);
  std::vector<std::string> args = request.argv;
  std::vector<char*> argv;
  for (auto& s : args) argv.push_back(s.data());
  argv.push_back(nullptr);
  std::string cwd = request.cwd.string();

  Pipe out = make_pipe();
  Pipe err = make_pipe();
  Pipe status = make_pipe();

  auto started = Clock::now();
  pid_t pid = ::fork();
  if (pid < 0) throw Error(ErrorKind::kEnvironment, std::string("fork: ") + std::strerror(errno));
  if (pid == 0) {
    exec_child(argv.data(), envp.data(), cwd.c_str(), out.write.get(), err.write.get(),
               status.write.get());
  }
  // Mirror the child's setpgid so killpg works even if we win the race.
  ::setpgid(pid, pid);
  out.write.reset();
  err.write.reset();
  status.write.reset();

  int exec_errno = 0;
  ssize_t got = ::read(status.read.get(), &exec_errno, sizeof(exec_errno));
  if (got == static_cast<ssize_t>(sizeof(exec_errno))) {
    int ignored = 0;
    ::waitpid(pid, &ignored, 0);
    throw Error(ErrorKind::kEnvironment, "cannot start '" + request.argv.front() + "' in " + cwd +
                                             ": " + std::strerror(exec_errno));
  }

  ProcessResult result;
  std::array<pollfd, 2> fds{{{out.read.get(), POLLIN, 0}, {err.read.get(), POLLIN, 0}}};
  std::array<std::string*, 2> sinks{&result.stdout_text, &result.stderr_text};
  std::array<bool, 2> open{true, true};
  auto deadline = started + request.timeout;
  char buffer[8192];

  while (open[0] || open[1]) {
    int wait_ms = -1;
    if (request.timeout.count() > 0) {
      auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
      if (left.count() <= 0) {
        result.timed_out = true;
        break;
      }
      wait_ms = static_cast<int>(left.count());
    }
    int ready = ::poll(fds.data(), fds.size(), wait_ms);
    if (ready < 0) {
      if (errno == EINTR) continue;
      break;
    }
    for (std::size_t i = 0; i < fds.size(); ++i) {
      if (!open[i] || fds[i].revents == 0) continue;
      ssize_t n = ::read(fds[i].fd, buffer, sizeof(buffer));
      if (n > 0) {
        sinks[i]->append(buffer, static_cast<std::size_t>(n));
      } else if (n == 0 || (errno != EINTR && errno != EAGAIN)) {
        open[i] = false;
        fds[i].fd = -1;
      }
    }
  }

  // The streams may close before the process exits; keep honouring the
  // deadline while waiting.
  int wait_status = 0;
  bool bounded = request.timeout.count() > 0;
  while (!result.timed_out) {
    pid_t reaped = ::waitpid(pid, &wait_status, bounded ? WNOHANG : 0);
    if (reaped == pid) {
      result.exit_code = decode_status(wait_status);
      break;
    }
    if (reaped < 0 && errno != EINTR) {
      result.exit_code = -1;
      break;
    }
    if (bounded && Clock::now() >= deadline) {
      result.timed_out = true;
      break;
    }
    if (reaped == 0) ::usleep(1000);
  }
  if (result.timed_out) {
    ::kill(-pid, SIGKILL);
    while (::waitpid(pid, &wait_status, 0) < 0 && errno == EINTR) {
    }
  }
  result.duration = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - started);
  return result;
}

}  // namespace t4p
