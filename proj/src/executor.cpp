#include "practice/executor.hpp"

#include "practice/error.hpp"

#include <cerrno>
#include <csignal>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>

#include <fcntl.h>
#include <poll.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

namespace practice {

namespace {

class TempSource {
 public:
  TempSource(std::string_view source, const std::string& suffix) {
    std::string pattern =
        (std::filesystem::temp_directory_path() / ("practice-src-XXXXXX" + suffix)).string();
    std::vector<char> buf(pattern.begin(), pattern.end());
    buf.push_back('\0');
    const int fd = ::mkstemps(buf.data(), static_cast<int>(suffix.size()));
    if (fd < 0) {
      throw Error(ErrorCode::ExecutorFailure, std::string("mkstemps: ") + std::strerror(errno));
    }
    path_ = buf.data();
    std::size_t written = 0;
    while (written < source.size()) {
      const ssize_t n = ::write(fd, source.data() + written, source.size() - written);
      if (n <= 0) break;
      written += static_cast<std::size_t>(n);
    }
    ::close(fd);
  }
  ~TempSource() {
    std::error_code ec;
    std::filesystem::remove(path_, ec);
  }
  TempSource(const TempSource&) = delete;
  TempSource& operator=(const TempSource&) = delete;

  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  out += '\'';
  return out;
}

}  // namespace

CommandExecutor::CommandExecutor(std::string command_template, std::chrono::milliseconds timeout,
                                 std::string source_suffix)
    : command_template_(std::move(command_template)),
      timeout_(timeout),
      source_suffix_(std::move(source_suffix)) {}

ExecutionResult CommandExecutor::run(std::string_view source,
                                     const std::vector<std::string>& stdin_lines) {
  TempSource file(source, source_suffix_);

  std::string command = command_template_;
  const std::string placeholder = "{source}";
  for (std::size_t pos = command.find(placeholder); pos != std::string::npos;
       pos = command.find(placeholder, pos)) {
    const std::string quoted = shell_quote(file.path());
    command.replace(pos, placeholder.size(), quoted);
    pos += quoted.size();
  }

  std::string input;
  for (const auto& line : stdin_lines) {
    input += line;
    input += '\n';
  }

  int in_pipe[2];
  int out_pipe[2];
  if (::pipe(in_pipe) != 0) {
    throw Error(ErrorCode::ExecutorFailure, std::string("pipe: ") + std::strerror(errno));
  }
  if (::pipe(out_pipe) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    throw Error(ErrorCode::ExecutorFailure, std::string("pipe: ") + std::strerror(errno));
  }

  const pid_t pid = ::fork();
  if (pid < 0) {
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) ::close(fd);
    throw Error(ErrorCode::ExecutorFailure, std::string("fork: ") + std::strerror(errno));
  }
  if (pid == 0) {
    ::setpgid(0, 0);
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    const int devnull = ::open("/dev/null", O_WRONLY);
    if (devnull >= 0) ::dup2(devnull, STDERR_FILENO);
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) ::close(fd);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }

  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  // Large inputs would need interleaved writes; test-case stdin is small.
  std::signal(SIGPIPE, SIG_IGN);
  std::size_t sent = 0;
  while (sent < input.size()) {
    const ssize_t n = ::write(in_pipe[1], input.data() + sent, input.size() - sent);
    if (n <= 0) break;
    sent += static_cast<std::size_t>(n);
  }
  ::close(in_pipe[1]);

  ExecutionResult result;
  const auto deadline = std::chrono::steady_clock::now() + timeout_;
  bool timed_out = false;
  char buf[4096];
  while (true) {
    const auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (remaining.count() <= 0) {
      timed_out = true;
      break;
    }
    pollfd pfd{out_pipe[0], POLLIN, 0};
    const int rc = ::poll(&pfd, 1, static_cast<int>(remaining.count()));
    if (rc < 0) {
      if (errno == EINTR) continue;
      break;
    }
    if (rc == 0) {
      timed_out = true;
      break;
    }
    const ssize_t n = ::read(out_pipe[0], buf, sizeof buf);
    if (n <= 0) break;
    result.stdout_text.append(buf, static_cast<std::size_t>(n));
  }
  ::close(out_pipe[0]);

  if (timed_out) ::kill(-pid, SIGKILL);
  int status = 0;
  while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }

  if (timed_out) {
    result.failure = "timeout";
  } else if (WIFEXITED(status) && WEXITSTATUS(status) == 0) {
    result.ok = true;
  } else if (WIFEXITED(status)) {
    result.failure = "exit status " + std::to_string(WEXITSTATUS(status));
  } else {
    result.failure = "terminated by signal";
  }
  return result;
}

}  // namespace practice
