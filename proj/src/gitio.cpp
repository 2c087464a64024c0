#include "repolens/gitio.hpp"

#include <cerrno>
#include <cstring>

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

namespace repolens {

namespace {

void set_nonblock(int fd) { ::fcntl(fd, F_SETFL, ::fcntl(fd, F_GETFL) | O_NONBLOCK); }

}  // namespace

Subprocess::Subprocess(std::vector<std::string> argv, bool open_stdin) {
  if (argv.empty()) throw SubprocessError("empty argv");
  int out_pipe[2], err_pipe[2], in_pipe[2] = {-1, -1};
  if (::pipe(out_pipe) != 0 || ::pipe(err_pipe) != 0)
    throw SubprocessError("pipe() failed");
  if (open_stdin && ::pipe(in_pipe) != 0) throw SubprocessError("pipe() failed");

  pid_ = ::fork();
  if (pid_ < 0) throw SubprocessError("fork() failed");
  if (pid_ == 0) {
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::dup2(err_pipe[1], STDERR_FILENO);
    if (open_stdin) {
      ::dup2(in_pipe[0], STDIN_FILENO);
    } else {
      int devnull = ::open("/dev/null", O_RDONLY);
      if (devnull >= 0) ::dup2(devnull, STDIN_FILENO);
    }
    ::close(out_pipe[0]);
    ::close(out_pipe[1]);
    ::close(err_pipe[0]);
    ::close(err_pipe[1]);
    if (open_stdin) {
      ::close(in_pipe[0]);
      ::close(in_pipe[1]);
    }
    std::vector<char*> cargv;
    cargv.reserve(argv.size() + 1);
    for (auto& a : argv) cargv.push_back(a.data());
    cargv.push_back(nullptr);
    ::execvp(cargv[0], cargv.data());
    ::fprintf(stderr, "execvp %s: %s\n", cargv[0], std::strerror(errno));
    ::_exit(127);
  }
  ::close(out_pipe[1]);
  ::close(err_pipe[1]);
  out_fd_ = out_pipe[0];
  err_fd_ = err_pipe[0];
  set_nonblock(err_fd_);
  if (open_stdin) {
    ::close(in_pipe[0]);
    in_fd_ = in_pipe[1];
  }
}

Subprocess::~Subprocess() {
  if (pid_ > 0 && !exit_code_) {
    ::kill(pid_, SIGKILL);
    wait();
  }
  if (out_fd_ >= 0) ::close(out_fd_);
  if (err_fd_ >= 0) ::close(err_fd_);
  if (in_fd_ >= 0) ::close(in_fd_);
}

void Subprocess::drain_stderr(bool block) {
  if (err_fd_ < 0) return;
  char tmp[4096];
  for (;;) {
    ssize_t n = ::read(err_fd_, tmp, sizeof tmp);
    if (n > 0) {
      stderr_.append(tmp, static_cast<std::size_t>(n));
      continue;
    }
    if (n == 0) {
      ::close(err_fd_);
      err_fd_ = -1;
      return;
    }
    if (errno == EAGAIN || errno == EWOULDBLOCK) {
      if (!block) return;
      struct pollfd pfd{err_fd_, POLLIN, 0};
      ::poll(&pfd, 1, 100);
      continue;
    }
    if (errno == EINTR) continue;
    ::close(err_fd_);
    err_fd_ = -1;
    return;
  }
}

void Subprocess::fill_buffer() {
  // Compact consumed prefix to keep the buffer bounded.
  if (buf_pos_ > 0) {
    buf_.erase(0, buf_pos_);
    buf_pos_ = 0;
  }
  char tmp[65536];
  for (;;) {
    drain_stderr(false);
    ssize_t n = ::read(out_fd_, tmp, sizeof tmp);
    if (n > 0) {
      buf_.append(tmp, static_cast<std::size_t>(n));
      return;
    }
    if (n == 0) {
      eof_ = true;
      return;
    }
    if (errno == EINTR) continue;
    throw SubprocessError(std::string("read() failed: ") + std::strerror(errno));
  }
}

bool Subprocess::read_line(std::string& out) {
  for (;;) {
    auto nl = buf_.find('\n', buf_pos_);
    if (nl != std::string::npos) {
      out.assign(buf_, buf_pos_, nl - buf_pos_);
      buf_pos_ = nl + 1;
      return true;
    }
    if (eof_) {
      if (buf_pos_ < buf_.size()) {
        out.assign(buf_, buf_pos_, buf_.size() - buf_pos_);
        buf_pos_ = buf_.size();
        return true;
      }
      return false;
    }
    fill_buffer();
  }
}

void Subprocess::write_stdin(const std::string& data) {
  if (in_fd_ < 0) throw SubprocessError("stdin not open");
  std::size_t off = 0;
  while (off < data.size()) {
    ssize_t n = ::write(in_fd_, data.data() + off, data.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw SubprocessError(std::string("write() failed: ") + std::strerror(errno));
    }
    off += static_cast<std::size_t>(n);
  }
}

void Subprocess::close_stdin() {
  if (in_fd_ >= 0) {
    ::close(in_fd_);
    in_fd_ = -1;
  }
}

int Subprocess::wait() {
  if (exit_code_) return *exit_code_;
  close_stdin();
  drain_stderr(false);
  int status = 0;
  while (::waitpid(pid_, &status, 0) < 0 && errno == EINTR) {
  }
  drain_stderr(false);
  exit_code_ = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
  return *exit_code_;
}

CommandResult run_command(const std::vector<std::string>& argv, const std::string& stdin_data) {
  Subprocess p(argv, !stdin_data.empty());
  if (!stdin_data.empty()) {
    p.write_stdin(stdin_data);
    p.close_stdin();
  }
  std::string out, line;
  while (p.read_line(line)) {
    out += line;
    out += '\n';
  }
  int code = p.wait();
  return CommandResult{code, std::move(out), p.stderr_output()};
}

CommandResult run_git(const std::string& repo_path, const std::vector<std::string>& args,
                      const std::string& stdin_data) {
  std::vector<std::string> argv = {"git", "-C", repo_path};
  argv.insert(argv.end(), args.begin(), args.end());
  return run_command(argv, stdin_data);
}

BlobSizer::BlobSizer(const std::string& repo_path) {
  proc_ = std::make_unique<Subprocess>(
      std::vector<std::string>{"git", "-C", repo_path, "cat-file",
                               "--batch-check=%(objectname) %(objectsize)"},
      /*open_stdin=*/true);
}

std::optional<std::uint64_t> BlobSizer::size(const std::string& sha) {
  proc_->write_stdin(sha + "\n");
  std::string line;
  if (!proc_->read_line(line)) return std::nullopt;
  // "<sha> <size>" or "<sha> missing"
  auto sp = line.find(' ');
  if (sp == std::string::npos) return std::nullopt;
  std::string rest = line.substr(sp + 1);
  if (rest == "missing" || rest.find("missing") != std::string::npos) return std::nullopt;
  try {
    return std::stoull(rest);
  } catch (...) {
    return std::nullopt;
  }
}

}  // namespace repolens
