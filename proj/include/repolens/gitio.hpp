#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace repolens {

struct SubprocessError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thin fork/exec wrapper; no shell involved. stdout is consumed as a line
// stream, stderr is collected for diagnostics on wait().
class Subprocess {
 public:
  explicit Subprocess(std::vector<std::string> argv, bool open_stdin = false);
  ~Subprocess();
  Subprocess(const Subprocess&) = delete;
  Subprocess& operator=(const Subprocess&) = delete;

  // False on EOF. The returned line has no trailing newline.
  bool read_line(std::string& out);
  void write_stdin(const std::string& data);
  void close_stdin();

  // Reaps the child; returns exit code. Safe to call more than once.
  int wait();
  const std::string& stderr_output() const { return stderr_; }

 private:
  void fill_buffer();
  void drain_stderr(bool block);

  int pid_ = -1;
  int out_fd_ = -1;
  int err_fd_ = -1;
  int in_fd_ = -1;
  std::string buf_;
  std::size_t buf_pos_ = 0;
  bool eof_ = false;
  std::string stderr_;
  std::optional<int> exit_code_;
};

struct CommandResult {
  int exit_code;
  std::string out;
  std::string err;
};

CommandResult run_command(const std::vector<std::string>& argv,
                          const std::string& stdin_data = {});

CommandResult run_git(const std::string& repo_path, const std::vector<std::string>& args,
                      const std::string& stdin_data = {});

// Persistent `git cat-file --batch-check` helper for cheap blob-size lookups.
class BlobSizer {
 public:
  explicit BlobSizer(const std::string& repo_path);
  // nullopt when the object is missing.
  std::optional<std::uint64_t> size(const std::string& sha);

 private:
  std::unique_ptr<Subprocess> proc_;
};

}  // namespace repolens
