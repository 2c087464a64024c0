#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "repolens/identity.hpp"
#include "repolens/time_utils.hpp"

namespace repolens {

struct NotARepository : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct EmptyRepository : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct CorruptObject : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct HunkEdit {
  std::uint32_t old_start = 0;  // 1-based; 0 only for pure insertions at top
  std::uint32_t old_len = 0;
  std::uint32_t new_start = 0;
  std::uint32_t new_len = 0;

  std::uint32_t removed_lines() const { return old_len; }
  std::uint32_t added_lines() const { return new_len; }
};

struct FileDiff {
  std::optional<std::string> old_path;  // none: added file
  std::optional<std::string> new_path;  // none: deleted file
  bool is_binary = false;
  bool is_rename = false;
  bool size_capped = false;   // blob above max_file_bytes; hunks dropped
  bool non_regular = false;   // symlink or gitlink entry; hunks dropped
  std::vector<HunkEdit> hunks;

  const std::string& tracked_old_path() const { return *old_path; }
  const std::string& tracked_new_path() const { return *new_path; }
};

struct CommitRecord {
  std::string commit_id;
  AuthorId author;
  Timestamp author_time = 0;
  std::vector<std::string> parent_ids;
  bool is_merge = false;
  std::vector<FileDiff> file_diffs;
};

enum class MergePolicy { Skip, FirstParent };

struct IngestOptions {
  MergePolicy merge_policy = MergePolicy::Skip;
  int rename_threshold_pct = 50;
  std::uint64_t max_file_bytes = 1u << 20;
  AliasMap alias_map;
  std::vector<std::string> bot_patterns = default_bot_patterns();

  std::string cache_key() const;  // stable fingerprint for cache invalidation
};

// Validates the repository and returns the default-branch head id.
std::string resolve_head(const std::string& repo_path);

// Streams commits reachable from HEAD, parents before children. Non-merge
// commits carry diffs vs their single parent (empty tree for roots). Merge
// commits carry empty file_diffs under MergePolicy::Skip and first-parent
// diffs under MergePolicy::FirstParent.
class HistoryWalker {
 public:
  HistoryWalker(std::string repo_path, IngestOptions opts);
  ~HistoryWalker();

  bool next(CommitRecord& out);
  const std::string& head_commit() const { return head_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::string head_;
};

void walk_history(const std::string& repo_path, const IngestOptions& opts,
                  const std::function<void(CommitRecord&&)>& sink);

std::vector<CommitRecord> collect_history(const std::string& repo_path,
                                          const IngestOptions& opts);

// Diff of `commit` against one designated parent; used to rebuild ownership
// state across skipped merges.
std::vector<FileDiff> diff_against_parent(const std::string& repo_path,
                                          const std::string& parent_id,
                                          const std::string& commit_id,
                                          const IngestOptions& opts);

namespace detail {
std::string unquote_git_path(const std::string& raw);
std::vector<FileDiff> parse_patch_lines(const std::vector<std::string>& lines);
}  // namespace detail

}  // namespace repolens
