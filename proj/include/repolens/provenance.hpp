#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "repolens/identity.hpp"
#include "repolens/ingest.hpp"
#include "repolens/time_utils.hpp"

namespace repolens {

struct StateDesync : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct CacheCorrupt : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One "editor overwrote original_author's code" interaction, aggregated per
// (commit, file, original_author). Self-edits never appear.
struct CoEditEvent {
  AuthorId editor;
  AuthorId original_author;
  std::string file;
  std::string commit_id;
  Timestamp time = 0;
  std::uint32_t lines = 0;
};

struct ContributionEvent {
  AuthorId developer;
  std::string file;
  std::string commit_id;
  Timestamp time = 0;
  std::uint32_t lines_added = 0;
  std::uint32_t lines_removed = 0;
};

struct EventLog {
  std::string repo;
  std::vector<CoEditEvent> coedits;
  std::vector<ContributionEvent> contributions;
  std::string head_commit;
};

// Supplies the diff of a merge commit against one parent; wired to
// diff_against_parent for real repositories.
using MergeDiffFn =
    std::function<std::vector<FileDiff>(const std::string& commit_id, const std::string& parent_id)>;

// Streaming line-ownership tracker. Snapshots are kept per commit (histories
// are DAGs, so one linear state cannot satisfy every child's parent
// precondition); file contents are structurally shared between snapshots.
class ProvenanceTracker {
 public:
  struct CommitEvents {
    std::vector<CoEditEvent> coedits;
    std::vector<ContributionEvent> contributions;
  };

  ProvenanceTracker(std::string repo_id, MergePolicy merge_policy, MergeDiffFn merge_diff);

  // Commits must arrive parents-first (walk_history order).
  CommitEvents apply_commit(const CommitRecord& commit);

  // Enables snapshot reclamation: a commit's snapshot is dropped once all its
  // children have been applied. Without this every snapshot is retained.
  void set_child_counts(std::map<std::string, int> counts);

  // Inspection hooks (blame-oracle tests). Line numbers are 1-based.
  std::optional<AuthorId> line_owner(const std::string& commit_id, const std::string& path,
                                     std::uint32_t line) const;
  std::optional<std::size_t> file_length(const std::string& commit_id,
                                         const std::string& path) const;
  std::vector<std::string> tracked_files(const std::string& commit_id) const;
  bool is_excluded(const std::string& commit_id, const std::string& path) const;

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

struct ExtractOptions {
  std::string repo_id;              // label recorded in the log; defaults to repo_path
  std::string cache_file;           // empty: no on-disk cache
  bool use_cache = true;
};

// walk_history folded through the tracker; cached on disk keyed by
// (repo, head_commit, options hash, tool version).
EventLog extract_events(const std::string& repo_path, const IngestOptions& opts,
                        const ExtractOptions& ext = {});

// Newline-delimited JSON cache codec (header, events, checksum trailer).
std::string serialize_event_log(const EventLog& log, const std::string& options_hash);
EventLog parse_event_log(const std::string& text, std::string* options_hash = nullptr,
                         std::string* tool_version = nullptr);

void sort_events(EventLog& log);

}  // namespace repolens
