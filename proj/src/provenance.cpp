#include "repolens/provenance.hpp"

#include <algorithm>
#include <cassert>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "repolens/io_utils.hpp"
#include "repolens/text.hpp"
#include "repolens/version.hpp"

namespace repolens {

namespace {

using Json = nlohmann::json;

constexpr std::uint32_t kUnknownOwner = 0xFFFFFFFFu;

struct LineCell {
  std::uint32_t author = kUnknownOwner;
  Timestamp written_at = 0;
};

using FileLines = std::vector<LineCell>;
using FileLinesPtr = std::shared_ptr<const FileLines>;

struct Snapshot {
  std::map<std::string, FileLinesPtr> files;
  std::shared_ptr<const std::set<std::string>> excluded;

  Snapshot() : excluded(std::make_shared<std::set<std::string>>()) {}

  bool is_excluded(const std::string& p) const { return excluded->count(p) > 0; }
  void exclude(const std::string& p) {
    if (is_excluded(p)) return;
    auto copy = std::make_shared<std::set<std::string>>(*excluded);
    copy->insert(p);
    excluded = std::move(copy);
  }
  void unexclude(const std::string& p) {
    if (!is_excluded(p)) return;
    auto copy = std::make_shared<std::set<std::string>>(*excluded);
    copy->erase(p);
    excluded = std::move(copy);
  }
};

// Splices one file's hunks into a fresh line vector. Removed-line owners are
// reported through on_removed; added lines get `added` as their cell.
FileLines apply_hunks(const FileLines& base, const std::vector<HunkEdit>& hunks,
                      const LineCell& added,
                      const std::function<void(const LineCell&)>& on_removed,
                      const std::string& diag) {
  FileLines out;
  out.reserve(base.size());
  std::size_t cursor = 0;  // 0-based index into base
  std::vector<HunkEdit> sorted = hunks;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const HunkEdit& a, const HunkEdit& b) {
                     std::uint32_t abeg = a.old_len ? a.old_start : a.old_start + 1;
                     std::uint32_t bbeg = b.old_len ? b.old_start : b.old_start + 1;
                     return abeg < bbeg;
                   });
  for (const HunkEdit& h : sorted) {
    // For zero-length old ranges git reports the line *after which* the
    // insertion happens, so the first affected old index is old_start+1.
    std::size_t begin = h.old_len ? h.old_start : h.old_start + 1;
    if (begin < 1) begin = 1;
    std::size_t first = begin - 1;
    if (first < cursor || first > base.size() || first + h.old_len > base.size())
      throw StateDesync("hunk range [" + std::to_string(begin) + "," +
                        std::to_string(begin + h.old_len) + ") exceeds tracked length " +
                        std::to_string(base.size()) + " at " + diag);
    for (std::size_t i = cursor; i < first; ++i) out.push_back(base[i]);
    for (std::size_t i = 0; i < h.old_len; ++i) on_removed(base[first + i]);
    for (std::size_t i = 0; i < h.new_len; ++i) out.push_back(added);
    cursor = first + h.old_len;
  }
  for (std::size_t i = cursor; i < base.size(); ++i) out.push_back(base[i]);
  return out;
}

}  // namespace

struct ProvenanceTracker::Impl {
  std::string repo_id;
  MergePolicy merge_policy;
  MergeDiffFn merge_diff;

  std::vector<AuthorId> authors;
  std::map<std::string, std::uint32_t> author_index;

  std::map<std::string, Snapshot> snapshots;
  std::map<std::string, int> children_left;
  bool gc_enabled = false;

  std::uint32_t intern(const AuthorId& a) {
    auto it = author_index.find(a.canonical_key);
    if (it != author_index.end()) return it->second;
    std::uint32_t idx = static_cast<std::uint32_t>(authors.size());
    authors.push_back(a);
    author_index.emplace(a.canonical_key, idx);
    return idx;
  }

  const Snapshot& snapshot_of(const std::string& commit) const {
    auto it = snapshots.find(commit);
    if (it == snapshots.end())
      throw StateDesync("no retained snapshot for commit " + commit + " in " + repo_id);
    return it->second;
  }

  void release_parent(const std::string& parent) {
    if (!gc_enabled) return;
    auto it = children_left.find(parent);
    if (it == children_left.end()) return;
    if (--it->second <= 0) {
      snapshots.erase(parent);
      children_left.erase(it);
    }
  }

  // Applies one FileDiff on top of `next`, reading prior state from `base_snap`
  // (the untouched parent snapshot, so diffs inside one commit cannot observe
  // each other's writes). `emit` is false when rebuilding state across a
  // skipped merge.
  void apply_file_diff(const Snapshot& base_snap, Snapshot& next, const FileDiff& fd,
                       const CommitRecord& c, std::uint32_t author_idx, bool emit,
                       CommitEvents& ev,
                       std::map<std::pair<std::string, std::uint32_t>, std::uint32_t>& coedit_acc) {
    const bool has_old = fd.old_path.has_value();
    const bool has_new = fd.new_path.has_value();
    const std::string event_file = has_new ? *fd.new_path : *fd.old_path;

    if (fd.is_binary || fd.non_regular || fd.size_capped) {
      // Monotone exclusion: once a path is untrackable it stays untrackable,
      // otherwise later hunks could splice against a stale vector.
      if (has_old) {
        next.files.erase(*fd.old_path);
        next.exclude(*fd.old_path);
      }
      if (has_new) {
        next.files.erase(*fd.new_path);
        next.exclude(*fd.new_path);
      }
      return;
    }

    if (has_old && base_snap.is_excluded(*fd.old_path)) {
      if (!has_new) {
        next.unexclude(*fd.old_path);  // deletion ends the excluded identity
      } else if (*fd.new_path != *fd.old_path) {
        next.unexclude(*fd.old_path);
        next.exclude(*fd.new_path);
      }
      return;
    }
    if (!has_old && has_new && base_snap.is_excluded(*fd.new_path)) {
      // Path reused after the excluded identity was deleted; the fresh add
      // re-opens tracking.
      next.unexclude(*fd.new_path);
    }

    FileLines base;
    if (has_old) {
      auto it = base_snap.files.find(*fd.old_path);
      if (it == base_snap.files.end()) {
        if (fd.hunks.empty()) return;  // rename/mode change of an untracked file
        throw StateDesync("no tracked state for " + *fd.old_path + " at commit " + c.commit_id +
                          " in " + repo_id);
      }
      base = *it->second;
    }

    std::uint32_t removed_count = 0;
    LineCell added_cell{author_idx, c.author_time};
    FileLines lines = apply_hunks(
        base, fd.hunks, added_cell,
        [&](const LineCell& removed) {
          ++removed_count;
          if (removed.author != author_idx && removed.author != kUnknownOwner)
            coedit_acc[{event_file, removed.author}] += 1;
        },
        *((has_old ? fd.old_path : fd.new_path)) + "@" + c.commit_id);
    std::uint32_t added_count = 0;
    for (const HunkEdit& h : fd.hunks) added_count += h.new_len;

    if (has_old) next.files.erase(*fd.old_path);
    if (has_new) next.files[*fd.new_path] = std::make_shared<const FileLines>(std::move(lines));

    if (emit && added_count + removed_count >= 1) {
      ContributionEvent contrib;
      contrib.developer = c.author;
      contrib.file = event_file;
      contrib.commit_id = c.commit_id;
      contrib.time = c.author_time;
      contrib.lines_added = added_count;
      contrib.lines_removed = removed_count;
      ev.contributions.push_back(std::move(contrib));
    }
  }

  // Candidate ownership of the merge tree seen from one parent: lines
  // unchanged vs that parent keep its owners, lines added vs it are unknown.
  std::map<std::string, FileLines> merge_candidate(const Snapshot& parent_snap,
                                                   const std::vector<FileDiff>& diffs,
                                                   const CommitRecord& c) {
    std::map<std::string, FileLines> result;
    Snapshot work = parent_snap;
    CommitEvents scratch;
    std::map<std::pair<std::string, std::uint32_t>, std::uint32_t> acc;
    for (const FileDiff& fd : diffs) {
      try {
        apply_file_diff(parent_snap, work, fd, c, kUnknownOwner, /*emit=*/false, scratch, acc);
      } catch (const StateDesync&) {
        // Divergent branch state; this parent contributes no information
        // for the file.
        if (fd.new_path) {
          work.files.erase(*fd.new_path);
          work.exclude(*fd.new_path);
        }
      }
    }
    for (const auto& [path, lines] : work.files) result.emplace(path, *lines);
    return result;
  }
};

ProvenanceTracker::ProvenanceTracker(std::string repo_id, MergePolicy merge_policy,
                                     MergeDiffFn merge_diff)
    : impl_(std::make_shared<Impl>()) {
  impl_->repo_id = std::move(repo_id);
  impl_->merge_policy = merge_policy;
  impl_->merge_diff = std::move(merge_diff);
}

void ProvenanceTracker::set_child_counts(std::map<std::string, int> counts) {
  impl_->children_left = std::move(counts);
  impl_->gc_enabled = true;
}

ProvenanceTracker::CommitEvents ProvenanceTracker::apply_commit(const CommitRecord& c) {
  Impl& im = *impl_;
  CommitEvents ev;
  std::map<std::pair<std::string, std::uint32_t>, std::uint32_t> coedit_acc;
  std::uint32_t author_idx = im.intern(c.author);

  Snapshot parent_snap;
  if (!c.parent_ids.empty()) parent_snap = im.snapshot_of(c.parent_ids[0]);
  Snapshot snap = parent_snap;

  const bool skipped_merge = c.is_merge && im.merge_policy == MergePolicy::Skip;
  if (!skipped_merge) {
    for (const FileDiff& fd : c.file_diffs)
      im.apply_file_diff(parent_snap, snap, fd, c, author_idx, /*emit=*/true, ev, coedit_acc);
  } else if (im.merge_diff) {
    // Rebuild the merge tree's ownership without emitting events. Start from
    // the first-parent candidate (its file set IS the merge tree), then fill
    // unknown lines from the other parents; what stays unknown was written in
    // the merge itself and belongs to the merge author.
    auto diffs1 = im.merge_diff(c.commit_id, c.parent_ids[0]);
    auto primary = im.merge_candidate(snap, diffs1, c);

    // exclusion set: union over parents, plus flags seen in diffs1
    Snapshot merged;
    {
      auto ex = std::make_shared<std::set<std::string>>(*snap.excluded);
      for (std::size_t pi = 1; pi < c.parent_ids.size(); ++pi) {
        const Snapshot& ps = im.snapshot_of(c.parent_ids[pi]);
        ex->insert(ps.excluded->begin(), ps.excluded->end());
      }
      for (const FileDiff& fd : diffs1) {
        if (fd.is_binary || fd.non_regular || fd.size_capped) {
          if (fd.new_path) ex->insert(*fd.new_path);
          else if (fd.old_path) ex->insert(*fd.old_path);
        }
      }
      merged.excluded = std::move(ex);
    }

    std::vector<std::map<std::string, FileLines>> others;
    for (std::size_t pi = 1; pi < c.parent_ids.size(); ++pi) {
      const Snapshot& ps = im.snapshot_of(c.parent_ids[pi]);
      auto diffs = im.merge_diff(c.commit_id, c.parent_ids[pi]);
      others.push_back(im.merge_candidate(ps, diffs, c));
    }

    for (auto& [path, lines] : primary) {
      if (merged.is_excluded(path)) continue;
      bool has_unknown = false;
      for (const LineCell& cell : lines)
        if (cell.author == kUnknownOwner) {
          has_unknown = true;
          break;
        }
      if (has_unknown) {
        for (const auto& cand : others) {
          auto it = cand.find(path);
          if (it == cand.end() || it->second.size() != lines.size()) continue;
          for (std::size_t i = 0; i < lines.size(); ++i)
            if (lines[i].author == kUnknownOwner && it->second[i].author != kUnknownOwner)
              lines[i] = it->second[i];
        }
        for (LineCell& cell : lines)
          if (cell.author == kUnknownOwner) cell = LineCell{author_idx, c.author_time};
      }
      merged.files[path] = std::make_shared<const FileLines>(std::move(lines));
    }
    snap = std::move(merged);
  }
  // Skipped merge without a diff provider keeps the first-parent snapshot.

  for (const auto& [key, count] : coedit_acc) {
    CoEditEvent e;
    e.editor = c.author;
    e.original_author = im.authors[key.second];
    e.file = key.first;
    e.commit_id = c.commit_id;
    e.time = c.author_time;
    e.lines = count;
    ev.coedits.push_back(std::move(e));
  }

  im.snapshots[c.commit_id] = std::move(snap);
  for (const auto& p : c.parent_ids) im.release_parent(p);
  return ev;
}

std::optional<AuthorId> ProvenanceTracker::line_owner(const std::string& commit_id,
                                                      const std::string& path,
                                                      std::uint32_t line) const {
  auto it = impl_->snapshots.find(commit_id);
  if (it == impl_->snapshots.end()) return std::nullopt;
  auto fit = it->second.files.find(path);
  if (fit == it->second.files.end()) return std::nullopt;
  if (line < 1 || line > fit->second->size()) return std::nullopt;
  const LineCell& cell = (*fit->second)[line - 1];
  if (cell.author == kUnknownOwner) return std::nullopt;
  return impl_->authors[cell.author];
}

std::optional<std::size_t> ProvenanceTracker::file_length(const std::string& commit_id,
                                                          const std::string& path) const {
  auto it = impl_->snapshots.find(commit_id);
  if (it == impl_->snapshots.end()) return std::nullopt;
  auto fit = it->second.files.find(path);
  if (fit == it->second.files.end()) return std::nullopt;
  return fit->second->size();
}

std::vector<std::string> ProvenanceTracker::tracked_files(const std::string& commit_id) const {
  std::vector<std::string> out;
  auto it = impl_->snapshots.find(commit_id);
  if (it == impl_->snapshots.end()) return out;
  for (const auto& [path, _] : it->second.files) out.push_back(path);
  return out;
}

bool ProvenanceTracker::is_excluded(const std::string& commit_id, const std::string& path) const {
  auto it = impl_->snapshots.find(commit_id);
  if (it == impl_->snapshots.end()) return false;
  return it->second.is_excluded(path);
}

void sort_events(EventLog& log) {
  std::stable_sort(log.coedits.begin(), log.coedits.end(),
                   [](const CoEditEvent& a, const CoEditEvent& b) {
                     return std::tie(a.time, a.commit_id) < std::tie(b.time, b.commit_id);
                   });
  std::stable_sort(log.contributions.begin(), log.contributions.end(),
                   [](const ContributionEvent& a, const ContributionEvent& b) {
                     return std::tie(a.time, a.commit_id) < std::tie(b.time, b.commit_id);
                   });
}

namespace {

Json author_to_json(const AuthorId& a) {
  return Json{{"canonical_key", a.canonical_key},
              {"display_name", a.display_name},
              {"is_bot", a.is_bot}};
}

AuthorId author_from_json(const Json& j) {
  return AuthorId{j.at("canonical_key").get<std::string>(),
                  j.value("display_name", std::string{}), j.value("is_bot", false)};
}

}  // namespace

std::string serialize_event_log(const EventLog& log, const std::string& options_hash) {
  std::string out;
  Json header{{"repo", log.repo},
              {"head_commit", log.head_commit},
              {"options_hash", options_hash},
              {"tool_version", kToolVersion}};
  out += header.dump();
  out += '\n';
  std::string body;
  for (const auto& e : log.coedits) {
    Json j{{"kind", "coedit"},
           {"editor", author_to_json(e.editor)},
           {"original_author", author_to_json(e.original_author)},
           {"file", e.file},
           {"commit_id", e.commit_id},
           {"time", e.time},
           {"lines", e.lines}};
    body += j.dump();
    body += '\n';
  }
  for (const auto& e : log.contributions) {
    Json j{{"kind", "contribution"},
           {"developer", author_to_json(e.developer)},
           {"file", e.file},
           {"commit_id", e.commit_id},
           {"time", e.time},
           {"lines_added", e.lines_added},
           {"lines_removed", e.lines_removed}};
    body += j.dump();
    body += '\n';
  }
  out += body;
  Json trailer{{"checksum", fnv1a64_hex(body)}};
  out += trailer.dump();
  out += '\n';
  return out;
}

EventLog parse_event_log(const std::string& text, std::string* options_hash,
                         std::string* tool_version) {
  EventLog log;
  auto lines = split(text, '\n');
  if (lines.empty()) throw CacheCorrupt("empty event log");
  std::size_t n = lines.size();
  while (n > 0 && trim(lines[n - 1]).empty()) --n;
  if (n < 2) throw CacheCorrupt("truncated event log");

  Json header, trailer;
  try {
    header = Json::parse(lines[0]);
    trailer = Json::parse(lines[n - 1]);
  } catch (const Json::exception& e) {
    throw CacheCorrupt(std::string("bad event log envelope: ") + e.what());
  }
  if (!trailer.contains("checksum")) throw CacheCorrupt("missing checksum trailer");

  std::string body;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    body += lines[i];
    body += '\n';
  }
  if (fnv1a64_hex(body) != trailer.at("checksum").get<std::string>())
    throw CacheCorrupt("event log checksum mismatch");

  log.repo = header.value("repo", std::string{});
  log.head_commit = header.value("head_commit", std::string{});
  if (options_hash) *options_hash = header.value("options_hash", std::string{});
  if (tool_version) *tool_version = header.value("tool_version", std::string{});

  try {
    for (std::size_t i = 1; i + 1 < n; ++i) {
      Json j = Json::parse(lines[i]);
      const std::string kind = j.at("kind").get<std::string>();
      if (kind == "coedit") {
        CoEditEvent e;
        e.editor = author_from_json(j.at("editor"));
        e.original_author = author_from_json(j.at("original_author"));
        e.file = j.at("file").get<std::string>();
        e.commit_id = j.at("commit_id").get<std::string>();
        e.time = j.at("time").get<Timestamp>();
        e.lines = j.at("lines").get<std::uint32_t>();
        log.coedits.push_back(std::move(e));
      } else if (kind == "contribution") {
        ContributionEvent e;
        e.developer = author_from_json(j.at("developer"));
        e.file = j.at("file").get<std::string>();
        e.commit_id = j.at("commit_id").get<std::string>();
        e.time = j.at("time").get<Timestamp>();
        e.lines_added = j.at("lines_added").get<std::uint32_t>();
        e.lines_removed = j.at("lines_removed").get<std::uint32_t>();
        log.contributions.push_back(std::move(e));
      } else {
        throw CacheCorrupt("unknown event kind: " + kind);
      }
    }
  } catch (const Json::exception& e) {
    throw CacheCorrupt(std::string("bad event record: ") + e.what());
  }
  return log;
}

EventLog extract_events(const std::string& repo_path, const IngestOptions& opts,
                        const ExtractOptions& ext) {
  const std::string repo_id = ext.repo_id.empty() ? repo_path : ext.repo_id;
  const std::string options_hash = opts.cache_key();
  const std::string head = resolve_head(repo_path);

  if (ext.use_cache && !ext.cache_file.empty() &&
      std::filesystem::exists(ext.cache_file)) {
    try {
      std::string cached_hash, cached_version;
      EventLog log = parse_event_log(read_file(ext.cache_file), &cached_hash, &cached_version);
      if (log.head_commit == head && cached_hash == options_hash &&
          cached_version == kToolVersion && log.repo == repo_id)
        return log;
    } catch (const CacheCorrupt&) {
      // fall through and recompute
    }
  }

  EventLog log;
  log.repo = repo_id;
  log.head_commit = head;

  // Child counts let the tracker drop snapshots as soon as every child has
  // consumed them.
  std::map<std::string, int> child_counts;
  {
    auto res = run_git(repo_path, {"rev-list", "--topo-order", "--parents", "HEAD"});
    if (res.exit_code == 0) {
      for (const auto& line : split(res.out, '\n')) {
        auto ids = split(line, ' ');
        for (std::size_t i = 1; i < ids.size(); ++i)
          if (!ids[i].empty()) ++child_counts[ids[i]];
      }
    }
  }

  ProvenanceTracker tracker(
      repo_id, opts.merge_policy,
      [&repo_path, &opts](const std::string& commit, const std::string& parent) {
        return diff_against_parent(repo_path, parent, commit, opts);
      });
  tracker.set_child_counts(std::move(child_counts));

  walk_history(repo_path, opts, [&](CommitRecord&& rec) {
    auto ev = tracker.apply_commit(rec);
    std::move(ev.coedits.begin(), ev.coedits.end(), std::back_inserter(log.coedits));
    std::move(ev.contributions.begin(), ev.contributions.end(),
              std::back_inserter(log.contributions));
  });
  sort_events(log);

  if (ext.use_cache && !ext.cache_file.empty())
    write_file_atomic(ext.cache_file, serialize_event_log(log, options_hash));
  return log;
}

}  // namespace repolens
