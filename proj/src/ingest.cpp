#include "repolens/ingest.hpp"

#include <algorithm>
#include <charconv>

#include "repolens/gitio.hpp"
#include "repolens/io_utils.hpp"
#include "repolens/text.hpp"

namespace repolens {

namespace {

constexpr char kCommitMarker = '\x01';
constexpr char kFieldSep = '\x02';

std::optional<std::string> path_or_none(const std::string& p) {
  if (p == "/dev/null" || p.empty()) return std::nullopt;
  return p;
}

std::string strip_ab_prefix(const std::string& p) {
  if (p.size() >= 2 && (p[0] == 'a' || p[0] == 'b') && p[1] == '/') return p.substr(2);
  return p;
}

bool parse_hunk_header(const std::string& line, HunkEdit& h) {
  // @@ -old_start[,old_len] +new_start[,new_len] @@ ...
  if (!starts_with(line, "@@ -")) return false;
  const char* p = line.c_str() + 4;
  const char* end = line.c_str() + line.size();
  auto read_num = [&](std::uint32_t& out) {
    auto [next, ec] = std::from_chars(p, end, out);
    if (ec != std::errc()) return false;
    p = next;
    return true;
  };
  if (!read_num(h.old_start)) return false;
  h.old_len = 1;
  if (*p == ',') {
    ++p;
    if (!read_num(h.old_len)) return false;
  }
  if (*p != ' ' || *(p + 1) != '+') return false;
  p += 2;
  if (!read_num(h.new_start)) return false;
  h.new_len = 1;
  if (*p == ',') {
    ++p;
    if (!read_num(h.new_len)) return false;
  }
  return true;
}

bool is_non_regular_mode(const std::string& mode) {
  return mode == "120000" || mode == "160000";
}

struct FileSection {
  FileDiff diff;
  std::string new_blob_sha;  // from the index line, when present
  bool has_paths_from_body = false;
};

// One "diff --git ..." block.
FileSection parse_file_section(const std::vector<std::string>& lines, std::size_t begin,
                               std::size_t end) {
  FileSection sec;
  FileDiff& fd = sec.diff;
  std::string git_old, git_new;

  {
    // "diff --git a/X b/Y"; paths may be C-quoted. For unquoted paths with
    // spaces the split on " b/" mirrors git's own heuristic.
    const std::string& hdr = lines[begin];
    std::string rest = hdr.substr(std::string("diff --git ").size());
    if (!rest.empty() && rest[0] == '"') {
      std::size_t close = rest.find('"', 1);
      while (close != std::string::npos && rest[close - 1] == '\\')
        close = rest.find('"', close + 1);
      if (close != std::string::npos) {
        git_old = detail::unquote_git_path(rest.substr(0, close + 1));
        std::string tail = trim(rest.substr(close + 1));
        git_new = detail::unquote_git_path(tail);
      }
    } else {
      auto pos = rest.rfind(" b/");
      if (pos != std::string::npos) {
        git_old = rest.substr(0, pos);
        git_new = rest.substr(pos + 1);
      }
    }
    git_old = strip_ab_prefix(git_old);
    git_new = strip_ab_prefix(git_new);
  }

  bool deleted = false, added = false;
  std::string body_old, body_new;
  for (std::size_t i = begin + 1; i < end; ++i) {
    const std::string& ln = lines[i];
    if (starts_with(ln, "@@ ")) {
      HunkEdit h;
      if (parse_hunk_header(ln, h)) fd.hunks.push_back(h);
    } else if (starts_with(ln, "--- ")) {
      std::string p = ln.substr(4);
      if (!p.empty() && p.back() == '\t') p.pop_back();  // tab appended for spacey paths
      body_old = detail::unquote_git_path(p);
      sec.has_paths_from_body = true;
    } else if (starts_with(ln, "+++ ")) {
      std::string p = ln.substr(4);
      if (!p.empty() && p.back() == '\t') p.pop_back();
      body_new = detail::unquote_git_path(p);
      sec.has_paths_from_body = true;
    } else if (starts_with(ln, "rename from ")) {
      fd.is_rename = true;
      git_old = detail::unquote_git_path(ln.substr(12));
    } else if (starts_with(ln, "rename to ")) {
      fd.is_rename = true;
      git_new = detail::unquote_git_path(ln.substr(10));
    } else if (starts_with(ln, "copy from ")) {
      git_old = detail::unquote_git_path(ln.substr(10));
    } else if (starts_with(ln, "copy to ")) {
      git_new = detail::unquote_git_path(ln.substr(8));
      added = true;  // copies introduce a fresh file
    } else if (starts_with(ln, "deleted file mode ")) {
      deleted = true;
      if (is_non_regular_mode(ln.substr(18))) fd.non_regular = true;
    } else if (starts_with(ln, "new file mode ")) {
      added = true;
      if (is_non_regular_mode(ln.substr(14))) fd.non_regular = true;
    } else if (starts_with(ln, "new mode ") || starts_with(ln, "old mode ")) {
      if (is_non_regular_mode(trim(ln.substr(9)))) fd.non_regular = true;
    } else if (starts_with(ln, "index ")) {
      // index <old>..<new>[ <mode>]
      std::string rest = ln.substr(6);
      auto dots = rest.find("..");
      if (dots != std::string::npos) {
        std::string tail = rest.substr(dots + 2);
        auto sp = tail.find(' ');
        sec.new_blob_sha = sp == std::string::npos ? tail : tail.substr(0, sp);
        if (sp != std::string::npos && is_non_regular_mode(trim(tail.substr(sp + 1))))
          fd.non_regular = true;
      }
    } else if (starts_with(ln, "Binary files ") || starts_with(ln, "GIT binary patch")) {
      fd.is_binary = true;
    }
    // +/-/space/backslash body lines are skipped; counts come from @@ headers.
  }

  std::string old_p = git_old, new_p = git_new;
  if (sec.has_paths_from_body) {
    if (!body_old.empty()) old_p = body_old == "/dev/null" ? "" : strip_ab_prefix(body_old);
    if (!body_new.empty()) new_p = body_new == "/dev/null" ? "" : strip_ab_prefix(body_new);
  }
  if (fd.is_rename) {
    // rename from/to lines are authoritative
    old_p = git_old;
    new_p = git_new;
  }
  if (added && !fd.is_rename) old_p.clear();
  if (deleted) new_p.clear();

  fd.old_path = path_or_none(old_p);
  fd.new_path = path_or_none(new_p);
  if (fd.is_binary || fd.non_regular) fd.hunks.clear();
  return sec;
}

}  // namespace

namespace detail {

std::string unquote_git_path(const std::string& raw) {
  if (raw.size() < 2 || raw.front() != '"') return raw;
  std::string out;
  out.reserve(raw.size());
  for (std::size_t i = 1; i < raw.size(); ++i) {
    char c = raw[i];
    if (c == '"') break;
    if (c != '\\') {
      out.push_back(c);
      continue;
    }
    if (++i >= raw.size()) break;
    char e = raw[i];
    switch (e) {
      case 'n': out.push_back('\n'); break;
      case 't': out.push_back('\t'); break;
      case 'r': out.push_back('\r'); break;
      case 'a': out.push_back('\a'); break;
      case 'b': out.push_back('\b'); break;
      case 'f': out.push_back('\f'); break;
      case 'v': out.push_back('\v'); break;
      case '\\': out.push_back('\\'); break;
      case '"': out.push_back('"'); break;
      default:
        if (e >= '0' && e <= '7') {
          int v = 0, digits = 0;
          while (digits < 3 && i < raw.size() && raw[i] >= '0' && raw[i] <= '7') {
            v = v * 8 + (raw[i] - '0');
            ++i;
            ++digits;
          }
          --i;
          out.push_back(static_cast<char>(v));
        } else {
          out.push_back(e);
        }
    }
  }
  return out;
}

std::vector<FileDiff> parse_patch_lines(const std::vector<std::string>& lines) {
  std::vector<FileDiff> out;
  std::vector<std::size_t> headers;
  for (std::size_t i = 0; i < lines.size(); ++i)
    if (starts_with(lines[i], "diff --git ")) headers.push_back(i);
  for (std::size_t k = 0; k < headers.size(); ++k) {
    std::size_t begin = headers[k];
    std::size_t end = k + 1 < headers.size() ? headers[k + 1] : lines.size();
    out.push_back(parse_file_section(lines, begin, end).diff);
  }
  return out;
}

}  // namespace detail

std::string IngestOptions::cache_key() const {
  std::string s = "merge=";
  s += merge_policy == MergePolicy::Skip ? "skip" : "first-parent";
  s += ";rename=" + std::to_string(rename_threshold_pct);
  s += ";maxbytes=" + std::to_string(max_file_bytes);
  s += ";aliases=";
  for (const auto& [k, v] : alias_map) s += k + ">" + v + ",";
  s += ";bots=";
  for (const auto& p : bot_patterns) s += p + ",";
  return fnv1a64_hex(s);
}

std::string resolve_head(const std::string& repo_path) {
  auto dir = run_git(repo_path, {"rev-parse", "--git-dir"});
  if (dir.exit_code != 0) throw NotARepository("not a git repository: " + repo_path);
  auto head = run_git(repo_path, {"rev-parse", "--verify", "HEAD"});
  if (head.exit_code != 0) throw EmptyRepository("repository has no commits: " + repo_path);
  return trim(head.out);
}

struct HistoryWalker::Impl {
  std::string repo;
  IngestOptions opts;
  std::unique_ptr<Subprocess> log;
  std::unique_ptr<BlobSizer> sizer;
  std::string pending_header;  // marker line carried over between commits
  bool done = false;
  std::string last_commit;

  void apply_size_cap(FileDiff& fd, const std::string& new_sha) {
    if (fd.is_binary || fd.non_regular || fd.hunks.empty()) return;
    if (new_sha.empty() || new_sha.find_first_not_of('0') == std::string::npos) return;
    if (!sizer) sizer = std::make_unique<BlobSizer>(repo);
    auto sz = sizer->size(new_sha);
    if (sz && *sz > opts.max_file_bytes) {
      fd.size_capped = true;
      fd.hunks.clear();
    }
  }
};

HistoryWalker::HistoryWalker(std::string repo_path, IngestOptions opts)
    : impl_(std::make_unique<Impl>()) {
  impl_->repo = std::move(repo_path);
  impl_->opts = std::move(opts);
  head_ = resolve_head(impl_->repo);

  std::vector<std::string> argv = {
      "git", "-C", impl_->repo,
      "-c", "core.quotePath=true",
      "log", "--topo-order", "--reverse", "--no-color", "--no-ext-diff", "--no-textconv",
      "--full-index", "-U0",
      "--find-renames=" + std::to_string(impl_->opts.rename_threshold_pct) + "%",
      impl_->opts.merge_policy == MergePolicy::Skip ? "--diff-merges=off"
                                                    : "--diff-merges=first-parent",
      std::string("--format=") + kCommitMarker + "%H" + kFieldSep + "%P" + kFieldSep + "%an" +
          kFieldSep + "%ae" + kFieldSep + "%at",
      "HEAD"};
  impl_->log = std::make_unique<Subprocess>(argv);
}

HistoryWalker::~HistoryWalker() = default;

bool HistoryWalker::next(CommitRecord& out) {
  Impl& im = *impl_;
  if (im.done) return false;

  std::string header;
  if (!im.pending_header.empty()) {
    header = std::move(im.pending_header);
    im.pending_header.clear();
  } else {
    std::string line;
    for (;;) {
      if (!im.log->read_line(line)) {
        im.done = true;
        int code = im.log->wait();
        if (code != 0)
          throw CorruptObject("git log failed" +
                              (im.last_commit.empty() ? std::string()
                                                      : " after commit " + im.last_commit) +
                              ": " + im.log->stderr_output());
        return false;
      }
      if (!line.empty() && line[0] == kCommitMarker) {
        header = std::move(line);
        break;
      }
    }
  }

  auto fields = split(header.substr(1), kFieldSep);
  if (fields.size() != 5) throw CorruptObject("unparseable commit header: " + header);
  out = CommitRecord{};
  out.commit_id = fields[0];
  for (const auto& p : split(fields[1], ' '))
    if (!p.empty()) out.parent_ids.push_back(p);
  out.is_merge = out.parent_ids.size() >= 2;
  out.author = resolve_identity(fields[2], fields[3], im.opts.alias_map, im.opts.bot_patterns);
  out.author_time = std::stoll(fields[4]);
  im.last_commit = out.commit_id;

  // Collect patch lines until the next commit marker or EOF.
  std::vector<std::string> patch;
  std::string line;
  for (;;) {
    if (!im.log->read_line(line)) {
      im.done = true;
      int code = im.log->wait();
      if (code != 0)
        throw CorruptObject("git log failed after commit " + im.last_commit + ": " +
                            im.log->stderr_output());
      break;
    }
    if (!line.empty() && line[0] == kCommitMarker) {
      im.pending_header = std::move(line);
      break;
    }
    patch.push_back(std::move(line));
  }

  if (!(out.is_merge && im.opts.merge_policy == MergePolicy::Skip)) {
    std::vector<std::size_t> headers;
    for (std::size_t i = 0; i < patch.size(); ++i)
      if (starts_with(patch[i], "diff --git ")) headers.push_back(i);
    for (std::size_t k = 0; k < headers.size(); ++k) {
      std::size_t b = headers[k];
      std::size_t e = k + 1 < headers.size() ? headers[k + 1] : patch.size();
      auto sec = parse_file_section(patch, b, e);
      im.apply_size_cap(sec.diff, sec.new_blob_sha);
      out.file_diffs.push_back(std::move(sec.diff));
    }
  }
  return true;
}

void walk_history(const std::string& repo_path, const IngestOptions& opts,
                  const std::function<void(CommitRecord&&)>& sink) {
  HistoryWalker walker(repo_path, opts);
  CommitRecord rec;
  while (walker.next(rec)) sink(std::move(rec));
}

std::vector<CommitRecord> collect_history(const std::string& repo_path,
                                          const IngestOptions& opts) {
  std::vector<CommitRecord> out;
  walk_history(repo_path, opts, [&](CommitRecord&& r) { out.push_back(std::move(r)); });
  return out;
}

std::vector<FileDiff> diff_against_parent(const std::string& repo_path,
                                          const std::string& parent_id,
                                          const std::string& commit_id,
                                          const IngestOptions& opts) {
  auto res = run_git(repo_path,
                     {"-c", "core.quotePath=true", "diff-tree", "-r", "-U0", "--no-color",
                      "--full-index",
                      "--find-renames=" + std::to_string(opts.rename_threshold_pct) + "%",
                      parent_id, commit_id});
  if (res.exit_code != 0)
    throw CorruptObject("git diff-tree failed for " + commit_id + ": " + res.err);
  auto lines = split(res.out, '\n');
  std::vector<std::size_t> headers;
  for (std::size_t i = 0; i < lines.size(); ++i)
    if (starts_with(lines[i], "diff --git ")) headers.push_back(i);
  std::vector<FileDiff> diffs;
  std::unique_ptr<BlobSizer> sizer;
  for (std::size_t k = 0; k < headers.size(); ++k) {
    std::size_t b = headers[k];
    std::size_t e = k + 1 < headers.size() ? headers[k + 1] : lines.size();
    auto sec = parse_file_section(lines, b, e);
    if (!sec.diff.is_binary && !sec.diff.non_regular && !sec.diff.hunks.empty() &&
        !sec.new_blob_sha.empty() &&
        sec.new_blob_sha.find_first_not_of('0') != std::string::npos) {
      if (!sizer) sizer = std::make_unique<BlobSizer>(repo_path);
      auto sz = sizer->size(sec.new_blob_sha);
      if (sz && *sz > opts.max_file_bytes) {
        sec.diff.size_capped = true;
        sec.diff.hunks.clear();
      }
    }
    diffs.push_back(std::move(sec.diff));
  }
  return diffs;
}

}  // namespace repolens
