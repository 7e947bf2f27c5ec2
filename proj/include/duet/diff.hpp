//===-- diff.hpp - Longest-common-subsequence edit scripts ---------------===//
//
// Myers' O(ND) algorithm in its linear-space form: the middle snake splits
// the problem in two, so memory stays O(N+M) even for long, dissimilar event
// streams.
//
//===----------------------------------------------------------------------===//

#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace duet {

using ElemEq = std::function<bool(size_t i, size_t j)>;

/// Index pairs of a longest common subsequence of a[0,n) and b[0,m),
/// ascending in both coordinates.
std::vector<std::pair<size_t, size_t>> lcs_matches(size_t n, size_t m, const ElemEq &eq);

enum class EditKind { Keep, Delete, Insert };
const char *to_string(EditKind k);

struct EditRun {
  EditKind kind = EditKind::Keep;
  size_t a_pos = 0; // first element in a (Keep/Delete), or insertion point
  size_t b_pos = 0; // first element in b (Keep/Insert), or deletion point
  size_t len = 0;
};

/// Minimal script: within every gap between matches, deletions precede
/// insertions. Adjacent runs of one kind are merged.
std::vector<EditRun> edit_script(size_t n, size_t m, const ElemEq &eq);

struct LineEdit {
  EditKind kind = EditKind::Keep;
  std::vector<std::string> lines;
};

std::vector<LineEdit> line_diff(const std::vector<std::string> &a,
                                const std::vector<std::string> &b);

/// Replays a line diff on a; returns b when the script came from line_diff(a, b).
std::vector<std::string> apply_line_diff(const std::vector<std::string> &a,
                                         const std::vector<LineEdit> &script);

/// Unified-style rendering: "  ", "- ", "+ " prefixed lines.
std::string render_line_diff(const std::vector<LineEdit> &script);

} // namespace duet
