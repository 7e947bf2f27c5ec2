//===-- diff.cpp - Longest-common-subsequence edit scripts ---------------===//

#include "duet/diff.hpp"

#include <cstdint>
#include <stdexcept>

namespace duet {

const char *to_string(EditKind k) {
  switch (k) {
  case EditKind::Keep:
    return "keep";
  case EditKind::Delete:
    return "delete";
  case EditKind::Insert:
    return "insert";
  }
  return "?";
}

namespace {

struct Snake {
  int64_t xs, ys, x, y; // relative to the sub-problem origin
};

class Myers {
public:
  Myers(const ElemEq &eq, std::vector<std::pair<size_t, size_t>> &out) : eq_(eq), out_(out) {}

  void run(size_t a0, size_t a1, size_t b0, size_t b1) {
    while (a0 < a1 && b0 < b1 && eq_(a0, b0))
      out_.emplace_back(a0++, b0++);
    size_t sa = a1, sb = b1;
    while (sa > a0 && sb > b0 && eq_(sa - 1, sb - 1)) {
      --sa;
      --sb;
    }
    if (a0 < sa && b0 < sb) {
      Snake s = middle(a0, sa, b0, sb);
      run(a0, a0 + size_t(s.xs), b0, b0 + size_t(s.ys));
      for (int64_t i = 0; i < s.x - s.xs; ++i)
        out_.emplace_back(a0 + size_t(s.xs + i), b0 + size_t(s.ys + i));
      run(a0 + size_t(s.x), sa, b0 + size_t(s.y), sb);
    }
    for (size_t i = 0; sa + i < a1; ++i)
      out_.emplace_back(sa + i, sb + i);
  }

private:
  Snake middle(size_t a0, size_t a1, size_t b0, size_t b1) {
    const int64_t n = int64_t(a1 - a0), m = int64_t(b1 - b0);
    const int64_t delta = n - m;
    const bool odd = delta & 1;
    const int64_t dmax = (n + m + 1) / 2;
    const int64_t off = dmax + 1;
    vf_.assign(size_t(2 * off + 1), 0);
    vb_.assign(size_t(2 * off + 1), 0);
    auto F = [&](int64_t k) -> int64_t & { return vf_[size_t(k + off)]; };
    auto B = [&](int64_t k) -> int64_t & { return vb_[size_t(k + off)]; };
    for (int64_t d = 0; d <= dmax; ++d) {
      for (int64_t k = -d; k <= d; k += 2) {
        int64_t x = (k == -d || (k != d && F(k - 1) < F(k + 1))) ? F(k + 1) : F(k - 1) + 1;
        int64_t y = x - k;
        const int64_t xs = x, ys = y;
        while (x < n && y < m && eq_(a0 + size_t(x), b0 + size_t(y))) {
          ++x;
          ++y;
        }
        F(k) = x;
        const int64_t c = delta - k;
        if (odd && c >= -(d - 1) && c <= d - 1 && x + B(c) >= n)
          return {xs, ys, x, y};
      }
      for (int64_t k = -d; k <= d; k += 2) {
        int64_t x = (k == -d || (k != d && B(k - 1) < B(k + 1))) ? B(k + 1) : B(k - 1) + 1;
        int64_t y = x - k;
        const int64_t xs = x, ys = y;
        while (x < n && y < m && eq_(a1 - 1 - size_t(x), b1 - 1 - size_t(y))) {
          ++x;
          ++y;
        }
        B(k) = x;
        const int64_t c = delta - k;
        if (!odd && c >= -d && c <= d && x + F(c) >= n)
          return {n - x, m - y, n - xs, m - ys};
      }
    }
    throw std::logic_error("middle snake not found");
  }

  const ElemEq &eq_;
  std::vector<std::pair<size_t, size_t>> &out_;
  std::vector<int64_t> vf_, vb_;
};

} // namespace

std::vector<std::pair<size_t, size_t>> lcs_matches(size_t n, size_t m, const ElemEq &eq) {
  std::vector<std::pair<size_t, size_t>> out;
  Myers(eq, out).run(0, n, 0, m);
  return out;
}

std::vector<EditRun> edit_script(size_t n, size_t m, const ElemEq &eq) {
  std::vector<EditRun> runs;
  auto push = [&](EditKind k, size_t a, size_t b, size_t len) {
    if (!len)
      return;
    if (!runs.empty() && runs.back().kind == k) {
      runs.back().len += len;
      return;
    }
    runs.push_back({k, a, b, len});
  };
  size_t i = 0, j = 0;
  auto matches = lcs_matches(n, m, eq);
  matches.emplace_back(n, m); // sentinel
  for (auto [mi, mj] : matches) {
    push(EditKind::Delete, i, j, mi - i);
    push(EditKind::Insert, mi, j, mj - j);
    if (mi < n)
      push(EditKind::Keep, mi, mj, 1);
    i = mi + 1;
    j = mj + 1;
  }
  return runs;
}

std::vector<LineEdit> line_diff(const std::vector<std::string> &a,
                                const std::vector<std::string> &b) {
  std::vector<LineEdit> out;
  for (const EditRun &r : edit_script(a.size(), b.size(),
                                      [&](size_t i, size_t j) { return a[i] == b[j]; })) {
    LineEdit e;
    e.kind = r.kind;
    const auto &src = r.kind == EditKind::Insert ? b : a;
    const size_t from = r.kind == EditKind::Insert ? r.b_pos : r.a_pos;
    e.lines.assign(src.begin() + long(from), src.begin() + long(from + r.len));
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<std::string> apply_line_diff(const std::vector<std::string> &a,
                                         const std::vector<LineEdit> &script) {
  std::vector<std::string> out;
  size_t pos = 0;
  for (const LineEdit &e : script) {
    switch (e.kind) {
    case EditKind::Keep:
      for (const auto &l : e.lines) {
        if (pos >= a.size() || a[pos] != l)
          throw std::invalid_argument("edit script does not match input");
        out.push_back(a[pos++]);
      }
      break;
    case EditKind::Delete:
      for (const auto &l : e.lines)
        if (pos >= a.size() || a[pos++] != l)
          throw std::invalid_argument("edit script does not match input");
      break;
    case EditKind::Insert:
      out.insert(out.end(), e.lines.begin(), e.lines.end());
      break;
    }
  }
  if (pos != a.size())
    throw std::invalid_argument("edit script does not consume the input");
  return out;
}

std::string render_line_diff(const std::vector<LineEdit> &script) {
  std::string out;
  for (const LineEdit &e : script) {
    const char *prefix = e.kind == EditKind::Keep ? "  " : e.kind == EditKind::Delete ? "- " : "+ ";
    for (const auto &l : e.lines)
      out += prefix + l + "\n";
  }
  return out;
}

} // namespace duet
