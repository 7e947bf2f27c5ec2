//===-- report.hpp - Serialized comparison document -----------------------===//
//
// The report is one self-contained JSON document: both execution trees,
// every leaf with its path constraints (as s-expressions, so a service can
// answer solver queries from the file alone), pairs with their diffs, event
// streams per leaf and the concolic input log.
//
// Channel conventions: 0 stdout, 1 stderr, 2 virtual print, 3 network.
//
//===----------------------------------------------------------------------===//

#pragma once

#include "duet/compare.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace duet {

inline constexpr int kReportSchemaVersion = 1;
inline constexpr uint32_t kStdout = 0, kStderr = 1, kVirtualPrint = 2, kNetwork = 3;

struct ReportNode {
  uint32_t id = 0;
  std::optional<uint32_t> parent;
  std::vector<uint32_t> children;
  uint32_t start_pc = 0;
  std::optional<uint32_t> first_pc, last_pc;
  std::vector<std::string> constraints; // pretty, added at this node
  std::vector<std::string> flags;
  std::optional<std::string> terminal;
  std::string reason;
  bool dropped = false;
  std::vector<uint32_t> merged; // node ids folded in by compression

  bool is_leaf() const { return children.empty(); }
  bool operator==(const ReportNode &) const = default;
};

struct ReportTree {
  std::vector<ReportNode> nodes; // root first, then ascending id

  const ReportNode *find(uint32_t id) const;
  std::vector<uint32_t> leaf_ids() const;
  bool operator==(const ReportTree &) const = default;
};

struct VarDoc {
  std::string name;
  unsigned width = 8;
  bool operator==(const VarDoc &) const = default;
};

struct LeafDoc {
  uint32_t node = 0;
  std::string kind; // terminal kind
  std::string reason;
  std::vector<std::string> path_constraints; // s-expressions
  std::vector<std::string> path_pretty;
  std::vector<uint32_t> block_history;
  Assignment witness; // satisfies the path constraints
  std::map<uint32_t, std::vector<uint8_t>> sample_output; // effects under witness
  std::map<uint32_t, uint32_t> sample_regs;                // registers under witness

  bool errored() const;
  std::string sample_stdout() const; // channel 0 as Latin-1
  bool operator==(const LeafDoc &) const = default;
};

struct StreamLine {
  uint32_t node = 0;
  uint32_t pc = 0;
  std::string op; // instr, reg-write, mem-read, mem-write, effect, hook, directive, breakpoint
  std::string text;
  bool operator==(const StreamLine &) const = default;
};

struct LeafStreams {
  std::vector<StreamLine> instr;
  std::vector<StreamLine> access;  // register and memory traffic
  std::vector<StreamLine> effects; // text is "ch<N> <- payload"
  std::vector<StreamLine> notes;   // hooks, directives, breakpoints
  bool operator==(const LeafStreams &) const = default;

  /// Text of one stream for line diffing ("instr", "access", "effects").
  std::vector<std::string> lines(const std::string &which) const;
};

struct SideDoc {
  std::string binary;
  ReportTree tree;
  std::vector<LeafDoc> leaves; // ascending node id
  std::map<uint32_t, LeafStreams> streams;

  const LeafDoc *leaf(uint32_t node) const;
  bool operator==(const SideDoc &) const = default;
};

struct RegDiffDoc {
  unsigned reg = 0, hi = 31, lo = 0;
  std::string pre, post;
  bool differs = false;
  std::optional<Assignment> witness;
  bool operator==(const RegDiffDoc &) const = default;
};

struct MemDiffDoc {
  uint32_t addr = 0;
  std::string pre, post;
  bool written_pre = false, written_post = false;
  bool differs = false;
  std::optional<Assignment> witness;
  bool operator==(const MemDiffDoc &) const = default;
};

struct EffectPosDoc {
  std::optional<size_t> pre, post;
  std::string status;
  std::optional<Assignment> witness;
  bool operator==(const EffectPosDoc &) const = default;
};

struct ChannelDiffDoc {
  uint32_t channel = 0;
  std::vector<std::string> pre, post;
  std::vector<EffectPosDoc> positions;
  bool differs = false;
  bool operator==(const ChannelDiffDoc &) const = default;
};

struct PairDoc {
  uint32_t pre_leaf = 0, post_leaf = 0;
  Assignment witness;
  std::string cache; // how compatibility was decided
  std::string classification;
  std::optional<Assignment> pre_only, post_only;
  std::vector<RegDiffDoc> registers;
  std::vector<MemDiffDoc> memory;
  std::vector<ChannelDiffDoc> channels;
  std::optional<Assignment> counterexample;

  bool registers_differ() const;
  bool memory_differs() const;
  bool channel_differs(uint32_t ch) const;
  bool any_difference() const;
  bool operator==(const PairDoc &) const = default;
};

struct ReportMeta {
  std::string config_digest;
  std::string mode; // complete | concolic
  std::vector<VarDoc> inputs;
  unsigned max_bits = kDefaultSolverBits;
  bool property = false;
  StatsSnapshot stats;
  bool operator==(const ReportMeta &) const = default;
};

struct ReportDocument {
  int schema_version = kReportSchemaVersion;
  ReportMeta meta;
  SideDoc sides[2];
  std::vector<PairDoc> pairs;
  std::vector<Assignment> inputs_log;

  const SideDoc &side(Side s) const { return sides[int(s)]; }
  /// Pair index for two leaves, if they are compatible.
  std::optional<size_t> find_pair(uint32_t pre_leaf, uint32_t post_leaf) const;
  size_t counterexample_count() const;
  bool operator==(const ReportDocument &) const = default;
};

/// Deterministic given its inputs. config_text feeds the digest.
ReportDocument build_report(const Harness &h, const ComparisonResult &cr,
                            const std::string &config_text = "");

nlohmann::json to_json(const ReportDocument &d);
/// Throws Error on a malformed document or an unsupported schema version.
ReportDocument report_from_json(const nlohmann::json &j);

/// Level 0 returns the tree unchanged; level 1 folds a constraint-free
/// only child into its parent; level 2 folds every only child. Leaves are
/// never folded, so leaf ids survive every level.
ReportTree compress(const ReportTree &t, int level);

enum class PruneRelation {
  MemoryDiffers,
  RegisterDiffers,
  StdoutDiffers,
  StderrDiffers,
  EitherErrored,
  StdoutNotMatching,
};
const char *to_string(PruneRelation r);
std::optional<PruneRelation> prune_relation_from_string(std::string_view s);

struct PruneResult {
  std::set<uint32_t> visible[2];
};

/// A leaf is visible iff some pair containing it satisfies every relation.
/// Throws Error on an invalid regex.
PruneResult prune(const ReportDocument &d, const std::vector<PruneRelation> &relations,
                  const std::string &regex = "");

std::string textual_report(const ReportDocument &d);

/// One side's exploration alone: the tree plus each terminal's kind, path
/// constraints (s-expressions), effects and final registers.
nlohmann::json run_to_json(const RunResult &r);

} // namespace duet
