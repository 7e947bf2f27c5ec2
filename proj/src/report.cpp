//===-- report.cpp - Serialized comparison document -----------------------===//

#include "duet/report.hpp"
#include "duet/error.hpp"

#include <algorithm>
#include <deque>
#include <regex>
#include <sstream>

namespace duet {

using nlohmann::json;

const ReportNode *ReportTree::find(uint32_t id) const {
  for (const auto &n : nodes)
    if (n.id == id)
      return &n;
  return nullptr;
}

std::vector<uint32_t> ReportTree::leaf_ids() const {
  std::vector<uint32_t> out;
  for (const auto &n : nodes)
    if (n.is_leaf())
      out.push_back(n.id);
  std::sort(out.begin(), out.end());
  return out;
}

bool LeafDoc::errored() const {
  auto k = terminal_kind_from_string(kind);
  return k && is_error_kind(*k);
}

std::string LeafDoc::sample_stdout() const {
  auto it = sample_output.find(kStdout);
  if (it == sample_output.end())
    return "";
  return std::string(it->second.begin(), it->second.end());
}

std::vector<std::string> LeafStreams::lines(const std::string &which) const {
  const std::vector<StreamLine> *src = which == "instr"     ? &instr
                                       : which == "access"  ? &access
                                       : which == "effects" ? &effects
                                       : which == "notes"   ? &notes
                                                            : nullptr;
  if (!src)
    throw Error("unknown stream '" + which + "'");
  std::vector<std::string> out;
  for (const auto &l : *src)
    out.push_back(l.text);
  return out;
}

const LeafDoc *SideDoc::leaf(uint32_t node) const {
  for (const auto &l : leaves)
    if (l.node == node)
      return &l;
  return nullptr;
}

bool PairDoc::registers_differ() const {
  return std::any_of(registers.begin(), registers.end(), [](auto &r) { return r.differs; });
}

bool PairDoc::memory_differs() const {
  return std::any_of(memory.begin(), memory.end(), [](auto &m) { return m.differs; });
}

bool PairDoc::channel_differs(uint32_t ch) const {
  for (const auto &c : channels)
    if (c.channel == ch)
      return c.differs;
  return false;
}

bool PairDoc::any_difference() const {
  return registers_differ() || memory_differs() ||
         std::any_of(channels.begin(), channels.end(), [](auto &c) { return c.differs; });
}

std::optional<size_t> ReportDocument::find_pair(uint32_t pre_leaf, uint32_t post_leaf) const {
  for (size_t i = 0; i < pairs.size(); ++i)
    if (pairs[i].pre_leaf == pre_leaf && pairs[i].post_leaf == post_leaf)
      return i;
  return std::nullopt;
}

size_t ReportDocument::counterexample_count() const {
  return size_t(std::count_if(pairs.begin(), pairs.end(),
                              [](auto &p) { return p.counterexample.has_value(); }));
}

// --- build ------------------------------------------------------------------

namespace {

std::string event_op(EventKind k) {
  switch (k) {
  case EventKind::Instr:
    return "instr";
  case EventKind::RegWrite:
    return "reg-write";
  case EventKind::MemRead:
    return "mem-read";
  case EventKind::MemWrite:
    return "mem-write";
  case EventKind::Effect:
    return "effect";
  case EventKind::Hook:
    return "hook";
  case EventKind::Directive:
    return "directive";
  case EventKind::Breakpoint:
    return "breakpoint";
  }
  return "?";
}

// Instruction events read "<pc>: <disassembly>"; the pc is kept separately
// so that streams of shifted code still align.
std::string strip_pc(const std::string &text) {
  size_t colon = text.find(": ");
  if (colon != std::string::npos &&
      std::all_of(text.begin(), text.begin() + long(colon), [](char c) { return std::isdigit(c); }))
    return text.substr(colon + 2);
  return text;
}

ReportTree tree_of(const RunResult &r) {
  ReportTree t;
  for (const ExecNode &n : r.tree) {
    ReportNode d;
    d.id = n.id;
    d.parent = n.parent;
    d.children = n.children;
    d.start_pc = n.start_pc;
    d.first_pc = n.first_pc;
    d.last_pc = n.last_pc;
    for (Term c : n.constraints)
      d.constraints.push_back(pretty(c));
    d.flags = flag_names(n.flags);
    if (n.terminal)
      d.terminal = to_string(*n.terminal);
    d.reason = n.reason;
    d.dropped = n.dropped;
    t.nodes.push_back(std::move(d));
  }
  return t;
}

LeafStreams streams_of(const RunResult &r, uint32_t leaf) {
  LeafStreams s;
  for (uint32_t id : r.path_to(leaf))
    for (const Event &e : r.node(id).events) {
      StreamLine l{id, e.pc, event_op(e.kind), e.text};
      switch (e.kind) {
      case EventKind::Instr:
        l.text = strip_pc(e.text);
        s.instr.push_back(std::move(l));
        break;
      case EventKind::RegWrite:
      case EventKind::MemRead:
      case EventKind::MemWrite:
        s.access.push_back(std::move(l));
        break;
      case EventKind::Effect:
        s.effects.push_back(std::move(l));
        break;
      default:
        s.notes.push_back(std::move(l));
      }
    }
  return s;
}

Assignment total(const Harness &h, Assignment a) {
  for (const auto &in : h.inputs)
    a.emplace(in.name, 0);
  return a;
}

std::optional<Assignment> opt_model(bool has, const Assignment &m) {
  return has ? std::optional<Assignment>(m) : std::nullopt;
}

PairDoc pair_doc(const CompatiblePair &p, const DiffReport &d) {
  PairDoc out;
  out.pre_leaf = p.pre_node;
  out.post_leaf = p.post_node;
  out.witness = p.witness;
  out.cache = to_string(p.how);
  out.classification = to_string(d.classification.kind);
  out.pre_only = d.classification.pre_only;
  out.post_only = d.classification.post_only;
  for (const auto &r : d.registers)
    out.registers.push_back({r.slice.reg, r.slice.hi, r.slice.lo, pretty_short(r.pre),
                             pretty_short(r.post), r.differs, opt_model(r.differs, r.witness)});
  for (const auto &m : d.memory)
    out.memory.push_back({m.addr, pretty_short(m.pre), pretty_short(m.post), m.written_pre,
                          m.written_post, m.differs, opt_model(m.differs, m.witness)});
  for (const auto &c : d.channels) {
    ChannelDiffDoc cd;
    cd.channel = c.channel;
    for (Term t : c.pre)
      cd.pre.push_back(pretty_short(t));
    for (Term t : c.post)
      cd.post.push_back(pretty_short(t));
    for (const auto &pos : c.positions)
      cd.positions.push_back({pos.pre, pos.post, to_string(pos.status),
                              opt_model(pos.status == EffectStatus::Differs, pos.witness)});
    cd.differs = c.differs();
    out.channels.push_back(std::move(cd));
  }
  return out;
}

} // namespace

ReportDocument build_report(const Harness &h, const ComparisonResult &cr,
                            const std::string &config_text) {
  ReportDocument doc;
  doc.meta.config_digest = config_digest(config_text);
  doc.meta.mode = cr.concolic ? "concolic" : "complete";
  for (const auto &in : h.inputs)
    doc.meta.inputs.push_back({in.name, in.width});
  doc.meta.max_bits = h.max_bits;
  doc.meta.property = h.property.enabled();
  doc.meta.stats = cr.stats;

  SolverSession fallback(h.max_bits, false);
  for (Side side : {Side::Pre, Side::Post}) {
    const RunResult &run = cr.run(side);
    SideDoc &sd = doc.sides[int(side)];
    sd.binary = h.spec(side).path.empty() ? "<inline>" : h.spec(side).path;
    sd.tree = tree_of(run);
    for (size_t i = 0; i < run.terminals.size(); ++i) {
      const SymState &s = run.terminals[i];
      LeafDoc l;
      l.node = s.node_id;
      l.kind = s.terminal ? to_string(*s.terminal) : "";
      l.reason = s.reason;
      for (Term c : s.constraints) {
        l.path_constraints.push_back(to_sexpr(c));
        l.path_pretty.push_back(pretty(c));
      }
      l.block_history = s.block_history;
      // Any pair containing the leaf carries a model of its constraints.
      std::optional<Assignment> w;
      for (const auto &p : cr.pairs)
        if ((side == Side::Pre ? p.pre_index : p.post_index) == i) {
          w = p.witness;
          break;
        }
      if (!w) {
        SatResult r = fallback.check(Query(s.constraints)).result;
        w = r.sat ? r.model : Assignment{};
      }
      l.witness = total(h, *w);
      for (const auto &e : s.effects)
        l.sample_output[e.channel].push_back(uint8_t(eval_or_zero(e.payload, l.witness)));
      for (unsigned r = 0; r < kNumRegs; ++r)
        l.sample_regs[r] = eval_or_zero(s.regs[r], l.witness);
      sd.streams[s.node_id] = streams_of(run, s.node_id);
      sd.leaves.push_back(std::move(l));
    }
  }

  for (size_t k = 0; k < cr.pairs.size(); ++k)
    doc.pairs.push_back(pair_doc(cr.pairs[k], cr.diffs[k]));
  for (const auto &c : cr.counterexamples)
    doc.pairs.at(c.pair).counterexample = total(h, c.input);
  doc.inputs_log = cr.inputs_log;
  return doc;
}

// --- JSON -------------------------------------------------------------------

namespace {

template <class T> json opt(const std::optional<T> &v) { return v ? json(*v) : json(nullptr); }

template <class T> std::optional<T> get_opt(const json &j, const char *key) {
  if (!j.contains(key) || j.at(key).is_null())
    return std::nullopt;
  return j.at(key).get<T>();
}

json lines_json(const std::vector<StreamLine> &ls) {
  json a = json::array();
  for (const auto &l : ls)
    a.push_back({{"node", l.node}, {"pc", l.pc}, {"op", l.op}, {"text", l.text}});
  return a;
}

std::vector<StreamLine> lines_from(const json &a) {
  std::vector<StreamLine> out;
  for (const auto &l : a)
    out.push_back({l.at("node").get<uint32_t>(), l.at("pc").get<uint32_t>(),
                   l.at("op").get<std::string>(), l.at("text").get<std::string>()});
  return out;
}

json node_json(const ReportNode &n) {
  return {{"id", n.id},
          {"parent", opt(n.parent)},
          {"children", n.children},
          {"start_pc", n.start_pc},
          {"first_pc", opt(n.first_pc)},
          {"last_pc", opt(n.last_pc)},
          {"constraints", n.constraints},
          {"flags", n.flags},
          {"terminal", opt(n.terminal)},
          {"reason", n.reason},
          {"dropped", n.dropped},
          {"merged", n.merged}};
}

ReportNode node_from(const json &j) {
  ReportNode n;
  n.id = j.at("id").get<uint32_t>();
  n.parent = get_opt<uint32_t>(j, "parent");
  n.children = j.at("children").get<std::vector<uint32_t>>();
  n.start_pc = j.at("start_pc").get<uint32_t>();
  n.first_pc = get_opt<uint32_t>(j, "first_pc");
  n.last_pc = get_opt<uint32_t>(j, "last_pc");
  n.constraints = j.at("constraints").get<std::vector<std::string>>();
  n.flags = j.at("flags").get<std::vector<std::string>>();
  n.terminal = get_opt<std::string>(j, "terminal");
  n.reason = j.at("reason").get<std::string>();
  n.dropped = j.at("dropped").get<bool>();
  n.merged = j.value("merged", std::vector<uint32_t>{});
  return n;
}

json keyed(const std::map<uint32_t, std::vector<uint8_t>> &m) {
  json o = json::object();
  for (const auto &[k, v] : m)
    o[std::to_string(k)] = v;
  return o;
}

json keyed(const std::map<uint32_t, uint32_t> &m) {
  json o = json::object();
  for (const auto &[k, v] : m)
    o[std::to_string(k)] = v;
  return o;
}

template <class V> std::map<uint32_t, V> unkeyed(const json &o) {
  std::map<uint32_t, V> m;
  for (const auto &[k, v] : o.items())
    m[uint32_t(std::stoul(k))] = v.template get<V>();
  return m;
}

// Display copy of channel bytes; each byte is one Latin-1 code point.
std::string latin1_to_utf8(const std::string &bytes) {
  std::string out;
  for (unsigned char c : bytes) {
    if (c < 0x80) {
      out += char(c);
    } else {
      out += char(0xc0 | (c >> 6));
      out += char(0x80 | (c & 0x3f));
    }
  }
  return out;
}

json leaf_json(const LeafDoc &l) {
  return {{"node", l.node},
          {"kind", l.kind},
          {"reason", l.reason},
          {"path_constraints", l.path_constraints},
          {"path_pretty", l.path_pretty},
          {"block_history", l.block_history},
          {"witness", l.witness},
          {"sample_output", keyed(l.sample_output)},
          {"sample_stdout", latin1_to_utf8(l.sample_stdout())},
          {"sample_regs", keyed(l.sample_regs)}};
}

LeafDoc leaf_from(const json &j) {
  LeafDoc l;
  l.node = j.at("node").get<uint32_t>();
  l.kind = j.at("kind").get<std::string>();
  l.reason = j.at("reason").get<std::string>();
  l.path_constraints = j.at("path_constraints").get<std::vector<std::string>>();
  l.path_pretty = j.at("path_pretty").get<std::vector<std::string>>();
  l.block_history = j.at("block_history").get<std::vector<uint32_t>>();
  l.witness = j.at("witness").get<Assignment>();
  l.sample_output = unkeyed<std::vector<uint8_t>>(j.at("sample_output"));
  l.sample_regs = unkeyed<uint32_t>(j.at("sample_regs"));
  return l;
}

json side_json(const SideDoc &s) {
  json nodes = json::array(), leaves = json::array(), streams = json::object();
  for (const auto &n : s.tree.nodes)
    nodes.push_back(node_json(n));
  for (const auto &l : s.leaves)
    leaves.push_back(leaf_json(l));
  for (const auto &[id, st] : s.streams)
    streams[std::to_string(id)] = {{"instr", lines_json(st.instr)},
                                   {"access", lines_json(st.access)},
                                   {"effects", lines_json(st.effects)},
                                   {"notes", lines_json(st.notes)}};
  return {{"binary", s.binary}, {"nodes", nodes}, {"leaves", leaves}, {"streams", streams}};
}

SideDoc side_from(const json &j) {
  SideDoc s;
  s.binary = j.at("binary").get<std::string>();
  for (const auto &n : j.at("nodes"))
    s.tree.nodes.push_back(node_from(n));
  for (const auto &l : j.at("leaves"))
    s.leaves.push_back(leaf_from(l));
  for (const auto &[k, v] : j.at("streams").items()) {
    LeafStreams st;
    st.instr = lines_from(v.at("instr"));
    st.access = lines_from(v.at("access"));
    st.effects = lines_from(v.at("effects"));
    st.notes = lines_from(v.value("notes", json::array()));
    s.streams[uint32_t(std::stoul(k))] = std::move(st);
  }
  return s;
}

json pair_json(const PairDoc &p) {
  json regs = json::array(), mem = json::array(), chans = json::array();
  for (const auto &r : p.registers)
    regs.push_back({{"reg", r.reg}, {"hi", r.hi}, {"lo", r.lo}, {"pre", r.pre}, {"post", r.post},
                    {"differs", r.differs}, {"witness", opt(r.witness)}});
  for (const auto &m : p.memory)
    mem.push_back({{"addr", m.addr}, {"pre", m.pre}, {"post", m.post},
                   {"written_pre", m.written_pre}, {"written_post", m.written_post},
                   {"differs", m.differs}, {"witness", opt(m.witness)}});
  for (const auto &c : p.channels) {
    json pos = json::array();
    for (const auto &e : c.positions)
      pos.push_back({{"pre", opt(e.pre)}, {"post", opt(e.post)}, {"status", e.status},
                     {"witness", opt(e.witness)}});
    chans.push_back({{"channel", c.channel}, {"pre", c.pre}, {"post", c.post},
                     {"positions", pos}, {"differs", c.differs}});
  }
  return {{"pre_leaf", p.pre_leaf},
          {"post_leaf", p.post_leaf},
          {"witness", p.witness},
          {"cache", p.cache},
          {"classification", p.classification},
          {"pre_only", opt(p.pre_only)},
          {"post_only", opt(p.post_only)},
          {"diff", {{"registers", regs}, {"memory", mem}, {"channels", chans}}},
          {"counterexample", opt(p.counterexample)}};
}

PairDoc pair_from(const json &j) {
  PairDoc p;
  p.pre_leaf = j.at("pre_leaf").get<uint32_t>();
  p.post_leaf = j.at("post_leaf").get<uint32_t>();
  p.witness = j.at("witness").get<Assignment>();
  p.cache = j.at("cache").get<std::string>();
  p.classification = j.at("classification").get<std::string>();
  p.pre_only = get_opt<Assignment>(j, "pre_only");
  p.post_only = get_opt<Assignment>(j, "post_only");
  const json &d = j.at("diff");
  for (const auto &r : d.at("registers"))
    p.registers.push_back({r.at("reg").get<unsigned>(), r.at("hi").get<unsigned>(),
                           r.at("lo").get<unsigned>(), r.at("pre").get<std::string>(),
                           r.at("post").get<std::string>(), r.at("differs").get<bool>(),
                           get_opt<Assignment>(r, "witness")});
  for (const auto &m : d.at("memory"))
    p.memory.push_back({m.at("addr").get<uint32_t>(), m.at("pre").get<std::string>(),
                        m.at("post").get<std::string>(), m.at("written_pre").get<bool>(),
                        m.at("written_post").get<bool>(), m.at("differs").get<bool>(),
                        get_opt<Assignment>(m, "witness")});
  for (const auto &c : d.at("channels")) {
    ChannelDiffDoc cd;
    cd.channel = c.at("channel").get<uint32_t>();
    cd.pre = c.at("pre").get<std::vector<std::string>>();
    cd.post = c.at("post").get<std::vector<std::string>>();
    for (const auto &e : c.at("positions"))
      cd.positions.push_back({get_opt<size_t>(e, "pre"), get_opt<size_t>(e, "post"),
                              e.at("status").get<std::string>(), get_opt<Assignment>(e, "witness")});
    cd.differs = c.at("differs").get<bool>();
    p.channels.push_back(std::move(cd));
  }
  p.counterexample = get_opt<Assignment>(j, "counterexample");
  return p;
}

} // namespace

json to_json(const ReportDocument &d) {
  json inputs = json::array(), pairs = json::array();
  for (const auto &v : d.meta.inputs)
    inputs.push_back({{"name", v.name}, {"width", v.width}});
  for (const auto &p : d.pairs)
    pairs.push_back(pair_json(p));
  const StatsSnapshot &s = d.meta.stats;
  return {{"schema_version", d.schema_version},
          {"meta",
           {{"config_digest", d.meta.config_digest},
            {"mode", d.meta.mode},
            {"inputs", inputs},
            {"max_bits", d.meta.max_bits},
            {"property", d.meta.property},
            {"binaries", {{"pre", d.sides[0].binary}, {"post", d.sides[1].binary}}},
            {"solver_stats",
             {{"solved", s.solved},
              {"core_hits", s.core_hits},
              {"model_hits", s.model_hits},
              {"minimize_solves", s.minimize_solves}}}}},
          {"trees", {{"pre", side_json(d.sides[0])}, {"post", side_json(d.sides[1])}}},
          {"pairs", pairs},
          {"inputs_log", d.inputs_log}};
}

json run_to_json(const RunResult &r) {
  json nodes = json::array(), terms = json::array();
  for (const ReportNode &n : tree_of(r).nodes)
    nodes.push_back(node_json(n));
  for (const SymState &s : r.terminals) {
    json cs = json::array(), effects = json::array(), regs = json::array();
    for (Term c : s.constraints)
      cs.push_back(to_sexpr(c));
    for (const EffectRecord &e : s.effects)
      effects.push_back({{"channel", e.channel},
                         {"payload", pretty(e.payload)},
                         {"node", e.node},
                         {"source", to_string(e.source)}});
    for (Term t : s.regs)
      regs.push_back(pretty(t));
    terms.push_back({{"node", s.node_id},
                     {"kind", s.terminal ? to_string(*s.terminal) : "none"},
                     {"reason", s.reason},
                     {"constraints", cs},
                     {"block_history", s.block_history},
                     {"effects", effects},
                     {"regs", regs}});
  }
  return {{"side", to_string(r.side)},
          {"blocks", r.blocks},
          {"cyclomatic", r.cyclomatic},
          {"states_created", r.states_created},
          {"nodes", nodes},
          {"terminals", terms}};
}

ReportDocument report_from_json(const json &j) {
  try {
    ReportDocument d;
    d.schema_version = j.at("schema_version").get<int>();
    if (d.schema_version != kReportSchemaVersion)
      throw Error("unsupported report schema version " + std::to_string(d.schema_version));
    const json &m = j.at("meta");
    d.meta.config_digest = m.at("config_digest").get<std::string>();
    d.meta.mode = m.at("mode").get<std::string>();
    for (const auto &v : m.at("inputs"))
      d.meta.inputs.push_back({v.at("name").get<std::string>(), v.at("width").get<unsigned>()});
    d.meta.max_bits = m.at("max_bits").get<unsigned>();
    d.meta.property = m.at("property").get<bool>();
    const json &s = m.at("solver_stats");
    d.meta.stats = {s.at("solved").get<uint64_t>(), s.at("core_hits").get<uint64_t>(),
                    s.at("model_hits").get<uint64_t>(), s.at("minimize_solves").get<uint64_t>()};
    d.sides[0] = side_from(j.at("trees").at("pre"));
    d.sides[1] = side_from(j.at("trees").at("post"));
    for (const auto &p : j.at("pairs"))
      d.pairs.push_back(pair_from(p));
    d.inputs_log = j.at("inputs_log").get<std::vector<Assignment>>();
    return d;
  } catch (const json::exception &e) {
    throw Error(std::string("malformed report: ") + e.what());
  }
}

// --- compression --------------------------------------------------------------

ReportTree compress(const ReportTree &t, int level) {
  if (level <= 0 || t.nodes.empty())
    return t;
  std::map<uint32_t, ReportNode> byid;
  for (const auto &n : t.nodes)
    byid[n.id] = n;
  auto foldable = [&](const ReportNode &parent) {
    if (parent.children.size() != 1)
      return false;
    const ReportNode &c = byid.at(parent.children[0]);
    return !c.is_leaf() && (level >= 2 || c.constraints.empty());
  };

  ReportTree out;
  std::deque<uint32_t> work{t.nodes.front().id};
  while (!work.empty()) {
    ReportNode n = byid.at(work.front());
    work.pop_front();
    while (foldable(n)) {
      const ReportNode &c = byid.at(n.children[0]);
      n.merged.push_back(c.id);
      n.merged.insert(n.merged.end(), c.merged.begin(), c.merged.end());
      n.constraints.insert(n.constraints.end(), c.constraints.begin(), c.constraints.end());
      for (const auto &f : c.flags)
        if (std::find(n.flags.begin(), n.flags.end(), f) == n.flags.end())
          n.flags.push_back(f);
      if (!n.first_pc)
        n.first_pc = c.first_pc;
      if (c.last_pc)
        n.last_pc = c.last_pc;
      n.dropped = c.dropped;
      n.children = c.children;
    }
    for (uint32_t k : n.children) {
      byid.at(k).parent = n.id;
      work.push_back(k);
    }
    out.nodes.push_back(std::move(n));
  }
  std::sort(out.nodes.begin() + 1, out.nodes.end(),
            [](const ReportNode &a, const ReportNode &b) { return a.id < b.id; });
  return out;
}

// --- pruning ------------------------------------------------------------------

const char *to_string(PruneRelation r) {
  switch (r) {
  case PruneRelation::MemoryDiffers:
    return "memory-differs";
  case PruneRelation::RegisterDiffers:
    return "register-differs";
  case PruneRelation::StdoutDiffers:
    return "stdout-differs";
  case PruneRelation::StderrDiffers:
    return "stderr-differs";
  case PruneRelation::EitherErrored:
    return "either-errored";
  case PruneRelation::StdoutNotMatching:
    return "stdout-not-matching";
  }
  return "?";
}

std::optional<PruneRelation> prune_relation_from_string(std::string_view s) {
  for (auto r : {PruneRelation::MemoryDiffers, PruneRelation::RegisterDiffers,
                 PruneRelation::StdoutDiffers, PruneRelation::StderrDiffers,
                 PruneRelation::EitherErrored, PruneRelation::StdoutNotMatching})
    if (s == to_string(r))
      return r;
  return std::nullopt;
}

PruneResult prune(const ReportDocument &d, const std::vector<PruneRelation> &relations,
                  const std::string &regex) {
  std::optional<std::regex> re;
  if (std::find(relations.begin(), relations.end(), PruneRelation::StdoutNotMatching) !=
      relations.end()) {
    try {
      re.emplace(regex, std::regex::ECMAScript);
    } catch (const std::regex_error &e) {
      throw Error("invalid regex '" + regex + "': " + e.what());
    }
  }
  PruneResult out;
  for (const PairDoc &p : d.pairs) {
    const LeafDoc *a = d.sides[0].leaf(p.pre_leaf), *b = d.sides[1].leaf(p.post_leaf);
    if (!a || !b)
      throw Error("pair refers to an unknown leaf");
    bool ok = true;
    for (PruneRelation r : relations) {
      switch (r) {
      case PruneRelation::MemoryDiffers:
        ok = p.memory_differs();
        break;
      case PruneRelation::RegisterDiffers:
        ok = p.registers_differ();
        break;
      case PruneRelation::StdoutDiffers:
        ok = p.channel_differs(kStdout);
        break;
      case PruneRelation::StderrDiffers:
        ok = p.channel_differs(kStderr);
        break;
      case PruneRelation::EitherErrored:
        ok = a->errored() || b->errored();
        break;
      case PruneRelation::StdoutNotMatching:
        ok = !std::regex_search(a->sample_stdout(), *re) ||
             !std::regex_search(b->sample_stdout(), *re);
        break;
      }
      if (!ok)
        break;
    }
    if (ok) {
      out.visible[0].insert(p.pre_leaf);
      out.visible[1].insert(p.post_leaf);
    }
  }
  return out;
}

// --- text ---------------------------------------------------------------------

namespace {

std::string model_text(const Assignment &m) {
  std::string s;
  for (const auto &[k, v] : m)
    s += (s.empty() ? "" : " ") + k + "=" + std::to_string(v);
  return s.empty() ? "(any)" : s;
}

std::string diff_summary(const PairDoc &p) {
  std::vector<std::string> parts;
  for (const auto &r : p.registers)
    if (r.differs)
      parts.push_back("r" + std::to_string(r.reg) +
                      (r.hi == 31 && r.lo == 0
                           ? ""
                           : "[" + std::to_string(r.hi) + ":" + std::to_string(r.lo) + "]") +
                      " differs");
  size_t mem = 0, one_side = 0;
  for (const auto &m : p.memory) {
    mem += m.differs;
    one_side += m.written_pre != m.written_post;
  }
  if (mem)
    parts.push_back(std::to_string(mem) + " memory byte(s) differ");
  if (one_side)
    parts.push_back(std::to_string(one_side) + " byte(s) written by one side");
  for (const auto &c : p.channels)
    if (c.differs)
      parts.push_back("channel " + std::to_string(c.channel) + " differs");
  if (parts.empty())
    return "no observational differences";
  std::string s;
  for (const auto &x : parts)
    s += (s.empty() ? "" : ", ") + x;
  return s;
}

} // namespace

std::string textual_report(const ReportDocument &d) {
  std::ostringstream os;
  for (int s = 0; s < 2; ++s) {
    const SideDoc &sd = d.sides[s];
    size_t errs = std::count_if(sd.leaves.begin(), sd.leaves.end(), [](auto &l) { return l.errored(); });
    os << (s ? "post" : "pre") << " (" << sd.binary << "): " << sd.leaves.size()
       << " terminal state(s), " << errs << " errored\n";
  }
  os << d.pairs.size() << " compatible pair(s), mode " << d.meta.mode << "\n";
  bool all_equiv = true, no_diff = true;
  for (size_t i = 0; i < d.pairs.size(); ++i) {
    const PairDoc &p = d.pairs[i];
    all_equiv &= p.classification == "equivalent";
    no_diff &= !p.any_difference();
    os << "  pair " << i << ": pre leaf " << p.pre_leaf << " / post leaf " << p.post_leaf
       << ": " << p.classification << "; " << diff_summary(p) << "\n";
  }
  if (all_equiv && no_diff)
    os << "all pairs equivalent; no observational differences\n";
  else if (no_diff)
    os << "no observational differences\n";
  if (d.meta.property) {
    size_t n = d.counterexample_count();
    if (!n)
      os << "property verified over all pairs\n";
    else
      os << n << " counterexample(s):\n";
    for (size_t i = 0; i < d.pairs.size(); ++i)
      if (d.pairs[i].counterexample)
        os << "  pair " << i << " (pre leaf " << d.pairs[i].pre_leaf << ", post leaf "
           << d.pairs[i].post_leaf << "): input " << model_text(*d.pairs[i].counterexample) << "\n";
  }
  const StatsSnapshot &st = d.meta.stats;
  os << "solver: " << st.solved << " solved, " << st.core_hits << " core hits, " << st.model_hits
     << " model hits, " << st.minimize_solves << " minimization solves\n";
  return os.str();
}

} // namespace duet
