#include "tag/layout.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <set>
#include <tuple>

#include "tag/error.hpp"

namespace tag {

namespace {

constexpr double kCharWidth = 7;
// Minimum horizontal clearance between two runs sharing a slot.
constexpr double kSlotClearance = 2;

Side side_of(Layer layer) { return layer == Layer::Semantic ? Side::Above : Side::Below; }

bool overlaps(double l1, double r1, double l2, double r2) {
  return l1 < r2 + kSlotClearance && l2 < r1 + kSlotClearance;
}

}  // namespace

double default_text_width(std::string_view text) {
  std::size_t cps = 0;
  for (char c : text) {
    if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++cps;
  }
  return static_cast<double>(cps) * kCharWidth;
}

double ViewConfig::text_width(std::string_view s) const {
  return font_metrics ? font_metrics(s) : default_text_width(s);
}

std::string_view to_string(Side side) { return side == Side::Above ? "above" : "below"; }

RowAssignment assign_rows(const Document& doc, const ViewConfig& cfg) {
  RowAssignment out;
  const std::size_t n = doc.tokens.size();
  out.placements.resize(n);
  out.widths.resize(n);
  std::vector<std::map<double, double>> occupied;  // per row: start -> end

  std::size_t row = 0;
  double x = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = cfg.text_width(doc.tokens[i].surface);
    if (w > cfg.row_width) {
      throw Error(ErrorCode::TokenTooWide, "token " + std::to_string(i) + " '" + doc.tokens[i].surface +
                                               "' is wider than the row");
    }
    if (auto o = cfg.row_overrides.find(i); o != cfg.row_overrides.end()) {
      row = o->second.row;
      x = std::clamp(o->second.x, 0.0, cfg.row_width - w);
    } else if (x > 0 && x + w > cfg.row_width) {
      ++row;
      x = 0;
    }
    while (true) {
      if (occupied.size() <= row) occupied.resize(row + 1);
      auto& used = occupied[row];
      auto it = used.lower_bound(x + w);
      if (it != used.begin() && std::prev(it)->second > x) {
        x = std::prev(it)->second + cfg.token_gap;
        if (x + w > cfg.row_width) {
          ++row;
          x = 0;
        }
        continue;
      }
      break;
    }
    occupied[row][x] = x + w;
    out.placements[i] = {row, x};
    out.widths[i] = w;
    out.row_count = std::max(out.row_count, row + 1);
    x += w + cfg.token_gap;
  }
  return out;
}

namespace {

// Pairwise comparisons the crossing search may spend on one row side.
constexpr std::size_t kCrossingSearchWork = 4'000'000;

bool strictly_encloses(const SlotInterval& a, const SlotInterval& b) {
  return a.left <= b.left && b.right <= a.right && (a.left < b.left || b.right < a.right);
}

// Tarjan, iterative. Returns a component index per vertex.
std::vector<std::size_t> strong_components(const std::vector<std::vector<std::size_t>>& out) {
  const std::size_t n = out.size();
  const std::size_t unset = n;
  std::vector<std::size_t> index(n, unset), low(n, 0), component(n, unset);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::size_t next = 0, components = 0;
  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] != unset) continue;
    std::vector<std::pair<std::size_t, std::size_t>> frames{{root, 0}};
    index[root] = low[root] = next++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!frames.empty()) {
      auto& [v, k] = frames.back();
      if (k < out[v].size()) {
        const std::size_t w = out[v][k++];
        if (index[w] == unset) {
          index[w] = low[w] = next++;
          stack.push_back(w);
          on_stack[w] = true;
          frames.emplace_back(w, 0);
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      const std::size_t done = v;
      frames.pop_back();
      if (!frames.empty()) low[frames.back().first] = std::min(low[frames.back().first], low[done]);
      if (low[done] == index[done]) {
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          component[w] = components;
        } while (w != done);
        ++components;
      }
    }
  }
  return component;
}

}  // namespace

std::vector<std::size_t> assign_slots(const std::vector<SlotInterval>& items) {
  const std::size_t n = items.size();
  struct Extent {
    double l, r;
  };
  std::vector<Extent> extent(n);
  for (std::size_t i = 0; i < n; ++i) {
    extent[i] = {items[i].left, items[i].right};
    if (items[i].label) {
      extent[i].l = std::min(extent[i].l, items[i].label->first);
      extent[i].r = std::max(extent[i].r, items[i].label->second);
    }
  }

  // attach_reach[i][j]: i attaches, directly or through others, to j.
  std::vector<std::vector<bool>> attach_reach(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::size_t> stack(items[i].attaches_to.begin(), items[i].attaches_to.end());
    while (!stack.empty()) {
      const std::size_t j = stack.back();
      stack.pop_back();
      if (j >= n || attach_reach[i][j]) continue;
      attach_reach[i][j] = true;
      stack.insert(stack.end(), items[j].attaches_to.begin(), items[j].attaches_to.end());
    }
  }

  std::vector<std::pair<std::size_t, std::size_t>> attach_edges, nest_edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j : items[i].attaches_to) {
      if (j < n && j != i) attach_edges.emplace_back(j, i);
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const auto& a = items[i];
      if (!strictly_encloses(a, items[j]) || attach_reach[j][i]) continue;
      // j also escapes i when it attaches to an arc that encloses i.
      bool escapes = false;
      for (std::size_t x = 0; x < n && !escapes; ++x) {
        escapes = attach_reach[j][x] && strictly_encloses(items[x], a);
      }
      if (!escapes) nest_edges.emplace_back(j, i);
    }
  }

  // Nesting edges inside a strongly connected component contradict the
  // attachments and are given up. What is left is acyclic.
  std::vector<std::vector<std::size_t>> out(n);
  for (auto [lo, hi] : attach_edges) out[lo].push_back(hi);
  for (auto [lo, hi] : nest_edges) out[lo].push_back(hi);
  const std::vector<std::size_t> component = strong_components(out);

  // before[i]: intervals that must be placed, and sit lower, than i.
  std::vector<std::vector<std::size_t>> before(n), after(n);
  auto add_edge = [&](std::size_t lower, std::size_t upper) {
    before[upper].push_back(lower);
    after[lower].push_back(upper);
  };
  for (auto [lo, hi] : attach_edges) add_edge(lo, hi);
  for (auto [lo, hi] : nest_edges) {
    if (component[lo] != component[hi]) add_edge(lo, hi);
  }

  auto priority = [&](std::size_t i) {
    return std::make_tuple(items[i].right - items[i].left, items[i].left, i);
  };
  using Key = std::tuple<double, double, std::size_t>;
  std::priority_queue<Key, std::vector<Key>, std::greater<>> ready;
  std::vector<std::size_t> pending(n);
  for (std::size_t i = 0; i < n; ++i) {
    pending[i] = before[i].size();
    if (pending[i] == 0) ready.push(priority(i));
  }

  std::vector<std::size_t> order;
  order.reserve(n);
  std::vector<bool> done(n, false);
  while (order.size() < n) {
    std::size_t i = n;
    while (!ready.empty()) {
      const std::size_t c = std::get<2>(ready.top());
      ready.pop();
      if (!done[c]) {
        i = c;
        break;
      }
    }
    if (i == n) {
      // Unreachable while attachments stay acyclic. Prefer an interval whose
      // attachment targets are all placed.
      for (std::size_t c = 0; c < n; ++c) {
        if (done[c]) continue;
        const bool free = std::all_of(items[c].attaches_to.begin(), items[c].attaches_to.end(),
                                      [&](std::size_t j) { return j >= n || j == c || done[j]; });
        if (free && (i == n || priority(c) < priority(i))) i = c;
      }
      for (std::size_t c = 0; i == n && c < n; ++c) {
        if (!done[c]) i = c;
      }
    }
    done[i] = true;
    order.push_back(i);
    for (std::size_t u : after[i]) {
      if (!done[u] && --pending[u] == 0) ready.push(priority(u));
    }
  }

  // Each interval in turn goes to the lowest slot at or above its floor and
  // above its placed predecessors where its extent is free.
  auto place = [&](const std::vector<std::size_t>& seq, const std::vector<std::size_t>& floor) {
    std::vector<std::size_t> slot(n, 0);
    std::vector<std::size_t> placed;
    placed.reserve(n);
    for (std::size_t i : seq) {
      std::size_t s = floor[i];
      for (std::size_t p : before[i]) {
        if (slot[p] != 0) s = std::max(s, slot[p] + 1);
      }
      bool moved = true;
      while (moved) {
        moved = false;
        for (std::size_t q : placed) {
          if (slot[q] == s && overlaps(extent[q].l, extent[q].r, extent[i].l, extent[i].r)) {
            ++s;
            moved = true;
            break;
          }
        }
      }
      slot[i] = s;
      placed.push_back(i);
    }
    return slot;
  };

  // Same rule as count_crossings, on interval indices.
  auto crossings = [&](const std::vector<std::size_t>& slot) {
    auto passes = [&](std::size_t owner, std::size_t other) {
      for (const auto& d : items[owner].drops) {
        if (!(items[other].left < d.x && d.x < items[other].right)) continue;
        const std::size_t target = d.target && *d.target < n ? slot[*d.target] : 0;
        const std::size_t lo = std::min(target, slot[owner]), hi = std::max(target, slot[owner]);
        if (lo < slot[other] && slot[other] < hi) return true;
      }
      return false;
    };
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        std::size_t a = i, b = j;
        if (items[b].left < items[a].left) std::swap(a, b);
        if (!(items[a].left < items[b].left && items[b].left < items[a].right && items[a].right < items[b].right)) {
          continue;
        }
        if (passes(a, b) || passes(b, a)) ++count;
      }
    }
    return count;
  };

  std::vector<std::size_t> floor(n, 1);
  std::vector<std::size_t> slot = place(order, floor);
  std::size_t best = crossings(slot);

  // Crossing reduction: repeatedly take the single move (raise or lower one
  // floor, or swap two unconstrained neighbours in the order) that removes
  // the most crossings, the lower layout breaking ties.
  std::size_t budget = std::max<std::size_t>(1, kCrossingSearchWork / (n * n + 1));
  while (best > 0 && budget > 0) {
    const std::size_t top = *std::max_element(slot.begin(), slot.end());
    std::optional<std::tuple<std::size_t, std::size_t, std::vector<std::size_t>, std::vector<std::size_t>>> pick;
    auto consider = [&](const std::vector<std::size_t>& seq, const std::vector<std::size_t>& fl) {
      if (budget == 0) return;
      --budget;
      std::vector<std::size_t> s = place(seq, fl);
      const std::size_t c = crossings(s);
      const std::size_t h = *std::max_element(s.begin(), s.end());
      if (c < best && (!pick || std::tie(c, h) < std::tie(std::get<0>(*pick), std::get<1>(*pick)))) {
        pick.emplace(c, h, seq, fl);
      }
    };
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t f = 1; f <= top + 1; ++f) {
        if (f == floor[i]) continue;
        std::vector<std::size_t> fl = floor;
        fl[i] = f;
        consider(order, fl);
      }
    }
    for (std::size_t k = 0; k + 1 < n; ++k) {
      const auto& pre = before[order[k + 1]];
      if (std::find(pre.begin(), pre.end(), order[k]) != pre.end()) continue;
      std::vector<std::size_t> seq = order;
      std::swap(seq[k], seq[k + 1]);
      consider(seq, floor);
    }
    if (!pick) break;
    best = std::get<0>(*pick);
    order = std::move(std::get<2>(*pick));
    floor = std::move(std::get<3>(*pick));
    slot = place(order, floor);
  }
  return slot;
}

std::vector<RowRun> split_cross_row_arc(const std::vector<EndpointPosition>& endpoints, double row_width) {
  std::vector<RowRun> runs;
  if (endpoints.empty()) return runs;
  std::size_t first = endpoints.front().row, last = first;
  for (const auto& e : endpoints) {
    first = std::min(first, e.row);
    last = std::max(last, e.row);
  }
  for (std::size_t r = first; r <= last; ++r) {
    RowRun run{r, 0, row_width, r < last, r > first};
    if (r == first || r == last) {
      double lo = row_width, hi = 0;
      for (const auto& e : endpoints) {
        if (e.row != r) continue;
        lo = std::min(lo, e.x);
        hi = std::max(hi, e.x);
      }
      if (r == first) run.left = lo;
      if (r == last) run.right = hi;
    }
    runs.push_back(run);
  }
  return runs;
}

LayoutContext::LayoutContext(const Document& doc, ViewConfig cfg)
    : doc_(&doc), cfg_(std::move(cfg)), rows_(assign_rows(doc, cfg_)) {
  visibility_ = apply_filter(doc, cfg_.filter, cfg_.taxonomy.get());
  warnings_ = visibility_.warnings;
  rel_by_row_.resize(rows_.row_count);
  mention_by_row_.resize(rows_.row_count);
  tokens_by_row_.resize(rows_.row_count);
  for (std::size_t i = 0; i < doc.tokens.size(); ++i) tokens_by_row_[rows_.placements[i].row].push_back(i);
  for (auto& list : tokens_by_row_) {
    std::sort(list.begin(), list.end(), [&](std::size_t a, std::size_t b) {
      return rows_.placements[a].x < rows_.placements[b].x;
    });
  }

  for (const auto& [id, m] : doc.mentions) {
    if (!visibility_.visible(id)) continue;
    std::set<std::size_t> covered;
    for (const auto& a : m.anchors) {
      auto it = std::lower_bound(doc.tokens.begin(), doc.tokens.end(), a.start,
                                 [](const Token& t, std::size_t pos) { return t.span.end <= pos; });
      for (; it != doc.tokens.end() && it->span.start < a.end; ++it) covered.insert(it->index);
    }
    if (covered.empty()) {
      warnings_.push_back("mention " + id + " covers no token and is not drawn");
      continue;
    }
    MentionInfo info{&m, rows_.placements[*covered.begin()].row, 0, side_of(m.layer), {}};
    std::map<std::size_t, std::pair<double, double>> per_row;
    for (std::size_t t : covered) {
      const auto& p = rows_.placements[t];
      const double x2 = p.x + rows_.widths[t];
      auto [it, fresh] = per_row.try_emplace(p.row, p.x, x2);
      if (!fresh) {
        it->second.first = std::min(it->second.first, p.x);
        it->second.second = std::max(it->second.second, x2);
      }
    }
    for (const auto& [row, ext] : per_row) info.pieces.push_back({row, ext.first, ext.second});
    const auto& head = per_row.at(info.label_row);
    info.center = (head.first + head.second) / 2;
    const std::size_t index = mentions_.size();
    mention_index_.emplace(id, index);
    for (const auto& piece : info.pieces) mention_by_row_[piece.row].push_back(index);
    mentions_.push_back(std::move(info));
  }

  for (const auto& [id, r] : doc.relations) {
    if (!visibility_.visible(id)) continue;
    relation_index_.emplace(id, relations_.size());
    relations_.push_back({&r, side_of(r.layer), {}, 0, 0, 0, 0});
  }
  label_point_.assign(relations_.size(), std::nullopt);
  for (std::size_t i = 0; i < relations_.size(); ++i) place_relation(i);
  for (std::size_t i = 0; i < relations_.size(); ++i) {
    for (std::size_t r = relations_[i].first_row; r <= relations_[i].last_row; ++r) rel_by_row_[r].push_back(i);
  }
}

EndpointPosition LayoutContext::position_of(const AnchorRef& ref) {
  if (const auto* t = std::get_if<TokenRef>(&ref)) {
    const auto& p = rows_.placements.at(t->index);
    return {p.row, p.x + rows_.widths[t->index] / 2};
  }
  if (const auto* m = std::get_if<MentionRef>(&ref)) {
    auto it = mention_index_.find(m->id);
    if (it == mention_index_.end()) {
      // Visible relation over a mention without tokens: anchor at its text start.
      const Mention* mention = doc_->find_mention(m->id);
      auto tok = std::lower_bound(doc_->tokens.begin(), doc_->tokens.end(), mention->anchors.front().start,
                                  [](const Token& t, std::size_t pos) { return t.span.end <= pos; });
      if (tok == doc_->tokens.end()) --tok;
      const auto& p = rows_.placements[tok->index];
      return {p.row, p.x};
    }
    const auto& info = mentions_[it->second];
    return {info.label_row, info.center};
  }
  const std::size_t index = relation_index_.at(std::get<RelationRef>(ref).id);
  place_relation(index);
  return *label_point_[index];
}

void LayoutContext::place_relation(std::size_t index) {
  if (label_point_[index]) return;
  RelationInfo& info = relations_[index];
  const Relation& r = *info.relation;
  for (const auto& ep : endpoints(r)) info.endpoints.push_back(position_of(ep));
  info.first_row = info.last_row = info.endpoints.front().row;
  for (const auto& e : info.endpoints) {
    info.first_row = std::min(info.first_row, e.row);
    info.last_row = std::max(info.last_row, e.row);
  }
  if (r.trigger) {
    info.label_row = info.endpoints.front().row;
  } else {
    const auto leftmost = std::min_element(info.endpoints.begin(), info.endpoints.end(), [](const auto& a, const auto& b) {
      return std::tie(a.row, a.x) < std::tie(b.row, b.x);
    });
    info.label_row = leftmost->row;
  }
  for (const auto& run : split_cross_row_arc(info.endpoints, cfg_.row_width)) {
    if (run.row == info.label_row) info.label_x = (run.left + run.right) / 2;
  }
  label_point_[index] = EndpointPosition{info.label_row, info.label_x};
}

std::optional<std::size_t> LayoutContext::relation_index(std::string_view id) const {
  auto it = relation_index_.find(id);
  if (it == relation_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> LayoutContext::mention_index(std::string_view id) const {
  auto it = mention_index_.find(id);
  if (it == mention_index_.end()) return std::nullopt;
  return it->second;
}

namespace {

struct RowMetrics {
  double arcs_above_bottom = 0;
  double lanes_above_bottom = 0;
  double text_top = 0;
  double text_bottom = 0;
  double arcs_below_top = 0;
};

}  // namespace

LayoutGeometry layout_window(const LayoutContext& ctx, RowRange range, LayoutStats* stats) {
  const ViewConfig& cfg = ctx.config();
  const Document& doc = ctx.document();
  if (range.first > range.last || range.last >= ctx.row_count()) {
    throw Error(ErrorCode::RangeOutOfBounds, "rows " + std::to_string(range.first) + ".." +
                                                 std::to_string(range.last) + " outside 0.." +
                                                 (ctx.row_count() == 0 ? std::string("(none)")
                                                                       : std::to_string(ctx.row_count() - 1)));
  }
  const std::size_t window_rows = range.last - range.first + 1;
  auto in_window = [&](std::size_t row) { return row >= range.first && row <= range.last; };

  LayoutGeometry g;
  g.row_width = cfg.row_width;
  g.total_rows = ctx.row_count();
  g.first_row = range.first;
  g.warnings = ctx.warnings_;

  // Mention label lanes per row and side.
  std::vector<std::size_t> mention_ids;
  for (std::size_t r = range.first; r <= range.last; ++r) {
    const auto& list = ctx.mentions_on_row(r);
    mention_ids.insert(mention_ids.end(), list.begin(), list.end());
  }
  std::sort(mention_ids.begin(), mention_ids.end());
  mention_ids.erase(std::unique(mention_ids.begin(), mention_ids.end()), mention_ids.end());

  struct LabelSpan {
    double left = 0;
    double width = 0;
  };
  std::map<std::size_t, LabelSpan> mention_label;
  std::map<std::size_t, std::size_t> mention_lane;
  std::vector<std::array<std::size_t, 2>> lanes(window_rows, {0, 0});
  for (std::size_t r = range.first; r <= range.last; ++r) {
    std::vector<std::pair<double, std::size_t>> order[2];
    for (std::size_t mi : ctx.mentions_on_row(r)) {
      const auto& info = ctx.mentions()[mi];
      if (info.label_row != r) continue;
      const double w = cfg.text_width(display_label(*info.mention)) + 2 * cfg.label_padding;
      mention_label[mi] = {info.center - w / 2, w};
      order[info.side == Side::Above ? 0 : 1].emplace_back(info.center - w / 2, mi);
    }
    for (int s = 0; s < 2; ++s) {
      std::sort(order[s].begin(), order[s].end());
      std::vector<double> lane_end;
      for (const auto& [left, mi] : order[s]) {
        std::size_t lane = 0;
        while (lane < lane_end.size() && lane_end[lane] > left - kSlotClearance) ++lane;
        if (lane == lane_end.size()) lane_end.push_back(0);
        lane_end[lane] = left + mention_label[mi].width;
        mention_lane[mi] = lane;
      }
      lanes[r - range.first][s] = lane_end.size();
    }
  }

  // Arcs with a segment in the window.
  std::vector<std::size_t> arc_ids;
  for (std::size_t r = range.first; r <= range.last; ++r) {
    const auto& list = ctx.relations_on_row(r);
    arc_ids.insert(arc_ids.end(), list.begin(), list.end());
  }
  std::sort(arc_ids.begin(), arc_ids.end());
  arc_ids.erase(std::unique(arc_ids.begin(), arc_ids.end()), arc_ids.end());
  if (stats) stats->arcs_computed += arc_ids.size();

  struct ArcWork {
    std::size_t rel;
    std::vector<RowRun> runs;  // window rows only
    double label_width = 0;
    std::vector<std::size_t> slots;
  };
  std::vector<ArcWork> work;
  work.reserve(arc_ids.size());
  std::map<std::size_t, std::size_t> work_of;  // relation index -> work index
  for (std::size_t ri : arc_ids) {
    const auto& info = ctx.relations()[ri];
    ArcWork w{ri, {}, cfg.text_width(display_label(*info.relation)) + 2 * cfg.label_padding, {}};
    for (const auto& run : split_cross_row_arc(info.endpoints, cfg.row_width)) {
      if (in_window(run.row)) w.runs.push_back(run);
    }
    w.slots.assign(w.runs.size(), 0);
    work_of[ri] = work.size();
    work.push_back(std::move(w));
  }

  // Slot assignment per row and side.
  g.rows.resize(window_rows);
  for (std::size_t r = range.first; r <= range.last; ++r) {
    for (Side side : {Side::Above, Side::Below}) {
      std::vector<std::pair<std::size_t, std::size_t>> members;  // work index, run index
      std::map<std::size_t, std::size_t> item_of_rel;
      for (std::size_t ri : ctx.relations_on_row(r)) {
        const auto& info = ctx.relations()[ri];
        if (info.side != side) continue;
        const std::size_t wi = work_of.at(ri);
        for (std::size_t k = 0; k < work[wi].runs.size(); ++k) {
          if (work[wi].runs[k].row == r) {
            item_of_rel[ri] = members.size();
            members.emplace_back(wi, k);
          }
        }
      }
      std::vector<SlotInterval> items;
      for (const auto& [wi, k] : members) {
        const auto& info = ctx.relations()[work[wi].rel];
        const auto& run = work[wi].runs[k];
        SlotInterval item{run.left, run.right, std::nullopt, {}, {}};
        if (info.label_row == r) {
          item.label = std::make_pair(info.label_x - work[wi].label_width / 2,
                                      info.label_x + work[wi].label_width / 2);
        }
        const auto eps = endpoints(*info.relation);
        for (std::size_t e = 0; e < eps.size(); ++e) {
          if (info.endpoints[e].row != r) continue;
          SlotDrop drop{info.endpoints[e].x, std::nullopt};
          if (const auto* ref = std::get_if<RelationRef>(&eps[e])) {
            if (auto target = ctx.relation_index(ref->id)) {
              auto it = item_of_rel.find(*target);
              if (it != item_of_rel.end()) {
                item.attaches_to.push_back(it->second);
                drop.target = it->second;
              }
            }
          }
          item.drops.push_back(drop);
        }
        items.push_back(std::move(item));
      }
      const auto slots = assign_slots(items);
      std::size_t top = 0;
      for (std::size_t m = 0; m < members.size(); ++m) {
        work[members[m].first].slots[members[m].second] = slots[m];
        top = std::max(top, slots[m]);
      }
      Row& row = g.rows[r - range.first];
      (side == Side::Above ? row.slots_above : row.slots_below) = top;
    }
  }

  // Vertical metrics.
  std::vector<RowMetrics> metrics(window_rows);
  for (std::size_t k = 0; k < window_rows; ++k) {
    Row& row = g.rows[k];
    row.index = range.first + k;
    row.lanes_above = lanes[k][0];
    row.lanes_below = lanes[k][1];
    RowMetrics& m = metrics[k];
    m.arcs_above_bottom = static_cast<double>(row.slots_above) * cfg.slot_height;
    m.lanes_above_bottom = m.arcs_above_bottom + static_cast<double>(row.lanes_above) * cfg.lane_height;
    m.text_top = m.lanes_above_bottom;
    m.text_bottom = m.text_top + cfg.text_height;
    m.arcs_below_top = m.text_bottom + static_cast<double>(row.lanes_below) * cfg.lane_height;
    row.text_top = m.text_top;
    row.baseline = m.text_top + cfg.font_size;
    row.height = m.arcs_below_top + static_cast<double>(row.slots_below) * cfg.slot_height + cfg.row_padding;
    for (std::size_t t : ctx.tokens_on_row(row.index)) {
      const auto& p = ctx.rows().placements[t];
      row.tokens.push_back({t, p.x, ctx.rows().widths[t], doc.tokens[t].surface});
    }
  }
  auto run_y = [&](std::size_t row, Side side, std::size_t slot) {
    const RowMetrics& m = metrics[row - range.first];
    const double offset = (static_cast<double>(slot) - 0.5) * cfg.slot_height;
    return side == Side::Above ? m.arcs_above_bottom - offset : m.arcs_below_top + offset;
  };
  const double label_height = cfg.slot_height - 4;

  // Mentions.
  std::map<std::size_t, Box> mention_box;
  for (std::size_t mi : mention_ids) {
    const auto& info = ctx.mentions()[mi];
    MentionGeometry mg;
    mg.mention_id = info.mention->id;
    mg.label = display_label(*info.mention);
    mg.type = info.mention->type;
    mg.side = info.side;
    if (in_window(info.label_row)) {
      const RowMetrics& m = metrics[info.label_row - range.first];
      mg.lane = mention_lane.at(mi);
      const double lane = static_cast<double>(mg.lane);
      const double y = info.side == Side::Above ? m.lanes_above_bottom - (lane + 1) * cfg.lane_height + 1
                                                : m.text_bottom + lane * cfg.lane_height + 1;
      const auto& span = mention_label.at(mi);
      mg.label_box = Box{info.label_row, span.left, y, span.width, cfg.lane_height - 2};
      mention_box[mi] = *mg.label_box;
    }
    for (const auto& piece : info.pieces) {
      if (!in_window(piece.row)) continue;
      const RowMetrics& m = metrics[piece.row - range.first];
      mg.underlines.push_back({piece.row, piece.x1, piece.x2,
                               info.side == Side::Above ? m.text_top - 1 : m.text_bottom + 1});
    }
    g.mentions.push_back(std::move(mg));
  }

  // Arc label boxes first, so drops can attach to them.
  std::vector<std::optional<Box>> label_boxes(work.size());
  for (std::size_t wi = 0; wi < work.size(); ++wi) {
    const auto& info = ctx.relations()[work[wi].rel];
    for (std::size_t k = 0; k < work[wi].runs.size(); ++k) {
      if (work[wi].runs[k].row != info.label_row) continue;
      const double y = run_y(info.label_row, info.side, work[wi].slots[k]);
      label_boxes[wi] = Box{info.label_row, info.label_x - work[wi].label_width / 2, y - label_height / 2,
                            work[wi].label_width, label_height};
    }
  }

  for (std::size_t wi = 0; wi < work.size(); ++wi) {
    const auto& info = ctx.relations()[work[wi].rel];
    const Relation& rel = *info.relation;
    ArcGeometry arc;
    arc.relation_id = rel.id;
    arc.side = info.side;
    arc.direction = rel.direction;
    arc.label = display_label(rel);
    arc.type = rel.type;
    arc.label_row = info.label_row;
    arc.label_box = label_boxes[wi];

    const auto eps = endpoints(rel);
    const std::size_t first_arg = rel.trigger ? 1 : 0;
    std::size_t leftmost = 0, rightmost = 0;
    for (std::size_t e = 1; e < eps.size(); ++e) {
      const auto& p = info.endpoints[e];
      if (std::tie(p.row, p.x) < std::tie(info.endpoints[leftmost].row, info.endpoints[leftmost].x)) leftmost = e;
      if (std::tie(p.row, p.x) > std::tie(info.endpoints[rightmost].row, info.endpoints[rightmost].x)) rightmost = e;
    }
    auto has_arrow = [&](std::size_t e) {
      switch (rel.direction) {
        case Directionality::Directed: return e >= first_arg && (rel.trigger || e > 0);
        case Directionality::Bidirectional: return e == leftmost || e == rightmost;
        case Directionality::Undirected: return false;
      }
      return false;
    };

    for (std::size_t k = 0; k < work[wi].runs.size(); ++k) {
      const RowRun& run = work[wi].runs[k];
      const RowMetrics& m = metrics[run.row - range.first];
      ArcSegment seg;
      seg.row = run.row;
      seg.left = run.left;
      seg.right = run.right;
      seg.slot = work[wi].slots[k];
      seg.y = run_y(run.row, info.side, seg.slot);
      seg.exits_right = run.exits_right;
      seg.enters_left = run.enters_left;
      const bool above = info.side == Side::Above;
      for (std::size_t e = 0; e < eps.size(); ++e) {
        if (info.endpoints[e].row != run.row) continue;
        Drop d;
        d.x = info.endpoints[e].x;
        d.target_id = element_id(eps[e]);
        d.is_trigger = rel.trigger && e == 0;
        d.arrow = has_arrow(e);
        d.y_end = above ? m.text_top : m.text_bottom;
        if (const auto* mref = std::get_if<MentionRef>(&eps[e])) {
          auto mi = ctx.mention_index(mref->id);
          if (mi && ctx.mentions()[*mi].side == info.side) {
            const Box& b = mention_box.at(*mi);
            d.y_end = above ? b.y : b.y + b.height;
          }
        } else if (const auto* rref = std::get_if<RelationRef>(&eps[e])) {
          const std::size_t target = *ctx.relation_index(rref->id);
          const std::size_t tw = work_of.at(target);
          const Box& b = *label_boxes[tw];
          d.y_end = above ? b.y + b.height : b.y;
          if (ctx.relations()[target].side == info.side) {
            for (std::size_t tk = 0; tk < work[tw].runs.size(); ++tk) {
              if (work[tw].runs[tk].row == run.row) d.target_slot = work[tw].slots[tk];
            }
          }
          g.handles.push_back({rref->id, rel.id, run.row, d.x, d.y_end});
        }
        seg.drops.push_back(std::move(d));
      }
      arc.segments.push_back(std::move(seg));
    }
    g.arcs.push_back(std::move(arc));
  }
  std::sort(g.handles.begin(), g.handles.end(), [](const Handle& a, const Handle& b) {
    return std::tie(a.row, a.x, a.relation_id, a.attached_by) < std::tie(b.row, b.x, b.relation_id, b.attached_by);
  });
  return g;
}

LayoutGeometry layout_window(const Document& doc, const ViewConfig& cfg, RowRange range) {
  LayoutContext ctx(doc, cfg);
  return layout_window(ctx, range);
}

LayoutGeometry layout_document(const Document& doc, const ViewConfig& cfg) {
  LayoutContext ctx(doc, cfg);
  if (ctx.row_count() == 0) {
    LayoutGeometry g;
    g.row_width = cfg.row_width;
    g.warnings = ctx.visibility().warnings;
    return g;
  }
  return layout_window(ctx, {0, ctx.row_count() - 1});
}

LayoutGeometry row_slice(const LayoutGeometry& geometry, std::size_t row) {
  LayoutGeometry out;
  out.row_width = geometry.row_width;
  out.total_rows = geometry.total_rows;
  out.first_row = row;
  for (const auto& r : geometry.rows) {
    if (r.index == row) out.rows.push_back(r);
  }
  for (const auto& m : geometry.mentions) {
    MentionGeometry s = m;
    s.underlines.clear();
    for (const auto& u : m.underlines) {
      if (u.row == row) s.underlines.push_back(u);
    }
    if (!s.label_box || s.label_box->row != row) {
      s.label_box.reset();
      s.lane = 0;
    }
    if (s.label_box || !s.underlines.empty()) out.mentions.push_back(std::move(s));
  }
  for (const auto& a : geometry.arcs) {
    ArcGeometry s = a;
    s.segments.clear();
    for (const auto& seg : a.segments) {
      if (seg.row == row) s.segments.push_back(seg);
    }
    if (s.label_box && s.label_box->row != row) s.label_box.reset();
    if (!s.segments.empty()) out.arcs.push_back(std::move(s));
  }
  for (const auto& h : geometry.handles) {
    if (h.row == row) out.handles.push_back(h);
  }
  return out;
}

std::size_t count_crossings(const LayoutGeometry& geometry) {
  std::map<std::pair<std::size_t, int>, std::vector<const ArcSegment*>> groups;
  for (const auto& arc : geometry.arcs) {
    for (const auto& seg : arc.segments) {
      groups[{seg.row, arc.side == Side::Above ? 0 : 1}].push_back(&seg);
    }
  }
  auto drop_passes = [](const ArcSegment& owner, const ArcSegment& other) {
    for (const auto& d : owner.drops) {
      if (!(other.left < d.x && d.x < other.right)) continue;
      const std::size_t lo = std::min(d.target_slot, owner.slot);
      const std::size_t hi = std::max(d.target_slot, owner.slot);
      if (lo < other.slot && other.slot < hi) return true;
    }
    return false;
  };
  std::size_t count = 0;
  for (const auto& [key, segs] : groups) {
    for (std::size_t i = 0; i < segs.size(); ++i) {
      for (std::size_t j = i + 1; j < segs.size(); ++j) {
        const ArcSegment* a = segs[i];
        const ArcSegment* b = segs[j];
        if (b->left < a->left) std::swap(a, b);
        if (!(a->left < b->left && b->left < a->right && a->right < b->right)) continue;
        if (drop_passes(*a, *b) || drop_passes(*b, *a)) ++count;
      }
    }
  }
  return count;
}

}  // namespace tag
