#pragma once

// Row-based geometry for a document: tokens flow across rows of a fixed
// width, semantic arcs stack in slots above each row and syntactic arcs
// below it. All vertical coordinates are local to their row; a renderer
// stacks rows using Row::height.

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tag/graph.hpp"
#include "tag/taxonomy.hpp"

namespace tag {

/// Monotone text width in abstract units.
using FontMetrics = std::function<double(std::string_view)>;

/// 7 units per code point.
double default_text_width(std::string_view text);

struct RowPlacement {
  std::size_t row = 0;
  double x = 0;

  bool operator==(const RowPlacement&) const = default;
};

struct ViewConfig {
  double row_width = 800;
  double token_gap = 4;
  /// Empty means default_text_width.
  FontMetrics font_metrics;
  /// token index -> forced position (user drags).
  std::map<std::size_t, RowPlacement> row_overrides;
  VisibilityFilter filter;
  /// Lets type filters match ancestors.
  std::shared_ptr<const Taxonomy> taxonomy;

  double font_size = 12;
  double text_height = 16;
  double slot_height = 18;
  double lane_height = 15;
  double label_padding = 4;
  double row_padding = 8;

  double text_width(std::string_view s) const;
};

struct RowAssignment {
  /// Indexed by token index.
  std::vector<RowPlacement> placements;
  std::vector<double> widths;
  std::size_t row_count = 0;
};

/// Greedy left-to-right fill. An override places its token and the flow
/// continues after it; a token that would land on an occupied spot moves
/// right, or to the next row when the row is full. Throws TokenTooWide.
RowAssignment assign_rows(const Document& doc, const ViewConfig& cfg);

enum class Side { Above, Below };
std::string_view to_string(Side side);

/// Where a segment drops to one of its endpoints.
struct SlotDrop {
  double x = 0;
  /// Interval whose label the drop lands on; none for a mention or token.
  std::optional<std::size_t> target;
};

/// One arc segment as seen by the slot assigner.
struct SlotInterval {
  double left = 0;
  double right = 0;
  /// Horizontal extent of the label box, when the label sits on this
  /// segment.
  std::optional<std::pair<double, double>> label;
  /// Indices of intervals whose label this one attaches to.
  std::vector<std::size_t> attaches_to;
  std::vector<SlotDrop> drops;
};

/// Slots (>= 1) for the intervals of one side of one row. Intervals are
/// placed narrowest first, each at the lowest slot that is free over its
/// extent (label included), above everything it strictly encloses and
/// above every label it attaches to. A bounded local search over floors
/// and placement order then lowers the number of crossings.
std::vector<std::size_t> assign_slots(const std::vector<SlotInterval>& intervals);

struct EndpointPosition {
  std::size_t row = 0;
  double x = 0;
};

struct RowRun {
  std::size_t row = 0;
  double left = 0;
  double right = 0;
  bool exits_right = false;
  bool enters_left = false;
};

/// Splits an arc over its endpoint rows: the first row runs from the
/// leftmost endpoint to the right edge, rows in between span the full
/// width and the last row runs from the left edge to the rightmost
/// endpoint.
std::vector<RowRun> split_cross_row_arc(const std::vector<EndpointPosition>& endpoints,
                                        double row_width);

struct TokenBox {
  std::size_t token_index = 0;
  double x = 0;
  double width = 0;
  std::string text;

  bool operator==(const TokenBox&) const = default;
};

struct Row {
  std::size_t index = 0;
  double height = 0;
  double text_top = 0;
  double baseline = 0;
  std::size_t slots_above = 0;
  std::size_t slots_below = 0;
  std::size_t lanes_above = 0;
  std::size_t lanes_below = 0;
  std::vector<TokenBox> tokens;

  bool operator==(const Row&) const = default;
};

struct Box {
  std::size_t row = 0;
  double x = 0;
  double y = 0;
  double width = 0;
  double height = 0;

  bool operator==(const Box&) const = default;
};

struct Underline {
  std::size_t row = 0;
  double x1 = 0;
  double x2 = 0;
  double y = 0;

  bool operator==(const Underline&) const = default;
};

struct MentionGeometry {
  std::string mention_id;
  std::string label;
  std::optional<std::string> type;
  Side side = Side::Above;
  std::size_t lane = 0;
  /// Absent when the label row lies outside the window.
  std::optional<Box> label_box;
  std::vector<Underline> underlines;

  bool operator==(const MentionGeometry&) const = default;
};

/// Vertical line from an arc's run down (or up) to one endpoint.
struct Drop {
  double x = 0;
  std::string target_id;
  /// Slot of the referenced arc when the target is a relation, 0 otherwise.
  std::size_t target_slot = 0;
  double y_end = 0;
  bool is_trigger = false;
  bool arrow = false;

  bool operator==(const Drop&) const = default;
};

struct ArcSegment {
  std::size_t row = 0;
  double left = 0;
  double right = 0;
  std::size_t slot = 0;
  double y = 0;
  bool exits_right = false;
  bool enters_left = false;
  std::vector<Drop> drops;

  bool operator==(const ArcSegment&) const = default;
};

struct ArcGeometry {
  std::string relation_id;
  Side side = Side::Above;
  Directionality direction = Directionality::Directed;
  std::string label;
  std::optional<std::string> type;
  std::size_t label_row = 0;
  /// Absent when the label row lies outside the window.
  std::optional<Box> label_box;
  std::vector<ArcSegment> segments;

  bool operator==(const ArcGeometry&) const = default;
};

/// Where another arc attaches to this relation's label.
struct Handle {
  std::string relation_id;
  std::string attached_by;
  std::size_t row = 0;
  double x = 0;
  double y = 0;

  bool operator==(const Handle&) const = default;
};

struct LayoutGeometry {
  double row_width = 0;
  std::size_t total_rows = 0;
  std::size_t first_row = 0;
  /// Rows [first_row, first_row + rows.size()).
  std::vector<Row> rows;
  std::vector<MentionGeometry> mentions;
  std::vector<ArcGeometry> arcs;
  std::vector<Handle> handles;
  std::vector<std::string> warnings;

  bool operator==(const LayoutGeometry&) const = default;
};

/// The part of a layout restricted to one row. Two layouts agree on a row
/// when their slices are equal.
LayoutGeometry row_slice(const LayoutGeometry& geometry, std::size_t row);

struct LayoutStats {
  /// Relations whose arc geometry was computed.
  std::size_t arcs_computed = 0;
};

struct RowRange {
  std::size_t first = 0;
  std::size_t last = 0;
};

/// Row assignment, visibility and endpoint positions for the whole
/// document; cheap compared to arc layout. Holds a reference to `doc`.
class LayoutContext {
 public:
  LayoutContext(const Document& doc, ViewConfig cfg);

  const Document& document() const { return *doc_; }
  const ViewConfig& config() const { return cfg_; }
  const RowAssignment& rows() const { return rows_; }
  std::size_t row_count() const { return rows_.row_count; }
  const FilterResult& visibility() const { return visibility_; }

  struct MentionPiece {
    std::size_t row;
    double x1;
    double x2;
  };
  struct MentionInfo {
    const Mention* mention;
    std::size_t label_row;
    double center;
    Side side;
    std::vector<MentionPiece> pieces;
  };
  struct RelationInfo {
    const Relation* relation;
    Side side;
    std::vector<EndpointPosition> endpoints;
    std::size_t first_row;
    std::size_t last_row;
    std::size_t label_row;
    double label_x;
  };

  const std::vector<MentionInfo>& mentions() const { return mentions_; }
  const std::vector<RelationInfo>& relations() const { return relations_; }
  /// Index into relations() of every visible relation whose rows include `row`.
  const std::vector<std::size_t>& relations_on_row(std::size_t row) const { return rel_by_row_[row]; }
  const std::vector<std::size_t>& mentions_on_row(std::size_t row) const { return mention_by_row_[row]; }
  /// Token indices placed on `row`, left to right.
  const std::vector<std::size_t>& tokens_on_row(std::size_t row) const { return tokens_by_row_[row]; }
  std::optional<std::size_t> relation_index(std::string_view id) const;
  std::optional<std::size_t> mention_index(std::string_view id) const;

 private:
  EndpointPosition position_of(const AnchorRef& ref);
  void place_relation(std::size_t index);

  const Document* doc_;
  ViewConfig cfg_;
  RowAssignment rows_;
  FilterResult visibility_;
  std::vector<MentionInfo> mentions_;
  std::vector<RelationInfo> relations_;
  std::map<std::string, std::size_t, NaturalLess> mention_index_;
  std::map<std::string, std::size_t, NaturalLess> relation_index_;
  std::vector<std::optional<EndpointPosition>> label_point_;
  std::vector<std::vector<std::size_t>> rel_by_row_;
  std::vector<std::vector<std::size_t>> mention_by_row_;
  std::vector<std::vector<std::size_t>> tokens_by_row_;
  std::vector<std::string> warnings_;

  friend LayoutGeometry layout_window(const LayoutContext&, RowRange, LayoutStats*);
};

/// Geometry for rows [range.first, range.last]. Arcs are computed only for
/// relations with a segment in the window; each row is identical to the
/// same row of the full layout. Throws RangeOutOfBounds.
LayoutGeometry layout_window(const LayoutContext& ctx, RowRange range, LayoutStats* stats = nullptr);
LayoutGeometry layout_window(const Document& doc, const ViewConfig& cfg, RowRange range);
LayoutGeometry layout_document(const Document& doc, const ViewConfig& cfg);

/// Pairs of segments on the same side and row that properly interleave
/// (a.left < b.left < a.right < b.right) and where a drop of one, inside
/// the other's extent, passes through the other's slot level.
std::size_t count_crossings(const LayoutGeometry& geometry);

}  // namespace tag
