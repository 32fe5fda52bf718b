#include "tag/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "format_common.hpp"

namespace tag {

namespace {

std::string num(double v) {
  if (std::abs(v) < 0.005) return "0";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  std::string s = buf;
  while (s.back() == '0') s.pop_back();
  if (s.back() == '.') s.pop_back();
  return s;
}

std::string attr(std::string_view name, std::string_view value) {
  return " " + std::string(name) + "=\"" + detail::xml_escape(value) + "\"";
}

std::string attr(std::string_view name, double value) { return " " + std::string(name) + "=\"" + num(value) + "\""; }

class SvgWriter {
 public:
  SvgWriter(double width, double height, const StyleSheet& style) {
    out_ = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out_ += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\"" + attr("width", width) +
            attr("height", height) + attr("viewBox", "0 0 " + num(width) + " " + num(height)) +
            attr("font-family", style.font_family) + attr("font-size", style.font_size) + ">\n";
    out_ += "<rect" + attr("x", 0.0) + attr("y", 0.0) + attr("width", width) + attr("height", height) +
            attr("fill", style.background) + "/>\n";
  }
  void line(const std::string& s) { out_ += s + "\n"; }
  std::string finish() {
    out_ += "</svg>\n";
    return std::move(out_);
  }

 private:
  std::string out_;
};

std::string text_element(std::string_view cls, double x, double y, std::string_view anchor, std::string_view fill,
                         std::string_view content) {
  return "<text" + attr("class", cls) + attr("x", x) + attr("y", y) + attr("text-anchor", anchor) +
         attr("fill", fill) + ">" + detail::xml_escape(content) + "</text>";
}

}  // namespace

StyleSheet StyleSheet::from_taxonomy(const Taxonomy& taxonomy) {
  StyleSheet s;
  s.type_colors = taxonomy.color_map();
  return s;
}

void StyleSheet::validate() const {
  normalize_color(semantic_color);
  normalize_color(syntactic_color);
  normalize_color(text_color);
  normalize_color(background);
  for (const auto& [name, color] : type_colors) normalize_color(color);
}

std::string render_annotation_svg(const LayoutGeometry& g, const StyleSheet& style) {
  style.validate();
  std::map<std::size_t, double> row_top;
  double y = style.margin;
  for (const auto& r : g.rows) {
    row_top[r.index] = y;
    y += r.height;
  }
  const double width = g.row_width + 2 * style.margin;
  const double height = y + style.margin;
  const double m = style.margin;
  SvgWriter svg(width, height, style);

  auto color_for = [&](const std::optional<std::string>& type, Side side) {
    if (type) {
      if (auto it = style.type_colors.find(*type); it != style.type_colors.end()) return normalize_color(it->second);
    }
    return normalize_color(side == Side::Above ? style.semantic_color : style.syntactic_color);
  };

  svg.line("<g class=\"tokens\">");
  for (const auto& r : g.rows) {
    for (const auto& t : r.tokens) {
      svg.line("<text" + attr("class", "token") + attr("data-id", token_element_id(t.token_index)) +
               attr("x", m + t.x) + attr("y", row_top[r.index] + r.baseline) + attr("textLength", t.width) +
               attr("fill", style.text_color) + ">" + detail::xml_escape(t.text) + "</text>");
    }
  }
  svg.line("</g>");

  svg.line("<g class=\"mentions\">");
  for (const auto& mg : g.mentions) {
    const std::string color = color_for(mg.type, mg.side);
    svg.line("<g" + attr("class", "mention " + std::string(to_string(mg.side))) + attr("data-id", mg.mention_id) + ">");
    for (const auto& u : mg.underlines) {
      const double uy = row_top.at(u.row) + u.y;
      svg.line("<line" + attr("class", "mention-underline") + attr("x1", m + u.x1) + attr("y1", uy) +
               attr("x2", m + u.x2) + attr("y2", uy) + attr("stroke", color) + attr("stroke-width", 2.0) + "/>");
    }
    if (mg.label_box) {
      const Box& b = *mg.label_box;
      const double by = row_top.at(b.row) + b.y;
      svg.line("<rect" + attr("class", "mention-box") + attr("x", m + b.x) + attr("y", by) + attr("width", b.width) +
               attr("height", b.height) + attr("rx", 2.0) + attr("fill", style.background) + attr("stroke", color) +
               "/>");
      svg.line(text_element("mention-label", m + b.x + b.width / 2, by + b.height - 3, "middle", color, mg.label));
    }
    svg.line("</g>");
  }
  svg.line("</g>");

  svg.line("<g class=\"arcs\">");
  for (const auto& arc : g.arcs) {
    const std::string color = color_for(arc.type, arc.side);
    const double dir = arc.side == Side::Above ? 1 : -1;  // from run toward the text
    svg.line("<g" + attr("class", "arc " + std::string(to_string(arc.side))) + attr("data-id", arc.relation_id) + ">");
    for (const auto& seg : arc.segments) {
      const double top = row_top.at(seg.row);
      const double ry = top + seg.y;
      double run_left = seg.left, run_right = seg.right;
      std::string d;
      for (const auto& drop : seg.drops) {
        const double ye = top + drop.y_end;
        const double span = std::abs(ye - ry);
        const double r = std::min({style.corner_radius, span, (seg.right - seg.left) / 2});
        const double toward = ye >= ry ? 1 : -1;
        if (r > 0 && drop.x == seg.left && !seg.enters_left) {
          d += "M" + num(m + drop.x) + " " + num(ye) + " V" + num(ry + toward * r) + " Q" + num(m + drop.x) + " " +
               num(ry) + " " + num(m + drop.x + r) + " " + num(ry) + " ";
          run_left = std::max(run_left, drop.x + r);
        } else if (r > 0 && drop.x == seg.right && !seg.exits_right) {
          d += "M" + num(m + drop.x) + " " + num(ye) + " V" + num(ry + toward * r) + " Q" + num(m + drop.x) + " " +
               num(ry) + " " + num(m + drop.x - r) + " " + num(ry) + " ";
          run_right = std::min(run_right, drop.x - r);
        } else {
          d += "M" + num(m + drop.x) + " " + num(ry) + " V" + num(ye) + " ";
        }
      }
      if (run_right > run_left) d += "M" + num(m + run_left) + " " + num(ry) + " H" + num(m + run_right);
      if (!d.empty() && d.back() == ' ') d.pop_back();
      svg.line("<path" + attr("class", "arc-segment") + attr("d", d) + attr("fill", "none") + attr("stroke", color) +
               attr("stroke-width", 1.5) + "/>");
      for (const auto& drop : seg.drops) {
        if (!drop.arrow) continue;
        const double ye = top + drop.y_end;
        const double a = style.arrow_size;
        const double x = m + drop.x;
        const double back = ye - dir * 2 * a;
        svg.line("<path" + attr("class", "arrowhead") +
                 attr("d", "M" + num(x) + " " + num(ye) + " L" + num(x - a) + " " + num(back) + " L" + num(x + a) +
                               " " + num(back) + " Z") +
                 attr("fill", color) + "/>");
      }
    }
    if (arc.label_box) {
      const Box& b = *arc.label_box;
      const double by = row_top.at(b.row) + b.y;
      svg.line("<rect" + attr("class", "arc-box") + attr("x", m + b.x) + attr("y", by) + attr("width", b.width) +
               attr("height", b.height) + attr("rx", 2.0) + attr("fill", style.background) + attr("stroke", color) +
               "/>");
      svg.line(text_element("arc-label", m + b.x + b.width / 2, by + b.height - 3, "middle", color, arc.label));
    }
    svg.line("</g>");
  }
  svg.line("</g>");
  return svg.finish();
}

namespace {

struct PlacedNode {
  const SummaryNode* node;
  const std::string* role;
  std::size_t depth;
  double x;
  double width;
  std::size_t parent;
};

class TreePlacer {
 public:
  explicit TreePlacer(const StyleSheet& style) : style_(style) {}

  double box_width(const SummaryNode& n) const {
    const double w = style_.font_metrics ? style_.font_metrics(n.label) : default_text_width(n.label);
    return w + 12;
  }

  double subtree_width(const SummaryNode& n) {
    double children = 0;
    for (std::size_t i = 0; i < n.children.size(); ++i) {
      if (i > 0) children += style_.node_gap;
      children += subtree_width(n.children[i].node);
    }
    const double w = std::max(box_width(n), children);
    widths_[&n] = w;
    return w;
  }

  void place(const SummaryNode& n, const std::string* role, std::size_t depth, double left, std::size_t parent) {
    const double w = widths_.at(&n);
    double children = 0;
    for (std::size_t i = 0; i < n.children.size(); ++i) {
      if (i > 0) children += style_.node_gap;
      children += widths_.at(&n.children[i].node);
    }
    const std::size_t me = nodes.size();
    nodes.push_back({&n, role, depth, left + w / 2, box_width(n), parent});
    double cursor = left + (w - children) / 2;
    for (const auto& edge : n.children) {
      place(edge.node, &edge.role, depth + 1, cursor, me);
      cursor += widths_.at(&edge.node) + style_.node_gap;
    }
  }

  std::vector<PlacedNode> nodes;

 private:
  const StyleSheet& style_;
  std::map<const SummaryNode*, double> widths_;
};

}  // namespace

std::string render_tree_svg(const SummaryTree& tree, const StyleSheet& style) {
  style.validate();
  TreePlacer placer(style);
  const double total = placer.subtree_width(tree.root);
  placer.place(tree.root, nullptr, 0, style.margin, static_cast<std::size_t>(-1));
  std::size_t max_depth = 0;
  for (const auto& p : placer.nodes) max_depth = std::max(max_depth, p.depth);

  const double box_h = style.font_size + 10;
  const double width = total + 2 * style.margin;
  const double height = static_cast<double>(max_depth) * style.level_height + box_h + 2 * style.margin;
  SvgWriter svg(width, height, style);
  auto top_of = [&](const PlacedNode& p) { return style.margin + static_cast<double>(p.depth) * style.level_height; };

  svg.line("<g class=\"tree-edges\">");
  for (const auto& p : placer.nodes) {
    if (p.parent == static_cast<std::size_t>(-1)) continue;
    const PlacedNode& parent = placer.nodes[p.parent];
    const double y1 = top_of(parent) + box_h;
    const double y2 = top_of(p);
    svg.line("<g" + attr("class", "tree-edge") + ">");
    svg.line("<line" + attr("x1", parent.x) + attr("y1", y1) + attr("x2", p.x) + attr("y2", y2) +
             attr("stroke", style.syntactic_color) + attr("stroke-width", 1.0) + "/>");
    svg.line(text_element("tree-role", (parent.x + p.x) / 2, (y1 + y2) / 2, "middle", style.syntactic_color, *p.role));
    svg.line("</g>");
  }
  svg.line("</g>");

  svg.line("<g class=\"tree-nodes\">");
  for (const auto& p : placer.nodes) {
    const bool relation = std::holds_alternative<RelationRef>(p.node->element);
    const std::string color = normalize_color(relation ? style.semantic_color : style.text_color);
    const double top = top_of(p);
    svg.line("<g" + attr("class", relation ? "tree-node relation" : "tree-node leaf") +
             attr("data-ref", element_id(p.node->element)) + ">");
    svg.line("<rect" + attr("x", p.x - p.width / 2) + attr("y", top) + attr("width", p.width) + attr("height", box_h) +
             attr("rx", 3.0) + attr("fill", style.background) + attr("stroke", color) + "/>");
    svg.line(text_element("tree-label", p.x, top + box_h - 6, "middle", color, p.node->label));
    svg.line("</g>");
  }
  svg.line("</g>");
  return svg.finish();
}

}  // namespace tag
