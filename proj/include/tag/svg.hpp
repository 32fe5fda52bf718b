#pragma once

// Standalone SVG 1.1 output for layouts and summary trees. Output depends
// only on the inputs: same geometry and style, same bytes.

#include <map>
#include <string>

#include "tag/layout.hpp"
#include "tag/taxonomy.hpp"
#include "tag/tree.hpp"

namespace tag {

struct StyleSheet {
  std::string semantic_color = "#1F4E79";
  std::string syntactic_color = "#6B6B6B";
  std::string text_color = "#000000";
  std::string background = "#FFFFFF";
  /// Type name -> "#RRGGBB"; overrides the layer color.
  std::map<std::string, std::string> type_colors;
  std::string font_family = "sans-serif";
  double font_size = 12;
  double corner_radius = 4;
  double arrow_size = 4;
  double margin = 10;
  /// Tree panel spacing.
  double level_height = 60;
  double node_gap = 16;
  FontMetrics font_metrics;

  static StyleSheet from_taxonomy(const Taxonomy& taxonomy);
  /// Throws InvalidColor.
  void validate() const;
};

std::string render_annotation_svg(const LayoutGeometry& geometry, const StyleSheet& style);
std::string render_tree_svg(const SummaryTree& tree, const StyleSheet& style);

}  // namespace tag
