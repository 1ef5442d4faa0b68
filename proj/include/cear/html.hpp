#pragma once

#include <algorithm>
#include <cstdio>
#include <string>

#include <json.hpp>

#include "cear/kg.hpp"

namespace cear {

namespace detail {

// Node fill colors by (source, kind): ChEBI chemicals dark red, CEAR
// chemicals light red, ChEBI roles dark blue, CEAR roles light blue.
inline const char* node_color(const EntityRef& ref) {
  const bool chebi = ref.source == EntityRef::Source::Chebi;
  if (ref.kind == MentionKind::Chemical) return chebi ? "#8B0000" : "#F08080";
  return chebi ? "#00008B" : "#ADD8E6";
}

// Edge gray level interpolated between the weakest and strongest relation;
// the darker the edge, the stronger the relation.
inline std::string edge_color(size_t count, size_t min_count,
                              size_t max_count) {
  double t = max_count > min_count
                 ? static_cast<double>(count - min_count) /
                       static_cast<double>(max_count - min_count)
                 : 1.0;
  int gray = static_cast<int>(200.0 * (1.0 - t) + 0.5);
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02X%02X%02X", gray, gray, gray);
  return buf;
}

}  // namespace detail

/// Self-contained HTML rendering of the graph: one node per ref, one edge
/// per relation labeled with its count. All data and the layout script are
/// inlined; the file opens without network access.
inline std::string emit_html(const KnowledgeGraph& kg,
                             const std::string& title = "CEAR knowledge graph") {
  size_t min_count = 0, max_count = 0;
  if (!kg.relations.empty()) {
    min_count = max_count = kg.relations.front().count;
    for (const Relation& rel : kg.relations) {
      min_count = std::min(min_count, rel.count);
      max_count = std::max(max_count, rel.count);
    }
  }

  nlohmann::ordered_json nodes = nlohmann::ordered_json::array();
  std::map<std::tuple<EntityRef::Source, std::string>, size_t> index;
  for (const EntityRef& ref : kg.refs) {
    index[ref.identity()] = nodes.size();
    nodes.push_back({{"id", (ref.source == EntityRef::Source::Chebi
                                 ? "obo:" : "cear:") + ref.id},
                     {"label", ref.display_label},
                     {"color", detail::node_color(ref)}});
  }
  nlohmann::ordered_json links = nlohmann::ordered_json::array();
  for (const Relation& rel : kg.relations) {
    links.push_back({{"source", index.at(rel.entity.identity())},
                     {"target", index.at(rel.role.identity())},
                     {"count", rel.count},
                     {"color", detail::edge_color(rel.count, min_count,
                                                  max_count)}});
  }

  std::string out;
  out += "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n";
  out += "<title>" + title + "</title>\n";
  out +=
      "<style>\n"
      "body { font-family: sans-serif; margin: 16px; background: #fafafa; }\n"
      "h1 { font-size: 18px; }\n"
      ".legend span { display: inline-block; margin-right: 18px; }\n"
      ".legend i { display: inline-block; width: 12px; height: 12px;"
      " margin-right: 5px; border-radius: 6px; }\n"
      "canvas { background: #ffffff; border: 1px solid #ddd; }\n"
      "</style>\n</head>\n<body>\n";
  out += "<h1>" + title + " (minRef=" + std::to_string(kg.min_ref) + ", " +
         std::to_string(kg.relations.size()) + " relations)</h1>\n";
  out +=
      "<div class=\"legend\">\n"
      "<span><i style=\"background:#8B0000\"></i>chemical entity"
      " (ChEBI)</span>\n"
      "<span><i style=\"background:#F08080\"></i>chemical entity"
      " (CEAR)</span>\n"
      "<span><i style=\"background:#00008B\"></i>role (ChEBI)</span>\n"
      "<span><i style=\"background:#ADD8E6\"></i>role (CEAR)</span>\n"
      "</div>\n";
  out += "<canvas id=\"graph\" width=\"1280\" height=\"860\"></canvas>\n";
  out += "<script>\nconst nodes = " + nodes.dump() + ";\n";
  out += "const links = " + links.dump() + ";\n";
  out += R"JS(
// Deterministic force-directed layout on a plain canvas.
const canvas = document.getElementById('graph');
const ctx = canvas.getContext('2d');
const W = canvas.width, H = canvas.height;
let seed = 42;
function rnd() { seed = (seed * 1103515245 + 12345) % 2147483648; return seed / 2147483648; }
nodes.forEach((n, i) => {
  const a = 2 * Math.PI * i / Math.max(nodes.length, 1);
  n.x = W / 2 + (W / 3) * Math.cos(a) + 20 * (rnd() - 0.5);
  n.y = H / 2 + (H / 3) * Math.sin(a) + 20 * (rnd() - 0.5);
  n.vx = 0; n.vy = 0;
});
const degree = new Array(nodes.length).fill(0);
links.forEach(l => { degree[l.source]++; degree[l.target]++; });
function stepLayout() {
  for (let i = 0; i < nodes.length; i++) {
    for (let j = i + 1; j < nodes.length; j++) {
      let dx = nodes[j].x - nodes[i].x, dy = nodes[j].y - nodes[i].y;
      let d2 = dx * dx + dy * dy + 0.01, d = Math.sqrt(d2);
      const f = 6000 / d2;
      dx /= d; dy /= d;
      nodes[i].vx -= f * dx; nodes[i].vy -= f * dy;
      nodes[j].vx += f * dx; nodes[j].vy += f * dy;
    }
  }
  links.forEach(l => {
    const a = nodes[l.source], b = nodes[l.target];
    let dx = b.x - a.x, dy = b.y - a.y;
    const d = Math.sqrt(dx * dx + dy * dy) + 0.01;
    const f = (d - 130) * 0.02;
    dx /= d; dy /= d;
    a.vx += f * dx; a.vy += f * dy;
    b.vx -= f * dx; b.vy -= f * dy;
  });
  nodes.forEach(n => {
    n.vx += (W / 2 - n.x) * 0.002; n.vy += (H / 2 - n.y) * 0.002;
    n.x += Math.max(-8, Math.min(8, n.vx)); n.y += Math.max(-8, Math.min(8, n.vy));
    n.vx *= 0.55; n.vy *= 0.55;
    n.x = Math.max(30, Math.min(W - 30, n.x));
    n.y = Math.max(22, Math.min(H - 22, n.y));
  });
}
function draw() {
  ctx.clearRect(0, 0, W, H);
  ctx.font = '10px sans-serif';
  links.forEach(l => {
    const a = nodes[l.source], b = nodes[l.target];
    ctx.strokeStyle = l.color;
    ctx.lineWidth = 1.4;
    ctx.beginPath(); ctx.moveTo(a.x, a.y); ctx.lineTo(b.x, b.y); ctx.stroke();
    ctx.fillStyle = '#444444';
    ctx.fillText(String(l.count), (a.x + b.x) / 2 + 4, (a.y + b.y) / 2 - 4);
  });
  nodes.forEach((n, i) => {
    const r = 6 + Math.min(6, degree[i]);
    ctx.beginPath(); ctx.arc(n.x, n.y, r, 0, 2 * Math.PI);
    ctx.fillStyle = n.color; ctx.fill();
    ctx.strokeStyle = '#333333'; ctx.lineWidth = 0.8; ctx.stroke();
    ctx.fillStyle = '#111111';
    const label = n.label.length > 28 ? n.label.slice(0, 27) + '…' : n.label;
    ctx.fillText(label, n.x + r + 3, n.y + 3);
  });
}
let ticks = 0;
function loop() {
  for (let k = 0; k < 4; k++) stepLayout();
  draw();
  if (++ticks < 90) requestAnimationFrame(loop);
}
loop();
)JS";
  out += "</script>\n</body>\n</html>\n";
  return out;
}

}  // namespace cear
