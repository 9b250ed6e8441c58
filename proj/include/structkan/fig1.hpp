#pragma once

// The structure-match experiment: one four-input network shaped
// w(u(x1,x2), v(y1,y2)) is trained twice under identical settings, once on
// a target that factors through that shape and once on a target that does
// not. The deliverable is the pair of validation curves plus a summary
// whose headline number is the ratio of final validation errors.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "structkan/dataset.hpp"
#include "structkan/expr.hpp"
#include "structkan/threads.hpp"
#include "structkan/topology.hpp"
#include "structkan/train_boosted.hpp"

namespace structkan {

// Full description of one training run: network, engine settings, sampling
// domain, and the target expression over named variables. The seed lives in
// the engine config and drives both data generation and training.
struct ExperimentSpec {
  NetworkTopology topology;
  EngineConfig config;
  std::vector<std::string> variables;
  std::string target;
  int train_samples = 10000;
  int val_samples = 2000;
  double lo = -1.0;
  double hi = 1.0;
};

inline bool specs_match_except_target(const ExperimentSpec& a, const ExperimentSpec& b) {
  return a.topology == b.topology && a.config == b.config && a.variables == b.variables &&
         a.train_samples == b.train_samples && a.val_samples == b.val_samples &&
         a.lo == b.lo && a.hi == b.hi;
}

struct Fig1Summary {
  double matched_final_val = 0.0;
  double matched_best_val = 0.0;
  double mismatched_final_val = 0.0;
  double mismatched_best_val = 0.0;
  double ratio = 0.0;  // mismatched final over matched final
};

struct Fig1Result {
  TrainingTrace matched;
  TrainingTrace mismatched;
  Fig1Summary summary;
};

// The three-block network used throughout: inputs x1, x2 feed one
// two-input block, y1, y2 feed another, and a third combines the two.
inline NetworkTopology fig1_topology() {
  NetworkTopology t;
  t.input_dim = 4;
  t.nodes = {NodeKind::input(0),     NodeKind::input(1),     NodeKind::input(2),
             NodeKind::input(3),     NodeKind::black_box(2), NodeKind::black_box(2),
             NodeKind::black_box(2)};
  t.edges = {{0, 4}, {1, 4}, {2, 5}, {3, 5}, {4, 6}, {5, 6}};
  t.output = 6;
  return t;
}

inline std::vector<std::string> fig1_variables() { return {"x1", "x2", "y1", "y2"}; }

// Runs both trainings and assembles the comparison. The "matched" and
// "mismatched" names record the caller's claim about structure; nothing
// here checks it, and passing the same target twice is the natural
// symmetry control (the ratio then comes out at exactly 1). The two runs
// are independent and may execute in parallel; each derives all of its
// randomness from its own spec, so scheduling cannot change the traces.
// on_round(which, row) streams progress (which: 0 matched, 1 mismatched)
// and may be called from both runs concurrently.
inline Fig1Result run_fig1(const ExperimentSpec& matched, const ExperimentSpec& mismatched,
                           const std::function<void(int, const TraceRow&)>& on_round = {}) {
  if (!specs_match_except_target(matched, mismatched))
    throw std::invalid_argument("run_fig1: specs must differ only in the target expression");

  const ExperimentSpec* specs[2] = {&matched, &mismatched};
  std::optional<BoostedResult> runs[2];
  parallel_for(2, [&](int i) {
    const ExperimentSpec& s = *specs[i];
    const ExprTree expr = ExprTree::parse(s.target, s.variables);
    const TrainValSplit data =
        make_train_val(expr, s.train_samples, s.val_samples, s.config.seed, s.lo, s.hi);
    std::function<void(const TraceRow&)> forward_row;
    if (on_round) forward_row = [&on_round, i](const TraceRow& r) { on_round(i, r); };
    runs[i] = train_boosted(s.topology, data.train, data.val, s.config, false, forward_row);
  });

  const auto final_val = [](const TrainingTrace& t) { return t.rows.back().val_rmse_norm; };
  const auto best_val = [](const TrainingTrace& t) {
    double best = t.rows.front().val_rmse_norm;
    for (const TraceRow& r : t.rows) best = std::min(best, r.val_rmse_norm);
    return best;
  };

  Fig1Result out;
  out.matched = std::move(runs[0]->trace);
  out.mismatched = std::move(runs[1]->trace);
  out.summary.matched_final_val = final_val(out.matched);
  out.summary.matched_best_val = best_val(out.matched);
  out.summary.mismatched_final_val = final_val(out.mismatched);
  out.summary.mismatched_best_val = best_val(out.mismatched);
  out.summary.ratio = out.summary.mismatched_final_val / out.summary.matched_final_val;
  return out;
}

namespace detail {

// Fixed two-decimal pixel coordinates keep the SVG byte-stable across runs.
inline std::string svg_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return std::string(buf);
}

}  // namespace detail

// Self-contained 800x500 SVG with both validation curves on a log-scaled
// y axis. No external assets, coordinates rounded to 0.01 px, so the same
// traces always produce the same bytes.
inline std::string render_fig1_svg(const TrainingTrace& matched, const TrainingTrace& mismatched,
                                   std::string_view matched_label = "z (matched structure)",
                                   std::string_view mismatched_label = "z&apos; (mismatched structure)") {
  constexpr double kLeft = 70.0, kRight = 780.0, kTop = 30.0, kBottom = 450.0;
  constexpr double kValueFloor = 1e-12;  // keeps a perfect fit on the chart

  int max_round = 1;
  double lo_val = 1e300, hi_val = 0.0;
  for (const TrainingTrace* t : {&matched, &mismatched}) {
    for (const TraceRow& r : t->rows) {
      max_round = std::max(max_round, r.round);
      const double v = std::max(r.val_rmse_norm, kValueFloor);
      lo_val = std::min(lo_val, v);
      hi_val = std::max(hi_val, v);
    }
  }
  if (hi_val <= 0.0) {
    lo_val = kValueFloor;
    hi_val = 1.0;
  }
  int lo_dec = static_cast<int>(std::floor(std::log10(lo_val)));
  int hi_dec = static_cast<int>(std::ceil(std::log10(hi_val)));
  if (hi_dec <= lo_dec) hi_dec = lo_dec + 1;

  const auto x_of = [&](int round) {
    if (max_round <= 1) return kLeft;
    return kLeft + (kRight - kLeft) * (round - 1) / static_cast<double>(max_round - 1);
  };
  const auto y_of = [&](double v) {
    const double d = std::log10(std::max(v, kValueFloor));
    return kTop + (kBottom - kTop) * (hi_dec - d) / static_cast<double>(hi_dec - lo_dec);
  };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"500\" "
         "viewBox=\"0 0 800 500\" font-family=\"sans-serif\" font-size=\"13\">\n";
  svg += "<rect width=\"800\" height=\"500\" fill=\"white\"/>\n";

  // Decade gridlines with tick labels on the left.
  for (int d = lo_dec; d <= hi_dec; ++d) {
    const std::string y = detail::svg_num(y_of(std::pow(10.0, d)));
    const std::string yl = detail::svg_num(y_of(std::pow(10.0, d)) + 4.0);
    svg += "<line x1=\"70\" y1=\"" + y + "\" x2=\"780\" y2=\"" + y +
           "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    svg += "<text x=\"62\" y=\"" + yl + "\" text-anchor=\"end\" fill=\"#444444\">1e" +
           std::to_string(d) + "</text>\n";
  }
  // Round ticks at quarters of the x range.
  for (int q = 0; q <= 4; ++q) {
    const int round = 1 + (max_round - 1) * q / 4;
    const std::string x = detail::svg_num(x_of(round));
    svg += "<line x1=\"" + x + "\" y1=\"450\" x2=\"" + x +
           "\" y2=\"456\" stroke=\"#444444\" stroke-width=\"1\"/>\n";
    svg += "<text x=\"" + x + "\" y=\"472\" text-anchor=\"middle\" fill=\"#444444\">" +
           std::to_string(round) + "</text>\n";
  }

  // Axes.
  svg += "<line x1=\"70\" y1=\"30\" x2=\"70\" y2=\"450\" stroke=\"#222222\" stroke-width=\"1\"/>\n";
  svg += "<line x1=\"70\" y1=\"450\" x2=\"780\" y2=\"450\" stroke=\"#222222\" stroke-width=\"1\"/>\n";
  svg += "<text x=\"425\" y=\"494\" text-anchor=\"middle\" fill=\"#222222\">round</text>\n";
  svg += "<text x=\"16\" y=\"240\" text-anchor=\"middle\" fill=\"#222222\" "
         "transform=\"rotate(-90 16 240)\">validation RMSE (normalized)</text>\n";

  const auto curve = [&](const TrainingTrace& t, const char* color) {
    svg += "<polyline fill=\"none\" stroke=\"";
    svg += color;
    svg += "\" stroke-width=\"2\" points=\"";
    for (const TraceRow& r : t.rows) {
      svg += detail::svg_num(x_of(r.round));
      svg += ',';
      svg += detail::svg_num(y_of(r.val_rmse_norm));
      svg += ' ';
    }
    if (!t.rows.empty()) svg.pop_back();
    svg += "\"/>\n";
  };
  curve(matched, "#1f77b4");
  curve(mismatched, "#d62728");

  // Legend, top right.
  const auto legend = [&](int y, const char* color, std::string_view label) {
    svg += "<line x1=\"560\" y1=\"" + std::to_string(y) + "\" x2=\"590\" y2=\"" +
           std::to_string(y) + "\" stroke=\"";
    svg += color;
    svg += "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"598\" y=\"" + std::to_string(y + 4) + "\" fill=\"#222222\">";
    svg += label;
    svg += "</text>\n";
  };
  legend(46, "#1f77b4", matched_label);
  legend(66, "#d62728", mismatched_label);

  svg += "</svg>\n";
  return svg;
}

}  // namespace structkan
