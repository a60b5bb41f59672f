#include "demoforge/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace demoforge {

namespace {

constexpr double kCanvas = 800.0;   // drawing square, excluding the title strip
constexpr double kTitleStrip = 36.0;
constexpr double kMargin = 20.0;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    // avoid the two spellings of zero
    if (std::string_view(buf) == "-0.00") return "0.00";
    return buf;
}

std::string escape(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    for (const char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string svg_open(double width, double height) {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(width) + "\" height=\"" +
           fmt(height) + "\" viewBox=\"0 0 " + fmt(width) + " " + fmt(height) + "\">\n";
}

std::string title_text(const std::string& text, double width) {
    return "  <text class=\"title\" x=\"" + fmt(width / 2.0) +
           "\" y=\"24\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"16\" "
           "fill=\"#e5e5e5\">" +
           escape(text) + "</text>\n";
}

// World coordinates (y up) to canvas pixels (y down) inside the map square.
struct MapProjection {
    double scale = (kCanvas - 2.0 * kMargin) / (kMapMax - kMapMin);

    double x(double wx) const { return kMargin + (wx - kMapMin) * scale; }
    double y(double wy) const { return kTitleStrip + kMargin + (kMapMax - wy) * scale; }
};

void draw_player(std::string& svg, const MapProjection& proj, const PlayerState& p,
                 const char* color) {
    const double cx = proj.x(p.pos.x);
    const double cy = proj.y(p.pos.y);
    if (!p.alive) {
        svg += "  <path class=\"player-dead\" d=\"M" + fmt(cx - 5) + "," + fmt(cy - 5) + " L" +
               fmt(cx + 5) + "," + fmt(cy + 5) + " M" + fmt(cx - 5) + "," + fmt(cy + 5) + " L" +
               fmt(cx + 5) + "," + fmt(cy - 5) +
               "\" stroke=\"#6b7280\" stroke-width=\"2\" fill=\"none\"/>\n";
        return;
    }
    // facing line under the body glyph; world yaw is counterclockwise from +x
    const double yaw = p.view_yaw * 3.141592653589793 / 180.0;
    const double vx = cx + 14.0 * std::cos(yaw);
    const double vy = cy - 14.0 * std::sin(yaw);
    svg += "  <line class=\"view\" x1=\"" + fmt(cx) + "\" y1=\"" + fmt(cy) + "\" x2=\"" + fmt(vx) +
           "\" y2=\"" + fmt(vy) + "\" stroke=\"#000000\" stroke-width=\"2\"/>\n";
    svg += "  <circle class=\"player\" cx=\"" + fmt(cx) + "\" cy=\"" + fmt(cy) +
           "\" r=\"7\" fill=\"" + color + "\" stroke=\"#111111\"/>\n";
    // HP bar above the glyph
    const double bar_w = 18.0;
    const double bx = cx - bar_w / 2.0;
    const double by = cy - 16.0;
    svg += "  <rect class=\"hpbar-bg\" x=\"" + fmt(bx) + "\" y=\"" + fmt(by) + "\" width=\"" +
           fmt(bar_w) + "\" height=\"3\" fill=\"#374151\"/>\n";
    svg += "  <rect class=\"hpbar\" x=\"" + fmt(bx) + "\" y=\"" + fmt(by) + "\" width=\"" +
           fmt(bar_w * p.hp / 100.0) + "\" height=\"3\" fill=\"#4ade80\"/>\n";
}

}  // namespace

std::string render_frame_svg(const Frame& frame, const std::string& map_name) {
    const MapProjection proj;
    const double height = kCanvas + kTitleStrip;

    std::string svg = svg_open(kCanvas, height);
    svg += "  <rect class=\"bg\" x=\"0\" y=\"0\" width=\"" + fmt(kCanvas) + "\" height=\"" +
           fmt(height) + "\" fill=\"#15161c\"/>\n";
    svg += title_text(map_name + "  tick " + std::to_string(frame.tick) + "  " +
                          phase_name(frame.phase),
                      kCanvas);
    svg += "  <rect class=\"map-border\" x=\"" + fmt(kMargin) + "\" y=\"" +
           fmt(kTitleStrip + kMargin) + "\" width=\"" + fmt(kCanvas - 2 * kMargin) +
           "\" height=\"" + fmt(kCanvas - 2 * kMargin) +
           "\" fill=\"none\" stroke=\"#3f3f46\"/>\n";

    for (const AreaEffect& smoke : frame.smokes)
        svg += "  <circle class=\"smoke\" cx=\"" + fmt(proj.x(smoke.pos.x)) + "\" cy=\"" +
               fmt(proj.y(smoke.pos.y)) +
               "\" r=\"22\" fill=\"#9ca3af\" fill-opacity=\"0.55\"/>\n";
    for (const AreaEffect& fire : frame.fires)
        svg += "  <circle class=\"fire\" cx=\"" + fmt(proj.x(fire.pos.x)) + "\" cy=\"" +
               fmt(proj.y(fire.pos.y)) + "\" r=\"16\" fill=\"#ef4444\" fill-opacity=\"0.6\"/>\n";

    // bomb marker: at the plant spot once planted, else on its carrier
    std::optional<Vec3> bomb_pos = frame.bomb.pos;
    if (!bomb_pos && frame.bomb.carrier_id)
        for (const TeamState* team : {&frame.ct, &frame.t})
            for (const PlayerState& p : team->players)
                if (p.player_id == *frame.bomb.carrier_id) bomb_pos = p.pos;
    if (bomb_pos) {
        const double bx = proj.x(bomb_pos->x);
        const double by = proj.y(bomb_pos->y);
        svg += "  <path class=\"bomb\" d=\"M" + fmt(bx) + "," + fmt(by - 8) + " L" + fmt(bx - 7) +
               "," + fmt(by + 5) + " L" + fmt(bx + 7) + "," + fmt(by + 5) +
               " Z\" fill=\"#ffffff\" stroke=\"#111111\"/>\n";
    }

    for (const PlayerState& p : frame.ct.players) draw_player(svg, proj, p, "#22d3ee");
    for (const PlayerState& p : frame.t.players) draw_player(svg, proj, p, "#f59e0b");

    svg += "</svg>\n";
    return svg;
}

std::string render_heatmap_svg(const HeatmapGrid& grid, const std::string& title) {
    const double height = kCanvas + kTitleStrip;
    const double plot = kCanvas - 2.0 * kMargin;
    const double cell_w = plot / grid.spec.nx;
    const double cell_h = plot / grid.spec.ny;

    long long max_count = 0;
    for (const long long c : grid.counts) max_count = std::max(max_count, c);
    const double denom = std::log1p(static_cast<double>(max_count));

    std::string svg = svg_open(kCanvas, height);
    svg += "  <rect class=\"bg\" x=\"0\" y=\"0\" width=\"" + fmt(kCanvas) + "\" height=\"" +
           fmt(height) + "\" fill=\"#15161c\"/>\n";
    svg += title_text(title, kCanvas);

    for (int iy = 0; iy < grid.spec.ny; ++iy)
        for (int ix = 0; ix < grid.spec.nx; ++ix) {
            const long long c = grid.at(ix, iy);
            if (c == 0) continue;
            // row 0 is the lowest y band; the canvas draws top-down
            const double x = kMargin + ix * cell_w;
            const double y = kTitleStrip + kMargin + (grid.spec.ny - 1 - iy) * cell_h;
            const double intensity =
                denom > 0.0 ? std::log1p(static_cast<double>(c)) / denom : 0.0;
            char op[16];
            std::snprintf(op, sizeof op, "%.3f", intensity);
            svg += "  <rect class=\"cell\" x=\"" + fmt(x) + "\" y=\"" + fmt(y) + "\" width=\"" +
                   fmt(cell_w) + "\" height=\"" + fmt(cell_h) + "\" fill=\"#ff5a00\" fill-opacity=\"" +
                   op + "\"/>\n";
        }

    svg += "  <rect class=\"map-border\" x=\"" + fmt(kMargin) + "\" y=\"" +
           fmt(kTitleStrip + kMargin) + "\" width=\"" + fmt(plot) + "\" height=\"" + fmt(plot) +
           "\" fill=\"none\" stroke=\"#3f3f46\"/>\n";
    svg += "  <text class=\"oob\" x=\"" + fmt(kMargin) + "\" y=\"" + fmt(height - 8.0) +
           "\" font-family=\"monospace\" font-size=\"12\" fill=\"#9ca3af\">binned " +
           std::to_string(grid.total()) + ", out of bounds " + std::to_string(grid.out_of_bounds) +
           "</text>\n";
    svg += "</svg>\n";
    return svg;
}

std::string render_win_curve_svg(std::span<const std::pair<Tick, double>> curve,
                                 const std::string& title) {
    const double width = kCanvas;
    const double height = 400.0;
    const double plot_w = width - 2.0 * kMargin;
    const double plot_h = height - kTitleStrip - 2.0 * kMargin;
    const double top = kTitleStrip + kMargin;

    std::string svg = svg_open(width, height);
    svg += "  <rect class=\"bg\" x=\"0\" y=\"0\" width=\"" + fmt(width) + "\" height=\"" +
           fmt(height) + "\" fill=\"#15161c\"/>\n";
    svg += title_text(title, width);
    svg += "  <rect class=\"plot-border\" x=\"" + fmt(kMargin) + "\" y=\"" + fmt(top) +
           "\" width=\"" + fmt(plot_w) + "\" height=\"" + fmt(plot_h) +
           "\" fill=\"none\" stroke=\"#3f3f46\"/>\n";
    svg += "  <line class=\"midline\" x1=\"" + fmt(kMargin) + "\" y1=\"" + fmt(top + plot_h / 2) +
           "\" x2=\"" + fmt(kMargin + plot_w) + "\" y2=\"" + fmt(top + plot_h / 2) +
           "\" stroke=\"#3f3f46\" stroke-dasharray=\"4 4\"/>\n";

    if (!curve.empty()) {
        const Tick t0 = curve.front().first;
        const Tick t1 = curve.back().first;
        const double t_span = t1 > t0 ? static_cast<double>(t1 - t0) : 1.0;
        std::string points;
        for (const auto& [tick, p] : curve) {
            const double x = kMargin + static_cast<double>(tick - t0) / t_span * plot_w;
            const double y = top + (1.0 - p) * plot_h;
            points += fmt(x) + "," + fmt(y) + " ";
        }
        if (!points.empty()) points.pop_back();
        svg += "  <polyline class=\"curve\" points=\"" + points +
               "\" fill=\"none\" stroke=\"#22d3ee\" stroke-width=\"2\"/>\n";
    }
    svg += "</svg>\n";
    return svg;
}

std::string render_reliability_svg(const CalibrationReport& report, const std::string& title) {
    const double width = kCanvas;
    const double height = 400.0;
    const double plot_w = width - 2.0 * kMargin;
    const double plot_h = height - kTitleStrip - 2.0 * kMargin;
    const double top = kTitleStrip + kMargin;

    std::string svg = svg_open(width, height);
    svg += "  <rect class=\"bg\" x=\"0\" y=\"0\" width=\"" + fmt(width) + "\" height=\"" +
           fmt(height) + "\" fill=\"#15161c\"/>\n";
    svg += title_text(title, width);
    svg += "  <rect class=\"plot-border\" x=\"" + fmt(kMargin) + "\" y=\"" + fmt(top) +
           "\" width=\"" + fmt(plot_w) + "\" height=\"" + fmt(plot_h) +
           "\" fill=\"none\" stroke=\"#3f3f46\"/>\n";
    svg += "  <line class=\"diagonal\" x1=\"" + fmt(kMargin) + "\" y1=\"" + fmt(top + plot_h) +
           "\" x2=\"" + fmt(kMargin + plot_w) + "\" y2=\"" + fmt(top) +
           "\" stroke=\"#6b7280\" stroke-dasharray=\"4 4\"/>\n";

    const int bins = static_cast<int>(report.bin_stats.size());
    const double bar_w = bins > 0 ? plot_w / bins : plot_w;
    for (int b = 0; b < bins; ++b) {
        const CalibrationBin& bin = report.bin_stats[static_cast<std::size_t>(b)];
        if (bin.size == 0) continue;
        const double x = kMargin + b * bar_w;
        const double h = bin.acc * plot_h;
        svg += "  <rect class=\"bin-bar\" x=\"" + fmt(x + 1) + "\" y=\"" + fmt(top + plot_h - h) +
               "\" width=\"" + fmt(bar_w - 2) + "\" height=\"" + fmt(h) +
               "\" fill=\"#22d3ee\" fill-opacity=\"0.7\"/>\n";
        // mean confidence marker inside the bar's bin
        const double cx = kMargin + (b + 0.5) * bar_w;
        const double cy = top + (1.0 - bin.conf) * plot_h;
        svg += "  <circle class=\"conf-dot\" cx=\"" + fmt(cx) + "\" cy=\"" + fmt(cy) +
               "\" r=\"3\" fill=\"#f59e0b\"/>\n";
    }

    char stats[96];
    std::snprintf(stats, sizeof stats, "LL %.4f  ECE %.4f  n %d", report.log_loss, report.ece,
                  report.n);
    svg += "  <text class=\"metrics\" x=\"" + fmt(kMargin) + "\" y=\"" + fmt(height - 6.0) +
           "\" font-family=\"monospace\" font-size=\"12\" fill=\"#9ca3af\">" + stats +
           "</text>\n";
    svg += "</svg>\n";
    return svg;
}

}  // namespace demoforge
