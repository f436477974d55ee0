#include <algorithm>
#include <fstream>
#include <stdexcept>

#include "contagion/csv.hpp"
#include "contagion/tda.hpp"

namespace contagion::tda {

void write_diagram_csv(const PersistenceDiagram& diagram, const std::string& path) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& pt : diagram.h0) {
        rows.push_back({"0", csv::format_double(pt.birth), csv::format_double(pt.death)});
    }
    for (const auto& pt : diagram.h1) {
        rows.push_back({"1", csv::format_double(pt.birth), csv::format_double(pt.death)});
    }
    csv::write_file(path, {"dim", "birth", "death"}, rows);
}

PersistenceDiagram read_diagram_csv(const std::string& path) {
    const auto t = csv::read_file(path);
    const int cd = t.require_column("dim");
    const int cb = t.require_column("birth");
    const int cde = t.require_column("death");
    PersistenceDiagram out;
    for (const auto& row : t.rows) {
        DiagramPoint pt;
        pt.birth = std::stod(row[cb]);
        pt.death = std::stod(row[cde]);
        if (row[cd] == "0") {
            out.h0.push_back(pt);
        } else if (row[cd] == "1") {
            out.h1.push_back(pt);
        } else {
            throw std::runtime_error("read_diagram_csv: dim must be 0 or 1");
        }
    }
    return out;
}

namespace {

struct ValueRange {
    double lo{0.0};
    double hi{1.0};
};

ValueRange diagram_range(const PersistenceDiagram& d) {
    ValueRange r;
    bool any = false;
    for (const auto* group : {&d.h0, &d.h1}) {
        for (const auto& pt : *group) {
            if (!any) {
                r.lo = pt.death;
                r.hi = pt.birth;
                any = true;
            }
            r.lo = std::min(r.lo, pt.death);
            r.hi = std::max(r.hi, pt.birth);
        }
    }
    if (!any) {
        r.lo = 0.0;
        r.hi = 1.0;
    }
    if (r.hi == r.lo) r.hi = r.lo + 1.0;
    return r;
}

}  // namespace

void write_diagram_svg(const PersistenceDiagram& diagram, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_diagram_svg: cannot write '" + path + "'");
    constexpr double size = 440.0, margin = 40.0;
    const auto range = diagram_range(diagram);
    const double span = range.hi - range.lo;
    const auto sx = [&](double v) { return margin + (v - range.lo) / span * (size - 2 * margin); };
    const auto sy = [&](double v) {
        return size - margin - (v - range.lo) / span * (size - 2 * margin);
    };
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size
        << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<line x1=\"" << sx(range.lo) << "\" y1=\"" << sy(range.lo) << "\" x2=\""
        << sx(range.hi) << "\" y2=\"" << sy(range.hi)
        << "\" stroke=\"gray\" stroke-dasharray=\"4\"/>\n";
    // Axes: birth horizontal, death vertical.
    out << "<line x1=\"" << margin << "\" y1=\"" << size - margin << "\" x2=\"" << size - margin
        << "\" y2=\"" << size - margin << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\""
        << size - margin << "\" stroke=\"black\"/>\n";
    for (const auto& pt : diagram.h0) {
        out << "<circle cx=\"" << sx(pt.birth) << "\" cy=\"" << sy(pt.death)
            << "\" r=\"4\" fill=\"black\"/>\n";
    }
    for (const auto& pt : diagram.h1) {
        const double x = sx(pt.birth), y = sy(pt.death);
        out << "<polygon points=\"" << x << ',' << y - 5 << ' ' << x - 4.5 << ',' << y + 3.5 << ' '
            << x + 4.5 << ',' << y + 3.5 << "\" fill=\"red\"/>\n";
    }
    out << "</svg>\n";
}

void write_barcode_svg(const PersistenceDiagram& diagram, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_barcode_svg: cannot write '" + path + "'");
    const auto range = diagram_range(diagram);
    const double span = range.hi - range.lo;
    constexpr double width = 520.0, margin = 40.0, bar_step = 10.0;
    const int n_bars = static_cast<int>(diagram.h0.size() + diagram.h1.size());
    const double height = 2 * margin + bar_step * std::max(n_bars, 1);
    const auto sx = [&](double v) {
        return margin + (v - range.lo) / span * (width - 2 * margin);
    };
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    double y = margin;
    const auto draw = [&](const std::vector<DiagramPoint>& group, const char* colour) {
        std::vector<DiagramPoint> sorted(group.begin(), group.end());
        std::sort(sorted.begin(), sorted.end(), [](const DiagramPoint& a, const DiagramPoint& b) {
            return a.birth - a.death > b.birth - b.death;
        });
        for (const auto& pt : sorted) {
            out << "<line x1=\"" << sx(pt.death) << "\" y1=\"" << y << "\" x2=\"" << sx(pt.birth)
                << "\" y2=\"" << y << "\" stroke=\"" << colour << "\" stroke-width=\"4\"/>\n";
            y += bar_step;
        }
    };
    draw(diagram.h0, "black");
    draw(diagram.h1, "red");
    out << "</svg>\n";
}

}  // namespace contagion::tda
