#include <algorithm>
#include <stdexcept>
#include <vector>

#include "contagion/tda.hpp"

namespace contagion::tda {

namespace {

// Cubical cell in the V-construction: grid samples are vertices, plus the
// edges and squares they span. A cell's superlevel filtration value is the
// minimum over its vertices, so higher-valued cells enter first.
struct Cell {
    double value{0.0};
    int dim{0};
    int id{0};                  // global enumeration: vertices, edges, squares
    std::vector<int> boundary;  // ids of facets
};

// Symmetric difference of two ascending position lists (Z/2 column addition).
std::vector<int> xor_merge(const std::vector<int>& a, const std::vector<int>& b) {
    std::vector<int> out;
    out.reserve(a.size() + b.size());
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] < b[j]) {
            out.push_back(a[i++]);
        } else if (b[j] < a[i]) {
            out.push_back(b[j++]);
        } else {
            ++i;
            ++j;
        }
    }
    out.insert(out.end(), a.begin() + i, a.end());
    out.insert(out.end(), b.begin() + j, b.end());
    return out;
}

}  // namespace

PersistenceDiagram superlevel_persistence(const Eigen::MatrixXd& field) {
    const int rows = static_cast<int>(field.rows());
    const int cols = static_cast<int>(field.cols());
    if (rows < 1 || cols < 1) throw std::invalid_argument("superlevel_persistence: empty field");
    if (!field.allFinite()) {
        throw std::invalid_argument("superlevel_persistence: field must be finite");
    }

    const int n_vertices = rows * cols;
    const int n_h_edges = rows * (cols - 1);
    const int n_v_edges = (rows - 1) * cols;
    const int n_edges = n_h_edges + n_v_edges;
    const int n_squares = (rows - 1) * (cols - 1);
    const auto vid = [cols](int r, int c) { return r * cols + c; };
    // Edge ids: horizontal first (right of (r, c)), then vertical (below).
    const auto h_eid = [&](int r, int c) { return n_vertices + r * (cols - 1) + c; };
    const auto v_eid = [&](int r, int c) { return n_vertices + n_h_edges + r * cols + c; };

    std::vector<Cell> cells;
    cells.reserve(n_vertices + n_edges + n_squares);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            Cell cell;
            cell.value = field(r, c);
            cell.dim = 0;
            cell.id = vid(r, c);
            cells.push_back(std::move(cell));
        }
    }
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c + 1 < cols; ++c) {
            Cell cell;
            cell.value = std::min(field(r, c), field(r, c + 1));
            cell.dim = 1;
            cell.id = h_eid(r, c);
            cell.boundary = {vid(r, c), vid(r, c + 1)};
            cells.push_back(std::move(cell));
        }
    }
    for (int r = 0; r + 1 < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            Cell cell;
            cell.value = std::min(field(r, c), field(r + 1, c));
            cell.dim = 1;
            cell.id = v_eid(r, c);
            cell.boundary = {vid(r, c), vid(r + 1, c)};
            cells.push_back(std::move(cell));
        }
    }
    for (int r = 0; r + 1 < rows; ++r) {
        for (int c = 0; c + 1 < cols; ++c) {
            Cell cell;
            cell.value = std::min({field(r, c), field(r, c + 1), field(r + 1, c),
                                   field(r + 1, c + 1)});
            cell.dim = 2;
            cell.id = n_vertices + n_edges + r * (cols - 1) + c;
            cell.boundary = {h_eid(r, c), h_eid(r + 1, c), v_eid(r, c), v_eid(r, c + 1)};
            cells.push_back(std::move(cell));
        }
    }

    // Filtration order: decreasing value, then lower dimension, then id.
    const int m = static_cast<int>(cells.size());
    std::vector<int> order(m);
    for (int i = 0; i < m; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (cells[a].value != cells[b].value) return cells[a].value > cells[b].value;
        if (cells[a].dim != cells[b].dim) return cells[a].dim < cells[b].dim;
        return cells[a].id < cells[b].id;
    });
    std::vector<int> pos(m);
    for (int p = 0; p < m; ++p) pos[order[p]] = p;

    // Standard boundary-matrix reduction over Z/2.
    std::vector<std::vector<int>> column(m);
    std::vector<int> pivot_owner(m, -1);  // position of the column with this low
    std::vector<std::pair<int, int>> pairs;  // (birth position, death position)
    for (int p = 0; p < m; ++p) {
        const Cell& cell = cells[order[p]];
        if (cell.dim == 0) continue;
        std::vector<int> col;
        col.reserve(cell.boundary.size());
        for (const int f : cell.boundary) col.push_back(pos[f]);
        std::sort(col.begin(), col.end());
        while (!col.empty()) {
            const int low = col.back();
            const int other = pivot_owner[low];
            if (other < 0) break;
            col = xor_merge(col, column[other]);
        }
        if (!col.empty()) {
            pivot_owner[col.back()] = p;
            pairs.emplace_back(col.back(), p);
        }
        column[p] = std::move(col);
    }

    std::vector<std::uint8_t> paired(m, 0);
    for (const auto& [b, d] : pairs) {
        paired[b] = 1;
        paired[d] = 1;
    }

    const double global_min = field.minCoeff();
    PersistenceDiagram out;
    for (const auto& [bp, dp] : pairs) {
        const Cell& birth = cells[order[bp]];
        const Cell& death = cells[order[dp]];
        if (birth.value == death.value) continue;  // zero persistence
        DiagramPoint pt;
        pt.birth = birth.value;
        pt.death = death.value;
        (birth.dim == 0 ? out.h0 : out.h1).push_back(pt);
    }
    // Unpaired cells carry essential classes; they die at the grid minimum.
    for (int p = 0; p < m; ++p) {
        if (paired[p]) continue;
        const Cell& cell = cells[order[p]];
        if (cell.dim == 2) continue;
        DiagramPoint pt;
        pt.birth = cell.value;
        pt.death = global_min;
        pt.essential = true;
        (cell.dim == 0 ? out.h0 : out.h1).push_back(pt);
    }

    const auto sort_pts = [](std::vector<DiagramPoint>& v) {
        std::sort(v.begin(), v.end(), [](const DiagramPoint& a, const DiagramPoint& b) {
            if (a.birth != b.birth) return a.birth > b.birth;
            return a.death > b.death;
        });
    };
    sort_pts(out.h0);
    sort_pts(out.h1);
    return out;
}

ProjectedDiagram project_diagram(std::span<const DiagramPoint> diagram) {
    ProjectedDiagram out;
    out.reserve(diagram.size());
    for (const auto& pt : diagram) {
        const double persistence = pt.birth - pt.death;
        if (persistence <= 0.0) continue;
        out.emplace_back(pt.death, persistence);
    }
    return out;
}

}  // namespace contagion::tda
