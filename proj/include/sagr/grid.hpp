#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sagr {

enum class Occupancy : std::uint8_t { Unknown = 0, Free = 1, Occupied = 2 };

// Room-type labels are interned against a per-scene label set.
using LabelId = std::int16_t;
inline constexpr LabelId kNoLabel = -1;

struct Cell {
    Occupancy occ = Occupancy::Unknown;
    LabelId label = kNoLabel;

    bool operator==(const Cell&) const = default;
};

struct GridPoint {
    int x = 0;
    int y = 0;

    bool operator==(const GridPoint&) const = default;
};

inline double euclidean(const GridPoint& a, const GridPoint& b) {
    return std::hypot(static_cast<double>(a.x - b.x), static_cast<double>(a.y - b.y));
}

// Planar robot pose in cell coordinates, heading in radians.
struct Pose {
    int x = 0;
    int y = 0;
    double theta = 0.0;

    GridPoint point() const { return {x, y}; }
};

// 4-neighborhood offsets in ascending cell-index order (north, west, east, south).
inline constexpr int kN4dx[4] = {0, -1, 1, 0};
inline constexpr int kN4dy[4] = {-1, 0, 0, 1};

// Row-major 2-D lattice of occupancy + semantic label.
struct SemanticGrid {
    int width = 0;
    int height = 0;
    double resolution = 1.0;  // meters per cell
    std::vector<Cell> cells;

    SemanticGrid() = default;
    SemanticGrid(int w, int h, double res) : width(w), height(h), resolution(res), cells(static_cast<std::size_t>(w) * h) {
        if (w <= 0 || h <= 0) throw std::invalid_argument("SemanticGrid: non-positive dimensions");
        if (!(res > 0.0)) throw std::invalid_argument("SemanticGrid: resolution must be > 0");
    }

    int size() const { return width * height; }
    bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
    bool in_bounds(const GridPoint& p) const { return in_bounds(p.x, p.y); }
    int index(int x, int y) const { return y * width + x; }
    int index(const GridPoint& p) const { return index(p.x, p.y); }
    GridPoint point(int idx) const { return {idx % width, idx / width}; }

    Cell& at(int x, int y) { return cells[static_cast<std::size_t>(index(x, y))]; }
    const Cell& at(int x, int y) const { return cells[static_cast<std::size_t>(index(x, y))]; }
    Cell& at_index(int idx) { return cells[static_cast<std::size_t>(idx)]; }
    const Cell& at_index(int idx) const { return cells[static_cast<std::size_t>(idx)]; }

    Occupancy occ(int idx) const { return cells[static_cast<std::size_t>(idx)].occ; }
    bool is_free(int idx) const { return occ(idx) == Occupancy::Free; }

    bool operator==(const SemanticGrid&) const = default;
};

// Cells on the Bresenham segment from a to b, endpoints included.
std::vector<GridPoint> bresenham_line(GridPoint a, GridPoint b);

// Label interning. Order of insertion defines LabelId values.
class LabelSet {
public:
    LabelSet() = default;
    explicit LabelSet(std::vector<std::string> labels) : labels_(std::move(labels)) {}

    LabelId add(const std::string& label) {
        if (auto id = find(label)) return *id;
        labels_.push_back(label);
        return static_cast<LabelId>(labels_.size() - 1);
    }
    std::optional<LabelId> find(const std::string& label) const {
        for (std::size_t i = 0; i < labels_.size(); ++i)
            if (labels_[i] == label) return static_cast<LabelId>(i);
        return std::nullopt;
    }
    const std::string& name(LabelId id) const { return labels_.at(static_cast<std::size_t>(id)); }
    std::size_t count() const { return labels_.size(); }
    const std::vector<std::string>& names() const { return labels_; }

    bool operator==(const LabelSet&) const = default;

private:
    std::vector<std::string> labels_;
};

// Default room-type vocabulary; configurable per scene.
std::vector<std::string> default_label_names();

}  // namespace sagr
