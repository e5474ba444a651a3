#pragma once

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "sagr/scene.hpp"
#include "sagr/sensing.hpp"

namespace fixtures {

// Per-process scratch directory so reruns never see stale files.
inline std::filesystem::path temp_dir(const std::string& tag) {
    auto dir = std::filesystem::temp_directory_path() /
               ("sagr_test_" + std::to_string(::getpid())) / tag;
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::string write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
    return path.string();
}

// Fully observed copy of a ground-truth grid, for tests that need a known map.
inline sagr::ObservedMap fully_observed(const sagr::SemanticGrid& truth) {
    sagr::ObservedMap m(truth);
    m.grid = truth;
    for (const sagr::Cell& c : truth.cells)
        if (c.occ != sagr::Occupancy::Unknown) m.revealed_count += 1;
    return m;
}

// Observed map built from ASCII rows: '#' occupied, '.' unknown, ' ' free
// unlabeled, 'a'..'z' free labeled (label id = letter - 'a').
inline sagr::ObservedMap observed_from_ascii(const std::vector<std::string>& rows) {
    sagr::SemanticGrid g(static_cast<int>(rows[0].size()), static_cast<int>(rows.size()), 1.0);
    for (int y = 0; y < g.height; ++y)
        for (int x = 0; x < g.width; ++x) {
            char t = rows[static_cast<std::size_t>(y)][static_cast<std::size_t>(x)];
            sagr::Cell& c = g.at(x, y);
            if (t == '#') c.occ = sagr::Occupancy::Occupied;
            else if (t == '.') c.occ = sagr::Occupancy::Unknown;
            else {
                c.occ = sagr::Occupancy::Free;
                if (t != ' ') c.label = static_cast<sagr::LabelId>(t - 'a');
            }
        }
    sagr::ObservedMap m;
    m.grid = g;
    for (const sagr::Cell& c : g.cells)
        if (c.occ != sagr::Occupancy::Unknown) m.revealed_count += 1;
    return m;
}

}  // namespace fixtures
