#pragma once

#include "topopt/fem.hpp"

#include <string>
#include <vector>

namespace topopt {

/// Connected components of the void region, found by flood fill over
/// face-adjacent void elements.
struct VoidComponents {
    static constexpr int material = -1;

    std::vector<int> label;            // per element; `material` for material
    std::vector<double> volumes;       // per component
    std::vector<bool> touches_exit;    // per component
    std::vector<int> touching;         // ids of components reaching the exit tags
    std::vector<int> enclosed;         // ids of sealed components
    double enclosed_volume = 0.0;

    std::size_t count() const noexcept { return volumes.size(); }
    bool is_enclosed_element(std::size_t e) const {
        return label[e] != material && !touches_exit[static_cast<std::size_t>(label[e])];
    }
};

/// Elements with chi < threshold are void. Throws ConfigurationError when the
/// exit tags select no facets.
VoidComponents label_voids(const SimplexMesh& mesh, const Vector& chi, const std::vector<std::string>& exit_tags,
                           double void_threshold = 0.5);

} // namespace topopt
