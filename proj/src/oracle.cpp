#include "topopt/oracle.hpp"

#include "topopt/errors.hpp"

#include <deque>

namespace topopt {

VoidComponents label_voids(const SimplexMesh& mesh, const Vector& chi, const std::vector<std::string>& exit_tags,
                           double void_threshold) {
    if (!(void_threshold > 0.0 && void_threshold < 1.0)) throw InvalidArgument("void threshold must lie in (0, 1)");
    if (exit_tags.empty()) throw ConfigurationError("exit tags must not be empty");
    for (const auto& t : exit_tags) {
        if (!mesh.has_tag(t)) throw ConfigurationError("exit tag '" + t + "' is not defined on the mesh");
    }
    const std::vector<bool> at_exit = mesh.elements_touching_tags(exit_tags);
    if (mesh.facets_with_tags(exit_tags).empty()) throw ConfigurationError("exit tags select no boundary facets");

    const std::size_t ne = mesh.num_elements();
    VoidComponents out;
    out.label.assign(ne, VoidComponents::material);
    std::vector<bool> is_void(ne);
    for (std::size_t e = 0; e < ne; ++e) is_void[e] = chi[static_cast<Eigen::Index>(e)] < void_threshold;

    std::vector<bool> seen(ne, false);
    std::deque<int> queue;
    for (std::size_t seed = 0; seed < ne; ++seed) {
        if (!is_void[seed] || seen[seed]) continue;
        const int id = static_cast<int>(out.volumes.size());
        double volume = 0.0;
        bool touches = false;
        seen[seed] = true;
        queue.push_back(static_cast<int>(seed));
        while (!queue.empty()) {
            const auto e = static_cast<std::size_t>(queue.front());
            queue.pop_front();
            out.label[e] = id;
            volume += mesh.volume(e);
            touches = touches || at_exit[e];
            for (int nb : mesh.neighbors(e)) {
                if (nb < 0) continue;
                const auto n = static_cast<std::size_t>(nb);
                if (is_void[n] && !seen[n]) {
                    seen[n] = true;
                    queue.push_back(nb);
                }
            }
        }
        out.volumes.push_back(volume);
        out.touches_exit.push_back(touches);
        if (touches) {
            out.touching.push_back(id);
        } else {
            out.enclosed.push_back(id);
            out.enclosed_volume += volume;
        }
    }
    return out;
}

} // namespace topopt
