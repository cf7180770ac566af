#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>

#include "semiper/field.hpp"

namespace semiper {

/**
 * Field snapshot layout:
 *
 *   semiper-field 1
 *   dimension <N>
 *   half_width <L>
 *   points_per_axis <M>
 *   laplacian <spectral|second_difference>
 *   meta.<key> <value>        (zero or more)
 *   norm_l2 <%.17g>
 *   norm_h1 <%.17g>
 *   end
 *   <M^N little-endian IEEE-754 doubles, lexicographic grid order>
 *
 * Readers recompute both norms and reject the file when they disagree with the
 * header beyond 1e-12 relative.
 */
struct Snapshot {
    Field field;
    std::map<std::string, std::string> metadata;
};

void write_snapshot(std::ostream& out, const Field& u, const std::map<std::string, std::string>& metadata = {});
Snapshot read_snapshot(std::istream& in);

void write_snapshot_file(const std::filesystem::path& path, const Field& u,
                         const std::map<std::string, std::string>& metadata = {});
Snapshot read_snapshot_file(const std::filesystem::path& path);

}  // namespace semiper
