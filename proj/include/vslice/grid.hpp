// SPDX-License-Identifier: Apache-2.0

#ifndef VSLICE_GRID_HPP
#define VSLICE_GRID_HPP

#include <vector>

#include "vslice/common.hpp"

namespace vslice {

/// Per-TTI binary allocation Omega(rsu, rb, vehicle). Stored as one holder per
/// (rsu, rb), so at most one vehicle per RB within an RSU by construction.
class ResourceGrid {
public:
    ResourceGrid() = default;
    ResourceGrid(int num_rsu, int num_rb);

    int num_rsu() const { return num_rsu_; }
    int num_rb() const { return num_rb_; }

    VehicleId holder(RsuId rsu, int rb) const;
    bool is_free(RsuId rsu, int rb) const { return holder(rsu, rb) == kNoVehicle; }
    bool omega(RsuId rsu, int rb, VehicleId v) const { return v != kNoVehicle && holder(rsu, rb) == v; }

    /// Throws ContractViolation if the RB is already taken.
    void assign(RsuId rsu, int rb, VehicleId v);

    std::vector<int> rbs_of(RsuId rsu, VehicleId v) const;
    int count_assigned() const;

    bool operator==(const ResourceGrid&) const = default;

private:
    std::size_t index(RsuId rsu, int rb) const;

    int num_rsu_ = 0;
    int num_rb_ = 0;
    std::vector<VehicleId> holder_;
};

} // namespace vslice

#endif
