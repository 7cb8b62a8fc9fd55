// SPDX-License-Identifier: Apache-2.0

#include "vslice/grid.hpp"

#include <algorithm>

namespace vslice {

ResourceGrid::ResourceGrid(int num_rsu, int num_rb)
    : num_rsu_(num_rsu), num_rb_(num_rb),
      holder_(static_cast<std::size_t>(num_rsu) * static_cast<std::size_t>(num_rb), kNoVehicle)
{
    if (num_rsu < 0 || num_rb < 0) throw ContractViolation("ResourceGrid: negative dimensions");
}

std::size_t ResourceGrid::index(RsuId rsu, int rb) const
{
    if (rsu < 0 || rsu >= num_rsu_ || rb < 0 || rb >= num_rb_)
        throw ContractViolation("ResourceGrid: (rsu, rb) out of range");
    return static_cast<std::size_t>(rsu) * static_cast<std::size_t>(num_rb_) + static_cast<std::size_t>(rb);
}

VehicleId ResourceGrid::holder(RsuId rsu, int rb) const { return holder_[index(rsu, rb)]; }

void ResourceGrid::assign(RsuId rsu, int rb, VehicleId v)
{
    auto& slot = holder_[index(rsu, rb)];
    if (slot != kNoVehicle) throw ContractViolation("ResourceGrid: RB already assigned");
    if (v == kNoVehicle) throw ContractViolation("ResourceGrid: invalid vehicle id");
    slot = v;
}

std::vector<int> ResourceGrid::rbs_of(RsuId rsu, VehicleId v) const
{
    std::vector<int> out;
    for (int b = 0; b < num_rb_; ++b)
        if (holder(rsu, b) == v) out.push_back(b);
    return out;
}

int ResourceGrid::count_assigned() const
{
    return static_cast<int>(std::count_if(holder_.begin(), holder_.end(), [](VehicleId v) { return v != kNoVehicle; }));
}

} // namespace vslice
