#include "fbp/specfun.hpp"

#include <memory>
#include <mutex>

namespace fbp {

const AngularProfile<double>& angular_profile(int k)
{
    using Profile = AngularProfile<double>;
    if (k < Profile::k_min || k > Profile::k_max)
        throw DomainError("angular_profile: unsupported index k = " + std::to_string(k));
    static std::once_flag flags[Profile::k_max - Profile::k_min + 1];
    static std::unique_ptr<Profile> table[Profile::k_max - Profile::k_min + 1];
    const int slot = k - Profile::k_min;
    std::call_once(flags[slot], [&] { table[slot] = std::make_unique<Profile>(k); });
    return *table[slot];
}

} // namespace fbp
