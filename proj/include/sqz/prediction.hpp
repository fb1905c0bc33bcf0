#ifndef SQZ_PREDICTION_HPP_
#define SQZ_PREDICTION_HPP_

#include <nlohmann/json_fwd.hpp>

#include "sqz/config.hpp"

// Closed-form working-point predictions from a physics config: probe
// polarizabilities, coupling constant, measurement strength and gain, the
// conditionally reduced variance, scattering decoherence, and the
// squeezing/decoherence trade-off optimum. Zero photon numbers yield a
// null prediction rather than an error.

namespace sqz {

nlohmann::json prediction_report(const config::PhysicsConfig& cfg);

}  // namespace sqz

#endif  // SQZ_PREDICTION_HPP_
