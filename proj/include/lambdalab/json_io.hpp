#pragma once

#include <json.hpp>

#include "lambdalab/ctype.hpp"
#include "lambdalab/density.hpp"
#include "lambdalab/lambda_set.hpp"
#include "lambdalab/random_witness.hpp"
#include "lambdalab/witness.hpp"

namespace lambdalab {

using json = nlohmann::ordered_json;

// Readers throw ParseError on malformed input, including unknown fields.

json to_json(const LambdaSet& set);
LambdaSet lambda_set_from_json(const json& j);

json to_json(const PiecewiseWitness& f);
PiecewiseWitness witness_from_json(const json& j);

json to_json(const DyadicSet& C);
DyadicSet dyadic_set_from_json(const json& j);

json to_json(const RefinedPartition& p);
json to_json(const CTypeConstruction& con);

Dyadic dyadic_from_json(const json& j); // "m/2^e" string or integer

} // namespace lambdalab
