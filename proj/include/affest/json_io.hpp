#pragma once

#include <string>

#include <json.hpp>

#include "affest/asymptotics.hpp"
#include "affest/estimators.hpp"
#include "affest/model.hpp"
#include "affest/path_stats.hpp"

namespace affest {

using Json = nlohmann::json;

// Serializes with every floating-point number printed to 17 significant
// digits; non-finite numbers become null. Object keys keep nlohmann's
// sorted order so equal documents print identically.
std::string dump_json(const Json& j, int indent = 2);

Json to_json(const ModelParams& p);
ModelParams params_from_json(const Json& j);

// Flat object with the thirteen functionals.
Json to_json(const SufficientStats& s);
SufficientStats stats_from_json(const Json& j);

// {estimator, values, denominators, valid}
Json to_json(const Estimate& e);

Json to_json(const StationaryMoments& mom);
Json to_json(const SimulatedMoments& sm);

// Row-major covariance plus the moment provenance it was built from.
Json to_json(const MleCovariance& c, const StationaryMoments& mom);
Json to_json(const LseCovariance& c, const StationaryMoments& mom);

Json to_json(const OrderingReport& r);

Json matrix_to_json(const Eigen::MatrixXd& m);

}  // namespace affest
