#pragma once

#include "robusthedge/model_io.hpp"

#include <string>

#ifndef ROBUSTHEDGE_MODELS_DIR
#error "ROBUSTHEDGE_MODELS_DIR must point at the sample models"
#endif

namespace fixtures {

inline std::string model_path(const std::string& name) { return std::string(ROBUSTHEDGE_MODELS_DIR) + "/" + name; }

inline robusthedge::Model<robusthedge::Rational> load(const std::string& name) {
    return robusthedge::load_model_file(model_path(name));
}

/// One period, S0 = 10, leaves 8 / 10 / 13, every child carried by its own Dirac generator.
inline robusthedge::Model<robusthedge::Rational> trinomial() { return load("example_b.json"); }

/// Same market with the strike-10 call quoted at 6/5.
inline robusthedge::Model<robusthedge::Rational> trinomial_traded() { return load("example_b_traded.json"); }

/// Two periods, M0 = 0, increments -1 / 0 / +1, full ambiguity, 9 leaves.
inline robusthedge::Model<robusthedge::Rational> grid() { return load("grid.json"); }

inline robusthedge::Rational q(const std::string& s) { return robusthedge::parse_rational(s); }

}  // namespace fixtures
