#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "greclab/qsim.hpp"

namespace greclab {

// Ensemble generation for the randomized-circuit mitigation: each member adds
// N_G auxiliary GeneralU(theta) gates to the base circuit, with theta drawn
// once per member and held fixed across lambda.

enum class RandomizeStrategy { RandomInsert, EquipSingles };
enum class ThetaRange { Symmetric, Positive };  // [-delta, delta] vs [0, delta]

struct RandomizationPlan {
    RandomizeStrategy strategy = RandomizeStrategy::EquipSingles;
    int n_g = 10;          // number of auxiliary gates per member
    double delta = 0.1;    // half-width of the parameter range, radians
    ThetaRange range_mode = ThetaRange::Positive;
    int n_r = 9;           // ensemble size
    std::uint64_t seed = 0;

    void validate() const;
};

// Where an auxiliary gate goes. EquipSingles: site = index of the equipped
// single-qubit gate in the base gate list (the auxiliary gate follows it).
// RandomInsert: site = gate-boundary position in [0, k], qubit = target line.
struct AuxPosition {
    int site = 0;
    int qubit = 0;
};

struct EnsembleMember {
    int index = 0;  // 1-based member id r
    std::vector<AuxPosition> positions;
    std::vector<std::array<double, 3>> thetas;
};

inline constexpr const char* kAuxTag = "aux";

// Generates n_r members from the base circuit structure (gate order and kinds;
// the base angles do not matter). Member r depends only on (seed, r), so
// growing n_r keeps earlier members unchanged. Throws if EquipSingles is asked
// for and the base circuit's single-qubit gate count differs from n_g.
std::vector<EnsembleMember> generate_ensemble(const Circuit& base_structure,
                                              const RandomizationPlan& plan);

// Splices the member's auxiliary gates (tagged kAuxTag) into the base circuit
// realized at some lambda. Auxiliary gates see the same noise model as any
// other gate when executed.
Circuit realize_member(const Circuit& base_at_lambda, const EnsembleMember& member,
                       const RandomizationPlan& plan);

// Manifest JSON: {"plan": {...}, "members": [{"index", "positions", "thetas"}]}.
std::string ensemble_to_json(const RandomizationPlan& plan,
                             const std::vector<EnsembleMember>& members);
void ensemble_from_json(const std::string& text, RandomizationPlan& plan,
                        std::vector<EnsembleMember>& members);

}  // namespace greclab
