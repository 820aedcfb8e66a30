#include "greclab/randomize.hpp"

#include <stdexcept>

#include "json.hpp"

#include "greclab/rng.hpp"

namespace greclab {

namespace {

using json = nlohmann::json;

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

std::array<double, 3> draw_theta(Xoshiro256pp& rng, const RandomizationPlan& plan) {
    const double lo = plan.range_mode == ThetaRange::Positive ? 0.0 : -plan.delta;
    const double hi = plan.delta;
    return {rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi)};
}

}  // namespace

void RandomizationPlan::validate() const {
    require(n_r >= 0, "plan.n_r must be >= 0");
    require(n_g >= 0, "plan.n_g must be >= 0");
    require(delta >= 0.0, "plan.delta must be >= 0");
}

std::vector<EnsembleMember> generate_ensemble(const Circuit& base_structure,
                                              const RandomizationPlan& plan) {
    plan.validate();
    base_structure.validate();

    std::vector<int> single_slots;
    for (int i = 0; i < static_cast<int>(base_structure.gates.size()); ++i)
        if (base_structure.gates[i].is_single_qubit()) single_slots.push_back(i);

    if (plan.strategy == RandomizeStrategy::EquipSingles) {
        require(static_cast<int>(single_slots.size()) == plan.n_g,
                "EquipSingles: base circuit has " + std::to_string(single_slots.size()) +
                    " single-qubit slots but the plan expects " + std::to_string(plan.n_g));
    }

    const int boundaries = static_cast<int>(base_structure.gates.size()) + 1;
    std::vector<EnsembleMember> members;
    members.reserve(static_cast<std::size_t>(plan.n_r));
    for (int r = 1; r <= plan.n_r; ++r) {
        // One stream per member: ensembles are stable under n_r changes.
        Xoshiro256pp rng(derive_seed(plan.seed, static_cast<std::uint64_t>(r)));
        EnsembleMember m;
        m.index = r;
        for (int l = 0; l < plan.n_g; ++l) {
            AuxPosition pos;
            if (plan.strategy == RandomizeStrategy::EquipSingles) {
                pos.site = single_slots[static_cast<std::size_t>(l)];
                pos.qubit = base_structure.gates[static_cast<std::size_t>(pos.site)].qubits[0];
            } else {
                pos.site = static_cast<int>(rng.below(static_cast<std::uint64_t>(boundaries)));
                pos.qubit =
                    static_cast<int>(rng.below(static_cast<std::uint64_t>(base_structure.width)));
            }
            m.positions.push_back(pos);
            m.thetas.push_back(draw_theta(rng, plan));
        }
        members.push_back(std::move(m));
    }
    return members;
}

Circuit realize_member(const Circuit& base_at_lambda, const EnsembleMember& member,
                       const RandomizationPlan& plan) {
    base_at_lambda.validate();
    require(member.positions.size() == member.thetas.size(),
            "member positions/thetas length mismatch");
    require(static_cast<int>(member.positions.size()) == plan.n_g,
            "member does not match plan.n_g");

    auto aux_gate = [&](std::size_t l) {
        const auto& th = member.thetas[l];
        Gate g = Gate::general_u(th[0], th[1], th[2], member.positions[l].qubit);
        g.tag = kAuxTag;
        return g;
    };

    Circuit out;
    out.width = base_at_lambda.width;
    out.lambda = base_at_lambda.lambda;

    if (plan.strategy == RandomizeStrategy::EquipSingles) {
        for (const auto& p : member.positions) {
            require(p.site >= 0 && p.site < static_cast<int>(base_at_lambda.gates.size()),
                    "equipped slot index outside the base circuit");
            require(base_at_lambda.gates[static_cast<std::size_t>(p.site)].is_single_qubit(),
                    "equipped slot is not a single-qubit gate");
        }
        for (int i = 0; i < static_cast<int>(base_at_lambda.gates.size()); ++i) {
            out.gates.push_back(base_at_lambda.gates[static_cast<std::size_t>(i)]);
            for (std::size_t l = 0; l < member.positions.size(); ++l)
                if (member.positions[l].site == i) out.gates.push_back(aux_gate(l));
        }
    } else {
        const int k = static_cast<int>(base_at_lambda.gates.size());
        for (const auto& p : member.positions)
            require(p.site >= 0 && p.site <= k, "insert position beyond circuit end");
        for (int boundary = 0; boundary <= k; ++boundary) {
            for (std::size_t l = 0; l < member.positions.size(); ++l)
                if (member.positions[l].site == boundary) out.gates.push_back(aux_gate(l));
            if (boundary < k) out.gates.push_back(base_at_lambda.gates[static_cast<std::size_t>(boundary)]);
        }
    }
    out.validate();
    return out;
}

std::string ensemble_to_json(const RandomizationPlan& plan,
                             const std::vector<EnsembleMember>& members) {
    json j;
    j["plan"] = {
        {"strategy",
         plan.strategy == RandomizeStrategy::EquipSingles ? "equip_singles" : "random_insert"},
        {"n_g", plan.n_g},
        {"delta", plan.delta},
        {"range_mode", plan.range_mode == ThetaRange::Positive ? "positive" : "symmetric"},
        {"n_r", plan.n_r},
        {"seed", plan.seed},
    };
    j["members"] = json::array();
    for (const auto& m : members) {
        json jm;
        jm["index"] = m.index;
        jm["positions"] = json::array();
        for (const auto& p : m.positions) jm["positions"].push_back({{"site", p.site}, {"qubit", p.qubit}});
        jm["thetas"] = json::array();
        for (const auto& th : m.thetas) jm["thetas"].push_back({th[0], th[1], th[2]});
        j["members"].push_back(std::move(jm));
    }
    return j.dump(2);
}

void ensemble_from_json(const std::string& text, RandomizationPlan& plan,
                        std::vector<EnsembleMember>& members) {
    const json j = json::parse(text);
    const json& jp = j.at("plan");
    const std::string strat = jp.at("strategy").get<std::string>();
    require(strat == "equip_singles" || strat == "random_insert", "unknown strategy: " + strat);
    plan.strategy = strat == "equip_singles" ? RandomizeStrategy::EquipSingles
                                             : RandomizeStrategy::RandomInsert;
    plan.n_g = jp.at("n_g").get<int>();
    plan.delta = jp.at("delta").get<double>();
    const std::string range = jp.at("range_mode").get<std::string>();
    require(range == "positive" || range == "symmetric", "unknown range_mode: " + range);
    plan.range_mode = range == "positive" ? ThetaRange::Positive : ThetaRange::Symmetric;
    plan.n_r = jp.at("n_r").get<int>();
    plan.seed = jp.at("seed").get<std::uint64_t>();
    plan.validate();

    members.clear();
    for (const auto& jm : j.at("members")) {
        EnsembleMember m;
        m.index = jm.at("index").get<int>();
        for (const auto& p : jm.at("positions"))
            m.positions.push_back({p.at("site").get<int>(), p.at("qubit").get<int>()});
        for (const auto& th : jm.at("thetas"))
            m.thetas.push_back({th.at(0).get<double>(), th.at(1).get<double>(), th.at(2).get<double>()});
        members.push_back(std::move(m));
    }
}

}  // namespace greclab
