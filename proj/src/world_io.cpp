#include "aou/world_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace aou {

namespace {

using nlohmann::json;

double number_from(const json& j, const std::string& where) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        try {
            std::size_t used = 0;
            const std::string s = j.get<std::string>();
            double v = std::stod(s, &used);
            if (used == s.size()) return v;
        } catch (...) {
        }
    }
    throw LoadError(where + ": expected a decimal value");
}

std::vector<double> numbers_from(const json& j, const std::string& where) {
    if (!j.is_array()) throw LoadError(where + ": expected a list");
    std::vector<double> out;
    out.reserve(j.size());
    for (const auto& v : j) out.push_back(number_from(v, where));
    return out;
}

Factor factor_from(const json& j, const std::string& where) {
    Factor f;
    if (!j.contains("scope") || !j.contains("table"))
        throw LoadError(where + ": factor needs scope and table");
    for (const auto& v : j.at("scope")) f.scope.push_back(v.get<int>());
    f.table = numbers_from(j.at("table"), where + ".table");
    return f;
}

json factor_to(const Factor& f) {
    return json{{"scope", f.scope}, {"table", f.table}};
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

WorldModel world_from_json_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const std::exception& e) {
        throw LoadError(std::string("world document is not valid JSON: ") + e.what());
    }

    WorldModel world;
    if (!doc.contains("premises") || !doc.at("premises").is_array())
        throw LoadError("world document needs a premises list");
    int next_id = 1;
    for (const auto& p : doc.at("premises")) {
        Premise prem;
        prem.id = p.value("id", next_id);
        prem.text = p.value("text", "G" + std::to_string(next_id));
        prem.domain_size = p.value("domain_size", 2);
        if (p.contains("supported_states"))
            for (const auto& s : p.at("supported_states")) prem.supported_states.insert(s.get<int>());
        if (p.contains("phase1_label")) {
            const std::string l = p.at("phase1_label").get<std::string>();
            if (l == "GIVEN") prem.phase1_label = Phase1Label::Given;
            else if (l == "INFERRED") prem.phase1_label = Phase1Label::Inferred;
            else if (l == "MISSING") prem.phase1_label = Phase1Label::Missing;
            else throw LoadError("premise " + std::to_string(next_id) + ": unknown phase1_label");
        }
        world.premises.push_back(std::move(prem));
        ++next_id;
    }

    if (!doc.contains("prior")) throw LoadError("world document needs a prior");
    const json& prior = doc.at("prior");
    const std::string kind = prior.value("kind", "product");
    if (kind == "product") {
        ProductPrior p;
        for (const auto& f : prior.at("factors")) p.factors.push_back(numbers_from(f, "prior"));
        world.prior = std::move(p);
    } else if (kind == "full_table") {
        world.prior = FullTablePrior{numbers_from(prior.at("probs"), "prior.probs")};
    } else if (kind == "factors") {
        FactorListPrior p;
        for (const auto& f : prior.at("factors")) p.factors.push_back(factor_from(f, "prior"));
        world.prior = std::move(p);
    } else {
        throw LoadError("prior.kind must be product, full_table, or factors");
    }

    world.n_labels = doc.value("label_space", 2);

    if (!doc.contains("label_conditional")) throw LoadError("world document needs label_conditional");
    const json& label = doc.at("label_conditional");
    if (label.is_array()) {
        FullLabelTable t;
        for (const auto& row : label) t.rows.push_back(numbers_from(row, "label_conditional"));
        world.label_model = std::move(t);
    } else if (label.is_object() && label.value("kind", "") == "factored") {
        FactoredLabel t;
        for (const auto& v : label.at("scope")) t.scope.push_back(v.get<int>());
        t.table = numbers_from(label.at("table"), "label_conditional.table");
        world.label_model = std::move(t);
    } else {
        throw LoadError("label_conditional must be a row table or a factored object");
    }

    if (doc.contains("loss"))
        for (const auto& row : doc.at("loss")) world.loss.push_back(numbers_from(row, "loss"));
    if (doc.contains("abstain_cost"))
        world.abstain_cost = number_from(doc.at("abstain_cost"), "abstain_cost");

    auto violations = validate_world(world);
    if (!violations.empty()) {
        std::string msg = "world document fails validation:";
        for (const auto& v : violations) msg += "\n  - " + v;
        throw LoadError(msg);
    }
    return world;
}

WorldModel load_world(const std::string& path) { return world_from_json_text(read_file(path)); }

std::string world_to_json_text(const WorldModel& world) {
    json doc;
    doc["premises"] = json::array();
    for (const auto& p : world.premises) {
        json jp{{"id", p.id}, {"text", p.text}, {"domain_size", p.domain_size}};
        jp["supported_states"] = json::array();
        for (int s : p.supported_states) jp["supported_states"].push_back(s);
        if (p.phase1_label) {
            switch (*p.phase1_label) {
                case Phase1Label::Given: jp["phase1_label"] = "GIVEN"; break;
                case Phase1Label::Inferred: jp["phase1_label"] = "INFERRED"; break;
                case Phase1Label::Missing: jp["phase1_label"] = "MISSING"; break;
            }
        }
        doc["premises"].push_back(std::move(jp));
    }

    if (const auto* prod = std::get_if<ProductPrior>(&world.prior)) {
        doc["prior"] = json{{"kind", "product"}, {"factors", prod->factors}};
    } else if (const auto* full = std::get_if<FullTablePrior>(&world.prior)) {
        doc["prior"] = json{{"kind", "full_table"}, {"probs", full->probs}};
    } else {
        const auto& fl = std::get<FactorListPrior>(world.prior);
        json factors = json::array();
        for (const auto& f : fl.factors) factors.push_back(factor_to(f));
        doc["prior"] = json{{"kind", "factors"}, {"factors", std::move(factors)}};
    }

    doc["label_space"] = world.n_labels;
    if (const auto* full = std::get_if<FullLabelTable>(&world.label_model)) {
        doc["label_conditional"] = full->rows;
    } else {
        const auto& fac = std::get<FactoredLabel>(world.label_model);
        doc["label_conditional"] =
            json{{"kind", "factored"}, {"scope", fac.scope}, {"table", fac.table}};
    }

    if (!world.loss.empty()) doc["loss"] = world.loss;
    doc["abstain_cost"] = world.abstain_cost;
    return doc.dump(2) + "\n";
}

void save_world(const WorldModel& world, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw LoadError("cannot write " + path);
    out << world_to_json_text(world);
}

ValidatorSpec validator_from_json_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const std::exception& e) {
        throw LoadError(std::string("validator document is not valid JSON: ") + e.what());
    }
    ValidatorSpec spec;
    const std::string kind = doc.value("kind", "perfect");
    if (kind == "perfect") {
        spec.kind = ValidatorKind::Perfect;
    } else if (kind == "rates") {
        spec.kind = ValidatorKind::Rates;
        spec.alpha = numbers_from(doc.at("alpha"), "alpha");
        spec.beta = numbers_from(doc.at("beta"), "beta");
    } else {
        throw LoadError("validator kind must be perfect or rates");
    }
    return spec;
}

std::string validator_to_json_text(const ValidatorSpec& spec) {
    json doc;
    if (spec.kind == ValidatorKind::Perfect) {
        doc["kind"] = "perfect";
    } else {
        doc["kind"] = "rates";
        doc["alpha"] = spec.alpha;
        doc["beta"] = spec.beta;
    }
    return doc.dump(2) + "\n";
}

}  // namespace aou
