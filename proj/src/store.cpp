#include "cct/store.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace cct {

using nlohmann::json;

namespace {

json vec3_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec3_from(const json& j) {
  return Vec3(j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>());
}

json mat3_json(const Mat3& m) {
  json a = json::array();
  for (int i = 0; i < 9; ++i) a.push_back(m.data()[i]);
  return a;
}

Mat3 mat3_from(const json& j) {
  Mat3 m;
  for (int i = 0; i < 9; ++i) m.data()[i] = j.at(i).get<double>();
  return m;
}

}  // namespace

void save_store(const std::string& path, const PersistentState& state) {
  json j;
  j["format_version"] = 1;

  j["estimates"] = json::array();
  for (size_t i = 0; i < state.estimates.size(); ++i) {
    const auto& e = state.estimates[i];
    json je{{"mean", vec3_json(e.mean)},
            {"cov", mat3_json(e.cov)},
            {"kind", e.kind == ContactKind::Impact ? "impact" : "impact_less"},
            {"plan_anchor", e.plan_anchor}};
    const auto& im = state.impact_models[i];
    json jm{{"approach_velocity", im.approach_velocity},
            {"learning_rate", im.learning_rate}};
    jm["samples"] = json::array();
    for (const auto& s : im.samples) jm["samples"].push_back(json::array({s.first, s.second}));
    je["impact_model"] = jm;
    je["truth_known"] = state.truth_known[i];
    je["truth"] = vec3_json(state.contact_truths[i]);
    j["estimates"].push_back(je);
  }

  if (state.manager) {
    json jr;
    jr["active_mode"] = state.manager->active_mode();
    jr["next_id"] = state.manager->registry().next_id();
    jr["modes"] = json::array();
    for (const auto& m : state.manager->registry().modes()) {
      json jm{{"id", m.id},
              {"summary", json{{"count", m.summary.count},
                               {"linear_sum", m.summary.linear_sum},
                               {"square_sum", m.summary.square_sum}}},
              {"model", json::parse(m.model.to_json_string())}};
      jr["modes"].push_back(jm);
    }
    j["registry"] = jr;
  }

  if (state.pretrained)
    j["pretrained"] = json::parse(state.pretrained->to_json_string());

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write store: " + path);
  out << j.dump() << "\n";
}

void load_store(const std::string& path, const Scenario& scenario, PersistentState& state) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open store: " + path);
  const json j = json::parse(in);
  if (j.at("format_version").get<int>() != 1)
    throw std::runtime_error("unsupported store format version");

  state.estimates.clear();
  state.impact_models.clear();
  state.contact_truths.clear();
  state.truth_known.clear();
  for (const auto& je : j.at("estimates")) {
    ContactEstimate e;
    e.mean = vec3_from(je.at("mean"));
    e.cov = mat3_from(je.at("cov"));
    e.kind = je.at("kind").get<std::string>() == "impact" ? ContactKind::Impact
                                                          : ContactKind::ImpactLess;
    e.plan_anchor = je.at("plan_anchor").get<int>();
    state.estimates.push_back(e);

    ImpactModel im;
    const auto& jm = je.at("impact_model");
    im.approach_velocity = jm.at("approach_velocity").get<double>();
    im.learning_rate = jm.at("learning_rate").get<double>();
    for (const auto& js : jm.at("samples"))
      im.samples.emplace_back(js.at(0).get<double>(), js.at(1).get<double>());
    state.impact_models.push_back(im);

    state.truth_known.push_back(je.at("truth_known").get<bool>());
    state.contact_truths.push_back(vec3_from(je.at("truth")));
  }

  if (j.contains("registry")) {
    const auto& jr = j.at("registry");
    std::vector<ModeEntry> modes;
    for (const auto& jm : jr.at("modes")) {
      ModeEntry m;
      m.id = jm.at("id").get<int>();
      const auto& js = jm.at("summary");
      m.summary.count = js.at("count").get<double>();
      m.summary.linear_sum = js.at("linear_sum").get<double>();
      m.summary.square_sum = js.at("square_sum").get<double>();
      m.model = MixtureModel::from_json_string(jm.at("model").dump());
      modes.push_back(std::move(m));
    }
    state.manager.emplace(scenario.mode, scenario.model, scenario.gains);
    state.manager->restore(std::move(modes), jr.at("active_mode").get<int>(),
                           jr.at("next_id").get<int>());
  }

  if (j.contains("pretrained"))
    state.pretrained = MixtureModel::from_json_string(j.at("pretrained").dump());
}

}  // namespace cct
