#include "ktpent/config_io.hpp"

#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "ktpent/bundled_data.hpp"
#include "ktpent/errors.hpp"

namespace ktpent {

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ValidationError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

namespace {

void reject_unknown_keys(const Json& j, const std::set<std::string>& allowed, const std::string& ctx) {
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!allowed.count(key)) throw ValidationError(ctx + ": unknown key '" + key + "'");
  }
}

const Json& require_key(const Json& j, const std::string& key, const std::string& ctx) {
  if (!j.is_object()) throw ValidationError(ctx + ": expected a JSON object");
  auto it = j.find(key);
  if (it == j.end()) throw ValidationError(ctx + ": missing key '" + key + "'");
  return *it;
}

double number_at(const Json& j, const std::string& key, const std::string& ctx) {
  const Json& v = require_key(j, key, ctx);
  if (!v.is_number()) throw ValidationError(ctx + ": key '" + key + "' must be a number");
  return v.get<double>();
}

Interval interval_at(const Json& j, const std::string& key, const std::string& ctx) {
  const Json& v = require_key(j, key, ctx);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    throw ValidationError(ctx + ": key '" + key + "' must be a [lo, hi] number pair");
  return {v[0].get<double>(), v[1].get<double>()};
}

std::string string_at(const Json& j, const std::string& key, const std::string& ctx) {
  const Json& v = require_key(j, key, ctx);
  if (!v.is_string()) throw ValidationError(ctx + ": key '" + key + "' must be a string");
  return v.get<std::string>();
}

}  // namespace

SellmeierModel sellmeier_from_json(const Json& j) {
  const std::string ctx = "coefficient file";
  if (!j.is_object()) throw ValidationError(ctx + ": expected a JSON object");
  reject_unknown_keys(j,
                      {"axis", "form_id", "coefficients", "thermal", "reference_temperature_c",
                       "valid_lambda_um", "valid_temp_c", "source_citation"},
                      ctx);
  const Axis axis = axis_from_string(string_at(j, "axis", ctx));
  const std::string form = string_at(j, "form_id", ctx);

  const Json& cj = require_key(j, "coefficients", ctx);
  if (!cj.is_object()) throw ValidationError(ctx + ": key 'coefficients' must be an object");
  std::map<std::string, double> coefficients;
  for (const auto& [name, value] : cj.items()) {
    if (!value.is_number())
      throw ValidationError(ctx + ": coefficient '" + name + "' must be a number");
    coefficients[name] = value.get<double>();
  }

  std::vector<ThermalTerm> thermal;
  if (auto it = j.find("thermal"); it != j.end()) {
    if (!it->is_array()) throw ValidationError(ctx + ": key 'thermal' must be an array");
    for (const auto& t : *it) {
      const std::string tctx = ctx + " thermal term";
      reject_unknown_keys(t, {"lambda_power", "dT_power", "value"}, tctx);
      const Json& lp = require_key(t, "lambda_power", tctx);
      const Json& dp = require_key(t, "dT_power", tctx);
      if (!lp.is_number_integer() || !dp.is_number_integer())
        throw ValidationError(tctx + ": 'lambda_power' and 'dT_power' must be integers");
      thermal.push_back({lp.get<int>(), dp.get<int>(), number_at(t, "value", tctx)});
    }
  }

  std::string citation;
  if (auto it = j.find("source_citation"); it != j.end() && it->is_string())
    citation = it->get<std::string>();

  return SellmeierModel(axis, form, std::move(coefficients), std::move(thermal),
                        number_at(j, "reference_temperature_c", ctx),
                        interval_at(j, "valid_lambda_um", ctx), interval_at(j, "valid_temp_c", ctx),
                        std::move(citation));
}

Json to_json(const SellmeierModel& m) {
  Json thermal = Json::array();
  for (const auto& t : m.thermal())
    thermal.push_back({{"lambda_power", t.lambda_power}, {"dT_power", t.dT_power}, {"value", t.value}});
  return {{"axis", std::string(to_string(m.axis()))},
          {"form_id", m.form_id()},
          {"coefficients", m.coefficients()},
          {"thermal", thermal},
          {"reference_temperature_c", m.reference_temperature_c()},
          {"valid_lambda_um", {m.valid_lambda_um().lo, m.valid_lambda_um().hi}},
          {"valid_temp_c", {m.valid_temp_c().lo, m.valid_temp_c().hi}},
          {"source_citation", m.source_citation()}};
}

SellmeierModel load_sellmeier_file(const std::filesystem::path& path) {
  try {
    return sellmeier_from_json(read_json_file(path));
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

CrystalSpec crystal_from_json(const Json& j, const ModelResolver& resolve) {
  const std::string ctx = "crystal file";
  if (!j.is_object()) throw ValidationError(ctx + ": expected a JSON object");
  reject_unknown_keys(j, {"length_mm", "poling_period_um", "axes", "sellmeier", "temperature_bounds_c"}, ctx);

  const Json& axes = require_key(j, "axes", ctx);
  reject_unknown_keys(axes, {"pump", "signal", "idler"}, ctx + " axes");
  const Axis pump = axis_from_string(string_at(axes, "pump", ctx + " axes"));
  const Axis signal = axis_from_string(string_at(axes, "signal", ctx + " axes"));
  const Axis idler = axis_from_string(string_at(axes, "idler", ctx + " axes"));

  const Json& sj = require_key(j, "sellmeier", ctx);
  if (!sj.is_object()) throw ValidationError(ctx + ": key 'sellmeier' must map axis names to models");
  std::map<Axis, SellmeierModel> models;
  for (const auto& [name, entry] : sj.items()) {
    const Axis axis = axis_from_string(name);
    Json mj;
    if (entry.is_string()) {
      mj = resolve(entry.get<std::string>());
    } else if (entry.is_object()) {
      mj = entry;
    } else {
      throw ValidationError(ctx + ": key 'sellmeier." + name + "' must be a path or an inline model");
    }
    SellmeierModel m = sellmeier_from_json(mj);
    if (m.axis() != axis)
      throw ValidationError(ctx + ": key 'sellmeier." + name + "' holds a model for axis '" +
                            std::string(to_string(m.axis())) + "'");
    models.emplace(axis, std::move(m));
  }

  return CrystalSpec(number_at(j, "length_mm", ctx), number_at(j, "poling_period_um", ctx), pump,
                     signal, idler, std::move(models), interval_at(j, "temperature_bounds_c", ctx));
}

CrystalSpec load_crystal_file(const std::filesystem::path& path) {
  const auto base = path.parent_path();
  const Json j = read_json_file(path);
  try {
    return crystal_from_json(j, [&](const std::string& rel) {
      const std::filesystem::path p = std::filesystem::path(rel).is_absolute() ? std::filesystem::path(rel) : base / rel;
      return read_json_file(p);
    });
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

CrystalSpec default_crystal() {
  const Json j = Json::parse(bundled::kDefaultCrystalJson);
  return crystal_from_json(j, [](const std::string& name) {
    if (name == "ktp_ny_koenig_wong.json") return Json::parse(bundled::kKtpNyJson);
    if (name == "ktp_nz_fradkin.json") return Json::parse(bundled::kKtpNzJson);
    throw ValidationError("bundled crystal references unknown model '" + name + "'");
  });
}

Json to_json(const CrystalSpec& c) {
  Json models = Json::object();
  for (const auto& [axis, m] : c.models()) models[std::string(to_string(axis))] = to_json(m);
  return {{"length_mm", c.length_mm()},
          {"poling_period_um", c.poling_period_um()},
          {"axes",
           {{"pump", std::string(to_string(c.pump_axis()))},
            {"signal", std::string(to_string(c.signal_axis()))},
            {"idler", std::string(to_string(c.idler_axis()))}}},
          {"sellmeier", models},
          {"temperature_bounds_c", {c.temperature_bounds_c().lo, c.temperature_bounds_c().hi}}};
}

LossChain loss_chain_from_json(const Json& j) {
  const std::string ctx = "loss chain";
  if (!j.is_array()) throw ValidationError(ctx + ": expected an array of {label, loss_db}");
  LossChain chain;
  for (const auto& e : j) {
    reject_unknown_keys(e, {"label", "loss_db"}, ctx);
    chain.elements.push_back({string_at(e, "label", ctx), number_at(e, "loss_db", ctx)});
  }
  chain.validate();
  return chain;
}

Json to_json(const LossChain& chain) {
  Json out = Json::array();
  for (const auto& e : chain.elements) out.push_back({{"label", e.label}, {"loss_db", e.loss_db}});
  return out;
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

}  // namespace ktpent
