#include "netflow/checkpoint.hpp"

#include "json.hpp"

#include "netflow/error.hpp"
#include "netflow/io.hpp"

namespace netflow {

using Json = nlohmann::ordered_json;

namespace {

constexpr int kFormatVersion = 1;

Json mlp_to_json(const Mlp& mlp) {
  std::vector<double> params(mlp.parameter_count());
  mlp.pack(params);
  Json j;
  j["dims"] = mlp.dims();
  j["activation"] = to_string(mlp.activation());
  j["params"] = params;
  return j;
}

Mlp mlp_from_json(const Json& j) {
  Mlp mlp(j.at("dims").get<std::vector<int>>(), parse_activation(j.at("activation").get<std::string>()));
  const auto params = j.at("params").get<std::vector<double>>();
  if (params.size() != mlp.parameter_count()) throw FormatError("checkpoint: parameter count does not match dims");
  mlp.unpack(params);
  return mlp;
}

Json header(ModelKind kind, const Network& net, const CheckpointInfo& info) {
  Json j;
  j["format"] = "netflow-checkpoint";
  j["version"] = kFormatVersion;
  j["kind"] = to_string(kind);
  j["network"] = {{"fingerprint", hex64(net.fingerprint())},
                  {"nodes", net.node_count()},
                  {"edges", net.edge_count()}};
  j["config_hash"] = info.config_hash;
  j["metadata"] = Json::object();
  for (const auto& [k, v] : info.metadata) j["metadata"][k] = v;
  return j;
}

Json parse_json(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint: invalid JSON: ") + e.what());
  }
  if (!j.is_object() || j.value("format", "") != "netflow-checkpoint")
    throw FormatError("checkpoint: not a netflow checkpoint");
  if (j.value("version", 0) != kFormatVersion) throw FormatError("checkpoint: unsupported version");
  return j;
}

}  // namespace

std::string to_string(ModelKind kind) { return kind == ModelKind::Dnnd ? "dnnd" : "ndcn"; }

ModelKind parse_model_kind(const std::string& name) {
  if (name == "dnnd") return ModelKind::Dnnd;
  if (name == "ndcn") return ModelKind::Ndcn;
  throw InvalidArgument("unknown model kind '" + name + "' (expected dnnd or ndcn)");
}

std::string format_checkpoint(const DnndModel& model, const CheckpointInfo& info) {
  Json j = header(ModelKind::Dnnd, model.network(), info);
  const auto& f = model.self_fn();
  const auto& g = model.coupling_fn();
  j["self"] = {{"c0", f.c0}, {"c1", f.c1}, {"mlp", mlp_to_json(f.mlp)}};
  j["coupling"] = {{"c0", g.c0}, {"c11", g.c11}, {"c12", g.c12}, {"mlp", mlp_to_json(g.mlp)}};
  return j.dump(1) + "\n";
}

std::string format_checkpoint(const NdcnModel& model, const CheckpointInfo& info) {
  Json j = header(ModelKind::Ndcn, model.network(), info);
  j["embed_dim"] = model.embed_dim();
  j["encoder"] = mlp_to_json(model.encoder());
  j["latent"] = mlp_to_json(model.latent());
  j["decoder"] = mlp_to_json(model.decoder());
  const Vec& x0 = model.x0_cache();
  j["x0_cache"] = std::vector<double>(x0.data(), x0.data() + x0.size());
  j["t0_cache"] = model.t0_cache();
  return j.dump(1) + "\n";
}

std::pair<ModelKind, std::string> peek_checkpoint(const std::string& text) {
  const Json j = parse_json(text);
  try {
    return {parse_model_kind(j.at("kind").get<std::string>()),
            j.at("network").at("fingerprint").get<std::string>()};
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("checkpoint: ") + e.what());
  }
}

LoadedModel parse_checkpoint(const std::string& text, std::shared_ptr<const Network> net) {
  if (!net) throw InvalidArgument("checkpoint: null network");
  const auto [kind, fingerprint] = peek_checkpoint(text);
  if (fingerprint != hex64(net->fingerprint()))
    throw ConfigError("checkpoint was trained on network " + fingerprint + " but the given network is " +
                      hex64(net->fingerprint()));
  const Json j = parse_json(text);
  LoadedModel out;
  out.kind = kind;
  out.network_fingerprint = fingerprint;
  try {
    out.info.config_hash = j.at("config_hash").get<std::string>();
    for (const auto& [k, v] : j.at("metadata").items()) out.info.metadata[k] = v.get<std::string>();
    if (kind == ModelKind::Dnnd) {
      const Json& s = j.at("self");
      AffineScalarFn f(mlp_from_json(s.at("mlp")));
      f.c0 = s.at("c0").get<double>();
      f.c1 = s.at("c1").get<double>();
      const Json& c = j.at("coupling");
      AffinePairFn g(mlp_from_json(c.at("mlp")));
      g.c0 = c.at("c0").get<double>();
      g.c11 = c.at("c11").get<double>();
      g.c12 = c.at("c12").get<double>();
      out.dnnd.emplace(net, std::move(f), std::move(g));
    } else {
      NdcnModel m(net, mlp_from_json(j.at("encoder")), mlp_from_json(j.at("latent")),
                  mlp_from_json(j.at("decoder")));
      const auto x0 = j.at("x0_cache").get<std::vector<double>>();
      if (!x0.empty())
        m.set_x0_cache(Eigen::Map<const Vec>(x0.data(), static_cast<Eigen::Index>(x0.size())),
                       j.at("t0_cache").get<double>());
      out.ndcn.emplace(std::move(m));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("checkpoint: ") + e.what());
  }
  return out;
}

void save_checkpoint(const DnndModel& model, const CheckpointInfo& info, const std::filesystem::path& path) {
  write_text_file(path, format_checkpoint(model, info));
}

void save_checkpoint(const NdcnModel& model, const CheckpointInfo& info, const std::filesystem::path& path) {
  write_text_file(path, format_checkpoint(model, info));
}

LoadedModel load_checkpoint(const std::filesystem::path& path, std::shared_ptr<const Network> net) {
  return parse_checkpoint(read_text_file(path), std::move(net));
}

}  // namespace netflow
