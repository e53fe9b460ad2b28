#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "netflow/dnnd.hpp"
#include "netflow/ndcn.hpp"

namespace netflow {

enum class ModelKind { Dnnd, Ndcn };

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& name);

/// Provenance carried by every checkpoint.
struct CheckpointInfo {
  std::string config_hash;
  std::map<std::string, std::string> metadata;
};

/// A model restored from a checkpoint; exactly one of dnnd / ndcn is set.
struct LoadedModel {
  ModelKind kind = ModelKind::Dnnd;
  std::string network_fingerprint;
  CheckpointInfo info;
  std::optional<DnndModel> dnnd;
  std::optional<NdcnModel> ndcn;
};

/// JSON text: kind tag, network fingerprint, provenance, layer sizes and flat
/// parameters. Numbers are written shortest-round-trip, so save/load is
/// lossless.
std::string format_checkpoint(const DnndModel& model, const CheckpointInfo& info);
std::string format_checkpoint(const NdcnModel& model, const CheckpointInfo& info);

/// Throws FormatError on malformed text and ConfigError when `net` does not
/// carry the fingerprint recorded in the checkpoint.
LoadedModel parse_checkpoint(const std::string& text, std::shared_ptr<const Network> net);

/// Kind and fingerprint only; no network needed.
std::pair<ModelKind, std::string> peek_checkpoint(const std::string& text);

void save_checkpoint(const DnndModel& model, const CheckpointInfo& info, const std::filesystem::path& path);
void save_checkpoint(const NdcnModel& model, const CheckpointInfo& info, const std::filesystem::path& path);
LoadedModel load_checkpoint(const std::filesystem::path& path, std::shared_ptr<const Network> net);

}  // namespace netflow
