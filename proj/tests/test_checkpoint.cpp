#include "doctest.h"

#include <filesystem>

#include "netflow/checkpoint.hpp"
#include "netflow/error.hpp"
#include "netflow/io.hpp"

using namespace netflow;

namespace {

std::shared_ptr<const Network> net() { return std::make_shared<const Network>(generate_grid(3)); }

}  // namespace

TEST_CASE("dnnd checkpoint is lossless") {
  DnndModel m = DnndModel::create(net(), {{5, 3}, {4}, Activation::Relu}, 11);
  m.self_fn().c0 = 1.0 / 3.0;
  m.coupling_fn().c12 = -1e-17;
  CheckpointInfo info{"00000000deadbeef", {{"epochs", "12"}}};
  const std::string text = format_checkpoint(m, info);
  const LoadedModel back = parse_checkpoint(text, net());
  REQUIRE(back.dnnd);
  CHECK_FALSE(back.ndcn);
  CHECK(back.kind == ModelKind::Dnnd);
  CHECK(back.dnnd->parameters() == m.parameters());
  CHECK(back.dnnd->self_fn().mlp.dims() == std::vector<int>{1, 5, 3, 1});
  CHECK(back.dnnd->self_fn().mlp.activation() == Activation::Relu);
  CHECK(back.info.config_hash == info.config_hash);
  CHECK(back.info.metadata == info.metadata);
  CHECK(format_checkpoint(*back.dnnd, back.info) == text);
  CHECK(peek_checkpoint(text) == std::pair{ModelKind::Dnnd, hex64(net()->fingerprint())});
}

TEST_CASE("ndcn checkpoint keeps the cached initial state") {
  NdcnArchitecture arch;
  arch.embed_dim = 3;
  arch.encoder_hidden = {4};
  NdcnModel m = NdcnModel::create(net(), arch, 5);
  m.set_x0_cache(Vec::LinSpaced(9, 0.0, 1.0), 0.25);
  const std::string text = format_checkpoint(m, {});
  const LoadedModel back = parse_checkpoint(text, net());
  REQUIRE(back.ndcn);
  CHECK(back.ndcn->parameters() == m.parameters());
  CHECK(back.ndcn->embed_dim() == 3);
  CHECK(back.ndcn->x0_cache() == m.x0_cache());
  CHECK(back.ndcn->t0_cache() == 0.25);
}

TEST_CASE("checkpoint is bound to its network") {
  const DnndModel m = DnndModel::create(net(), DnndArchitecture{}, 1);
  const std::string text = format_checkpoint(m, {});
  auto other = std::make_shared<const Network>(Network(9, {{0, 1}}));
  CHECK_THROWS_AS(parse_checkpoint(text, other), ConfigError);
}

TEST_CASE("malformed checkpoints") {
  const DnndModel m = DnndModel::create(net(), DnndArchitecture{}, 1);
  std::string text = format_checkpoint(m, {});
  CHECK_THROWS_AS(parse_checkpoint("{}", net()), FormatError);
  CHECK_THROWS_AS(parse_checkpoint("garbage", net()), FormatError);
  std::string wrong_kind = text;
  wrong_kind.replace(wrong_kind.find("\"dnnd\""), 6, "\"lstm\"");
  CHECK_THROWS_AS(parse_checkpoint(wrong_kind, net()), FormatError);
  std::string truncated = text.substr(0, text.size() / 2);
  CHECK_THROWS_AS(parse_checkpoint(truncated, net()), FormatError);
}

TEST_CASE("file round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "netflow_ckpt_test";
  const DnndModel m = DnndModel::create(net(), DnndArchitecture{}, 3);
  save_checkpoint(m, {"abc", {}}, dir / "m.ckpt");
  CHECK(load_checkpoint(dir / "m.ckpt", net()).dnnd->parameters() == m.parameters());
  CHECK_THROWS_AS(load_checkpoint(dir / "missing.ckpt", net()), IoError);
  std::filesystem::remove_all(dir);
}
