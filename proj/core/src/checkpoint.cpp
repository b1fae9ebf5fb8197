#include "wildgen/checkpoint.hpp"

#include <json.hpp>

#include "wildgen/error.hpp"
#include "wildgen/trajectory_io.hpp"

namespace wildgen {
namespace {

using Json = nlohmann::ordered_json;

Json matrix_to_json(const Eigen::MatrixXd& m) {
  Json data = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Eigen::MatrixXd matrix_from_json(const Json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto& data = j.at("data");
  if (static_cast<Eigen::Index>(data.size()) != rows * cols) fail(ErrorCode::kParse, "checkpoint matrix size mismatch");
  Eigen::MatrixXd m(rows, cols);
  std::size_t i = 0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data[i++].get<double>();
  }
  return m;
}

Json vector_to_json(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Eigen::VectorXd vector_from_json(const Json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

Json activation_to_json(const Activation& a) {
  if (a.kind == Activation::Kind::kLinear) return {{"kind", "linear"}};
  return {{"kind", "leaky"}, {"pos_slope", a.pos_slope}, {"neg_slope", a.neg_slope}};
}

Activation activation_from_json(const Json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "linear") return Activation::linear();
  if (kind == "leaky") return Activation::leaky(j.at("pos_slope").get<double>(), j.at("neg_slope").get<double>());
  fail(ErrorCode::kParse, "unknown activation '" + kind + "'");
}

Json layers_to_json(const std::vector<LayerSpec>& specs) {
  Json out = Json::array();
  for (const auto& s : specs) out.push_back({{"units", s.units}, {"activation", activation_to_json(s.activation)}});
  return out;
}

std::vector<LayerSpec> layers_from_json(const Json& j) {
  std::vector<LayerSpec> out;
  for (const auto& s : j) out.push_back({s.at("units").get<int>(), activation_from_json(s.at("activation"))});
  return out;
}

Json dense_to_json(const DenseLayer& l) {
  return {{"activation", activation_to_json(l.activation)},
          {"weight", matrix_to_json(l.weight)},
          {"bias", vector_to_json(l.bias)}};
}

DenseLayer dense_from_json(const Json& j) {
  DenseLayer l;
  l.activation = activation_from_json(j.at("activation"));
  l.weight = matrix_from_json(j.at("weight"));
  l.bias = vector_from_json(j.at("bias"));
  if (l.bias.size() != l.weight.rows()) fail(ErrorCode::kParse, "checkpoint layer bias size mismatch");
  return l;
}

}  // namespace

std::string checkpoint_to_json(const Checkpoint& ckpt) {
  const auto& arch = ckpt.vae.arch;
  Json j;
  j["format"] = "wildgen-checkpoint";
  j["version"] = kCheckpointVersion;
  j["horizon"] = ckpt.horizon;
  j["seeds"] = {{"master", ckpt.master_seed}, {"init", ckpt.init_seed}, {"train", ckpt.train_seed}, {"gmm", ckpt.gmm_seed}};
  j["epochs"] = ckpt.epochs;
  j["normalization"] = {{"factor", ckpt.normalization_factor}, {"scale", ckpt.normalization.scale}};
  j["architecture"] = {{"input_dim", arch.input_dim},
                       {"latent_dim", arch.latent_dim},
                       {"encoder", layers_to_json(arch.encoder)},
                       {"decoder", layers_to_json(arch.decoder)}};

  Json enc = Json::array();
  for (const auto& l : ckpt.vae.encoder) enc.push_back(dense_to_json(l));
  Json dec = Json::array();
  for (const auto& l : ckpt.vae.decoder) dec.push_back(dense_to_json(l));
  j["vae"] = {{"encoder", enc},
              {"mu_head", dense_to_json(ckpt.vae.mu_head)},
              {"logvar_head", dense_to_json(ckpt.vae.logvar_head)},
              {"decoder", dec},
              {"input_shift", vector_to_json(ckpt.vae.input_shift)}};

  Json covs = Json::array();
  for (const auto& c : ckpt.gmm.covariances) covs.push_back(matrix_to_json(c));
  j["gmm"] = {{"k", ckpt.gmm.k},
              {"weights", vector_to_json(ckpt.gmm.weights)},
              {"means", matrix_to_json(ckpt.gmm.means)},
              {"covariances", covs},
              {"fit_log_likelihood", ckpt.gmm.fit_log_likelihood},
              {"objective_trace", ckpt.gmm.objective_trace}};

  Json region = Json::array();
  for (const auto& p : ckpt.region.vertices) region.push_back({p.lon, p.lat});
  j["region"] = region;
  j["latent_codes"] = matrix_to_json(ckpt.latent_codes);
  return j.dump() + "\n";
}

Checkpoint checkpoint_from_json(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kParse, std::string("checkpoint is not valid JSON: ") + e.what());
  }
  try {
    if (j.value("format", "") != "wildgen-checkpoint") fail(ErrorCode::kParse, "not a wildgen checkpoint");
    if (j.at("version").get<int>() != kCheckpointVersion) fail(ErrorCode::kParse, "unsupported checkpoint version");

    Checkpoint c;
    c.horizon = j.at("horizon").get<std::size_t>();
    const auto& seeds = j.at("seeds");
    c.master_seed = seeds.at("master").get<std::uint64_t>();
    c.init_seed = seeds.at("init").get<std::uint64_t>();
    c.train_seed = seeds.at("train").get<std::uint64_t>();
    c.gmm_seed = seeds.at("gmm").get<std::uint64_t>();
    c.epochs = j.at("epochs").get<int>();
    c.normalization_factor = j.at("normalization").at("factor").get<double>();
    c.normalization.scale = j.at("normalization").at("scale").get<double>();

    const auto& a = j.at("architecture");
    c.vae.arch.input_dim = a.at("input_dim").get<int>();
    c.vae.arch.latent_dim = a.at("latent_dim").get<int>();
    c.vae.arch.encoder = layers_from_json(a.at("encoder"));
    c.vae.arch.decoder = layers_from_json(a.at("decoder"));
    c.vae.arch.validate();

    const auto& v = j.at("vae");
    for (const auto& l : v.at("encoder")) c.vae.encoder.push_back(dense_from_json(l));
    c.vae.mu_head = dense_from_json(v.at("mu_head"));
    c.vae.logvar_head = dense_from_json(v.at("logvar_head"));
    for (const auto& l : v.at("decoder")) c.vae.decoder.push_back(dense_from_json(l));
    c.vae.input_shift = vector_from_json(v.at("input_shift"));
    if (c.vae.encoder.size() != c.vae.arch.encoder.size() || c.vae.decoder.size() != c.vae.arch.decoder.size()) {
      fail(ErrorCode::kParse, "checkpoint layer count does not match architecture");
    }

    const auto& g = j.at("gmm");
    c.gmm.k = g.at("k").get<int>();
    c.gmm.weights = vector_from_json(g.at("weights"));
    c.gmm.means = matrix_from_json(g.at("means"));
    for (const auto& m : g.at("covariances")) c.gmm.covariances.push_back(matrix_from_json(m));
    c.gmm.fit_log_likelihood = g.at("fit_log_likelihood").get<double>();
    c.gmm.objective_trace = g.at("objective_trace").get<std::vector<double>>();

    for (const auto& p : j.at("region")) c.region.vertices.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    c.latent_codes = matrix_from_json(j.at("latent_codes"));
    return c;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kParse, std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  write_file(path, checkpoint_to_json(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return checkpoint_from_json(read_file(path));
}

}  // namespace wildgen
