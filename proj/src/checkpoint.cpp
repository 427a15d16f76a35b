#include "flock/checkpoint.hpp"

#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace flock {

namespace {

using nlohmann::json;

json config_to_json(const ModelConfig& c) {
  return json{{"hidden_dim", c.hidden_dim},
              {"heads", c.heads},
              {"head_dim", c.head_dim},
              {"update_steps", c.update_steps},
              {"walk_len", c.walk_len},
              {"base_walks", c.base_walks},
              {"max_passes", c.max_passes},
              {"tie_update_weights", c.tie_update_weights},
              {"resample_walks", c.resample_walks},
              {"init_std", c.init_std}};
}

ModelConfig config_from_json(const json& j) {
  ModelConfig c;
  c.hidden_dim = j.at("hidden_dim").get<int>();
  c.heads = j.at("heads").get<int>();
  c.head_dim = j.at("head_dim").get<int>();
  c.update_steps = j.at("update_steps").get<int>();
  c.walk_len = j.at("walk_len").get<int>();
  c.base_walks = j.at("base_walks").get<int>();
  c.max_passes = j.at("max_passes").get<int>();
  c.tie_update_weights = j.at("tie_update_weights").get<bool>();
  c.resample_walks = j.at("resample_walks").get<bool>();
  c.init_std = j.at("init_std").get<double>();
  return c;
}

void write_array(std::ofstream& out, const nn::Array& a) {
  out.write(reinterpret_cast<const char*>(a.data.data()),
            static_cast<std::streamsize>(a.size() * sizeof(double)));
}

void read_array(std::ifstream& in, nn::Array& a) {
  in.read(reinterpret_cast<char*>(a.data.data()),
          static_cast<std::streamsize>(a.size() * sizeof(double)));
  if (!in) throw std::runtime_error("checkpoint: truncated parameter data");
}

}  // namespace

void save_checkpoint(const std::string& path, FlockModel& model, const nn::AdamW* optimizer) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("checkpoint: cannot write " + path);
  auto params = model.parameters();
  json header;
  header["format_version"] = kCheckpointVersion;
  header["model"] = config_to_json(model.config());
  json manifest = json::array();
  for (nn::Parameter* p : params)
    manifest.push_back(json{{"name", p->name}, {"rows", p->value.rows}, {"cols", p->value.cols}});
  header["params"] = manifest;
  header["optimizer"] = json{{"present", optimizer != nullptr},
                             {"step_count", optimizer ? optimizer->step_count() : 0}};
  std::string header_str = header.dump();
  uint32_t magic = kCheckpointMagic, version = kCheckpointVersion;
  uint64_t header_len = header_str.size();
  out.write(reinterpret_cast<const char*>(&magic), sizeof(magic));
  out.write(reinterpret_cast<const char*>(&version), sizeof(version));
  out.write(reinterpret_cast<const char*>(&header_len), sizeof(header_len));
  out.write(header_str.data(), static_cast<std::streamsize>(header_str.size()));
  for (nn::Parameter* p : params) write_array(out, p->value);
  if (optimizer) {
    for (const nn::Array& m : optimizer->first_moments()) write_array(out, m);
    for (const nn::Array& v : optimizer->second_moments()) write_array(out, v);
  }
  if (!out) throw std::runtime_error("checkpoint: write failure on " + path);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path);
  uint32_t magic = 0, version = 0;
  uint64_t header_len = 0;
  in.read(reinterpret_cast<char*>(&magic), sizeof(magic));
  in.read(reinterpret_cast<char*>(&version), sizeof(version));
  in.read(reinterpret_cast<char*>(&header_len), sizeof(header_len));
  if (!in || magic != kCheckpointMagic)
    throw std::runtime_error("checkpoint: bad magic in " + path);
  if (version != kCheckpointVersion)
    throw std::runtime_error("checkpoint: unsupported format version " +
                             std::to_string(version));
  std::string header_str(header_len, '\0');
  in.read(header_str.data(), static_cast<std::streamsize>(header_len));
  if (!in) throw std::runtime_error("checkpoint: truncated header in " + path);
  json header = json::parse(header_str);

  LoadedCheckpoint loaded;
  ModelConfig config = config_from_json(header.at("model"));
  loaded.model = std::make_unique<FlockModel>(config, /*param_seed=*/0);
  auto params = loaded.model->parameters();
  const json& manifest = header.at("params");
  if (manifest.size() != params.size())
    throw std::runtime_error("checkpoint: parameter manifest mismatch");
  for (size_t i = 0; i < params.size(); ++i) {
    const json& entry = manifest[i];
    nn::Parameter* p = params[i];
    if (entry.at("name").get<std::string>() != p->name ||
        entry.at("rows").get<int>() != p->value.rows ||
        entry.at("cols").get<int>() != p->value.cols)
      throw std::runtime_error("checkpoint: manifest entry " + std::to_string(i) +
                               " does not match parameter '" + p->name + "'");
    read_array(in, p->value);
  }
  loaded.has_optimizer = header.at("optimizer").at("present").get<bool>();
  if (loaded.has_optimizer) {
    loaded.optimizer_step = header.at("optimizer").at("step_count").get<long>();
    loaded.first_moments.reserve(params.size());
    loaded.second_moments.reserve(params.size());
    for (nn::Parameter* p : params) {
      nn::Array m(p->value.rows, p->value.cols);
      read_array(in, m);
      loaded.first_moments.push_back(std::move(m));
    }
    for (nn::Parameter* p : params) {
      nn::Array v(p->value.rows, p->value.cols);
      read_array(in, v);
      loaded.second_moments.push_back(std::move(v));
    }
  }
  return loaded;
}

}  // namespace flock
