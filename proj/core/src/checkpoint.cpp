#include "uclab/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <vector>

#include "json.hpp"

namespace uclab {

using nlohmann::json;

EnsembleParams ensemble_params_from(const RunConfig& cfg) {
  EnsembleParams p;
  p.members = cfg.ensemble_size;
  p.hidden = cfg.hidden;
  p.depth = cfg.depth;
  p.mode = cfg.mode;
  p.source = cfg.source;
  p.noise_sigma = cfg.noise_sigma;
  p.keep_prob = cfg.keep_prob;
  p.gamma = cfg.gamma;
  p.critic_lr = cfg.critic_lr;
  p.predictive_lr = cfg.predictive_lr;
  p.predictive_into_backbone = cfg.predictive_into_backbone;
  return p;
}

ActorParams actor_params_from(const RunConfig& cfg) {
  ActorParams p;
  p.hidden = cfg.hidden;
  p.depth = cfg.depth;
  p.lr = cfg.actor_lr;
  p.polyak = cfg.polyak;
  p.explore_noise = cfg.explore_noise;
  p.p_rand = cfg.p_rand;
  p.initial_random_steps = cfg.initial_random_steps;
  return p;
}

namespace {

constexpr char kMagic[4] = {'U', 'C', 'K', 'P'};
constexpr std::uint32_t kVersion = 1;

// Fixed blob order: per member net / phead / target / q_opt moments / p_opt
// moments, then actor net / target / opt moments. Adam step counters live in
// the manifest.
struct BlobWalk {
  std::vector<std::pair<std::string, std::vector<float>*>> blobs;
  std::vector<std::pair<std::string, long*>> counters;

  void add_mlp(const std::string& prefix, Mlp<float>& net) {
    for (std::size_t i = 0; i < net.hidden.size(); ++i) {
      blobs.emplace_back(prefix + "/hidden" + std::to_string(i) + "/W", &net.hidden[i].W);
      blobs.emplace_back(prefix + "/hidden" + std::to_string(i) + "/b", &net.hidden[i].b);
    }
    blobs.emplace_back(prefix + "/head/W", &net.head.W);
    blobs.emplace_back(prefix + "/head/b", &net.head.b);
  }
  void add_adam(const std::string& prefix, Adam<float>& a) {
    blobs.emplace_back(prefix + "/m", &a.m);
    blobs.emplace_back(prefix + "/v", &a.v);
    counters.emplace_back(prefix + "/t", &a.t);
  }
};

BlobWalk walk(CriticEnsemble& ens, Actor& actor) {
  BlobWalk w;
  for (std::size_t i = 0; i < ens.members.size(); ++i) {
    const std::string p = "member" + std::to_string(i);
    EnsembleMember& m = ens.members[i];
    w.add_mlp(p + "/net", m.net);
    w.blobs.emplace_back(p + "/phead/W", &m.phead.W);
    w.blobs.emplace_back(p + "/phead/b", &m.phead.b);
    w.add_mlp(p + "/target", m.target);
    w.add_adam(p + "/q_opt", m.q_opt);
    w.add_adam(p + "/p_opt", m.p_opt);
  }
  w.add_mlp("actor/net", actor.net);
  w.add_mlp("actor/target", actor.target);
  w.add_adam("actor/opt", actor.opt);
  return w;
}

}  // namespace

void save_checkpoint(const std::string& path, const CriticEnsemble& ensemble,
                     const Actor& actor, const RunConfig& cfg, std::int64_t env_steps) {
  // the walk needs mutable pointers; serialization itself only reads
  auto& ens_mut = const_cast<CriticEnsemble&>(ensemble);
  auto& actor_mut = const_cast<Actor&>(actor);
  BlobWalk w = walk(ens_mut, actor_mut);

  json manifest;
  manifest["format"] = kVersion;
  manifest["env_steps"] = env_steps;
  manifest["config"] = json::parse(dump_config(cfg));
  json dir = json::array();
  for (const auto& [name, vec] : w.blobs)
    dir.push_back(json{{"name", name}, {"count", vec->size()}});
  manifest["blobs"] = dir;
  json counters = json::object();
  for (const auto& [name, t] : w.counters) counters[name] = *t;
  manifest["counters"] = counters;
  const std::string mtext = manifest.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("cannot open checkpoint for writing: " + path);
  out.write(kMagic, 4);
  const std::uint32_t ver = kVersion;
  out.write(reinterpret_cast<const char*>(&ver), 4);
  const std::uint64_t mlen = mtext.size();
  out.write(reinterpret_cast<const char*>(&mlen), 8);
  out.write(mtext.data(), std::streamsize(mtext.size()));
  for (const auto& [name, vec] : w.blobs)
    if (!vec->empty())
      out.write(reinterpret_cast<const char*>(vec->data()),
                std::streamsize(vec->size() * sizeof(float)));
  if (!out) throw CheckpointError("checkpoint write failed: " + path);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw CheckpointError("not a checkpoint file: " + path);
  std::uint32_t ver = 0;
  in.read(reinterpret_cast<char*>(&ver), 4);
  if (ver != kVersion)
    throw CheckpointError("unsupported checkpoint version " + std::to_string(ver));
  std::uint64_t mlen = 0;
  in.read(reinterpret_cast<char*>(&mlen), 8);
  if (!in || mlen == 0 || mlen > (std::uint64_t(1) << 30))
    throw CheckpointError("corrupt checkpoint manifest length");
  std::string mtext(mlen, '\0');
  in.read(mtext.data(), std::streamsize(mlen));
  if (!in) throw CheckpointError("truncated checkpoint manifest");

  json manifest;
  try {
    manifest = json::parse(mtext);
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("manifest parse error: ") + e.what());
  }

  RunConfig cfg;
  try {
    for (const auto& [key, value] : manifest.at("config").items())
      apply_override(cfg, key + "=" + value.dump());
  } catch (const std::exception& e) {
    throw CheckpointError(std::string("embedded config invalid: ") + e.what());
  }

  Rng dummy(0);
  LoadedCheckpoint lc{cfg, manifest.value("env_steps", std::int64_t(0)),
                      CriticEnsemble(ensemble_params_from(cfg), dummy),
                      Actor(actor_params_from(cfg), dummy)};

  BlobWalk w = walk(lc.ensemble, lc.actor);
  const json& dir = manifest.at("blobs");
  if (dir.size() != w.blobs.size())
    throw CheckpointError("checkpoint blob directory does not match architecture");
  for (std::size_t i = 0; i < w.blobs.size(); ++i) {
    const std::string name = dir[i].at("name").get<std::string>();
    const std::size_t count = dir[i].at("count").get<std::size_t>();
    if (name != w.blobs[i].first)
      throw CheckpointError("blob order mismatch at '" + name + "'");
    std::vector<float>& vec = *w.blobs[i].second;
    // optimizer moment arrays may be empty (lazy init) or sized to params
    if (count != vec.size()) {
      if (vec.empty() || count == 0)
        vec.resize(count);
      else
        throw CheckpointError("blob size mismatch at '" + name + "'");
    }
    if (count > 0) {
      in.read(reinterpret_cast<char*>(vec.data()), std::streamsize(count * sizeof(float)));
      if (!in) throw CheckpointError("truncated blob '" + name + "'");
    }
  }
  for (auto& [name, t] : w.counters) *t = manifest.at("counters").value(name, 0L);
  return lc;
}

}  // namespace uclab
