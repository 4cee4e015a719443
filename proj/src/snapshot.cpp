#include "kpe/snapshot.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "kpe/errors.hpp"

namespace kpe {

namespace {

using nlohmann::json;

json vector_to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Vector vector_from_json(const json& j) {
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

}  // namespace

std::string snapshot_to_json(const Snapshot& snap) {
  const Dictionary& dict = snap.network.dictionary;
  json centers = json::array();
  for (std::size_t i = 0; i < dict.size(); ++i) {
    const StateAction& c = dict.centers()[i];
    centers.push_back({{"action", c.action},
                       {"insertion_step", dict.insertion_steps()[i]},
                       {"state", vector_to_json(c.state)}});
  }
  json j = {
      {"format", "kpe-snapshot"},
      {"version", kSnapshotVersion},
      {"method", to_string(snap.method)},
      {"kernel", {{"kind", to_string(dict.kernel().kind)}, {"h", dict.kernel().h}}},
      {"hyper",
       {{"gamma", snap.hyper.gamma},
        {"lambda", snap.hyper.lambda},
        {"sigma2", snap.hyper.sigma2},
        {"eta", snap.hyper.step.eta},
        {"harmonic_c", snap.hyper.step.harmonic_c}}},
      {"tol1", snap.tol1},
      {"tol2", snap.tol2},
      {"transitions_seen", snap.transitions_seen},
      {"centers", centers},
      {"weights", vector_to_json(snap.network.weights)},
  };
  return j.dump(2) + "\n";
}

Snapshot snapshot_from_json(const std::string& text) {
  Snapshot snap;
  try {
    const json j = json::parse(text);
    if (j.at("format").get<std::string>() != "kpe-snapshot") throw Error("not a kpe snapshot");
    const int version = j.at("version").get<int>();
    if (version != kSnapshotVersion) {
      throw Error("unsupported snapshot version " + std::to_string(version));
    }
    snap.method = method_from_string(j.at("method").get<std::string>());
    KernelSpec spec;
    spec.kind = kernel_kind_from_string(j.at("kernel").at("kind").get<std::string>());
    spec.h = j.at("kernel").at("h").get<double>();
    const json& hy = j.at("hyper");
    snap.hyper.gamma = hy.at("gamma").get<double>();
    snap.hyper.lambda = hy.at("lambda").get<double>();
    snap.hyper.sigma2 = hy.at("sigma2").get<double>();
    snap.hyper.step.eta = hy.at("eta").get<double>();
    snap.hyper.step.harmonic_c = hy.at("harmonic_c").get<double>();
    snap.tol1 = j.at("tol1").get<double>();
    snap.tol2 = j.at("tol2").get<double>();
    snap.transitions_seen = j.at("transitions_seen").get<std::size_t>();
    std::vector<StateAction> centers;
    std::vector<std::size_t> steps;
    for (const json& c : j.at("centers")) {
      centers.push_back({vector_from_json(c.at("state")), c.at("action").get<int>()});
      steps.push_back(c.at("insertion_step").get<std::size_t>());
    }
    snap.network.dictionary = Dictionary(spec);
    if (!centers.empty()) snap.network.dictionary.assign(std::move(centers), std::move(steps));
    snap.network.weights = vector_from_json(j.at("weights"));
  } catch (const json::exception& e) {
    throw Error(std::string("malformed snapshot: ") + e.what());
  }
  if (static_cast<std::size_t>(snap.network.weights.size()) != snap.network.dictionary.size()) {
    throw Error("malformed snapshot: weight count does not match the dictionary");
  }
  return snap;
}

void save_snapshot(const std::filesystem::path& path, const Snapshot& snap) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << snapshot_to_json(snap);
}

Snapshot load_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return snapshot_from_json(buf.str());
}

}  // namespace kpe
