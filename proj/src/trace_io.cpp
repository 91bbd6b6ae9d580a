#include "symforest/trace_io.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace symforest {

using nlohmann::json;

void write_trace_jsonl(const ChainTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open trace file for writing: " + path);
  for (const IterationRecord& record : trace.records) {
    json j;
    j["iter"] = record.iter;
    j["log_jmp"] = record.log_jmp;
    j["trees"] = record.trees;
    j["beta"] = std::vector<double>(record.beta.data(), record.beta.data() + record.beta.size());
    j["sigma2"] = record.sigma2;
    json moves = json::array();
    for (const MoveRecord& move : record.moves)
      moves.push_back({{"tree", move.tree + 1},
                       {"type", move.grow ? "grow" : "prune"},
                       {"accepted", move.accepted}});
    j["moves"] = std::move(moves);
    out << j.dump() << '\n';
  }
  if (!out) throw std::runtime_error("failed writing trace file: " + path);
}

ChainTrace read_trace_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace file: " + path);
  ChainTrace trace;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    IterationRecord record;
    record.iter = j.at("iter").get<int>();
    record.log_jmp = j.at("log_jmp").get<double>();
    record.trees = j.at("trees").get<std::vector<std::string>>();
    auto beta = j.at("beta").get<std::vector<double>>();
    record.beta = Eigen::Map<const Eigen::VectorXd>(beta.data(), static_cast<Eigen::Index>(beta.size()));
    record.sigma2 = j.at("sigma2").get<double>();
    for (const json& m : j.at("moves")) {
      MoveRecord move;
      move.tree = m.at("tree").get<int>() - 1;
      move.grow = m.at("type").get<std::string>() == "grow";
      move.accepted = m.at("accepted").get<bool>();
      record.moves.push_back(move);
      if (move.grow) {
        ++trace.grow_proposed;
        trace.grow_accepted += move.accepted ? 1 : 0;
      } else {
        ++trace.prune_proposed;
        trace.prune_accepted += move.accepted ? 1 : 0;
      }
    }
    trace.records.push_back(std::move(record));
  }
  return trace;
}

void write_log_jmp_series_csv(const ChainTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open series file for writing: " + path);
  out << "iter,log_jmp\n";
  for (const IterationRecord& record : trace.records) {
    json v = record.log_jmp;  // shortest round-trip rendering
    out << record.iter << ',' << v.dump() << '\n';
  }
}

}  // namespace symforest
