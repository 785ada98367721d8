#include "hise/ablation.hpp"

#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "hise/training.hpp"
#include "json.hpp"

namespace hise {

AblationAxis parse_ablation_axis(const std::string& name) {
  if (name == "components") return AblationAxis::kComponents;
  if (name == "aggregation") return AblationAxis::kAggregation;
  if (name == "alpha") return AblationAxis::kAlpha;
  if (name == "loss") return AblationAxis::kLoss;
  throw std::invalid_argument(
      "unknown ablation axis '" + name +
      "' (expected components, aggregation, alpha or loss)");
}

std::vector<std::pair<std::string, RunConfig>> ablation_rows(const RunConfig& base,
                                                             AblationAxis axis) {
  std::vector<std::pair<std::string, RunConfig>> rows;

  switch (axis) {
    case AblationAxis::kComponents: {
      // vds, vhs, tds, ths
      const bool table[][4] = {
          {false, false, false, false}, {false, false, false, true},
          {false, false, true, false},  {false, false, true, true},
          {false, true, true, true},    {true, false, true, true},
          {true, true, false, true},    {true, true, true, true},
      };
      const char* names[] = {"none",        "ths",         "tds",         "tds+ths",
                             "vhs+tds+ths", "vds+tds+ths", "vds+vhs+ths", "all"};
      for (int i = 0; i < 8; ++i) {
        RunConfig c = base;
        c.use_vds = table[i][0];
        c.use_vhs = table[i][1];
        c.use_tds = table[i][2];
        c.use_ths = table[i][3];
        rows.emplace_back(names[i], c);
      }
      break;
    }
    case AblationAxis::kAggregation: {
      const bool table[][2] = {{false, false}, {true, false}, {false, true}, {true, true}};
      const char* names[] = {"vmp+tmp", "vgr+tmp", "vmp+tgr", "vgr+tgr"};
      for (int i = 0; i < 4; ++i) {
        RunConfig c = base;
        c.visual_graph_reasoning = table[i][0];
        c.textual_graph_reasoning = table[i][1];
        rows.emplace_back(names[i], c);
      }
      break;
    }
    case AblationAxis::kAlpha: {
      for (double alpha : {0.7, 0.8, 0.9, 1.0}) {
        RunConfig c = base;
        c.alpha = alpha;
        char name[32];
        std::snprintf(name, sizeof(name), "alpha=%.1f", alpha);
        rows.emplace_back(name, c);
      }
      break;
    }
    case AblationAxis::kLoss: {
      RunConfig infonce = base;
      infonce.loss = LossKind::kBInfonce;
      rows.emplace_back("b-infonce", infonce);
      RunConfig hal = base;
      hal.loss = LossKind::kHal;
      rows.emplace_back("m-hal", hal);
      break;
    }
  }
  return rows;
}

std::vector<AblationRow> run_ablation(const RunConfig& base, const DatasetSplit& split,
                                      AblationAxis axis, std::ostream* progress) {
  std::vector<AblationRow> out;
  for (auto& [name, config] : ablation_rows(base, axis)) {
    if (progress) *progress << "ablation row '" << name << "'\n";
    TrainerState state = make_trainer_state(config);
    TrainResult result = train(state, split, config, progress);
    out.push_back(AblationRow{name, config, result.final_metrics});
  }
  return out;
}

std::string ablation_csv(const std::vector<AblationRow>& rows) {
  std::string out = "row,r1_t2v,r5_t2v,r10_t2v,mdr_t2v,r1_v2t,r5_v2t,r10_v2t,mdr_v2t,rsum\n";
  char buf[256];
  for (const auto& row : rows) {
    const MetricsReport& m = row.metrics;
    std::snprintf(buf, sizeof(buf), "%s,%.1f,%.1f,%.1f,%.1f,%.1f,%.1f,%.1f,%.1f,%.1f\n",
                  row.name.c_str(), m.t2v.r1, m.t2v.r5, m.t2v.r10, m.t2v.mdr, m.v2t.r1,
                  m.v2t.r5, m.v2t.r10, m.v2t.mdr, m.r_sum);
    out += buf;
  }
  return out;
}

std::string ablation_json(const std::vector<AblationRow>& rows) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& row : rows) {
    nlohmann::ordered_json j;
    j["row"] = row.name;
    j["metrics"] = nlohmann::ordered_json::parse(row.metrics.to_json_text());
    arr.push_back(std::move(j));
  }
  return arr.dump(2) + "\n";
}

}  // namespace hise
