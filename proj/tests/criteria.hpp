#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace raider::criteria {

struct Result {
  std::string name;
  bool passed = false;
  std::string detail;
};

std::filesystem::path data_dir();

Result golden_replay();
Result warning_suite();
Result tool_call_parser();
Result precond_baseline_table();
Result relation_oracle();
Result prompt_ablations();
Result recovery_dsl();
Result metrics_math();
Result desk_corpus_smoke();

std::vector<Result> all();

}  // namespace raider::criteria
