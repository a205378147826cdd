#ifndef LSV_CLI_IO_HPP
#define LSV_CLI_IO_HPP

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

namespace lsv {

// A validated run configuration. The underlying document is kept with all
// defaults filled in, so serialize -> parse is lossless.
class RunConfig {
 public:
  static RunConfig parse(const std::string& text);
  static RunConfig from_json(nlohmann::json doc);

  const std::string& experiment() const { return experiment_; }
  const nlohmann::json& doc() const { return doc_; }
  nlohmann::json& doc() { return doc_; }
  std::string serialize() const { return doc_.dump(2); }

  std::uint64_t seed() const { return doc_.value("seed", std::uint64_t{0}); }
  std::string output() const { return doc_.value("output", std::string{}); }

  void override_seed(std::uint64_t seed) { doc_["seed"] = seed; }
  void override_output(const std::string& path) { doc_["output"] = path; }

  bool operator==(const RunConfig& other) const { return doc_ == other.doc_; }

 private:
  RunConfig() = default;
  std::string experiment_;
  nlohmann::json doc_;
};

// Executes the configured experiment: writes the CSV series and a summary
// record (<output>.summary.json), prints fit summaries, and returns 0 iff
// every embedded assertion passed.
int run(const RunConfig& config);

// "%.17g" formatting used in all CSV output.
std::string format_real(double v);

}  // namespace lsv

#endif
