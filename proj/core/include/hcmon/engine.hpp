#pragma once

#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "hcmon/dsl.hpp"
#include "hcmon/error.hpp"
#include "hcmon/trace.hpp"
#include "hcmon/ukhc_models.hpp"
#include "hcmon/worldmap.hpp"

namespace hcmon {

enum class SpeedPolicy { measured, worst_case };

struct WorstCaseSpeeds {
  double av = 60 * kMphToMps;
  double vbp = 50 * kMphToMps;
  double ov = 60 * kMphToMps;
  double other = 60 * kMphToMps;

  double for_role(Role r) const;
};

struct EvalConfig {
  const RoadMap* map = nullptr;
  DrivingProfile profile;
  Calibration calibration;
  StoppingCoefficients coefficients;
  SpeedPolicy speed_policy = SpeedPolicy::measured;
  WorstCaseSpeeds worst_case;
  bool strict_windows = true;
  std::optional<std::set<std::string>> active_odd;
};

enum class Result { pass, fail, not_applicable };

const char* to_string(Result r);
std::optional<Result> parse_result(const std::string& s);

using DetailValue = std::variant<double, std::string>;
using Detail = std::map<std::string, DetailValue>;

struct Verdict {
  std::string assertion_id;
  double t = 0.0;
  Result result = Result::pass;
  Detail detail;

  friend bool operator==(const Verdict&, const Verdict&) = default;
};

bool verdict_less(const Verdict& a, const Verdict& b);
std::string to_jsonl(const Verdict& v);
Verdict verdict_from_json(const std::string& line);

// Random access to steps by absolute index; nullptr outside the available range.
class StepSource {
 public:
  virtual ~StepSource() = default;
  virtual const Step* at(long long index) const = 0;
};

struct StepOutcome {
  bool value = false;
  bool error = false;  // evaluation failed; value is false
  ErrorKind error_kind = ErrorKind::invalid_argument;
  Detail detail;
};

// Evaluates a boolean plan node at one step.
StepOutcome evaluate_at(const dsl::Node& node, const StepSource& src, long long index,
                        const EvalConfig& cfg);

bool odd_excluded(const dsl::CompiledAssertion& a, const EvalConfig& cfg);

std::vector<double> find_reference_points(const dsl::CompiledAssertion& a, const Trace& trace,
                                          const EvalConfig& cfg);
std::vector<Verdict> evaluate(const dsl::CompiledAssertion& a, const Trace& trace,
                              const EvalConfig& cfg);
std::vector<Verdict> evaluate(const dsl::Plan& plan, const Trace& trace, const EvalConfig& cfg);

class StreamingEngine {
 public:
  StreamingEngine(dsl::Plan plan, EvalConfig cfg);
  ~StreamingEngine();
  StreamingEngine(const StreamingEngine&) = delete;
  StreamingEngine& operator=(const StreamingEngine&) = delete;

  // Throws Error(stream) when step.t does not increase.
  std::vector<Verdict> push(Step step);
  std::vector<Verdict> finish();

  std::size_t retained_steps() const;

 private:
  struct State;
  std::vector<Verdict> advance(bool final);
  State* state_;
};

class Debouncer {
 public:
  explicit Debouncer(int n);
  // Returns the published result after observing `raw`.
  Result observe(Result raw);
  std::optional<Result> published() const { return published_; }

 private:
  int n_;
  std::optional<Result> published_;
  std::optional<Result> candidate_;
  int run_ = 0;
};

// Debounces a verdict stream per assertion id.
class VerdictDebouncer {
 public:
  explicit VerdictDebouncer(int n);
  Verdict apply(Verdict v);

 private:
  int n_;
  std::map<std::string, Debouncer> state_;
};

// Per assertion id, in input order. A verdict whose published result differs
// from its raw result carries the raw value in detail["raw_result"].
std::vector<Verdict> debounce(const std::vector<Verdict>& verdicts, int n);

}  // namespace hcmon
