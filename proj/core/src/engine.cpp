#include "hcmon/engine.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

namespace hcmon {

using dsl::AssertionType;
using dsl::CompiledAssertion;

namespace {

constexpr double kTol = 1e-6;

std::string at_time(double t) {
  std::ostringstream s;
  s << "t=" << t;
  return s.str();
}

Verdict from_outcome(const CompiledAssertion& a, double t, const StepOutcome& o) {
  return Verdict{a.id, t, o.value ? Result::pass : Result::fail, o.detail};
}

Verdict insufficient(const CompiledAssertion& a, double t, const EvalConfig& cfg) {
  Detail d;
  d["reason"] = std::string("insufficient-data");
  return Verdict{a.id, t, cfg.strict_windows ? Result::fail : Result::not_applicable, d};
}

Verdict never_fired(const CompiledAssertion& a, double t) {
  Detail d;
  d["reason"] = std::string("reference-never-fired");
  return Verdict{a.id, t, Result::not_applicable, d};
}

Verdict odd_verdict(const CompiledAssertion& a, double t) {
  Detail d;
  d["reason"] = std::string("odd-excluded");
  return Verdict{a.id, t, Result::not_applicable, d};
}

// Aggregates the outcomes of a temporal window given in time order.
class WindowFold {
 public:
  void add(double t, const StepOutcome& o) {
    ++n_;
    if (!failed_ && !o.value) {
      failed_ = true;
      detail_ = o.detail;
      detail_["fail_t"] = t;
    } else if (!failed_) {
      detail_ = o.detail;
    }
  }
  Verdict finish(const CompiledAssertion& a, double t_ref) {
    detail_["window_steps"] = static_cast<double>(n_);
    return Verdict{a.id, t_ref, failed_ ? Result::fail : Result::pass, detail_};
  }

 private:
  int n_ = 0;
  bool failed_ = false;
  Detail detail_;
};

Verdict physical_verdict(const CompiledAssertion& a, double t_ref, double t_eval,
                         const StepOutcome& o) {
  Verdict v = from_outcome(a, t_ref, o);
  v.detail["evaluated_t"] = t_eval;
  return v;
}

// Reference outcomes: a missing actor means the reference does not hold;
// any other evaluation error is reported with its time.
bool reference_holds(const StepOutcome& o, double t) {
  if (!o.error) return o.value;
  if (o.error_kind == ErrorKind::not_found) return false;
  const auto it = o.detail.find("reason");
  const std::string why = it == o.detail.end() ? "" : std::get<std::string>(it->second);
  throw Error(o.error_kind, "reference evaluation failed at " + at_time(t) + ": " + why);
}

class TraceSource : public StepSource {
 public:
  explicit TraceSource(const Trace& t) : trace_(t) {}
  const Step* at(long long i) const override {
    if (i < 0 || i >= static_cast<long long>(trace_.steps.size())) return nullptr;
    return &trace_.steps[static_cast<std::size_t>(i)];
  }

 private:
  const Trace& trace_;
};

bool is_pre(AssertionType t) {
  return t == AssertionType::pre_temporal || t == AssertionType::pre_physical;
}

}  // namespace

const char* to_string(Result r) {
  switch (r) {
    case Result::pass: return "pass";
    case Result::fail: return "fail";
    case Result::not_applicable: return "not_applicable";
  }
  return "?";
}

std::optional<Result> parse_result(const std::string& s) {
  if (s == "pass") return Result::pass;
  if (s == "fail") return Result::fail;
  if (s == "not_applicable") return Result::not_applicable;
  return std::nullopt;
}

bool verdict_less(const Verdict& a, const Verdict& b) {
  if (a.t != b.t) return a.t < b.t;
  return a.assertion_id < b.assertion_id;
}

std::string to_jsonl(const Verdict& v) {
  nlohmann::ordered_json j;
  j["assertion_id"] = v.assertion_id;
  j["t"] = v.t;
  j["result"] = to_string(v.result);
  nlohmann::ordered_json d = nlohmann::ordered_json::object();
  for (const auto& [k, val] : v.detail) {
    if (const double* x = std::get_if<double>(&val)) {
      if (std::isfinite(*x)) {
        d[k] = *x;
      } else {
        d[k] = *x > 0 ? "inf" : (*x < 0 ? "-inf" : "nan");
      }
    } else {
      d[k] = std::get<std::string>(val);
    }
  }
  j["detail"] = d;
  return j.dump();
}

Verdict verdict_from_json(const std::string& line) {
  const auto j = nlohmann::json::parse(line);
  Verdict v;
  v.assertion_id = j.at("assertion_id").get<std::string>();
  v.t = j.at("t").get<double>();
  auto r = parse_result(j.at("result").get<std::string>());
  if (!r) throw Error(ErrorKind::parse, "unknown verdict result");
  v.result = *r;
  if (j.contains("detail")) {
    for (auto it = j["detail"].begin(); it != j["detail"].end(); ++it) {
      if (it->is_number()) {
        v.detail[it.key()] = it->get<double>();
      } else if (it->is_string()) {
        v.detail[it.key()] = it->get<std::string>();
      }
    }
  }
  return v;
}

bool odd_excluded(const CompiledAssertion& a, const EvalConfig& cfg) {
  if (!cfg.active_odd) return false;
  for (const auto& tag : a.odd) {
    if (cfg.active_odd->count(tag)) return false;
  }
  return true;
}

std::vector<double> find_reference_points(const CompiledAssertion& a, const Trace& trace,
                                          const EvalConfig& cfg) {
  std::vector<double> out;
  if (!a.reference) {
    throw Error(ErrorKind::invalid_argument, "invariant '" + a.id + "' has no reference");
  }
  TraceSource src(trace);
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const double t = trace.steps[i].t;
    if (reference_holds(evaluate_at(*a.reference, src, static_cast<long long>(i), cfg), t)) {
      out.push_back(t);
      if (a.mode == dsl::RefMode::first) break;
    }
  }
  return out;
}

std::vector<Verdict> evaluate(const CompiledAssertion& a, const Trace& trace,
                              const EvalConfig& cfg) {
  std::vector<Verdict> out;
  const auto& steps = trace.steps;
  if (steps.empty()) return out;
  if (odd_excluded(a, cfg)) return {odd_verdict(a, steps.front().t)};

  TraceSource src(trace);
  const std::size_t n = steps.size();
  std::vector<std::optional<StepOutcome>> memo(n);
  auto cond = [&](std::size_t i) -> const StepOutcome& {
    if (!memo[i]) memo[i] = evaluate_at(a.condition, src, static_cast<long long>(i), cfg);
    return *memo[i];
  };

  if (a.type == AssertionType::invariant) {
    for (std::size_t i = 0; i < n; ++i) out.push_back(from_outcome(a, steps[i].t, cond(i)));
    return out;
  }

  std::vector<std::size_t> refs;
  for (std::size_t i = 0; i < n; ++i) {
    if (reference_holds(evaluate_at(*a.reference, src, static_cast<long long>(i), cfg), steps[i].t)) {
      refs.push_back(i);
      if (a.mode == dsl::RefMode::first) break;
    }
  }
  if (refs.empty()) return {never_fired(a, steps.back().t)};

  const double t_first = steps.front().t;
  const double t_last = steps.back().t;
  const double w = a.window;
  auto nearest = [&](double target) {
    std::optional<std::size_t> lo, hi;
    for (std::size_t i = 0; i < n; ++i) {
      if (steps[i].t <= target) lo = i;
      if (steps[i].t >= target && !hi) hi = i;
    }
    if (lo && hi) {
      return std::abs(steps[*hi].t - target) < std::abs(target - steps[*lo].t) ? *hi : *lo;
    }
    return lo ? *lo : *hi;
  };

  for (std::size_t r : refs) {
    const double tr = steps[r].t;
    switch (a.type) {
      case AssertionType::execution: out.push_back(from_outcome(a, tr, cond(r))); break;
      case AssertionType::post_temporal: {
        std::optional<std::size_t> close;
        for (std::size_t i = r + 1; i < n && !close; ++i) {
          if (steps[i].t >= tr + w - kTol) close = i;
        }
        if (!close) {
          out.push_back(insufficient(a, tr, cfg));
          break;
        }
        WindowFold fold;
        for (std::size_t i = r + 1; i <= *close; ++i) fold.add(steps[i].t, cond(i));
        out.push_back(fold.finish(a, tr));
        break;
      }
      case AssertionType::pre_temporal: {
        std::optional<std::size_t> open;
        for (std::size_t i = 0; i < r; ++i) {
          if (steps[i].t <= tr - w + kTol) open = i;
        }
        if (!open) {
          out.push_back(insufficient(a, tr, cfg));
          break;
        }
        WindowFold fold;
        for (std::size_t i = *open; i < r; ++i) fold.add(steps[i].t, cond(i));
        out.push_back(fold.finish(a, tr));
        break;
      }
      case AssertionType::post_physical:
      case AssertionType::pre_physical: {
        const double target = is_pre(a.type) ? tr - w : tr + w;
        if (target < t_first - kTol || target > t_last + kTol) {
          out.push_back(insufficient(a, tr, cfg));
          break;
        }
        const std::size_t k = nearest(target);
        out.push_back(physical_verdict(a, tr, steps[k].t, cond(k)));
        break;
      }
      case AssertionType::invariant: break;
    }
  }
  return out;
}

std::vector<Verdict> evaluate(const dsl::Plan& plan, const Trace& trace, const EvalConfig& cfg) {
  std::vector<Verdict> out;
  for (const auto& a : plan.assertions) {
    auto v = evaluate(a, trace, cfg);
    out.insert(out.end(), std::make_move_iterator(v.begin()), std::make_move_iterator(v.end()));
  }
  std::stable_sort(out.begin(), out.end(), verdict_less);
  return out;
}

// ---------------------------------------------------------------------------

struct StreamingEngine::State : StepSource {
  struct Slot {
    const CompiledAssertion* a = nullptr;
    bool excluded = false;
    bool done = false;
    long long cond_next = 0;
    long long ref_next = 0;
    bool fired = false;
    bool any_ref = false;
    std::map<long long, StepOutcome> cond;
    std::deque<long long> pending;
  };

  dsl::Plan plan;
  EvalConfig cfg;
  std::deque<Step> steps;
  long long step_base = 0;
  std::deque<double> times;
  long long time_base = 0;
  long long count = 0;
  std::vector<Slot> slots;
  bool finished = false;

  const Step* at(long long i) const override {
    if (i < step_base || i >= step_base + static_cast<long long>(steps.size())) return nullptr;
    return &steps[static_cast<std::size_t>(i - step_base)];
  }
  double time(long long i) const { return times[static_cast<std::size_t>(i - time_base)]; }
  long long last() const { return count - 1; }

  // Last known index with t <= x, or nullopt.
  std::optional<long long> last_at_or_before(double x, long long upto) const {
    for (long long i = upto; i >= time_base; --i) {
      if (time(i) <= x) return i;
    }
    return std::nullopt;
  }

  std::optional<Verdict> resolve(Slot& s, long long r, bool final) {
    const CompiledAssertion& a = *s.a;
    const double tr = time(r);
    const double w = a.window;
    auto ready = [&](long long i) { return i < s.cond_next; };
    switch (a.type) {
      case AssertionType::execution:
        if (!ready(r)) return std::nullopt;
        return from_outcome(a, tr, s.cond.at(r));
      case AssertionType::post_temporal: {
        std::optional<long long> close;
        for (long long i = r + 1; i <= last(); ++i) {
          if (time(i) >= tr + w - kTol) {
            close = i;
            break;
          }
        }
        if (!close) {
          if (final) return insufficient(a, tr, cfg);
          return std::nullopt;
        }
        if (!ready(*close)) return std::nullopt;
        WindowFold fold;
        for (long long i = r + 1; i <= *close; ++i) fold.add(time(i), s.cond.at(i));
        return fold.finish(a, tr);
      }
      case AssertionType::pre_temporal: {
        const double t0 = times.front();
        if (time_base == 0 && !(t0 <= tr - w + kTol)) return insufficient(a, tr, cfg);
        auto open = last_at_or_before(tr - w + kTol, r - 1);
        if (!open) return insufficient(a, tr, cfg);
        if (!ready(r - 1)) return std::nullopt;
        WindowFold fold;
        for (long long i = *open; i < r; ++i) fold.add(time(i), s.cond.at(i));
        return fold.finish(a, tr);
      }
      case AssertionType::post_physical: {
        const double target = tr + w;
        std::optional<long long> hi;
        for (long long i = r; i <= last(); ++i) {
          if (time(i) >= target) {
            hi = i;
            break;
          }
        }
        long long k;
        if (hi) {
          k = *hi;
          if (*hi - 1 >= time_base && time(*hi - 1) <= target &&
              !(std::abs(time(*hi) - target) < std::abs(target - time(*hi - 1)))) {
            k = *hi - 1;
          }
        } else if (final) {
          if (target > time(last()) + kTol) return insufficient(a, tr, cfg);
          k = last();
        } else {
          return std::nullopt;
        }
        if (!ready(k)) return std::nullopt;
        return physical_verdict(a, tr, time(k), s.cond.at(k));
      }
      case AssertionType::pre_physical: {
        const double target = tr - w;
        const double t0 = time_base == 0 ? times.front() : -INFINITY;
        if (target < t0 - kTol) return insufficient(a, tr, cfg);
        auto lo = last_at_or_before(target, r);
        long long k;
        if (!lo) {
          k = time_base;
        } else {
          k = *lo;
          const long long hi = time(*lo) == target ? *lo : *lo + 1;
          if (hi <= r && std::abs(time(hi) - target) < std::abs(target - time(*lo))) k = hi;
        }
        if (!ready(k)) return std::nullopt;
        return physical_verdict(a, tr, time(k), s.cond.at(k));
      }
      case AssertionType::invariant: break;
    }
    return std::nullopt;
  }

  long long keep_from(const Slot& s) const {
    const CompiledAssertion& a = *s.a;
    if (s.excluded || s.done) return count;
    if (a.type == AssertionType::invariant) return s.cond_next;
    long long q = s.fired && a.mode == dsl::RefMode::first ? count : s.ref_next;
    if (!s.pending.empty()) q = std::min(q, s.pending.front());
    if (!is_pre(a.type)) return q;
    const long long probe = std::min(q, last());
    if (probe < time_base) return q;
    auto lo = last_at_or_before(time(probe) - a.window - kTol, probe);
    return lo ? std::max(time_base, *lo - 1) : time_base;
  }

  void step_slot(Slot& s, bool final, std::vector<Verdict>& out) {
    const CompiledAssertion& a = *s.a;
    if (s.done) return;
    if (s.excluded) {
      out.push_back(odd_verdict(a, times.front()));
      s.done = true;
      return;
    }
    const long long lim_c = final ? last() : last() - a.cond_lookahead;
    for (long long i = s.cond_next; i <= lim_c; ++i) s.cond[i] = evaluate_at(a.condition, *this, i, cfg);
    s.cond_next = std::max(s.cond_next, lim_c + 1);

    if (a.type == AssertionType::invariant) {
      for (auto& [i, o] : s.cond) out.push_back(from_outcome(a, time(i), o));
      s.cond.clear();
      return;
    }

    if (!(s.fired && a.mode == dsl::RefMode::first)) {
      const long long lim_r = final ? last() : last() - a.ref_lookahead;
      for (long long i = s.ref_next; i <= lim_r; ++i) {
        s.ref_next = i + 1;
        if (reference_holds(evaluate_at(*a.reference, *this, i, cfg), time(i))) {
          s.pending.push_back(i);
          s.any_ref = true;
          if (a.mode == dsl::RefMode::first) {
            s.fired = true;
            break;
          }
        }
      }
    }

    while (!s.pending.empty()) {
      auto v = resolve(s, s.pending.front(), final);
      if (!v) break;
      out.push_back(std::move(*v));
      s.pending.pop_front();
    }
    if (final && !s.any_ref) {
      out.push_back(never_fired(a, time(last())));
      s.done = true;
    }
  }

  std::vector<Verdict> run(bool final) {
    std::vector<Verdict> out;
    if (count == 0) return out;
    for (auto& s : slots) step_slot(s, final, out);

    long long keep = count;
    long long step_keep = count - 2;
    for (const auto& s : slots) {
      const long long k = keep_from(s);
      keep = std::min(keep, k);
      if (!s.excluded && !s.done) {
        long long frontier = s.cond_next;
        if (s.a->type != AssertionType::invariant && !(s.fired && s.a->mode == dsl::RefMode::first)) {
          frontier = std::min(frontier, s.ref_next);
        }
        step_keep = std::min(step_keep, frontier - 2);
      }
    }
    for (auto& s : slots) {
      while (!s.cond.empty() && s.cond.begin()->first < keep) s.cond.erase(s.cond.begin());
    }
    while (time_base < keep && times.size() > 1) {
      times.pop_front();
      ++time_base;
    }
    while (step_base < step_keep && !steps.empty()) {
      steps.pop_front();
      ++step_base;
    }
    std::stable_sort(out.begin(), out.end(), verdict_less);
    return out;
  }
};

StreamingEngine::StreamingEngine(dsl::Plan plan, EvalConfig cfg) : state_(new State) {
  state_->plan = std::move(plan);
  state_->cfg = std::move(cfg);
  for (const auto& a : state_->plan.assertions) {
    State::Slot s;
    s.a = &a;
    s.excluded = odd_excluded(a, state_->cfg);
    state_->slots.push_back(std::move(s));
  }
}

StreamingEngine::~StreamingEngine() { delete state_; }

std::vector<Verdict> StreamingEngine::push(Step step) {
  State& st = *state_;
  if (st.finished) throw Error(ErrorKind::stream, "stream already finished");
  if (st.count > 0 && !(step.t > st.time(st.last()))) {
    throw Error(ErrorKind::stream, "time regression at " + at_time(step.t) + " after " +
                                       at_time(st.time(st.last())));
  }
  st.times.push_back(step.t);
  st.steps.push_back(std::move(step));
  ++st.count;
  return st.run(false);
}

std::vector<Verdict> StreamingEngine::finish() {
  State& st = *state_;
  if (st.finished) return {};
  st.finished = true;
  return st.run(true);
}

std::size_t StreamingEngine::retained_steps() const { return state_->steps.size(); }

Debouncer::Debouncer(int n) : n_(n) {
  if (n < 1) throw Error(ErrorKind::invalid_argument, "debounce length must be >= 1");
}

Result Debouncer::observe(Result raw) {
  if (!published_) {
    published_ = raw;
    return raw;
  }
  if (raw == *published_) {
    candidate_.reset();
    run_ = 0;
    return *published_;
  }
  if (candidate_ == raw) {
    ++run_;
  } else {
    candidate_ = raw;
    run_ = 1;
  }
  if (run_ >= n_) {
    published_ = raw;
    candidate_.reset();
    run_ = 0;
  }
  return *published_;
}

VerdictDebouncer::VerdictDebouncer(int n) : n_(n) {
  if (n < 1) throw Error(ErrorKind::invalid_argument, "debounce length must be >= 1");
}

Verdict VerdictDebouncer::apply(Verdict v) {
  auto it = state_.try_emplace(v.assertion_id, n_).first;
  Result raw = v.result;
  if (auto r = v.detail.find("raw_result"); r != v.detail.end()) {
    if (auto parsed = parse_result(std::get<std::string>(r->second))) raw = *parsed;
  }
  v.result = it->second.observe(raw);
  v.detail.erase("raw_result");
  if (v.result != raw) v.detail["raw_result"] = std::string(to_string(raw));
  return v;
}

std::vector<Verdict> debounce(const std::vector<Verdict>& verdicts, int n) {
  VerdictDebouncer d(n);
  std::vector<Verdict> out;
  out.reserve(verdicts.size());
  for (const auto& v : verdicts) out.push_back(d.apply(v));
  return out;
}

}  // namespace hcmon
