// Copyright 2026 The Agora Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cstdio>
#include <future>
#include <sstream>

#include "agora/eval.hpp"

namespace agora::eval {
namespace {

struct JudgeOutcome {
  std::vector<JudgeVerdict> verdicts;
  std::optional<int> actionability;
};

struct FixtureOutcome {
  std::string fixture;
  bool baseline_ok = false;
  std::map<std::string, Statement> produced;
  std::map<std::string, Statement> judged;  // id replaced by the method id
  std::map<std::string, std::map<std::string, JudgeOutcome>> by_method;  // method -> judge
  std::vector<MethodFailure> failures;
  std::vector<std::string> warnings;
};

FixtureOutcome run_fixture(const Fixture& f, const std::vector<MethodSpec>& methods,
                           SynthesisBackend& backend, std::span<Judge* const> judges) {
  FixtureOutcome out;
  out.fixture = f.id;
  for (const auto& m : methods) {
    try {
      Statement s = m.run(f, backend);
      out.produced[m.id] = s;
      s.id = m.id;
      out.judged[m.id] = std::move(s);
    } catch (const std::exception& e) {
      out.failures.push_back({f.id, m.id, e.what()});
      out.warnings.push_back("method " + m.id + " failed on fixture " + f.id +
                             " and is excluded from its means: " + e.what());
    }
  }
  auto base = out.judged.find(std::string(kBaselineMethod));
  if (base == out.judged.end()) {
    out.warnings.push_back("fixture " + f.id + " skipped: the baseline produced no statement");
    return out;
  }
  out.baseline_ok = true;
  const Statement& baseline = base->second;

  for (const auto& [method, statement] : out.judged) {
    for (Judge* judge : judges) {
      JudgeOutcome& jo = out.by_method[method][judge->id()];
      try {
        jo.actionability = judge->actionability(statement, f.question);
      } catch (const std::exception& e) {
        out.warnings.push_back("actionability unscored for " + method + " on " + f.id + ": " + e.what());
      }
      for (const auto& a : f.agents) {
        if (statement.text() == baseline.text()) {
          // Same text both sides: no judge call, pinned by construction.
          jo.verdicts.push_back({a.agent_id, statement.id, baseline.id, "", ""});
          continue;
        }
        const JudgeContext ctx{a.agent_id, f.question, a.profile, a.opinion};
        try {
          jo.verdicts.push_back(judge_pair(*judge, ctx, statement, baseline));
        } catch (const std::exception& e) {
          out.warnings.push_back("verdict dropped for " + method + " on " + f.id + "/" + a.agent_id +
                                 ": " + e.what());
        }
      }
    }
  }
  return out;
}

std::string fmt(std::optional<double> v) {
  if (!v) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", *v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

bool on_frontier(const ComparisonResult& r, const MethodScore& row) {
  auto it = r.frontier.find(row.judge);
  return it != r.frontier.end() &&
         std::find(it->second.begin(), it->second.end(), row.method) != it->second.end();
}

}  // namespace

ComparisonResult run_comparison(std::span<const Fixture> fixtures, const std::vector<MethodSpec>& methods,
                                SynthesisBackend& backend, std::span<Judge* const> judges,
                                const ComparisonOptions& options) {
  if (std::none_of(methods.begin(), methods.end(), [](auto& m) { return m.id == kBaselineMethod; })) {
    throw Error(ErrorCode::kValidation, "the registry must include the baseline method");
  }
  if (judges.empty()) throw Error(ErrorCode::kValidation, "at least one judge is required");

  std::vector<FixtureOutcome> outcomes;
  if (options.parallel) {
    std::vector<std::future<FixtureOutcome>> futures;
    for (const auto& f : fixtures) {
      futures.push_back(std::async(std::launch::async, [&, fp = &f] {
        return run_fixture(*fp, methods, backend, judges);
      }));
    }
    for (auto& fu : futures) outcomes.push_back(fu.get());
  } else {
    for (const auto& f : fixtures) outcomes.push_back(run_fixture(f, methods, backend, judges));
  }

  ComparisonResult r;
  for (Judge* j : judges) r.judges.push_back(j->id());
  for (const auto& m : methods) r.labels[m.id] = m.label;
  for (auto& o : outcomes) {
    r.failures.insert(r.failures.end(), o.failures.begin(), o.failures.end());
    r.warnings.insert(r.warnings.end(), o.warnings.begin(), o.warnings.end());
    if (o.baseline_ok) r.statements[o.fixture] = o.produced;
  }

  for (const auto& m : methods) {
    for (Judge* judge : judges) {
      MethodScore row;
      row.method = m.id;
      row.judge = judge->id();
      double wins = 0;
      double action_sum = 0;
      for (const auto& o : outcomes) {
        if (!o.baseline_ok) continue;
        auto mit = o.by_method.find(m.id);
        if (mit == o.by_method.end()) continue;
        ++row.n_fixtures;
        const JudgeOutcome& jo = mit->second.at(judge->id());
        if (jo.actionability) {
          action_sum += *jo.actionability;
          ++row.n_actionability;
        }
        try {
          const WinRate w = debiased_win_rate(jo.verdicts, o.judged.at(m.id),
                                              o.judged.at(std::string(kBaselineMethod)));
          wins += w.wins;
          row.n_decisive += w.n_decisive;
        } catch (const Error& e) {
          if (e.code() != ErrorCode::kInsufficientSignal) throw;
        }
      }
      if (row.n_decisive > 0) row.representativeness = wins / row.n_decisive;
      if (row.n_actionability > 0) row.actionability = action_sum / row.n_actionability;
      r.rows.push_back(std::move(row));
    }
  }

  for (const auto& j : r.judges) {
    std::vector<MethodScore> rows;
    for (const auto& row : r.rows) {
      if (row.judge == j) rows.push_back(row);
    }
    auto& ids = r.frontier[j];
    for (const auto& p : pareto_frontier(rows)) ids.push_back(p.method);
  }
  return r;
}

std::string to_csv(const ComparisonResult& r) {
  std::ostringstream out;
  out << "method,label,judge,representativeness,n_decisive,actionability,n_actionability,n_fixtures,frontier\n";
  for (const auto& row : r.rows) {
    auto label = r.labels.find(row.method);
    out << csv_field(row.method) << ','
        << csv_field(label == r.labels.end() ? row.method : label->second) << ','
        << csv_field(row.judge) << ',' << fmt(row.representativeness) << ',' << row.n_decisive << ','
        << fmt(row.actionability) << ',' << row.n_actionability << ',' << row.n_fixtures << ','
        << (on_frontier(r, row) ? "true" : "false") << '\n';
  }
  return out.str();
}

Json to_json(const ComparisonResult& r) {
  auto opt = [](std::optional<double> v) { return v ? Json(*v) : Json(nullptr); };
  Json rows = Json::array();
  for (const auto& row : r.rows) {
    auto label = r.labels.find(row.method);
    rows.push_back({{"method", row.method},
                    {"label", label == r.labels.end() ? row.method : label->second},
                    {"judge", row.judge},
                    {"representativeness", opt(row.representativeness)},
                    {"n_decisive", row.n_decisive},
                    {"actionability", opt(row.actionability)},
                    {"n_actionability", row.n_actionability},
                    {"n_fixtures", row.n_fixtures},
                    {"frontier", on_frontier(r, row)}});
  }
  Json failures = Json::array();
  for (const auto& f : r.failures) {
    failures.push_back({{"fixture", f.fixture}, {"method", f.method}, {"message", f.message}});
  }
  Json statements = Json::object();
  for (const auto& [fixture, by_method] : r.statements) {
    for (const auto& [method, s] : by_method) {
      statements[fixture][method] = {{"id", s.id}, {"title", s.title}, {"body", s.body}};
    }
  }
  return {{"judges", r.judges},   {"rows", rows},         {"frontier", r.frontier},
          {"failures", failures}, {"warnings", r.warnings}, {"statements", statements}};
}

}  // namespace agora::eval
