#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "hdconc/gauss_bounds.hpp"
#include "hdconc/linalg.hpp"
#include "hdconc/mc.hpp"
#include "hdconc/tensor_bounds.hpp"

// JSON views of library results. Report objects carry
// {op, params, estimate, stderr, n, bound, pass, seed, elapsed_ms}.

namespace hdconc {

using json = nlohmann::ordered_json;

inline json to_json(const SpectralSummary& s) {
  return {{"trace", s.trace}, {"trace_sq", s.trace_sq}, {"opnorm", s.opnorm}, {"eff_dim", s.eff_dim}};
}

inline json to_json(const BoundSheet& b) {
  return {{"tau", b.tau},
          {"colored", b.colored},
          {"shape_opnorm", b.shape_opnorm},
          {"shape_trace_sq", b.shape_trace_sq},
          {"shape_trace_4", b.shape_trace_4},
          {"grad_factor", b.grad_factor},
          {"frobenius_sq_bound", b.frobenius_sq_bound},
          {"trace_vec_bound", b.trace_vec_bound},
          {"s_matrix_dominance_factor", b.s_matrix_dominance_factor},
          {"e_t2_bound_fine", b.e_t2_bound_fine},
          {"e_t2_bound", b.e_t2_bound}};
}

inline json to_json(const Vector& v) {
  json a = json::array();
  for (double x : v) a.push_back(x);
  return a;
}

inline json to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline json to_json(const MCReport& r, double elapsed_ms = 0.0) {
  json params = json::object();
  for (const auto& [k, v] : r.params) params[k] = v;
  json j = {{"op", r.op},
            {"label", r.label},
            {"params", params},
            {"estimate", r.estimate},
            {"stderr", r.std_err},
            {"n", r.n},
            {"bound", r.bound ? json(*r.bound) : json(nullptr)},
            {"pass", r.pass ? json(*r.pass) : json(nullptr)},
            {"seed", r.seed},
            {"stream", r.stream},
            {"elapsed_ms", elapsed_ms}};
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

inline json to_json(const std::vector<MCReport>& rs, double elapsed_ms = 0.0) {
  json a = json::array();
  for (const auto& r : rs) a.push_back(to_json(r, elapsed_ms));
  return a;
}

// Tabular CSV of report rows: op,label,estimate,stderr,n,bound,pass,seed.
inline std::string reports_csv(const std::vector<MCReport>& rs) {
  std::string out = "op,label,estimate,stderr,n,bound,pass,seed\n";
  auto num = [](double v) { return json(v).dump(); };
  for (const auto& r : rs) {
    out += r.op + "," + r.label + "," + num(r.estimate) + "," + num(r.std_err) + "," +
           std::to_string(r.n) + "," + (r.bound ? num(*r.bound) : "") + "," +
           (r.pass ? (*r.pass ? "true" : "false") : "") + "," + std::to_string(r.seed) + "\n";
  }
  return out;
}

}  // namespace hdconc
