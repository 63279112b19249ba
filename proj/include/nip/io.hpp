#ifndef NIP_IO_HPP
#define NIP_IO_HPP

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "nip/diagnostics.hpp"
#include "nip/error.hpp"
#include "nip/oracle.hpp"
#include "nip/solver.hpp"

namespace nip {

using json = nlohmann::json;

/// Shortest decimal string that parses back to the same double.
inline std::string format_double(double v)
{
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view text, const std::string& field)
{
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw Error(ErrorCode::ParseError, field + ": not a number: '" + std::string(text) + "'");
  }
  return v;
}

/// "1,2.5,-3" -> Vector.
inline Vector parse_vector(std::string_view text, const std::string& field)
{
  std::vector<double> values;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto end = comma == std::string_view::npos ? text.size() : comma;
    auto piece = text.substr(start, end - start);
    while (!piece.empty() && piece.front() == ' ') piece.remove_prefix(1);
    while (!piece.empty() && piece.back() == ' ') piece.remove_suffix(1);
    values.push_back(parse_double(piece, field));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  Vector v(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) v[static_cast<Eigen::Index>(i)] = values[i];
  return v;
}

// --- problem files -----------------------------------------------------------

namespace detail {

inline const json& field(const json& obj, const std::string& key, const std::string& path)
{
  if (!obj.is_object()) throw Error(ErrorCode::ParseError, path + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw Error(ErrorCode::ParseError, path + "." + key + ": missing");
  return *it;
}

inline double number(const json& j, const std::string& path)
{
  if (!j.is_number()) throw Error(ErrorCode::ParseError, path + ": expected a number");
  return j.get<double>();
}

inline Vector vector(const json& j, const std::string& path, Eigen::Index dim)
{
  if (!j.is_array()) throw Error(ErrorCode::ParseError, path + ": expected an array");
  if (static_cast<Eigen::Index>(j.size()) != dim) {
    throw Error(ErrorCode::ParseError,
                path + ": expected " + std::to_string(dim) + " entries, got " + std::to_string(j.size()));
  }
  Vector v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v[i] = number(j[static_cast<std::size_t>(i)], path + "[" + std::to_string(i) + "]");
  return v;
}

inline Matrix matrix(const json& j, const std::string& path, Eigen::Index dim)
{
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != dim) {
    throw Error(ErrorCode::ParseError, path + ": expected " + std::to_string(dim) + " rows");
  }
  Matrix m(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r) {
    m.row(r) = vector(j[static_cast<std::size_t>(r)], path + "[" + std::to_string(r) + "]", dim).transpose();
  }
  return m;
}

inline json to_json(const Vector& v)
{
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

inline const json& array(const json& obj, const std::string& key, const std::string& path)
{
  const json& a = field(obj, key, path);
  if (!a.is_array() || a.empty()) throw Error(ErrorCode::ParseError, path + "." + key + ": expected a nonempty array");
  return a;
}

template <class F>
auto rethrow_as_parse_error(const std::string& path, F&& f)
{
  try {
    return f();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ParseError) throw;
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
}

} // namespace detail

/// Builds a problem from its JSON description:
///
///   {"name": "...", "kind": "ball", "dim": 2, "params": {...}, "activity_tol": 1e-8}
///
/// params by kind:
///   ball:                    {"center": [..], "radius": r}        (both optional)
///   max_affine:              {"normals": [[..],..], "offsets": [..]}
///   max_quadratics:          {"pieces": [{"hessian": [[..]], "linear": [..], "constant": c}, ..]}
///   sip_distance:            {"bodies": [{"type": "ball", "center": [..], "radius": r},
///                                        {"type": "halfspace", "normal": [..], "offset": b}, ..]}
///   shifted_ball_infeasible: {"center": [..], "shift": s}         (both optional)
///
/// Errors name the offending field, e.g. "problem.params.normals[1]".
inline ProblemSpec problem_from_json(const json& doc)
{
  using namespace detail;
  const std::string root = "problem";
  const json& kind_j = field(doc, "kind", root);
  if (!kind_j.is_string()) throw Error(ErrorCode::ParseError, root + ".kind: expected a string");
  const auto kind = problem_kind_from_string(kind_j.get<std::string>());
  if (!kind) throw Error(ErrorCode::ParseError, root + ".kind: unknown kind '" + kind_j.get<std::string>() + "'");

  const json& dim_j = field(doc, "dim", root);
  if (!dim_j.is_number_integer() || dim_j.get<long long>() < 1) {
    throw Error(ErrorCode::ParseError, root + ".dim: expected a positive integer");
  }
  const auto dim = static_cast<Eigen::Index>(dim_j.get<long long>());

  const json empty = json::object();
  const auto params_it = doc.find("params");
  const json& params = params_it == doc.end() ? empty : *params_it;
  const std::string pp = root + ".params";
  if (!params.is_object()) throw Error(ErrorCode::ParseError, pp + ": expected an object");

  auto optional_center = [&](const std::string& path) {
    return params.contains("center") ? vector(params["center"], path + ".center", dim) : Vector(Vector::Zero(dim));
  };

  ProblemSpec problem = [&]() -> ProblemSpec {
    switch (*kind) {
    case ProblemKind::Ball: {
      const Vector c = optional_center(pp);
      const double r = params.contains("radius") ? number(params["radius"], pp + ".radius") : 1.0;
      return rethrow_as_parse_error(pp + ".radius", [&] { return ProblemSpec::ball(c, r); });
    }
    case ProblemKind::ShiftedBallInfeasible: {
      const Vector c = optional_center(pp);
      const double s = params.contains("shift") ? number(params["shift"], pp + ".shift") : 1.0;
      return rethrow_as_parse_error(pp + ".shift", [&] { return ProblemSpec::shifted_ball_infeasible(c, s); });
    }
    case ProblemKind::MaxAffine: {
      const json& normals = array(params, "normals", pp);
      const json& offsets = array(params, "offsets", pp);
      if (normals.size() != offsets.size()) {
        throw Error(ErrorCode::ParseError, pp + ".offsets: count differs from normals");
      }
      std::vector<Vector> a;
      std::vector<double> c;
      for (std::size_t j = 0; j < normals.size(); ++j) {
        a.push_back(vector(normals[j], pp + ".normals[" + std::to_string(j) + "]", dim));
        c.push_back(number(offsets[j], pp + ".offsets[" + std::to_string(j) + "]"));
      }
      return rethrow_as_parse_error(pp, [&] { return ProblemSpec::max_affine(a, c); });
    }
    case ProblemKind::MaxQuadratics: {
      const json& pieces = array(params, "pieces", pp);
      std::vector<QuadraticPiece> qs;
      for (std::size_t j = 0; j < pieces.size(); ++j) {
        const std::string path = pp + ".pieces[" + std::to_string(j) + "]";
        QuadraticPiece q;
        q.hessian = matrix(field(pieces[j], "hessian", path), path + ".hessian", dim);
        q.linear = pieces[j].contains("linear") ? vector(pieces[j]["linear"], path + ".linear", dim)
                                                : Vector(Vector::Zero(dim));
        q.constant = pieces[j].contains("constant") ? number(pieces[j]["constant"], path + ".constant") : 0.0;
        qs.push_back(std::move(q));
      }
      return rethrow_as_parse_error(pp, [&] { return ProblemSpec::max_quadratics(qs); });
    }
    case ProblemKind::SipDistance: {
      const json& bodies = array(params, "bodies", pp);
      std::vector<ConvexBody> ks;
      for (std::size_t j = 0; j < bodies.size(); ++j) {
        const std::string path = pp + ".bodies[" + std::to_string(j) + "]";
        const json& type = field(bodies[j], "type", path);
        if (type == "ball") {
          const Vector c = vector(field(bodies[j], "center", path), path + ".center", dim);
          const double r = number(field(bodies[j], "radius", path), path + ".radius");
          ks.push_back(rethrow_as_parse_error(path + ".radius", [&] { return ConvexBody::ball(c, r); }));
        } else if (type == "halfspace") {
          const Vector a = vector(field(bodies[j], "normal", path), path + ".normal", dim);
          const double b = number(field(bodies[j], "offset", path), path + ".offset");
          ks.push_back(rethrow_as_parse_error(path + ".normal", [&] { return ConvexBody::halfspace(a, b); }));
        } else {
          throw Error(ErrorCode::ParseError, path + ".type: expected \"ball\" or \"halfspace\"");
        }
      }
      return rethrow_as_parse_error(pp, [&] { return ProblemSpec::sip_distance(ks); });
    }
    }
    throw Error(ErrorCode::ParseError, root + ".kind: unhandled");
  }();

  if (doc.contains("name")) {
    if (!doc["name"].is_string()) throw Error(ErrorCode::ParseError, root + ".name: expected a string");
    problem.with_name(doc["name"].get<std::string>());
  }
  if (doc.contains("activity_tol") && !doc["activity_tol"].is_null()) {
    const double tau = number(doc["activity_tol"], root + ".activity_tol");
    rethrow_as_parse_error(root + ".activity_tol", [&] { problem.with_activity_tol(tau); return 0; });
  }
  return problem;
}

inline json problem_to_json(const ProblemSpec& problem)
{
  using detail::to_json;
  json doc;
  doc["name"] = problem.name();
  doc["kind"] = std::string(to_string(problem.kind()));
  doc["dim"] = problem.dim();
  json params = json::object();
  std::visit(
    [&](const auto& p) {
      using P = std::decay_t<decltype(p)>;
      if constexpr (std::is_same_v<P, BallParams>) {
        params["center"] = to_json(p.center);
        params["radius"] = p.radius;
      } else if constexpr (std::is_same_v<P, ShiftedBallParams>) {
        params["center"] = to_json(p.center);
        params["shift"] = p.shift;
      } else if constexpr (std::is_same_v<P, MaxAffineParams>) {
        params["normals"] = json::array();
        for (const auto& a : p.normals) params["normals"].push_back(to_json(a));
        params["offsets"] = p.offsets;
      } else if constexpr (std::is_same_v<P, MaxQuadraticsParams>) {
        params["pieces"] = json::array();
        for (const auto& q : p.pieces) {
          json h = json::array();
          for (Eigen::Index r = 0; r < q.hessian.rows(); ++r) h.push_back(to_json(q.hessian.row(r).transpose()));
          params["pieces"].push_back({{"hessian", h}, {"linear", to_json(q.linear)}, {"constant", q.constant}});
        }
      } else {
        params["bodies"] = json::array();
        for (const auto& b : p.bodies) {
          if (b.is_ball()) {
            params["bodies"].push_back(
              {{"type", "ball"}, {"center", to_json(b.as_ball().center)}, {"radius", b.as_ball().radius}});
          } else {
            params["bodies"].push_back({{"type", "halfspace"},
                                        {"normal", to_json(b.as_halfspace().normal())},
                                        {"offset", b.as_halfspace().offset()}});
          }
        }
      }
    },
    problem.params());
  doc["params"] = params;
  doc["activity_tol"] = problem.activity_tol() ? json(*problem.activity_tol()) : json(nullptr);
  return doc;
}

inline ProblemSpec load_problem(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open problem file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
  return problem_from_json(doc);
}

// --- traces ------------------------------------------------------------------

inline constexpr std::string_view kTraceCsvHeader = "i,eps_i,f_xi,J_i,step_norm,dist_sublevel,cut_count_active";

inline void write_trace_csv(std::ostream& out, const SolveTrace& trace)
{
  out << kTraceCsvHeader << '\n';
  for (const auto& r : trace.rows) {
    out << r.i << ',' << format_double(r.eps) << ',' << format_double(r.f) << ',' << r.cuts << ','
        << format_double(r.step_norm) << ',' << (r.dist_sublevel ? format_double(*r.dist_sublevel) : "") << ','
        << r.active_cuts << '\n';
  }
}

inline std::vector<TraceRow> parse_trace_csv(std::istream& in)
{
  std::string line;
  if (!std::getline(in, line) || line != kTraceCsvHeader) {
    throw Error(ErrorCode::ParseError, "trace csv: missing or unexpected header");
  }
  auto parse_count = [](std::string_view s, const std::string& what) {
    std::size_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
      throw Error(ErrorCode::ParseError, what + ": not a count: '" + std::string(s) + "'");
    }
    return v;
  };

  std::vector<TraceRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string_view> cells;
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      cells.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    const std::string where = "trace csv line " + std::to_string(lineno);
    if (cells.size() != 7) throw Error(ErrorCode::ParseError, where + ": expected 7 columns");
    TraceRow r;
    r.i = parse_count(cells[0], where + " i");
    r.eps = parse_double(cells[1], where + " eps_i");
    r.f = parse_double(cells[2], where + " f_xi");
    r.cuts = parse_count(cells[3], where + " J_i");
    r.step_norm = parse_double(cells[4], where + " step_norm");
    if (!cells[5].empty()) r.dist_sublevel = parse_double(cells[5], where + " dist_sublevel");
    r.active_cuts = parse_count(cells[6], where + " cut_count_active");
    rows.push_back(r);
  }
  return rows;
}

inline json status_to_json(const SolveStatus& s)
{
  json j;
  j["kind"] = std::string(to_string(s.kind));
  j["iteration"] = s.iteration;
  j["x"] = detail::to_json(s.x);
  j["f_x"] = s.f_x;
  if (s.kind == SolveStatusKind::FeasibleFound) j["strict_feasible"] = s.strict_feasible;
  if (!s.message.empty()) j["message"] = s.message;
  return j;
}

inline json trace_to_json(const SolveTrace& trace)
{
  json rows = json::array();
  for (std::size_t k = 0; k < trace.rows.size(); ++k) {
    const auto& r = trace.rows[k];
    json row;
    row["i"] = r.i;
    row["eps_i"] = r.eps;
    row["f_xi"] = r.f;
    row["J_i"] = r.cuts;
    row["step_norm"] = r.step_norm;
    row["dist_sublevel"] = r.dist_sublevel ? json(*r.dist_sublevel) : json(nullptr);
    row["cut_count_active"] = r.active_cuts;
    if (k < trace.iterates.size()) row["x"] = detail::to_json(trace.iterates[k]);
    rows.push_back(std::move(row));
  }
  return {{"status", status_to_json(trace.status)}, {"rows", std::move(rows)}};
}

inline json rate_fit_to_json(const RateFit& fit)
{
  return {{"rho", fit.rho}, {"r2", fit.r2}, {"n_points", fit.n_points}};
}

inline json claim_contrast_to_json(const ClaimContrastReport& r)
{
  return {{"distances", r.distances},
          {"eps", r.eps},
          {"eps_over_distance", r.eps_over_distance},
          {"distance_rate", rate_fit_to_json(r.distance_rate)},
          {"l_hat", r.l_hat},
          {"strictly_decreasing", r.strictly_decreasing},
          {"terminated", r.terminated},
          {"iterations", r.iterations},
          {"verdict", r.verdict}};
}

/// Writes `contents` to a sibling temporary file and renames it over `path`.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& contents)
{
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw Error(ErrorCode::InvalidArgument, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw Error(ErrorCode::InvalidArgument, "cannot rename onto " + path.string() + ": " + ec.message());
  }
}

inline std::string trace_csv_string(const SolveTrace& trace)
{
  std::ostringstream out;
  write_trace_csv(out, trace);
  return out.str();
}

} // namespace nip

#endif // NIP_IO_HPP
