#include "afdi/serialize.hpp"

#include <json.hpp>

namespace afdi {

namespace {

using nlohmann::json;

json matrix_to_json(const Eigen::MatrixXd& M) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Eigen::MatrixXd matrix_from_json(const json& rows, int expect_cols = -1) {
  const int m = static_cast<int>(rows.size());
  int n = expect_cols;
  if (m > 0) n = static_cast<int>(rows.at(0).size());
  if (n < 0) n = 0;
  Eigen::MatrixXd M(m, n);
  for (int i = 0; i < m; ++i) {
    const auto& row = rows.at(i);
    if (static_cast<int>(row.size()) != n)
      throw std::invalid_argument("ccg json: ragged matrix rows");
    for (int j = 0; j < n; ++j) M(i, j) = row.at(j).get<double>();
  }
  return M;
}

Eigen::VectorXd vector_from_json(const json& a) {
  Eigen::VectorXd v(a.size());
  for (size_t i = 0; i < a.size(); ++i) v(static_cast<Eigen::Index>(i)) = a.at(i).get<double>();
  return v;
}

json cone_to_json(const ConeSpec& c) {
  json j;
  j["dim"] = c.dim();
  switch (c.kind()) {
    case ConeSpec::Kind::Free: j["variant"] = "free"; break;
    case ConeSpec::Kind::NonNegative: j["variant"] = "nonnegative"; break;
    case ConeSpec::Kind::Box:
      j["variant"] = "box";
      j["lo"] = vector_to_json(c.lo());
      j["hi"] = vector_to_json(c.hi());
      break;
    case ConeSpec::Kind::Ball2:
      j["variant"] = "ball2";
      j["radius"] = c.radius();
      break;
    case ConeSpec::Kind::SOC: j["variant"] = "soc"; break;
  }
  return j;
}

ConeSpec cone_from_json(const json& j) {
  const std::string variant = j.at("variant").get<std::string>();
  const int dim = j.at("dim").get<int>();
  if (variant == "free") return ConeSpec::free(dim);
  if (variant == "nonnegative") return ConeSpec::nonnegative(dim);
  if (variant == "box")
    return ConeSpec::box(vector_from_json(j.at("lo")), vector_from_json(j.at("hi")));
  if (variant == "ball2") return ConeSpec::ball2(dim, j.at("radius").get<double>());
  if (variant == "soc") return ConeSpec::soc(dim);
  throw std::invalid_argument("ccg json: unknown cone variant '" + variant + "'");
}

}  // namespace

std::string to_json(const CCG& Z) {
  json j;
  j["G"] = matrix_to_json(Z.G);
  j["c"] = vector_to_json(Z.c);
  j["A"] = matrix_to_json(Z.A);
  j["b"] = vector_to_json(Z.b);
  json cones = json::array();
  for (const auto& c : Z.cones) cones.push_back(cone_to_json(c));
  j["cones"] = std::move(cones);
  return j.dump(2);
}

CCG ccg_from_json(const std::string& text) {
  const json j = json::parse(text);
  std::vector<ConeSpec> cones;
  for (const auto& c : j.at("cones")) cones.push_back(cone_from_json(c));
  const int ng = total_dim(cones);
  CCG Z(matrix_from_json(j.at("G"), ng), vector_from_json(j.at("c")),
        matrix_from_json(j.at("A"), ng), vector_from_json(j.at("b")), std::move(cones));
  Z.validate();
  return Z;
}

std::string to_json(const SeparationResult& r) {
  json j;
  j["u_star"] = vector_to_json(r.u_star);
  j["cost"] = r.cost;
  j["certified"] = r.certified;
  json certs = json::array();
  for (const auto& c : r.certificates) {
    json cj;
    cj["pair"] = {c.i, c.j};
    cj["empty"] = c.empty;
    cj["margin"] = std::isfinite(c.margin) ? json(c.margin) : json("inf");
    certs.push_back(std::move(cj));
  }
  j["certificates"] = std::move(certs);
  j["rays_used"] = r.rays_used;
  j["seed"] = r.seed;
  j["ray_solves"] = {{"control_space", r.control_ray_solves},
                     {"lifted_space", r.lifted_ray_solves}};
  j["timings_ms"] = {{"reach", r.timings.reach_ms},
                     {"intersect", r.timings.intersect_ms},
                     {"sample", r.timings.sample_ms},
                     {"certify", r.timings.certify_ms}};
  if (r.iterations > 0) {
    j["iterations"] = r.iterations;
    j["sigma_history"] = r.sigma_history;
  }
  return j.dump(2);
}

}  // namespace afdi
