#include "afdi/scenario.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

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

const json& field(const json& j, const std::string& key, const std::string& path) {
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError("scenario config: missing field '" + path + "'");
  return *it;
}

Eigen::MatrixXd matrix_at(const json& j, const std::string& key, const std::string& path) {
  const json& rows = field(j, key, path);
  if (!rows.is_array()) throw ConfigError("scenario config: '" + path + "' must be an array");
  const int m = static_cast<int>(rows.size());
  const int n = m > 0 ? static_cast<int>(rows.at(0).size()) : 0;
  Eigen::MatrixXd M(m, n);
  for (int i = 0; i < m; ++i) {
    if (static_cast<int>(rows.at(i).size()) != n)
      throw ConfigError("scenario config: ragged rows in '" + path + "'");
    for (int k = 0; k < n; ++k) M(i, k) = rows.at(i).at(k).get<double>();
  }
  return M;
}

Eigen::VectorXd vector_at(const json& j, const std::string& key, const std::string& path) {
  const json& a = field(j, key, path);
  if (!a.is_array()) throw ConfigError("scenario config: '" + path + "' must be an array");
  Eigen::VectorXd v(a.size());
  for (size_t i = 0; i < a.size(); ++i) v(static_cast<Eigen::Index>(i)) = a.at(i).get<double>();
  return v;
}

CCG set_from_json(const json& j, const std::string& path) {
  const std::string type = field(j, "type", path + ".type").get<std::string>();
  if (type == "box")
    return CCG::box(vector_at(j, "lo", path + ".lo"), vector_at(j, "hi", path + ".hi"));
  if (type == "ball")
    return CCG::ball(vector_at(j, "center", path + ".center"),
                     field(j, "radius", path + ".radius").get<double>());
  if (type == "nonnegative_ball")
    return CCG::nonnegative_ball(vector_at(j, "center", path + ".center"),
                                 field(j, "radius", path + ".radius").get<double>());
  if (type == "point") return CCG::point(vector_at(j, "at", path + ".at"));
  throw ConfigError("scenario config: unknown set type '" + type + "' at '" + path + "'");
}

json set_to_json(const CCG& Z) {
  // Typed specs cover exactly the shapes the factories produce; anything
  // else round-trips through the generic representation.
  json j;
  if (Z.generators() == 0) {
    j["type"] = "point";
    j["at"] = vector_to_json(Z.c);
    return j;
  }
  if (Z.cones.size() == 1 && Z.constraints() == 0 &&
      Z.cones[0].kind() == ConeSpec::Kind::Box && Z.G.isIdentity(1e-12)) {
    j["type"] = "box";
    j["lo"] = vector_to_json(Z.cones[0].lo() + Z.c);
    j["hi"] = vector_to_json(Z.cones[0].hi() + Z.c);
    return j;
  }
  if (Z.cones.size() == 1 && Z.constraints() == 0 &&
      Z.cones[0].kind() == ConeSpec::Kind::Ball2 && Z.G.isIdentity(1e-12)) {
    j["type"] = "ball";
    j["center"] = vector_to_json(Z.c);
    j["radius"] = Z.cones[0].radius();
    return j;
  }
  if (Z.cones.size() == 2 && Z.constraints() == Z.dim() &&
      Z.cones[0].kind() == ConeSpec::Kind::Ball2 &&
      Z.cones[1].kind() == ConeSpec::Kind::NonNegative) {
    j["type"] = "nonnegative_ball";
    j["center"] = vector_to_json(Z.c);
    j["radius"] = Z.cones[0].radius();
    return j;
  }
  throw ConfigError("scenario config: set shape has no typed JSON spec");
}

LPVMode mode_from_json(const json& j, const std::string& path) {
  LPVMode m;
  m.name = field(j, "name", path + ".name").get<std::string>();
  const json& verts = field(j, "vertices", path + ".vertices");
  if (!verts.is_array() || verts.empty())
    throw ConfigError("scenario config: '" + path + ".vertices' must be a nonempty array");
  for (size_t v = 0; v < verts.size(); ++v) {
    const std::string vp = path + ".vertices[" + std::to_string(v) + "]";
    const json& jv = verts.at(v);
    m.thetas.push_back(vector_at(jv, "theta", vp + ".theta"));
    m.A.push_back(matrix_at(jv, "A", vp + ".A"));
    m.B.push_back(matrix_at(jv, "B", vp + ".B"));
    if (jv.contains("E"))
      m.E.push_back(matrix_at(jv, "E", vp + ".E"));
    else
      m.E.push_back(Eigen::MatrixXd::Identity(m.A.back().rows(), m.A.back().rows()));
    if (jv.contains("r"))
      m.r.push_back(vector_at(jv, "r", vp + ".r"));
    else
      m.r.push_back(Eigen::VectorXd::Zero(m.A.back().rows()));
  }
  m.C = matrix_at(j, "C", path + ".C");
  if (j.contains("F"))
    m.F = matrix_at(j, "F", path + ".F");
  else
    m.F = Eigen::MatrixXd::Identity(m.C.rows(), m.C.rows());
  if (j.contains("s"))
    m.s = vector_at(j, "s", path + ".s");
  else
    m.s = Eigen::VectorXd::Zero(m.C.rows());
  if (j.contains("A_nom")) {
    m.A_nom = matrix_at(j, "A_nom", path + ".A_nom");
    m.B_nom = matrix_at(j, "B_nom", path + ".B_nom");
  } else {
    // Nominal matrices default to the vertex average.
    m.A_nom = Eigen::MatrixXd::Zero(m.A[0].rows(), m.A[0].cols());
    m.B_nom = Eigen::MatrixXd::Zero(m.B[0].rows(), m.B[0].cols());
    for (size_t v = 0; v < m.A.size(); ++v) {
      m.A_nom += m.A[v];
      m.B_nom += m.B[v];
    }
    m.A_nom /= static_cast<double>(m.A.size());
    m.B_nom /= static_cast<double>(m.B.size());
  }
  m.validate();
  return m;
}

json mode_to_json(const LPVMode& m) {
  json j;
  j["name"] = m.name;
  json verts = json::array();
  for (size_t v = 0; v < m.A.size(); ++v) {
    json jv;
    jv["theta"] = vector_to_json(m.thetas[v]);
    jv["A"] = matrix_to_json(m.A[v]);
    jv["B"] = matrix_to_json(m.B[v]);
    jv["E"] = matrix_to_json(m.E[v]);
    jv["r"] = vector_to_json(m.r[v]);
    verts.push_back(std::move(jv));
  }
  j["vertices"] = std::move(verts);
  j["C"] = matrix_to_json(m.C);
  j["F"] = matrix_to_json(m.F);
  j["s"] = vector_to_json(m.s);
  j["A_nom"] = matrix_to_json(m.A_nom);
  j["B_nom"] = matrix_to_json(m.B_nom);
  return j;
}

}  // namespace

void ScenarioConfig::validate() const {
  if (modes.size() < 1) throw ConfigError("scenario config: needs at least one mode");
  if (N < 1) throw ConfigError("scenario config: horizon must be >= 1");
  const int nx = n_x(), nu = n_u();
  for (const auto& m : modes) {
    m.validate();
    if (m.n_x() != nx || m.n_u() != nu)
      throw ConfigError("scenario config: mode '" + m.name + "' dimensions differ");
  }
  sets.validate(nx, nu);
  cost.validate(N * nu);
  if (method != "ccg" && method != "svd")
    throw ConfigError("scenario config: method must be 'ccg' or 'svd'");
}

ScenarioConfig scenario_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("scenario config: invalid JSON: ") + e.what());
  }

  ScenarioConfig c;
  c.name = field(j, "name", "name").get<std::string>();
  c.N = field(j, "horizon", "horizon").get<int>();

  const json& jm = field(j, "modes", "modes");
  for (size_t i = 0; i < jm.size(); ++i)
    c.modes.push_back(mode_from_json(jm.at(i), "modes[" + std::to_string(i) + "]"));

  const json& js = field(j, "sets", "sets");
  c.sets.X0 = set_from_json(field(js, "X0", "sets.X0"), "sets.X0");
  c.sets.U = set_from_json(field(js, "U", "sets.U"), "sets.U");
  c.sets.W = set_from_json(field(js, "W", "sets.W"), "sets.W");
  c.sets.V = set_from_json(field(js, "V", "sets.V"), "sets.V");

  const int dim = c.N * c.n_u();
  if (j.contains("cost")) {
    const json& jc = j["cost"];
    c.cost.gamma = jc.value("gamma", 0.5);
    if (jc.contains("R1"))
      c.cost.R1 = matrix_at(jc, "R1", "cost.R1");
    else
      c.cost.R1 = Eigen::MatrixXd::Identity(dim, dim);
    if (jc.contains("R2")) {
      if (jc["R2"].is_string() && jc["R2"].get<std::string>() == "first_difference")
        c.cost.R2 = CostSpec::energy_with_variation(c.N, c.n_u()).R2;
      else
        c.cost.R2 = matrix_at(jc, "R2", "cost.R2");
    } else {
      c.cost.R2 = Eigen::MatrixXd(0, dim);
    }
    c.Q = jc.contains("Q") ? matrix_at(jc, "Q", "cost.Q")
                           : Eigen::MatrixXd::Identity(c.n_x(), c.n_x());
    c.P = jc.contains("P") ? matrix_at(jc, "P", "cost.P")
                           : Eigen::MatrixXd::Identity(c.n_x(), c.n_x());
  } else {
    c.cost = CostSpec::energy(c.N, c.n_u());
    c.Q = Eigen::MatrixXd::Identity(c.n_x(), c.n_x());
    c.P = Eigen::MatrixXd::Identity(c.n_x(), c.n_x());
  }

  if (j.contains("sampling")) {
    const json& sp = j["sampling"];
    c.sampling.n_rays = sp.value("n_rays", 0);
    c.sampling.eps_inflate = sp.value("eps_inflate", 0.01);
    c.sampling.seed = sp.value("seed", 0L);
  }
  if (j.contains("solver")) {
    const json& so = j["solver"];
    c.solver.tol = so.value("tol", 1e-8);
    c.solver.max_iter = so.value("max_iter", 100);
  }
  c.method = j.value("method", "ccg");
  const std::string sched = j.value("schedule", "vertex");
  if (sched == "vertex")
    c.schedule = SchedulePolicy::VertexConstant;
  else if (sched == "per-step")
    c.schedule = SchedulePolicy::PerStepHull;
  else
    throw ConfigError("scenario config: schedule must be 'vertex' or 'per-step'");

  c.validate();
  return c;
}

std::string to_json(const ScenarioConfig& c) {
  json j;
  j["name"] = c.name;
  j["horizon"] = c.N;
  json jm = json::array();
  for (const auto& m : c.modes) jm.push_back(mode_to_json(m));
  j["modes"] = std::move(jm);
  j["sets"] = {{"X0", set_to_json(c.sets.X0)},
               {"U", set_to_json(c.sets.U)},
               {"W", set_to_json(c.sets.W)},
               {"V", set_to_json(c.sets.V)}};
  j["cost"] = {{"gamma", c.cost.gamma},
               {"R1", matrix_to_json(c.cost.R1)},
               {"R2", matrix_to_json(c.cost.R2)},
               {"Q", matrix_to_json(c.Q)},
               {"P", matrix_to_json(c.P)}};
  j["sampling"] = {{"n_rays", c.sampling.n_rays},
                   {"eps_inflate", c.sampling.eps_inflate},
                   {"seed", c.sampling.seed}};
  j["solver"] = {{"tol", c.solver.tol}, {"max_iter", c.solver.max_iter}};
  j["method"] = c.method;
  j["schedule"] = (c.schedule == SchedulePolicy::VertexConstant) ? "vertex" : "per-step";
  return j.dump(2);
}

ScenarioConfig vehicle_scenario() {
  // Ground vehicle with decoupled axes, friction coefficient uncertain in
  // Theta_x = [0.5, 0.8] and input effectiveness in Theta_u = [0.7, 1].
  // The faulty mode scales the input channels by (0.8, 0.4).
  const double Ts = 0.5, D = 0.6;
  const double thx[] = {0.5, 0.8};
  const double thu[] = {0.7, 1.0};

  auto make_mode = [&](const std::string& name, double sx, double sy) {
    LPVMode m;
    m.name = name;
    for (double tx : thx)
      for (double tu : thu) {
        Eigen::Vector2d theta(tx, tu);
        m.thetas.push_back(theta);
        m.A.push_back((1.0 - D * tx * Ts) * Eigen::MatrixXd::Identity(2, 2));
        Eigen::MatrixXd B = Eigen::MatrixXd::Zero(2, 2);
        B(0, 0) = sx * Ts * tu;
        B(1, 1) = sy * Ts * tu;
        m.B.push_back(B);
        m.E.push_back(Eigen::MatrixXd::Identity(2, 2));
        m.r.push_back(Eigen::VectorXd::Zero(2));
      }
    const double cx = 0.5 * (thx[0] + thx[1]), cu = 0.5 * (thu[0] + thu[1]);
    m.A_nom = (1.0 - D * cx * Ts) * Eigen::MatrixXd::Identity(2, 2);
    m.B_nom = Eigen::MatrixXd::Zero(2, 2);
    m.B_nom(0, 0) = sx * Ts * cu;
    m.B_nom(1, 1) = sy * Ts * cu;
    m.C = Eigen::MatrixXd::Identity(2, 2);
    m.F = Eigen::MatrixXd::Identity(2, 2);
    m.s = Eigen::VectorXd::Zero(2);
    return m;
  };

  ScenarioConfig c;
  c.name = "vehicle-s5";
  c.N = 3;
  c.modes = {make_mode("nominal", 1.0, 1.0), make_mode("faulty", 0.8, 0.4)};
  c.sets.X0 = CCG::ball(Eigen::Vector2d::Zero(), 0.1);
  c.sets.W = CCG::ball(Eigen::Vector2d::Zero(), 0.1);
  c.sets.V = CCG::ball(Eigen::Vector2d::Zero(), 0.1);
  c.sets.U = CCG::box(Eigen::Vector2d::Zero(), Eigen::Vector2d(5.0, 5.0));
  c.cost = CostSpec::energy(c.N, 2);
  c.Q = Eigen::MatrixXd::Identity(2, 2);
  c.P = Eigen::MatrixXd::Identity(2, 2);
  c.sampling.n_rays = 484;
  c.sampling.eps_inflate = 0.01;
  c.sampling.seed = 0;
  c.method = "ccg";
  c.validate();
  return c;
}

ScenarioConfig quadrotor_scenario() {
  // Hovering quadrotor without the altitude coordinates: 10 states, inputs
  // (roll torque, pitch torque, thrust); the fault halves the thrust
  // effectiveness.  Scheduling angles theta1, theta2 model a yaw error of up
  // to 20 degrees.
  const double Td = 0.2, g = 9.81, mass = 1.0, Iphi = 0.02, Ith = 0.02;
  const double amax = 20.0 * M_PI / 180.0;

  auto A_of = [&](double t1, double t2) {
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(10, 10);
    M(0, 1) = 1.0;
    M(1, 0) = -g * t1;
    M(2, 3) = 1.0;
    M(3, 2) = -g * t2;
    M(4, 5) = 1.0;
    M(6, 7) = 1.0;
    M(7, 2) = t2 / mass;
    M(8, 9) = 1.0;
    M(9, 0) = -t1 / mass;
    return Eigen::MatrixXd(Eigen::MatrixXd::Identity(10, 10) + Td * M);
  };
  auto B_of = [&](double t1, double t2, double f) {
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(10, 3);
    B(1, 0) = 1.0 / Iphi;
    B(3, 1) = 1.0 / Ith;
    B(5, 2) = f / mass * std::cos(t1) * std::cos(t2);
    B(7, 2) = std::sin(t1) / mass;
    B(9, 2) = -std::sin(t2) / mass;
    return Eigen::MatrixXd(Td * B);
  };

  auto make_mode = [&](const std::string& name, double f) {
    LPVMode m;
    m.name = name;
    for (double t1 : {-amax, amax})
      for (double t2 : {-amax, amax}) {
        m.thetas.push_back(Eigen::Vector2d(t1, t2));
        m.A.push_back(A_of(t1, t2));
        m.B.push_back(B_of(t1, t2, f));
        m.E.push_back(Eigen::MatrixXd::Identity(10, 10));
        m.r.push_back(Eigen::VectorXd::Zero(10));
      }
    m.A_nom = A_of(0.0, 0.0);
    m.B_nom = B_of(0.0, 0.0, f);
    m.C = Eigen::MatrixXd::Zero(3, 10);
    m.C(0, 4) = 1.0;
    m.C(1, 6) = 1.0;
    m.C(2, 8) = 1.0;
    m.F = Eigen::MatrixXd::Identity(3, 3);
    m.s = Eigen::VectorXd::Zero(3);
    return m;
  };

  ScenarioConfig c;
  c.name = "quadrotor-s5";
  c.N = 4;
  c.modes = {make_mode("nominal", 1.0), make_mode("half-thrust", 0.5)};
  c.sets.X0 = CCG::box(Eigen::VectorXd::Constant(10, -0.1), Eigen::VectorXd::Constant(10, 0.1));
  Eigen::VectorXd wc = Eigen::VectorXd::Zero(10);
  wc(5) = Td * g;
  c.sets.W = CCG::ball(wc, 0.1);
  c.sets.V = CCG::point(Eigen::VectorXd::Zero(3));
  Eigen::VectorXd ulo = Eigen::VectorXd::Zero(3), uhi(3);
  uhi << 1.0, 1.0, 2.0;
  c.sets.U = CCG::box(ulo, uhi);
  c.cost = CostSpec::energy_with_variation(c.N, 3, 0.5);
  c.Q = Eigen::MatrixXd::Identity(10, 10);
  c.P = Eigen::MatrixXd::Identity(10, 10);
  c.sampling.n_rays = 484;
  c.sampling.eps_inflate = 0.01;
  c.sampling.seed = 0;
  c.method = "ccg";
  c.validate();
  return c;
}

ScenarioConfig load_scenario(const std::string& name_or_path) {
  if (name_or_path == "vehicle-s5") return vehicle_scenario();
  if (name_or_path == "quadrotor-s5") return quadrotor_scenario();
  std::ifstream in(name_or_path);
  if (!in) throw ConfigError("scenario config: cannot open '" + name_or_path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return scenario_from_json(ss.str());
}

}  // namespace afdi
