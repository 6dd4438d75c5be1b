#include "shotcheck/tableau.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

#include "shotcheck/trees.hpp"

namespace shotcheck {
namespace {

ButcherTableau make(std::string name, int order, std::vector<std::vector<double>> a,
                    std::vector<double> b) {
  const auto s = static_cast<Eigen::Index>(b.size());
  ButcherTableau t;
  t.name = std::move(name);
  t.order = order;
  t.a = Eigen::MatrixXd::Zero(s, s);
  t.b = Eigen::VectorXd::Zero(s);
  t.c = Eigen::VectorXd::Zero(s);
  for (Eigen::Index i = 0; i < s; ++i) {
    t.b(i) = b[i];
    const auto& row = a[i];
    for (std::size_t j = 0; j < row.size(); ++j) t.a(i, static_cast<Eigen::Index>(j)) = row[j];
    t.c(i) = t.a.row(i).sum();
  }
  t.validate();
  return t;
}

std::map<std::string, ButcherTableau, std::less<>> build_registry() {
  std::map<std::string, ButcherTableau, std::less<>> reg;
  auto add = [&](ButcherTableau t) { reg.emplace(t.name, std::move(t)); };

  add(make("euler", 1, {{0.0}}, {1.0}));

  add(make("rk4", 4,
           {{0, 0, 0, 0}, {0.5, 0, 0, 0}, {0, 0.5, 0, 0}, {0, 0, 1, 0}},
           {1.0 / 6, 1.0 / 3, 1.0 / 3, 1.0 / 6}));

  add(make("rk38", 4,
           {{0, 0, 0, 0}, {1.0 / 3, 0, 0, 0}, {-1.0 / 3, 1, 0, 0}, {1, -1, 1, 0}},
           {1.0 / 8, 3.0 / 8, 3.0 / 8, 1.0 / 8}));

  // Dormand-Prince 5(4), propagating weights only; the FSAL seventh stage has
  // b_7 = 0 and is dropped.
  add(make("rk5", 5,
           {{},
            {1.0 / 5},
            {3.0 / 40, 9.0 / 40},
            {44.0 / 45, -56.0 / 15, 32.0 / 9},
            {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
            {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656}},
           {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}));

  // Luther's 7-stage sixth-order method.
  {
    const double r = std::sqrt(21.0);
    add(make("rk6", 6,
             {{},
              {1.0},
              {3.0 / 8, 1.0 / 8},
              {8.0 / 27, 2.0 / 27, 8.0 / 27},
              {(-21 + 9 * r) / 392, (-56 + 8 * r) / 392, (336 - 48 * r) / 392, (-63 + 3 * r) / 392},
              {(-1155 - 255 * r) / 1960, (-280 - 40 * r) / 1960, (-320 * r) / 1960, (63 + 363 * r) / 1960,
               (2352 + 392 * r) / 1960},
              {(330 + 105 * r) / 180, 120.0 / 180, (-200 + 280 * r) / 180, (126 - 189 * r) / 180,
               (-686 - 126 * r) / 180, (490 - 70 * r) / 180}},
             {9.0 / 180, 0.0, 64.0 / 180, 0.0, 49.0 / 180, 49.0 / 180, 9.0 / 180}));
  }

  add(make("gl1", 2, {{0.5}}, {1.0}));

  {
    const double r3 = std::sqrt(3.0);
    add(make("gl2", 4,
             {{0.25, (3 - 2 * r3) / 12}, {(3 + 2 * r3) / 12, 0.25}},
             {0.5, 0.5}));
  }

  {
    const double r15 = std::sqrt(15.0);
    add(make("gl3", 6,
             {{5.0 / 36, 2.0 / 9 - r15 / 15, 5.0 / 36 - r15 / 30},
              {5.0 / 36 + r15 / 24, 2.0 / 9, 5.0 / 36 - r15 / 24},
              {5.0 / 36 + r15 / 30, 2.0 / 9 + r15 / 15, 5.0 / 36}},
             {5.0 / 18, 4.0 / 9, 5.0 / 18}));
  }

  add(make("lobatto3a", 4,
           {{0, 0, 0}, {5.0 / 24, 1.0 / 3, -1.0 / 24}, {1.0 / 6, 2.0 / 3, 1.0 / 6}},
           {1.0 / 6, 2.0 / 3, 1.0 / 6}));

  // Implicit trapezoidal rule written as the 2-stage Lobatto IIIA scheme.
  add(make("trapezoidal", 2, {{0, 0}, {0.5, 0.5}}, {0.5, 0.5}));

  // TR-BDF2 as a 3-stage ESDIRK with gamma = 2 - sqrt(2).
  {
    const double gamma = 2.0 - std::sqrt(2.0);
    const double d = gamma / 2;
    const double w = std::sqrt(2.0) / 4;
    add(make("trbdf2", 2, {{0, 0, 0}, {d, d, 0}, {w, w, d}}, {w, w, d}));
  }
  return reg;
}

const std::map<std::string, ButcherTableau, std::less<>>& registry() {
  static const auto reg = build_registry();
  return reg;
}

}  // namespace

bool ButcherTableau::is_explicit() const {
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = i; j < a.cols(); ++j) {
      if (a(i, j) != 0.0) return false;
    }
  }
  return true;
}

void ButcherTableau::validate() const {
  const auto s = b.size();
  if (s == 0 || a.rows() != s || a.cols() != s || c.size() != s) {
    throw std::invalid_argument("tableau '" + name + "': inconsistent dimensions");
  }
  if (order < 1) throw std::invalid_argument("tableau '" + name + "': order must be positive");
  for (Eigen::Index i = 0; i < s; ++i) {
    if (std::abs(a.row(i).sum() - c(i)) > 1e-12) {
      throw std::invalid_argument("tableau '" + name + "': row sum of A differs from c at stage " +
                                  std::to_string(i));
    }
  }
  if (std::abs(b.sum() - 1.0) > 1e-12) {
    throw std::invalid_argument("tableau '" + name + "': weights do not sum to one");
  }
}

SymplecticityResidual symplecticity_residual(const ButcherTableau& tab) {
  const auto s = static_cast<Eigen::Index>(tab.stages());
  SymplecticityResidual out;
  out.s = Eigen::MatrixXd::Zero(s, s);
  for (Eigen::Index i = 0; i < s; ++i) {
    for (Eigen::Index j = i; j < s; ++j) {
      const double v = tab.b(i) * tab.a(i, j) + tab.b(j) * tab.a(j, i) - tab.b(i) * tab.b(j);
      out.s(i, j) = v;
      out.s(j, i) = v;
      out.max_abs = std::max(out.max_abs, std::abs(v));
    }
  }
  return out;
}

bool is_symplectic(const ButcherTableau& tab, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("symplecticity tolerance must be positive");
  return symplecticity_residual(tab).max_abs <= tol;
}

std::vector<OrderConditionResidual> verify_order_conditions(const ButcherTableau& tab, int up_to_order) {
  if (up_to_order < 1 || up_to_order > kMaxTreeOrder) {
    throw std::invalid_argument("order-condition check supports orders 1.." + std::to_string(kMaxTreeOrder));
  }
  std::vector<OrderConditionResidual> out;
  for (const auto& t : tree_table()) {
    if (t.order > up_to_order) break;
    out.push_back({t.id, t.order, elementary_weight(tab.a, tab.b, t) - 1.0 / t.density});
  }
  return out;
}

bool satisfies_order(const ButcherTableau& tab, int p, double tol) {
  for (const auto& r : verify_order_conditions(tab, p)) {
    if (std::abs(r.residual) > tol) return false;
  }
  return true;
}

const ButcherTableau& tableau(std::string_view name) {
  const auto& reg = registry();
  auto it = reg.find(name);
  if (it == reg.end()) throw std::invalid_argument("unknown tableau '" + std::string(name) + "'");
  return it->second;
}

bool has_tableau(std::string_view name) { return registry().find(name) != registry().end(); }

std::vector<std::string> tableau_names() {
  std::vector<std::string> names;
  for (const auto& [k, v] : registry()) names.push_back(k);
  return names;
}

nlohmann::json tableau_to_json(const ButcherTableau& tab) {
  nlohmann::json doc;
  doc["name"] = tab.name;
  doc["order"] = tab.order;
  doc["c"] = std::vector<double>(tab.c.data(), tab.c.data() + tab.c.size());
  doc["b"] = std::vector<double>(tab.b.data(), tab.b.data() + tab.b.size());
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < tab.a.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(tab.a.cols()));
    for (Eigen::Index j = 0; j < tab.a.cols(); ++j) row[static_cast<std::size_t>(j)] = tab.a(i, j);
    rows.push_back(row);
  }
  doc["a"] = rows;
  return doc;
}

ButcherTableau tableau_from_json(const nlohmann::json& doc) {
  ButcherTableau t;
  t.name = doc.at("name").get<std::string>();
  t.order = doc.at("order").get<int>();
  const auto b = doc.at("b").get<std::vector<double>>();
  const auto c = doc.at("c").get<std::vector<double>>();
  const auto rows = doc.at("a").get<std::vector<std::vector<double>>>();
  const auto s = static_cast<Eigen::Index>(b.size());
  if (static_cast<Eigen::Index>(c.size()) != s || static_cast<Eigen::Index>(rows.size()) != s) {
    throw std::invalid_argument("tableau document: inconsistent dimensions");
  }
  t.b = Eigen::Map<const Eigen::VectorXd>(b.data(), s);
  t.c = Eigen::Map<const Eigen::VectorXd>(c.data(), s);
  t.a = Eigen::MatrixXd::Zero(s, s);
  for (Eigen::Index i = 0; i < s; ++i) {
    if (static_cast<Eigen::Index>(rows[i].size()) != s) {
      throw std::invalid_argument("tableau document: row " + std::to_string(i) + " has wrong length");
    }
    for (Eigen::Index j = 0; j < s; ++j) t.a(i, j) = rows[i][j];
  }
  t.validate();
  return t;
}

}  // namespace shotcheck
