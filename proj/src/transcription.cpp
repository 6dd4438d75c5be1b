#include "shotcheck/transcription.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "shotcheck/ad.hpp"
#include "shotcheck/bseries.hpp"

namespace shotcheck {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kDeg = std::numbers::pi / 180.0;
constexpr int kNx = VariableLayout::nx;
constexpr int kNu = VariableLayout::nu;

const char* const kStateNames[kNx] = {"m", "rx", "ry", "rz", "vx", "vy", "vz",
                                      "qx", "qy", "qz", "qw", "wx", "wy", "wz"};
const char* const kControlNames[kNu] = {"Tx", "Ty", "Tz"};

template <class T>
T lr_norm_t(const T* a, int m, double r) {
  using std::pow;
  int imax = 0;
  for (int i = 1; i < m; ++i) {
    if (primal(a[i]) > primal(a[imax])) imax = i;
  }
  const T big = a[imax];
  if (primal(big) <= 0.0) return T(0.0);
  T acc(0.0);
  for (int i = 0; i < m; ++i) acc += pow(a[i] / big, r);
  return big * pow(acc, 1.0 / r);
}

// Per-interval adversarial term -l_r(|x^(p+1)(Y_i, u, s)|) over the m stage
// states. Local variables: [u (3), s, Y_1, ..., Y_m]. Derivatives are built
// by the chain rule from per-sample Taylor/dual passes rather than by
// differentiating the whole block at once.
class AdversarialBlock final : public Block {
 public:
  AdversarialBlock(std::vector<int> vars, OdePtr ode, int stages, const ObjectiveSpec& spec)
      : Block("adv", std::move(vars), 1),
        ode_(std::move(ode)),
        m_(stages),
        p_(spec.p),
        r_(spec.r),
        scale_(spec.scale),
        exact_(spec.hessian == AdversarialHessian::exact) {
    const int n = kNu + 1 + m_ * kNx;
    for (int i = 0; i < n; ++i) jac_pattern.emplace_back(0, i);
    if (spec.hessian != AdversarialHessian::none) {
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) hess_pattern.emplace_back(i, j);
      }
    }
  }

  bool fixed_pattern() const override { return true; }

  void eval(std::span<const double> v, std::span<double> out) const override { out[0] = value<double>(v); }
  void eval(std::span<const J1> v, std::span<J1> out) const override { out[0] = value<J1>(v); }
  void eval(std::span<const J2>, std::span<J2>) const override {
    throw std::logic_error("adversarial block provides its Hessian directly");
  }

  void jacobian(std::span<const double> v, double* vals) const override {
    std::vector<Sample> samples(static_cast<std::size_t>(m_));
    for (int i = 0; i < m_; ++i) samples[static_cast<std::size_t>(i)] = first_order(v, i);
    const auto phi = outer(samples);
    std::fill(vals, vals + jac_pattern.size(), 0.0);
    for (int i = 0; i < m_; ++i) {
      const auto& smp = samples[static_cast<std::size_t>(i)];
      for (int c = 0; c < kSample; ++c) vals[local(i, c)] -= scale_ * phi.grad(i) * smp.grad_a(c);
    }
  }

  void hessian(std::span<const double> v, std::span<const double> w, double* vals) const override {
    const int n = static_cast<int>(vars().size());
    std::vector<Sample> samples(static_cast<std::size_t>(m_));
    for (int i = 0; i < m_; ++i) samples[static_cast<std::size_t>(i)] = second_order(v, i);
    const auto phi = outer(samples);
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
    std::vector<Eigen::VectorXd> g(static_cast<std::size_t>(m_), Eigen::VectorXd::Zero(n));
    for (int i = 0; i < m_; ++i) {
      const auto& smp = samples[static_cast<std::size_t>(i)];
      for (int c = 0; c < kSample; ++c) g[static_cast<std::size_t>(i)](local(i, c)) = smp.grad_a(c);
      if (smp.a <= 0.0) continue;
      for (int c = 0; c < kSample; ++c) {
        for (int d = 0; d < kSample; ++d) h(local(i, c), local(i, d)) += phi.grad(i) * smp.hess_a(c, d);
      }
    }
    for (int i = 0; i < m_; ++i) {
      for (int j = 0; j < m_; ++j) {
        h += phi.hess(i, j) * g[static_cast<std::size_t>(i)] * g[static_cast<std::size_t>(j)].transpose();
      }
    }
    for (std::size_t e = 0; e < hess_pattern.size(); ++e) {
      vals[e] = -scale_ * w[0] * h(hess_pattern[e].first, hess_pattern[e].second);
    }
  }

 private:
  static constexpr int kSample = kNu + 1 + kNx;  // (u, s, Y_i)

  struct Sample {
    double a = 0.0;
    Eigen::VectorXd grad_a;
    Eigen::MatrixXd hess_a;
  };
  struct Outer {
    Eigen::VectorXd grad;
    Eigen::MatrixXd hess;
  };

  int local(int stage, int c) const { return c < kNu + 1 ? c : kNu + 1 + stage * kNx + (c - kNu - 1); }

  template <class T>
  std::vector<T> sample_vars(std::span<const T> v, int stage) const {
    std::vector<T> out(kSample);
    for (int c = 0; c < kSample; ++c) out[static_cast<std::size_t>(c)] = v[static_cast<std::size_t>(local(stage, c))];
    return out;
  }

  template <class T>
  std::vector<T> derivative(const std::vector<T>& z) const {
    std::span<const T> zs(z);
    auto chain = time_derivative_chain<T>(*ode_, zs.subspan(kNu + 1, kNx), zs.subspan(0, kNu), z[kNu], p_ + 1);
    return std::move(chain[static_cast<std::size_t>(p_)]);
  }

  template <class T>
  T value(std::span<const T> v) const {
    using std::sqrt;
    std::vector<T> a(static_cast<std::size_t>(m_));
    for (int i = 0; i < m_; ++i) {
      const auto d = derivative<T>(sample_vars<T>(v, i));
      T acc(0.0);
      for (const auto& x : d) acc += x * x;
      a[static_cast<std::size_t>(i)] = sqrt(acc);
    }
    return -scale_ * lr_norm_t<T>(a.data(), m_, r_);
  }

  Eigen::VectorXd primal_derivative(std::span<const double> v, int stage) const {
    const auto d = derivative<double>(sample_vars<double>(v, stage));
    return Eigen::Map<const Eigen::VectorXd>(d.data(), kNx);
  }

  Eigen::MatrixXd derivative_jacobian(std::span<const double> v, int stage) const {
    const auto z = sample_vars<double>(v, stage);
    std::vector<J1> zj(z.begin(), z.end());
    Eigen::MatrixXd jac(kNx, kSample);
    for (int c = 0; c < kSample; ++c) {
      zj[static_cast<std::size_t>(c)].d = 1.0;
      const auto d = derivative<J1>(zj);
      for (int a = 0; a < kNx; ++a) jac(a, c) = d[static_cast<std::size_t>(a)].d;
      zj[static_cast<std::size_t>(c)].d = 0.0;
    }
    return jac;
  }

  Sample first_order(std::span<const double> v, int stage) const {
    Sample s;
    const Eigen::VectorXd d = primal_derivative(v, stage);
    s.a = d.norm();
    s.grad_a = Eigen::VectorXd::Zero(kSample);
    if (s.a > 0.0) s.grad_a = derivative_jacobian(v, stage).transpose() * d / s.a;
    return s;
  }

  Sample second_order(std::span<const double> v, int stage) const {
    Sample s;
    const Eigen::VectorXd d = primal_derivative(v, stage);
    s.a = d.norm();
    s.grad_a = Eigen::VectorXd::Zero(kSample);
    s.hess_a = Eigen::MatrixXd::Zero(kSample, kSample);
    if (s.a <= 0.0) return s;
    const Eigen::MatrixXd jac = derivative_jacobian(v, stage);
    s.grad_a = jac.transpose() * d / s.a;
    Eigen::MatrixXd curv = Eigen::MatrixXd::Zero(kSample, kSample);
    if (exact_) curv = curvature(v, stage, d);
    s.hess_a = (jac.transpose() * jac + curv) / s.a - s.grad_a * s.grad_a.transpose() / s.a;
    return s;
  }

  // sum_c d_c Hess(d_c) over the sample variables, one J2 pass per pair.
  Eigen::MatrixXd curvature(std::span<const double> v, int stage, const Eigen::VectorXd& d) const {
    const auto z = sample_vars<double>(v, stage);
    std::vector<J2> zj(z.size());
    for (std::size_t c = 0; c < z.size(); ++c) zj[c] = J2(z[c]);
    Eigen::MatrixXd curv(kSample, kSample);
    for (int i = 0; i < kSample; ++i) {
      for (int j = 0; j <= i; ++j) {
        zj[static_cast<std::size_t>(i)].d.v = 1.0;
        zj[static_cast<std::size_t>(j)].v.d = 1.0;
        const auto dd = derivative<J2>(zj);
        double acc = 0.0;
        for (int a = 0; a < kNx; ++a) acc += d(a) * dd[static_cast<std::size_t>(a)].d.d;
        curv(i, j) = curv(j, i) = acc;
        zj[static_cast<std::size_t>(i)].d.v = 0.0;
        zj[static_cast<std::size_t>(j)].v.d = 0.0;
      }
    }
    return curv;
  }

  // Gradient and Hessian of l_r with respect to the samples a_1..a_m.
  Outer outer(const std::vector<Sample>& samples) const {
    Outer o;
    o.grad = Eigen::VectorXd::Zero(m_);
    o.hess = Eigen::MatrixXd::Zero(m_, m_);
    std::vector<double> a(static_cast<std::size_t>(m_));
    for (int i = 0; i < m_; ++i) a[static_cast<std::size_t>(i)] = samples[static_cast<std::size_t>(i)].a;
    const double phi = lr_norm(a, r_);
    if (phi <= 0.0) return o;
    Eigen::VectorXd t(m_);
    for (int i = 0; i < m_; ++i) t(i) = a[static_cast<std::size_t>(i)] / phi;
    for (int i = 0; i < m_; ++i) o.grad(i) = std::pow(t(i), r_ - 1.0);
    for (int i = 0; i < m_; ++i) {
      for (int j = 0; j < m_; ++j) {
        double hij = -o.grad(i) * o.grad(j);
        if (i == j && t(i) > 0.0) hij += std::pow(t(i), r_ - 2.0);
        o.hess(i, j) = (r_ - 1.0) / phi * hij;
      }
    }
    return o;
  }

  OdePtr ode_;
  int m_;
  int p_;
  double r_;
  double scale_;
  bool exact_;
};

std::string lower_dashed(std::string s) {
  for (char& c : s) {
    if (c == '_') c = '-';
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return s;
}

}  // namespace

std::string objective_name(ObjectiveKind kind) {
  switch (kind) {
    case ObjectiveKind::min_fuel:
      return "min-fuel";
    case ObjectiveKind::max_fuel:
      return "max-fuel";
    case ObjectiveKind::adversarial_lr:
      return "adversarial";
    case ObjectiveKind::feasibility:
      return "feasibility";
  }
  return "unknown";
}

ObjectiveKind parse_objective(const std::string& name) {
  const std::string n = lower_dashed(name);
  if (n == "min-fuel") return ObjectiveKind::min_fuel;
  if (n == "max-fuel") return ObjectiveKind::max_fuel;
  if (n == "adversarial" || n == "adversarial-lr") return ObjectiveKind::adversarial_lr;
  if (n == "feasibility") return ObjectiveKind::feasibility;
  throw std::invalid_argument("unknown objective '" + name + "' (expected min-fuel, max-fuel, adversarial, feasibility)");
}

double lr_norm(std::span<const double> a, double r) {
  if (a.empty()) return 0.0;
  if (!(r >= 1.0)) throw std::invalid_argument("l_r norm needs r >= 1");
  for (double x : a) {
    if (!(x >= 0.0)) throw std::invalid_argument("l_r samples must be nonnegative");
  }
  return lr_norm_t<double>(a.data(), static_cast<int>(a.size()), r);
}

double max_norm(std::span<const double> a) {
  double m = 0.0;
  for (double x : a) m = std::max(m, x);
  return m;
}

Transcription::Transcription(const OneStepMap& map, const ObjectiveSpec& objective, const ProblemConfig& config)
    : map_(&map), objective_(objective), config_(config) {
  config_.validate();
  if (objective_.kind == ObjectiveKind::adversarial_lr) {
    if (map.name != "gl3") {
      throw UnsupportedCombination("the adversarial objective samples GL3 stage states; method '" + map.name +
                                   "' has none");
    }
    if (objective_.p < 1 || objective_.p + 1 > 5) {
      throw UnsupportedCombination("adversarial order p = " + std::to_string(objective_.p) +
                                   " needs x^(p+1) beyond the fifth derivative");
    }
    if (!(objective_.r >= 1.0)) throw std::invalid_argument("adversarial exponent r must be >= 1");
    if (!(objective_.scale > 0.0)) throw std::invalid_argument("adversarial objective scale must be positive");
  }
  if (config_.transcription.project_quaternion && !map.supports_projection()) {
    throw UnsupportedCombination("quaternion projection is not defined for method '" + map.name + "'");
  }
  layout_.nodes = config_.transcription.nodes;
  layout_.lifted = map.lifted_blocks();
  ode_ = make_rocket_ode(config_.rocket);
  h_ = 1.0 / (layout_.nodes - 1);

  const int n = layout_.total();
  nlp_.x_lo = Eigen::VectorXd::Constant(n, -kInf);
  nlp_.x_hi = Eigen::VectorXd::Constant(n, kInf);
  nlp_.var_names.resize(static_cast<std::size_t>(n));
  for (int k = 0; k < layout_.nodes; ++k) {
    for (int i = 0; i < kNx; ++i) {
      nlp_.var_names[static_cast<std::size_t>(layout_.x(k, i))] = "x" + std::to_string(k) + "." + kStateNames[i];
    }
  }
  for (int k = 0; k + 1 < layout_.nodes; ++k) {
    for (int i = 0; i < kNu; ++i) {
      nlp_.var_names[static_cast<std::size_t>(layout_.u(k, i))] = "u" + std::to_string(k) + "." + kControlNames[i];
    }
    for (int b = 0; b < layout_.lifted; ++b) {
      for (int i = 0; i < kNx; ++i) {
        nlp_.var_names[static_cast<std::size_t>(layout_.y(k, b, i))] =
            "y" + std::to_string(k) + "." + std::to_string(b) + "." + kStateNames[i];
      }
    }
  }
  nlp_.var_names[static_cast<std::size_t>(layout_.s())] = "s";

  set_bounds();
  add_dynamics();
  add_path();
  add_objective();
  nlp_.x_init = initial_guess();
  nlp_.finalize(nlp_.x_init);
}

void Transcription::set_bounds() {
  const auto& lim = config_.limits;
  const auto& bc = config_.boundary;
  const int last = layout_.nodes - 1;
  auto fix = [&](int idx, double v) { nlp_.x_lo(idx) = nlp_.x_hi(idx) = v; };

  // State boxes implied by the path limits (speed, rate, unit attitude,
  // reachable radius); stage states get a 1.5x margin. They keep the
  // penalty subproblems bounded when defects are still violated.
  const double radius = bc.r_init.norm() + bc.r_final.norm() + lim.speed_max * lim.s_max;
  auto box = [&](auto index, double margin) {
    nlp_.x_lo(index(kMass)) = lim.m_dry / margin;
    nlp_.x_hi(index(kMass)) = bc.m_wet * margin;
    for (int i = 0; i < 3; ++i) {
      nlp_.x_lo(index(kPos + i)) = -radius * margin;
      nlp_.x_hi(index(kPos + i)) = radius * margin;
      nlp_.x_lo(index(kVel + i)) = -lim.speed_max * margin;
      nlp_.x_hi(index(kVel + i)) = lim.speed_max * margin;
      nlp_.x_lo(index(kOmega + i)) = -lim.omega_max_deg * kDeg * margin;
      nlp_.x_hi(index(kOmega + i)) = lim.omega_max_deg * kDeg * margin;
    }
    for (int i = 0; i < 4; ++i) {
      nlp_.x_lo(index(kQuat + i)) = -1.1;
      nlp_.x_hi(index(kQuat + i)) = 1.1;
    }
  };
  for (int k = 1; k <= last; ++k) {
    box([&](std::size_t i) { return layout_.x(k, static_cast<int>(i)); }, 1.0);
    if (k < last) nlp_.x_lo(layout_.x(k, kPos)) = 0.0;
  }
  for (int k = 0; k < last; ++k) {
    for (int b = 0; b < layout_.lifted; ++b) {
      box([&](std::size_t i) { return layout_.y(k, b, static_cast<int>(i)); }, 1.5);
    }
  }
  const Eigen::VectorXd x0 = config_.initial_state();
  for (int i = 0; i < kNx; ++i) fix(layout_.x(0, i), x0(i));
  for (int i = 0; i < 3; ++i) {
    fix(layout_.x(last, kPos + i), bc.r_final(i));
    fix(layout_.x(last, kVel + i), bc.v_final(i));
    fix(layout_.x(last, kQuat + i), 0.0);
    fix(layout_.x(last, kOmega + i), 0.0);
  }
  fix(layout_.x(last, kQuat + 3), 1.0);
  for (int k = 0; k < last; ++k) {
    nlp_.x_lo(layout_.u(k, 0)) = 0.0;
    nlp_.x_hi(layout_.u(k, 0)) = lim.thrust_max;
    for (int i = 1; i < kNu; ++i) {
      nlp_.x_lo(layout_.u(k, i)) = -lim.thrust_max;
      nlp_.x_hi(layout_.u(k, i)) = lim.thrust_max;
    }
  }
  nlp_.x_lo(layout_.s()) = lim.s_min;
  nlp_.x_hi(layout_.s()) = lim.s_max;
}

void Transcription::add_dynamics() {
  const OdePtr ode = ode_;
  const double h = h_;
  const bool project = config_.transcription.project_quaternion;
  const int last = layout_.nodes - 1;

  auto one_step_block = [&](const OneStepMap* m, int k) {
    const int lifted = m->lifted_blocks();
    std::vector<int> vars;
    for (int i = 0; i < kNx; ++i) vars.push_back(layout_.x(k, i));
    for (int i = 0; i < kNu; ++i) vars.push_back(layout_.u(k, i));
    vars.push_back(layout_.s());
    for (int b = 0; b < lifted; ++b) {
      for (int i = 0; i < kNx; ++i) vars.push_back(layout_.y(k, b, i));
    }
    for (int i = 0; i < kNx; ++i) vars.push_back(layout_.x(k + 1, i));
    const int rows = (lifted + 1) * kNx;
    std::string sig = "dyn:" + m->name + (project ? ":proj" : "");
    nlp_.add_constraint(make_block(sig, std::move(vars), rows,
                                   [m, ode, h, project](auto v, auto out) {
                                     using T = typename decltype(out)::value_type;
                                     interval_residual<T>(*m, *ode, h, v.subspan(0, kNx), v.subspan(kNx, kNu),
                                                          v[kNx + kNu], v.subspan(kNx + kNu + 1), out, project);
                                   }),
                        0.0, 0.0, "dynamics");
  };

  if (map_->kind != MapKind::bdf) {
    for (int k = 0; k < last; ++k) one_step_block(map_, k);
    return;
  }
  const int steps = map_->bdf_steps;
  const OneStepMap* startup = &method(map_->startup);
  for (int k = 0; k < last; ++k) {
    if (k < steps - 1) {
      one_step_block(startup, k);
      continue;
    }
    std::vector<int> vars;
    for (int j = k - steps + 1; j <= k; ++j) {
      for (int i = 0; i < kNx; ++i) vars.push_back(layout_.x(j, i));
    }
    for (int i = 0; i < kNu; ++i) vars.push_back(layout_.u(k, i));
    vars.push_back(layout_.s());
    for (int i = 0; i < kNx; ++i) vars.push_back(layout_.x(k + 1, i));
    const int hist = steps * kNx;
    nlp_.add_constraint(make_block("dyn:" + map_->name, std::move(vars), kNx,
                                   [steps, ode, h, hist](auto v, auto out) {
                                     using T = typename decltype(out)::value_type;
                                     bdf_residual<T>(steps, *ode, h, v.subspan(0, hist), v.subspan(hist, kNu),
                                                     v[hist + kNu], v.subspan(hist + kNu + 1, kNx), out);
                                   }),
                        0.0, 0.0, "dynamics");
  }
}

void Transcription::add_path() {
  const auto& lim = config_.limits;
  const double tan2 = std::pow(std::tan(lim.glide_slope_deg * kDeg), 2);
  const double sin2 = std::pow(std::sin(0.5 * lim.tilt_max_deg * kDeg), 2);
  const double w2 = std::pow(lim.omega_max_deg * kDeg, 2);
  const double v2 = lim.speed_max * lim.speed_max;
  const double cos2 = std::pow(std::cos(lim.pointing_max_deg * kDeg), 2);
  const double tmax2 = lim.thrust_max * lim.thrust_max;
  const double tmin2 = lim.thrust_min * lim.thrust_min;

  // Squared forms of glide slope, tilt, rate and speed; r_x >= 0 is a bound.
  auto state_rows = [tan2, sin2, w2, v2](auto v, auto out) {
    // v = [r(3), v(3), qy, qz, w(3)]
    out[0] = v[1] * v[1] + v[2] * v[2] - tan2 * (v[0] * v[0]);
    out[1] = v[6] * v[6] + v[7] * v[7] - sin2;
    out[2] = v[8] * v[8] + v[9] * v[9] + v[10] * v[10] - w2;
    out[3] = v[3] * v[3] + v[4] * v[4] + v[5] * v[5] - v2;
  };
  auto state_vars = [](auto index) {
    std::vector<int> vars;
    for (int i = 0; i < 6; ++i) vars.push_back(index(static_cast<int>(kPos) + i));
    vars.push_back(index(static_cast<int>(kQuat) + 1));
    vars.push_back(index(static_cast<int>(kQuat) + 2));
    for (int i = 0; i < 3; ++i) vars.push_back(index(static_cast<int>(kOmega) + i));
    return vars;
  };
  for (int k = 1; k + 1 < layout_.nodes; ++k) {
    nlp_.add_constraint(make_block("path:state", state_vars([&](int i) { return layout_.x(k, i); }), 4, state_rows),
                        -kInf, 0.0, "path");
  }
  if (config_.transcription.stage_path_constraints) {
    for (int k = 0; k + 1 < layout_.nodes; ++k) {
      for (int b = 0; b < layout_.lifted; ++b) {
        nlp_.add_constraint(
            make_block("path:state", state_vars([&](int i) { return layout_.y(k, b, i); }), 4, state_rows), -kInf,
            0.0, "path");
      }
    }
  }
  for (int k = 0; k + 1 < layout_.nodes; ++k) {
    std::vector<int> vars{layout_.u(k, 0), layout_.u(k, 1), layout_.u(k, 2)};
    nlp_.add_constraint(make_block("path:control", std::move(vars), 3,
                                   [tmax2, tmin2, cos2](auto v, auto out) {
                                     auto t2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
                                     out[0] = t2 - tmax2;
                                     out[1] = cos2 * t2 - v[0] * v[0];
                                     out[2] = tmin2 - t2;
                                   }),
                        -kInf, 0.0, "path");
  }
}

void Transcription::add_objective() {
  const int mass_n = layout_.x(layout_.nodes - 1, kMass);
  switch (objective_.kind) {
    case ObjectiveKind::min_fuel:
      nlp_.add_objective(make_block("obj:min", {mass_n}, 1, [](auto v, auto out) { out[0] = -v[0]; }));
      break;
    case ObjectiveKind::max_fuel:
      nlp_.add_objective(make_block("obj:max", {mass_n}, 1, [](auto v, auto out) { out[0] = v[0]; }));
      break;
    case ObjectiveKind::feasibility:
      break;
    case ObjectiveKind::adversarial_lr:
      for (int k = 0; k + 1 < layout_.nodes; ++k) {
        std::vector<int> vars{layout_.u(k, 0), layout_.u(k, 1), layout_.u(k, 2), layout_.s()};
        for (int b = 0; b < layout_.lifted; ++b) {
          for (int i = 0; i < kNx; ++i) vars.push_back(layout_.y(k, b, i));
        }
        nlp_.add_objective(std::make_unique<AdversarialBlock>(std::move(vars), ode_, layout_.lifted, objective_));
      }
      break;
  }
}

Eigen::VectorXd Transcription::pack(const Trajectory& t) const {
  Eigen::VectorXd w(layout_.total());
  for (int k = 0; k < layout_.nodes; ++k) w.segment(layout_.x(k), kNx) = t.x.col(k);
  for (int k = 0; k + 1 < layout_.nodes; ++k) {
    w.segment(layout_.u(k), kNu) = t.u.col(k);
    for (int b = 0; b < layout_.lifted; ++b) w.segment(layout_.y(k, b), kNx) = t.y.col(k * layout_.lifted + b);
  }
  w(layout_.s()) = t.s;
  return w;
}

Trajectory Transcription::unpack(const Eigen::VectorXd& w) const {
  if (w.size() != layout_.total()) throw std::invalid_argument("decision vector has the wrong length");
  Trajectory t;
  const int intervals = layout_.nodes - 1;
  t.x.resize(kNx, layout_.nodes);
  t.u.resize(kNu, intervals);
  t.y.resize(kNx, intervals * layout_.lifted);
  for (int k = 0; k < layout_.nodes; ++k) t.x.col(k) = w.segment(layout_.x(k), kNx);
  for (int k = 0; k < intervals; ++k) {
    t.u.col(k) = w.segment(layout_.u(k), kNu);
    for (int b = 0; b < layout_.lifted; ++b) t.y.col(k * layout_.lifted + b) = w.segment(layout_.y(k, b), kNx);
  }
  t.s = w(layout_.s());
  return t;
}

Eigen::VectorXd Transcription::initial_guess() const {
  const auto& bc = config_.boundary;
  const auto& lim = config_.limits;
  const int last = layout_.nodes - 1;
  Trajectory t;
  t.x = Eigen::MatrixXd::Zero(kNx, layout_.nodes);
  t.u.resize(kNu, last);
  t.y.resize(kNx, last * layout_.lifted);
  for (int k = 0; k <= last; ++k) {
    const double tau = static_cast<double>(k) / last;
    t.x(kMass, k) = (1.0 - tau) * bc.m_wet + tau * lim.m_dry;
    t.x.col(k).segment<3>(kPos) = (1.0 - tau) * bc.r_init + tau * bc.r_final;
    t.x.col(k).segment<3>(kVel) = (1.0 - tau) * bc.v_init + tau * bc.v_final;
    t.x(kQuat + 3, k) = 1.0;
  }
  for (int k = 0; k < last; ++k) {
    Eigen::Vector3d thrust = -t.x(kMass, k) * config_.rocket.g_i;
    const double norm = thrust.norm();
    if (norm > 0.0) {
      thrust *= std::clamp(norm, lim.thrust_min, lim.thrust_max) / norm;
    } else {
      thrust = Eigen::Vector3d(lim.thrust_min, 0.0, 0.0);
    }
    t.u.col(k) = thrust;
  }
  Eigen::VectorXd c;
  if (map_->kind == MapKind::lifted_rk) c = map_->tableau->c;
  if (map_->kind == MapKind::tr_bdf2) c = Eigen::VectorXd::Constant(1, 2.0 - std::sqrt(2.0));
  for (int k = 0; k < last; ++k) {
    for (int b = 0; b < layout_.lifted; ++b) {
      t.y.col(k * layout_.lifted + b) = (1.0 - c(b)) * t.x.col(k) + c(b) * t.x.col(k + 1);
    }
  }
  t.s = 0.5 * (lim.s_min + lim.s_max);
  return pack(t);
}

Eigen::VectorXd Transcription::dynamics_residual(const Eigen::VectorXd& w) const {
  const Eigen::VectorXd c = nlp_.constraints(w);
  std::vector<double> rows;
  for (int i = 0; i < c.size(); ++i) {
    if (nlp_.row_kinds[static_cast<std::size_t>(i)] == "dynamics") rows.push_back(c(i));
  }
  return Eigen::Map<Eigen::VectorXd>(rows.data(), static_cast<Eigen::Index>(rows.size()));
}

double Transcription::max_violation(const Eigen::VectorXd& w) const {
  const Eigen::VectorXd c = nlp_.constraints(w);
  double v = 0.0;
  for (int i = 0; i < c.size(); ++i) v = std::max({v, nlp_.g_lo(i) - c(i), c(i) - nlp_.g_hi(i)});
  for (int i = 0; i < w.size(); ++i) v = std::max({v, nlp_.x_lo(i) - w(i), w(i) - nlp_.x_hi(i)});
  return v;
}

std::unique_ptr<Transcription> build_transcription(const OneStepMap& map, const ObjectiveSpec& objective,
                                                   const ProblemConfig& config) {
  return std::make_unique<Transcription>(map, objective, config);
}

Eigen::VectorXd eval_path_constraints(const Eigen::VectorXd& x, const Eigen::Vector3d& u, double s,
                                      const ProblemConfig& config) {
  if (x.size() != kNx) throw std::invalid_argument("state must have 14 components");
  const auto& lim = config.limits;
  Eigen::VectorXd g(kPathRows);
  const double thrust = u.norm();
  g(0) = lim.m_dry - x(kMass);
  g(1) = x.segment<2>(kPos + 1).norm() - x(kPos) * std::tan(lim.glide_slope_deg * kDeg);
  g(2) = x.segment<2>(kQuat + 1).norm() - std::sin(0.5 * lim.tilt_max_deg * kDeg);
  g(3) = x.segment<3>(kOmega).norm() - lim.omega_max_deg * kDeg;
  g(4) = thrust - lim.thrust_max;
  g(5) = std::cos(lim.pointing_max_deg * kDeg) * thrust - u(0);
  g(6) = x.segment<3>(kVel).norm() - lim.speed_max;
  g(7) = lim.thrust_min - thrust;
  g(8) = s - lim.s_max;
  g(9) = lim.s_min - s;
  return g;
}

const std::vector<std::string>& path_constraint_names() {
  static const std::vector<std::string> names{"dry_mass", "glide_slope", "tilt",       "angular_rate", "max_thrust",
                                              "pointing", "speed",       "min_thrust", "max_dilation", "min_dilation"};
  return names;
}

AdversarialValue eval_adversarial_objective(const Eigen::MatrixXd& x, const Eigen::MatrixXd& u, double s,
                                            const ObjectiveSpec& spec, const ProblemConfig& config) {
  if (spec.kind != ObjectiveKind::adversarial_lr) throw std::invalid_argument("objective spec is not adversarial");
  if (spec.p < 1 || spec.p + 1 > 5) throw UnsupportedCombination("adversarial order needs p + 1 <= 5");
  const int intervals = static_cast<int>(u.cols());
  if (x.rows() != kNx || x.cols() != intervals + 1) throw std::invalid_argument("X must be 14 x (intervals + 1)");
  const OneStepMap& gl3 = method("gl3");
  const OdePtr ode = make_rocket_ode(config.rocket);
  const double h = 1.0 / intervals;
  AdversarialValue out;
  out.samples.resize(gl3.stages, intervals);
  for (int k = 0; k < intervals; ++k) {
    const StepResult st = step(gl3, *ode, x.col(k), u.col(k), h, s);
    std::vector<double> a(static_cast<std::size_t>(gl3.stages));
    for (int i = 0; i < gl3.stages; ++i) {
      const Eigen::VectorXd y = st.stages.row(i).transpose();
      const auto d = time_derivative_chain<double>(*ode, std::span<const double>(y.data(), kNx),
                                                   std::span<const double>(u.col(k).data(), kNu), s, spec.p + 1);
      const Eigen::Map<const Eigen::VectorXd> dv(d[static_cast<std::size_t>(spec.p)].data(), kNx);
      if (!dv.allFinite()) throw NonFiniteDerivativeChain("non-finite derivative chain on interval " + std::to_string(k));
      a[static_cast<std::size_t>(i)] = dv.norm();
      out.samples(i, k) = a[static_cast<std::size_t>(i)];
    }
    out.j_r += lr_norm(a, spec.r);
    out.j_inf += max_norm(a);
  }
  return out;
}

}  // namespace shotcheck
