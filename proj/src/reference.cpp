#include "shotcheck/reference.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace shotcheck {
namespace {

constexpr double c2 = 0.526001519587677318785587544488e-01;
constexpr double c3 = 0.789002279381515978178381316732e-01;
constexpr double c4 = 0.118350341907227396726757197510e+00;
constexpr double c5 = 0.281649658092772603273242802490e+00;
constexpr double c6 = 0.333333333333333333333333333333e+00;
constexpr double c7 = 0.25e+00;
constexpr double c8 = 0.307692307692307692307692307692e+00;
constexpr double c9 = 0.651282051282051282051282051282e+00;
constexpr double c10 = 0.6e+00;
constexpr double c11 = 0.857142857142857142857142857142e+00;

constexpr double b1 = 5.42937341165687622380535766363e-2;
constexpr double b6 = 4.45031289275240888144113950566e0;
constexpr double b7 = 1.89151789931450038304281599044e0;
constexpr double b8 = -5.8012039600105847814672114227e0;
constexpr double b9 = 3.1116436695781989440891606237e-1;
constexpr double b10 = -1.52160949662516078556178806805e-1;
constexpr double b11 = 2.01365400804030348374776537501e-1;
constexpr double b12 = 4.47106157277725905176885569043e-2;

constexpr double a21 = 5.26001519587677318785587544488e-2;
constexpr double a31 = 1.97250569845378994544595329183e-2;
constexpr double a32 = 5.91751709536136983633785987549e-2;
constexpr double a41 = 2.95875854768068491816892993775e-2;
constexpr double a43 = 8.87627564304205475450678981324e-2;
constexpr double a51 = 2.41365134159266685502369798665e-1;
constexpr double a53 = -8.84549479328286085344864962717e-1;
constexpr double a54 = 9.24834003261792003115737966543e-1;
constexpr double a61 = 3.7037037037037037037037037037e-2;
constexpr double a64 = 1.70828608729473871279604482173e-1;
constexpr double a65 = 1.25467687566822425016691814123e-1;
constexpr double a71 = 3.7109375e-2;
constexpr double a74 = 1.70252211019544039314978060272e-1;
constexpr double a75 = 6.02165389804559606850219397283e-2;
constexpr double a76 = -1.7578125e-2;
constexpr double a81 = 3.70920001185047927108779319836e-2;
constexpr double a84 = 1.70383925712239993810214054705e-1;
constexpr double a85 = 1.07262030446373284651809199168e-1;
constexpr double a86 = -1.53194377486244017527936158236e-2;
constexpr double a87 = 8.27378916381402288758473766002e-3;
constexpr double a91 = 6.24110958716075717114429577812e-1;
constexpr double a94 = -3.36089262944694129406857109825e0;
constexpr double a95 = -8.68219346841726006818189891453e-1;
constexpr double a96 = 2.75920996994467083049415600797e1;
constexpr double a97 = 2.01540675504778934086186788979e1;
constexpr double a98 = -4.34898841810699588477366255144e1;
constexpr double a101 = 4.77662536438264365890433908527e-1;
constexpr double a104 = -2.48811461997166764192642586468e0;
constexpr double a105 = -5.90290826836842996371446475743e-1;
constexpr double a106 = 2.12300514481811942347288949897e1;
constexpr double a107 = 1.52792336328824235832596922938e1;
constexpr double a108 = -3.32882109689848629194453265587e1;
constexpr double a109 = -2.03312017085086261358222928593e-2;
constexpr double a111 = -9.3714243008598732571704021658e-1;
constexpr double a114 = 5.18637242884406370830023853209e0;
constexpr double a115 = 1.09143734899672957818500254654e0;
constexpr double a116 = -8.14978701074692612513997267357e0;
constexpr double a117 = -1.85200656599969598641566180701e1;
constexpr double a118 = 2.27394870993505042818970056734e1;
constexpr double a119 = 2.49360555267965238987089396762e0;
constexpr double a1110 = -3.0467644718982195003823669022e0;
constexpr double a121 = 2.27331014751653820792359768449e0;
constexpr double a124 = -1.05344954667372501984066689879e1;
constexpr double a125 = -2.00087205822486249909675718444e0;
constexpr double a126 = -1.79589318631187989172765950534e1;
constexpr double a127 = 2.79488845294199600508499808837e1;
constexpr double a128 = -2.85899827713502369474065508674e0;
constexpr double a129 = -8.87285693353062954433549289258e0;
constexpr double a1210 = 1.23605671757943030647266201528e1;
constexpr double a1211 = 6.43392746015763530355970484046e-1;

// Embedded third- and fifth-order error weights.
constexpr double bhh1 = 0.244094488188976377952755905512e+00;
constexpr double bhh2 = 0.733846688281611857341361741547e+00;
constexpr double bhh3 = 0.220588235294117647058823529412e-01;
constexpr double er1 = 0.1312004499419488073250102996e-01;
constexpr double er6 = -0.1225156446376204440720569753e+01;
constexpr double er7 = -0.4957589496572501915214079952e+00;
constexpr double er8 = 0.1664377182454986536961530415e+01;
constexpr double er9 = -0.3503288487499736816886487290e+00;
constexpr double er10 = 0.3341791187130174790297318841e+00;
constexpr double er11 = 0.8192320648511571246570742613e-01;
constexpr double er12 = -0.2235530786388629525884427845e-01;

constexpr double kFac1 = 1.0 / 3.0;  // max step decrease 3x
constexpr double kFac2 = 6.0;        // max step increase 6x
constexpr double kSafe = 0.9;

class Stepper {
 public:
  Stepper(const ControlledOde& ode, const Eigen::VectorXd& u, const ReferenceOptions& opts, ReferenceStats& stats)
      : ode_(ode), u_(u), opts_(opts), stats_(stats) {}

  Eigen::VectorXd f(const Eigen::VectorXd& x) {
    ++stats_.evaluations;
    return ode_(x, u_);
  }

  double scale(double y0, double y1) const { return opts_.atol + opts_.rtol * std::max(std::abs(y0), std::abs(y1)); }

  // One DOP853 trial step from (y, k1). Returns the scaled error norm.
  double trial(const Eigen::VectorXd& y, const Eigen::VectorXd& k1, double h, Eigen::VectorXd& y_new) {
    const Eigen::VectorXd k2 = f(y + h * a21 * k1);
    const Eigen::VectorXd k3 = f(y + h * (a31 * k1 + a32 * k2));
    const Eigen::VectorXd k4 = f(y + h * (a41 * k1 + a43 * k3));
    const Eigen::VectorXd k5 = f(y + h * (a51 * k1 + a53 * k3 + a54 * k4));
    const Eigen::VectorXd k6 = f(y + h * (a61 * k1 + a64 * k4 + a65 * k5));
    const Eigen::VectorXd k7 = f(y + h * (a71 * k1 + a74 * k4 + a75 * k5 + a76 * k6));
    const Eigen::VectorXd k8 = f(y + h * (a81 * k1 + a84 * k4 + a85 * k5 + a86 * k6 + a87 * k7));
    const Eigen::VectorXd k9 = f(y + h * (a91 * k1 + a94 * k4 + a95 * k5 + a96 * k6 + a97 * k7 + a98 * k8));
    const Eigen::VectorXd k10 =
        f(y + h * (a101 * k1 + a104 * k4 + a105 * k5 + a106 * k6 + a107 * k7 + a108 * k8 + a109 * k9));
    const Eigen::VectorXd k11 = f(y + h * (a111 * k1 + a114 * k4 + a115 * k5 + a116 * k6 + a117 * k7 +
                                           a118 * k8 + a119 * k9 + a1110 * k10));
    const Eigen::VectorXd k12 = f(y + h * (a121 * k1 + a124 * k4 + a125 * k5 + a126 * k6 + a127 * k7 +
                                           a128 * k8 + a129 * k9 + a1210 * k10 + a1211 * k11));
    const Eigen::VectorXd inc =
        b1 * k1 + b6 * k6 + b7 * k7 + b8 * k8 + b9 * k9 + b10 * k10 + b11 * k11 + b12 * k12;
    y_new = y + h * inc;

    double err = 0.0;
    double err2 = 0.0;
    const auto n = y.size();
    for (Eigen::Index i = 0; i < n; ++i) {
      const double sk = 1.0 / scale(y(i), y_new(i));
      double e = (inc(i) - bhh1 * k1(i) - bhh2 * k9(i) - bhh3 * k12(i)) * sk;
      err2 += e * e;
      e = (er1 * k1(i) + er6 * k6(i) + er7 * k7(i) + er8 * k8(i) + er9 * k9(i) + er10 * k10(i) + er11 * k11(i) +
           er12 * k12(i)) * sk;
      err += e * e;
    }
    double deno = err + 0.01 * err2;
    if (deno <= 0.0) deno = 1.0;
    return std::abs(h) * err * std::sqrt(1.0 / (deno * static_cast<double>(n)));
  }

  double initial_step(const Eigen::VectorXd& y, const Eigen::VectorXd& f0, double hmax) {
    double dnf = 0.0;
    double dny = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double sk = scale(y(i), y(i));
      dnf += (f0(i) / sk) * (f0(i) / sk);
      dny += (y(i) / sk) * (y(i) / sk);
    }
    double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : std::sqrt(dny / dnf) * 0.01;
    h = std::min(h, hmax);
    const Eigen::VectorXd f1 = f(y + h * f0);
    double der2 = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double d = (f1(i) - f0(i)) / scale(y(i), y(i));
      der2 += d * d;
    }
    der2 = std::sqrt(der2) / h;
    const double der12 = std::max(der2, std::sqrt(dnf));
    const double h1 = der12 <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 1.0 / 8.0);
    return std::min({100.0 * h, h1, hmax});
  }

 private:
  const ControlledOde& ode_;
  const Eigen::VectorXd& u_;
  const ReferenceOptions& opts_;
  ReferenceStats& stats_;
};

}  // namespace

Eigen::VectorXd integrate_reference(const ControlledOde& ode, const Eigen::VectorXd& x0, const Eigen::VectorXd& u,
                                    double duration, const ReferenceOptions& opts, ReferenceStats* stats) {
  if (!(duration >= 0.0)) throw std::invalid_argument("reference integration needs duration >= 0");
  if (!x0.allFinite()) throw ReferenceIntegrationFailure("non-finite initial state");
  ReferenceStats local;
  ReferenceStats& st = stats ? *stats : local;
  if (duration == 0.0) return x0;

  Stepper stepper(ode, u, opts, st);
  Eigen::VectorXd y = x0;
  Eigen::VectorXd k1 = stepper.f(y);
  double t = 0.0;
  double h = stepper.initial_step(y, k1, duration);
  bool last_rejected = false;
  Eigen::VectorXd y_new;
  const double expo = 1.0 / 8.0;

  while (t < duration) {
    if (st.accepted + st.rejected >= opts.max_steps) {
      throw ReferenceIntegrationFailure("step budget exhausted at t = " + std::to_string(t));
    }
    if (h <= 1e-14 * std::max(1.0, duration)) {
      throw ReferenceIntegrationFailure("step size underflow at t = " + std::to_string(t));
    }
    const bool last = t + 1.01 * h >= duration;
    if (last) h = duration - t;
    const double err = stepper.trial(y, k1, h, y_new);
    if (!std::isfinite(err) || !y_new.allFinite()) {
      ++st.rejected;
      h *= 0.25;
      last_rejected = true;
      continue;
    }
    const double fac11 = std::pow(std::max(err, 1e-300), expo);
    const double fac = std::max(1.0 / kFac2, std::min(1.0 / kFac1, fac11 / kSafe));
    double h_new = h / fac;
    if (err <= 1.0) {
      ++st.accepted;
      t = last ? duration : t + h;
      y = y_new;
      k1 = stepper.f(y);
      if (last_rejected) h_new = std::min(h_new, h);
      last_rejected = false;
    } else {
      ++st.rejected;
      h_new = h / std::min(1.0 / kFac1, fac11 / kSafe);
      last_rejected = true;
    }
    h = std::min(h_new, duration);
  }
  if (!y.allFinite()) throw ReferenceIntegrationFailure("non-finite state");
  return y;
}

}  // namespace shotcheck
