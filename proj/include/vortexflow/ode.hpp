#pragma once

// Adaptive integration of autonomous second-order systems q'' = accel(q, q').
//
// Stepping uses the explicit Dormand-Prince 8(5,3) pair with a PI step-size
// controller. Dense output is the pair's seventh-order continuous extension (three
// extra stages per accepted step); node times return the stored values exactly.
//
// Every coordinate q_i is a positive scale; the integrator watches for collapse
// (q_i <= collapse_epsilon) and bounds the step by 0.1 q_i / |q_i'| while q_i' < 0.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "vortexflow/error.hpp"

namespace vortexflow {

struct IntegrationConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-10;
  double max_step = std::numeric_limits<double>::infinity();
  double collapse_epsilon = 1e-8;
  double t_end = 1.0;  // integrated span, measured from the start time
  std::size_t max_steps = 5'000'000;

  /// Throws Error(InvalidConfig) on non-positive tolerances, epsilon, max_step or t_end.
  void validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) {
      throw Error(ErrorCode::InvalidConfig, "tolerances must be positive");
    }
    if (!(collapse_epsilon > 0.0)) {
      throw Error(ErrorCode::InvalidConfig, "collapse_epsilon must be positive");
    }
    if (!(max_step > 0.0)) throw Error(ErrorCode::InvalidConfig, "max_step must be positive");
    if (!(t_end > 0.0)) throw Error(ErrorCode::InvalidConfig, "t_end must be positive");
  }
};

enum class Termination { ReachedEnd, Collapsed, StepFailure };

inline const char* to_string(Termination t) noexcept {
  switch (t) {
    case Termination::ReachedEnd: return "ReachedEnd";
    case Termination::Collapsed: return "Collapsed";
    case Termination::StepFailure: return "StepFailure";
  }
  return "Unknown";
}

struct TerminalEvent {
  Termination kind = Termination::ReachedEnd;
  /// Collapse time (a_i = collapse_epsilon crossing) or time of the last good state.
  double t = 0.0;
  /// Half-width of the bracket certified for t (zero for ReachedEnd).
  double error_bar = 0.0;
  /// Axis that collapsed, -1 otherwise.
  int axis = -1;
  std::string message;
};

namespace ode {

template <std::size_t Dim>
using Vec = std::array<double, Dim>;

/// Sum in ascending order, so the result does not depend on the order of the terms.
template <std::size_t N>
double ordered_sum(std::array<double, N> v) {
  std::sort(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

/// Product in ascending order, for the same reason.
template <std::size_t N>
double ordered_product(std::array<double, N> v) {
  std::sort(v.begin(), v.end());
  double s = 1.0;
  for (double x : v) s *= x;
  return s;
}

template <std::size_t Dim>
struct Node {
  double t = 0.0;
  Vec<Dim> q{};
  Vec<Dim> v{};
};

/// Continuous-extension coefficients of one step for the stacked state (q, q').
template <std::size_t Dim>
using Interpolant = std::array<std::array<double, 2 * Dim>, 8>;

/// Node sequence of an integrated second-order system with dense output.
template <std::size_t Dim>
class DenseSolution {
 public:
  DenseSolution() = default;
  /// `cont[k]` interpolates between nodes[k] and nodes[k + 1].
  DenseSolution(std::vector<Node<Dim>> nodes, std::vector<Interpolant<Dim>> cont, TerminalEvent event)
      : nodes_(std::move(nodes)), cont_(std::move(cont)), event_(std::move(event)) {}

  [[nodiscard]] const std::vector<Node<Dim>>& nodes() const noexcept { return nodes_; }
  [[nodiscard]] const TerminalEvent& event() const noexcept { return event_; }
  [[nodiscard]] bool empty() const noexcept { return nodes_.empty(); }
  [[nodiscard]] double t_begin() const { return nodes_.front().t; }
  [[nodiscard]] double t_end() const { return nodes_.back().t; }
  [[nodiscard]] bool covers(double t) const {
    return !nodes_.empty() && t >= t_begin() && t <= t_end();
  }

  /// (q, q') at t inside the covered span; throws Error(OutOfSpan) otherwise.
  [[nodiscard]] std::pair<Vec<Dim>, Vec<Dim>> at(double t) const {
    if (!covers(t)) {
      throw Error(ErrorCode::OutOfSpan, "dense output requested at t = " + std::to_string(t) +
                                            " outside the integrated span");
    }
    auto it = std::lower_bound(nodes_.begin(), nodes_.end(), t,
                               [](const Node<Dim>& n, double tt) { return n.t < tt; });
    if (it->t == t) return {it->q, it->v};
    const auto k = static_cast<std::size_t>(it - nodes_.begin()) - 1;
    const double th = (t - nodes_[k].t) / (it->t - nodes_[k].t);
    const double th1 = 1.0 - th;
    const Interpolant<Dim>& rc = cont_[k];
    std::pair<Vec<Dim>, Vec<Dim>> out;
    for (std::size_t j = 0; j < 2 * Dim; ++j) {
      const double y =
          rc[0][j] +
          th * (rc[1][j] +
                th1 * (rc[2][j] +
                       th * (rc[3][j] + th1 * (rc[4][j] + th * (rc[5][j] + th1 * (rc[6][j] + th * rc[7][j]))))));
      (j < Dim ? out.first[j] : out.second[j - Dim]) = y;
    }
    return out;
  }

 private:
  std::vector<Node<Dim>> nodes_;
  std::vector<Interpolant<Dim>> cont_;
  TerminalEvent event_;
};

namespace detail {

// Dormand-Prince 8(5,3) coefficients (Hairer, Norsett & Wanner, DOP853).
struct Dop853 {
  static constexpr double c2 = 0.526001519587677318785587544488E-01;
  static constexpr double c3 = 0.789002279381515978178381316732E-01;
  static constexpr double c4 = 0.118350341907227396726757197510E+00;
  static constexpr double c5 = 0.281649658092772603273242802490E+00;
  static constexpr double c6 = 0.333333333333333333333333333333E+00;
  static constexpr double c7 = 0.25E+00;
  static constexpr double c8 = 0.307692307692307692307692307692E+00;
  static constexpr double c9 = 0.651282051282051282051282051282E+00;
  static constexpr double c10 = 0.6E+00;
  static constexpr double c11 = 0.857142857142857142857142857142E+00;

  static constexpr double b1 = 5.42937341165687622380535766363E-2;
  static constexpr double b6 = 4.45031289275240888144113950566E0;
  static constexpr double b7 = 1.89151789931450038304281599044E0;
  static constexpr double b8 = -5.8012039600105847814672114227E0;
  static constexpr double b9 = 3.1116436695781989440891606237E-1;
  static constexpr double b10 = -1.52160949662516078556178806805E-1;
  static constexpr double b11 = 2.01365400804030348374776537501E-1;
  static constexpr double b12 = 4.47106157277725905176885569043E-2;

  static constexpr double a21 = 5.26001519587677318785587544488E-2;
  static constexpr double a31 = 1.97250569845378994544595329183E-2;
  static constexpr double a32 = 5.91751709536136983633785987549E-2;
  static constexpr double a41 = 2.95875854768068491816892993775E-2;
  static constexpr double a43 = 8.87627564304205475450678981324E-2;
  static constexpr double a51 = 2.41365134159266685502369798665E-1;
  static constexpr double a53 = -8.84549479328286085344864962717E-1;
  static constexpr double a54 = 9.24834003261792003115737966543E-1;
  static constexpr double a61 = 3.7037037037037037037037037037E-2;
  static constexpr double a64 = 1.70828608729473871279604482173E-1;
  static constexpr double a65 = 1.25467687566822425016691814123E-1;
  static constexpr double a71 = 3.7109375E-2;
  static constexpr double a74 = 1.70252211019544039314978060272E-1;
  static constexpr double a75 = 6.02165389804559606850219397283E-2;
  static constexpr double a76 = -1.7578125E-2;
  static constexpr double a81 = 3.70920001185047927108779319836E-2;
  static constexpr double a84 = 1.70383925712239993810214054705E-1;
  static constexpr double a85 = 1.07262030446373284651809199168E-1;
  static constexpr double a86 = -1.53194377486244017527936158236E-2;
  static constexpr double a87 = 8.27378916381402288758473766002E-3;
  static constexpr double a91 = 6.24110958716075717114429577812E-1;
  static constexpr double a94 = -3.36089262944694129406857109825E0;
  static constexpr double a95 = -8.68219346841726006818189891453E-1;
  static constexpr double a96 = 2.75920996994467083049415600797E1;
  static constexpr double a97 = 2.01540675504778934086186788979E1;
  static constexpr double a98 = -4.34898841810699588477366255144E1;
  static constexpr double a101 = 4.77662536438264365890433908527E-1;
  static constexpr double a104 = -2.48811461997166764192642586468E0;
  static constexpr double a105 = -5.90290826836842996371446475743E-1;
  static constexpr double a106 = 2.12300514481811942347288949897E1;
  static constexpr double a107 = 1.52792336328824235832596922938E1;
  static constexpr double a108 = -3.32882109689848629194453265587E1;
  static constexpr double a109 = -2.03312017085086261358222928593E-2;
  static constexpr double a111 = -9.3714243008598732571704021658E-1;
  static constexpr double a114 = 5.18637242884406370830023853209E0;
  static constexpr double a115 = 1.09143734899672957818500254654E0;
  static constexpr double a116 = -8.14978701074692612513997267357E0;
  static constexpr double a117 = -1.85200656599969598641566180701E1;
  static constexpr double a118 = 2.27394870993505042818970056734E1;
  static constexpr double a119 = 2.49360555267965238987089396762E0;
  static constexpr double a1110 = -3.0467644718982195003823669022E0;
  static constexpr double a121 = 2.27331014751653820792359768449E0;
  static constexpr double a124 = -1.05344954667372501984066689879E1;
  static constexpr double a125 = -2.00087205822486249909675718444E0;
  static constexpr double a126 = -1.79589318631187989172765950534E1;
  static constexpr double a127 = 2.79488845294199600508499808837E1;
  static constexpr double a128 = -2.85899827713502369474065508674E0;
  static constexpr double a129 = -8.87285693353062954433549289258E0;
  static constexpr double a1210 = 1.23605671757943030647266201528E1;
  static constexpr double a1211 = 6.43392746015763530355970484046E-1;

  static constexpr double bhh1 = 0.244094488188976377952755905512E+00;
  static constexpr double bhh2 = 0.733846688281611857341361741547E+00;
  static constexpr double bhh3 = 0.220588235294117647058823529412E-01;

  // Continuous extension: stages 14 to 16 and the interpolation weights.
  static constexpr double a141 = 5.61675022830479523392909219681E-2;
  static constexpr double a147 = 2.53500210216624811088794765333E-1;
  static constexpr double a148 = -2.46239037470802489917441475441E-1;
  static constexpr double a149 = -1.24191423263816360469010140626E-1;
  static constexpr double a1410 = 1.5329179827876569731206322685E-1;
  static constexpr double a1411 = 8.20105229563468988491666602057E-3;
  static constexpr double a1412 = 7.56789766054569976138603589584E-3;
  static constexpr double a1413 = -8.298E-3;

  static constexpr double a151 = 3.18346481635021405060768473261E-2;
  static constexpr double a156 = 2.83009096723667755288322961402E-2;
  static constexpr double a157 = 5.35419883074385676223797384372E-2;
  static constexpr double a158 = -5.49237485713909884646569340306E-2;
  static constexpr double a1511 = -1.08347328697249322858509316994E-4;
  static constexpr double a1512 = 3.82571090835658412954920192323E-4;
  static constexpr double a1513 = -3.40465008687404560802977114492E-4;
  static constexpr double a1514 = 1.41312443674632500278074618366E-1;

  static constexpr double a161 = -4.28896301583791923408573538692E-1;
  static constexpr double a166 = -4.69762141536116384314449447206E0;
  static constexpr double a167 = 7.68342119606259904184240953878E0;
  static constexpr double a168 = 4.06898981839711007970213554331E0;
  static constexpr double a169 = 3.56727187455281109270669543021E-1;
  static constexpr double a1613 = -1.39902416515901462129418009734E-3;
  static constexpr double a1614 = 2.9475147891527723389556272149E0;
  static constexpr double a1615 = -9.15095847217987001081870187138E0;

  // Rows: weights of stages 1, 6..16 (stage 13 is f at the new state).
  static constexpr std::array<std::array<double, 12>, 4> d{{
      {-0.84289382761090128651353491142E+01, 0.56671495351937776962531783590E+00,
       -0.30689499459498916912797304727E+01, 0.23846676565120698287728149680E+01,
       0.21170345824450282767155149946E+01, -0.87139158377797299206789907490E+00,
       0.22404374302607882758541771650E+01, 0.63157877876946881815570249290E+00,
       -0.88990336451333310820698117400E-01, 0.18148505520854727256656404962E+02,
       -0.91946323924783554000451984436E+01, -0.44360363875948939664310572000E+01},
      {0.10427508642579134603413151009E+02, 0.24228349177525818288430175319E+03,
       0.16520045171727028198505394887E+03, -0.37454675472269020279518312152E+03,
       -0.22113666853125306036270938578E+02, 0.77334326684722638389603898808E+01,
       -0.30674084731089398182061213626E+02, -0.93321305264302278729567221706E+01,
       0.15697238121770843886131091075E+02, -0.31139403219565177677282850411E+02,
       -0.93529243588444783865713862664E+01, 0.35816841486394083752465898540E+02},
      {0.19985053242002433820987653617E+02, -0.38703730874935176555105901742E+03,
       -0.18917813819516756882830838328E+03, 0.52780815920542364900561016686E+03,
       -0.11573902539959630126141871134E+02, 0.68812326946963000169666922661E+01,
       -0.10006050966910838403183860980E+01, 0.77771377980534432092869265740E+00,
       -0.27782057523535084065932004339E+01, -0.60196695231264120758267380846E+02,
       0.84320405506677161018159903784E+02, 0.11992291136182789328035130030E+02},
      {-0.25693933462703749003312586129E+02, -0.15418974869023643374053993627E+03,
       -0.23152937917604549567536039109E+03, 0.35763911791061412378285349910E+03,
       0.93405324183624310003907691704E+02, -0.37458323136451633156875139351E+02,
       0.10409964950896230045147246184E+03, 0.29840293426660503123344363579E+02,
       -0.43533456590011143754432175058E+02, 0.96324553959188282948394950600E+02,
       -0.39177261675615439165231486172E+02, -0.14972683625798562581422125276E+03},
  }};

  static constexpr double er1 = 0.1312004499419488073250102996E-01;
  static constexpr double er6 = -0.1225156446376204440720569753E+01;
  static constexpr double er7 = -0.4957589496572501915214079952E+00;
  static constexpr double er8 = 0.1664377182454986536961530415E+01;
  static constexpr double er9 = -0.3503288487499736816886487290E+00;
  static constexpr double er10 = 0.3341791187130174790297318841E+00;
  static constexpr double er11 = 0.8192320648511571246570742613E-01;
  static constexpr double er12 = -0.2235530786388629525884427845E-01;
};

template <std::size_t N>
using State = std::array<double, N>;

template <std::size_t N>
State<N> axpy(const State<N>& y, double h, std::initializer_list<std::pair<double, const State<N>*>> terms) {
  State<N> out = y;
  for (std::size_t i = 0; i < N; ++i) {
    double acc = 0.0;
    for (const auto& [c, k] : terms) acc += c * (*k)[i];
    out[i] += h * acc;
  }
  return out;
}

}  // namespace detail

/// Integrates q'' = sys.accel(q, q') from (t0, q0, v0) to t0 + cfg.t_end.
///
/// System must provide
///   Vec<Dim> accel(const Vec<Dim>& q, const Vec<Dim>& v) const;
/// Integration stops early on collapse of any coordinate or on controller failure;
/// the terminal event records which, and the nodes up to the last good state are kept.
template <std::size_t Dim, class System>
DenseSolution<Dim> integrate(const System& sys, double t0, const Vec<Dim>& q0, const Vec<Dim>& v0,
                             const IntegrationConfig& cfg) {
  cfg.validate();
  using K = detail::Dop853;
  constexpr std::size_t N = 2 * Dim;
  using Y = detail::State<N>;

  auto rhs = [&sys](const Y& y) {
    Vec<Dim> q{}, v{};
    for (std::size_t i = 0; i < Dim; ++i) {
      q[i] = y[i];
      v[i] = y[Dim + i];
    }
    const Vec<Dim> a = sys.accel(q, v);
    Y f{};
    for (std::size_t i = 0; i < Dim; ++i) {
      f[i] = v[i];
      f[Dim + i] = a[i];
    }
    return f;
  };
  auto make_node = [](double t, const Y& y) {
    Node<Dim> n;
    n.t = t;
    for (std::size_t i = 0; i < Dim; ++i) {
      n.q[i] = y[i];
      n.v[i] = y[Dim + i];
    }
    return n;
  };
  auto finite = [](const Y& y) {
    return std::all_of(y.begin(), y.end(), [](double v) { return std::isfinite(v); });
  };

  std::vector<Node<Dim>> nodes;
  std::vector<Interpolant<Dim>> cont;
  TerminalEvent event;
  const double t_final = t0 + cfg.t_end;

  for (std::size_t i = 0; i < Dim; ++i) {
    if (!(q0[i] > 0.0)) throw Error(ErrorCode::CollapsedState, "initial scale must be positive");
  }

  Y y{};
  for (std::size_t i = 0; i < Dim; ++i) {
    y[i] = q0[i];
    y[Dim + i] = v0[i];
  }
  double t = t0;
  nodes.push_back(make_node(t, y));
  Y k1 = rhs(y);

  auto weighted_norm = [&](const Y& v, const Y& scale_ref) {
    Y terms{};
    for (std::size_t i = 0; i < N; ++i) {
      const double sk = cfg.abs_tol + cfg.rel_tol * std::abs(scale_ref[i]);
      terms[i] = (v[i] / sk) * (v[i] / sk);
    }
    return std::sqrt(ordered_sum(terms) / N);
  };

  // Physical bound: never let a shrinking scale lose more than 10% per step.
  auto collapse_bound = [&](const Y& state) {
    double bound = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < Dim; ++i) {
      if (state[Dim + i] < 0.0) bound = std::min(bound, 0.1 * state[i] / -state[Dim + i]);
    }
    return bound;
  };

  const double hmax = std::min(cfg.max_step, cfg.t_end);
  double h = 0.0;
  {
    const double d0 = weighted_norm(y, y);
    const double d1 = weighted_norm(k1, y);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min({h0, hmax, collapse_bound(y)});
    Y y1 = y;
    for (std::size_t i = 0; i < N; ++i) y1[i] += h0 * k1[i];
    Y f1 = rhs(y1);
    Y diff{};
    for (std::size_t i = 0; i < N; ++i) diff[i] = f1[i] - k1[i];
    const double d2 = finite(f1) ? weighted_norm(diff, y) / h0 : 0.0;
    const double der = std::max(d1, d2);
    const double h1 = der <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / der, 1.0 / 8.0);
    h = std::min({100.0 * h0, h1, hmax});
  }

  constexpr double safe = 0.9;
  constexpr double fac_min = 0.333;
  constexpr double fac_max = 6.0;
  constexpr double beta = 0.04;
  const double expo = 1.0 / 8.0 - beta * 0.2;
  double facold = 1e-4;
  bool reject = false;
  double last_h = h;
  std::size_t steps = 0;

  auto find_collapse_axis = [&](const Node<Dim>& n) {
    int axis = -1;
    for (std::size_t i = 0; i < Dim; ++i) {
      if (n.q[i] <= cfg.collapse_epsilon) {
        if (axis < 0 || n.q[i] < n.q[static_cast<std::size_t>(axis)]) axis = static_cast<int>(i);
      }
    }
    return axis;
  };

  while (true) {
    if (t >= t_final) {
      event = {Termination::ReachedEnd, t, 0.0, -1, "reached end of span"};
      break;
    }
    if (++steps > cfg.max_steps) {
      event = {Termination::StepFailure, t, 0.0, -1, "maximum number of steps exceeded"};
      break;
    }

    bool last = false;
    h = std::min({h, hmax, collapse_bound(y)});
    if (t + 1.01 * h >= t_final) {
      h = t_final - t;
      last = true;
    }

    const double ulp_floor = 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t));
    if (h <= ulp_floor) {
      // Time resolution exhausted. A coordinate falling to zero faster than the
      // clock can resolve is a collapse; anything else is a controller failure.
      int axis = -1;
      double ttz = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < Dim; ++i) {
        if (y[Dim + i] < 0.0) {
          const double ti = y[i] / -y[Dim + i];
          if (ti < ttz) {
            ttz = ti;
            axis = static_cast<int>(i);
          }
        }
      }
      if (axis >= 0 && ttz <= 1e6 * ulp_floor) {
        event = {Termination::Collapsed, t, std::max(last_h, ttz), axis,
                 "time resolution exhausted while scale collapses"};
      } else {
        event = {Termination::StepFailure, t, 0.0, -1, "step size underflow"};
      }
      break;
    }

    const Y k2 = rhs(detail::axpy<N>(y, h, {{K::a21, &k1}}));
    const Y k3 = rhs(detail::axpy<N>(y, h, {{K::a31, &k1}, {K::a32, &k2}}));
    const Y k4 = rhs(detail::axpy<N>(y, h, {{K::a41, &k1}, {K::a43, &k3}}));
    const Y k5 = rhs(detail::axpy<N>(y, h, {{K::a51, &k1}, {K::a53, &k3}, {K::a54, &k4}}));
    const Y k6 = rhs(detail::axpy<N>(y, h, {{K::a61, &k1}, {K::a64, &k4}, {K::a65, &k5}}));
    const Y k7 = rhs(detail::axpy<N>(y, h, {{K::a71, &k1}, {K::a74, &k4}, {K::a75, &k5}, {K::a76, &k6}}));
    const Y k8 = rhs(detail::axpy<N>(
        y, h, {{K::a81, &k1}, {K::a84, &k4}, {K::a85, &k5}, {K::a86, &k6}, {K::a87, &k7}}));
    const Y k9 = rhs(detail::axpy<N>(y, h,
                                     {{K::a91, &k1}, {K::a94, &k4}, {K::a95, &k5}, {K::a96, &k6},
                                      {K::a97, &k7}, {K::a98, &k8}}));
    const Y k10 = rhs(detail::axpy<N>(y, h,
                                      {{K::a101, &k1}, {K::a104, &k4}, {K::a105, &k5},
                                       {K::a106, &k6}, {K::a107, &k7}, {K::a108, &k8},
                                       {K::a109, &k9}}));
    const Y k11 = rhs(detail::axpy<N>(y, h,
                                      {{K::a111, &k1}, {K::a114, &k4}, {K::a115, &k5},
                                       {K::a116, &k6}, {K::a117, &k7}, {K::a118, &k8},
                                       {K::a119, &k9}, {K::a1110, &k10}}));
    const Y k12 = rhs(detail::axpy<N>(y, h,
                                      {{K::a121, &k1}, {K::a124, &k4}, {K::a125, &k5},
                                       {K::a126, &k6}, {K::a127, &k7}, {K::a128, &k8},
                                       {K::a129, &k9}, {K::a1210, &k10}, {K::a1211, &k11}}));
    Y incr{};
    for (std::size_t i = 0; i < N; ++i) {
      incr[i] = K::b1 * k1[i] + K::b6 * k6[i] + K::b7 * k7[i] + K::b8 * k8[i] + K::b9 * k9[i] +
                K::b10 * k10[i] + K::b11 * k11[i] + K::b12 * k12[i];
    }
    Y ynew{};
    for (std::size_t i = 0; i < N; ++i) ynew[i] = y[i] + h * incr[i];

    bool admissible = finite(ynew);
    for (std::size_t i = 0; i < Dim && admissible; ++i) admissible = ynew[i] > 0.0;

    double err = std::numeric_limits<double>::infinity();
    if (admissible) {
      Y sq3{};
      Y sq5{};
      for (std::size_t i = 0; i < N; ++i) {
        const double sk = 1.0 / (cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i])));
        const double e3 = (incr[i] - K::bhh1 * k1[i] - K::bhh2 * k9[i] - K::bhh3 * k12[i]) * sk;
        const double e5 = (K::er1 * k1[i] + K::er6 * k6[i] + K::er7 * k7[i] + K::er8 * k8[i] +
                           K::er9 * k9[i] + K::er10 * k10[i] + K::er11 * k11[i] + K::er12 * k12[i]) *
                          sk;
        sq3[i] = e3 * e3;
        sq5[i] = e5 * e5;
      }
      const double err3 = ordered_sum(sq3);
      const double err5 = ordered_sum(sq5);
      double deno = err5 + 0.01 * err3;
      if (deno <= 0.0) deno = 1.0;
      err = std::abs(h) * err5 * std::sqrt(1.0 / (deno * N));
      if (!std::isfinite(err)) err = std::numeric_limits<double>::infinity();
    }

    if (err <= 1.0) {
      facold = std::max(err, 1e-4);
      const double t_prev = t;
      const Y k13 = rhs(ynew);
      const Y k14 = rhs(detail::axpy<N>(y, h,
                                        {{K::a141, &k1}, {K::a147, &k7}, {K::a148, &k8}, {K::a149, &k9},
                                         {K::a1410, &k10}, {K::a1411, &k11}, {K::a1412, &k12},
                                         {K::a1413, &k13}}));
      const Y k15 = rhs(detail::axpy<N>(y, h,
                                        {{K::a151, &k1}, {K::a156, &k6}, {K::a157, &k7}, {K::a158, &k8},
                                         {K::a1511, &k11}, {K::a1512, &k12}, {K::a1513, &k13},
                                         {K::a1514, &k14}}));
      const Y k16 = rhs(detail::axpy<N>(y, h,
                                        {{K::a161, &k1}, {K::a166, &k6}, {K::a167, &k7}, {K::a168, &k8},
                                         {K::a169, &k9}, {K::a1613, &k13}, {K::a1614, &k14},
                                         {K::a1615, &k15}}));
      const std::array<const Y*, 12> stages{&k1, &k6, &k7, &k8, &k9, &k10, &k11, &k12, &k13, &k14, &k15, &k16};
      Interpolant<Dim> rc{};
      for (std::size_t i = 0; i < N; ++i) {
        const double ydiff = ynew[i] - y[i];
        const double bspl = h * k1[i] - ydiff;
        rc[0][i] = y[i];
        rc[1][i] = ydiff;
        rc[2][i] = bspl;
        rc[3][i] = ydiff - h * k13[i] - bspl;
        for (std::size_t r = 0; r < 4; ++r) {
          double acc = 0.0;
          for (std::size_t s = 0; s < 12; ++s) acc += K::d[r][s] * (*stages[s])[i];
          rc[4 + r][i] = h * acc;
        }
      }
      cont.push_back(rc);
      t = last ? t_final : t + h;
      y = ynew;
      k1 = k13;
      nodes.push_back(make_node(t, y));
      last_h = h;

      const int axis = find_collapse_axis(nodes.back());
      if (axis >= 0) {
        // Locate the epsilon crossing on the dense interpolant of the last interval.
        const DenseSolution<Dim> local({nodes[nodes.size() - 2], nodes.back()}, {cont.back()}, {});
        const auto ax = static_cast<std::size_t>(axis);
        double lo = t_prev;
        double hi = t;
        while (hi - lo > cfg.rel_tol * std::max(1.0, std::abs(hi))) {
          const double mid = 0.5 * (lo + hi);
          if (mid <= lo || mid >= hi) break;
          if (local.at(mid).first[ax] > cfg.collapse_epsilon) {
            lo = mid;
          } else {
            hi = mid;
          }
        }
        const double vel = std::abs(nodes.back().v[ax]);
        const double linear_ttz = vel > 0.0 ? nodes.back().q[ax] / vel : 0.0;
        event = {Termination::Collapsed, hi, std::max(last_h, linear_ttz), axis,
                 "scale fell below collapse_epsilon"};
        break;
      }

      double fac = std::pow(err, expo) / std::pow(facold, beta);
      fac = std::clamp(fac / safe, 1.0 / fac_max, 1.0 / fac_min);
      double hnew = h / fac;
      if (reject) hnew = std::min(hnew, h);
      reject = false;
      h = hnew;
    } else {
      reject = true;
      if (std::isinf(err)) {
        h *= 0.25;
      } else {
        h /= std::min(1.0 / fac_min, std::pow(err, expo) / safe);
      }
    }
  }

  return DenseSolution<Dim>(std::move(nodes), std::move(cont), std::move(event));
}

}  // namespace ode
}  // namespace vortexflow
