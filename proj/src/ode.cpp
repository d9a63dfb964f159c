#include "lipgeo/ode.hpp"

#include <algorithm>
#include <cmath>

#include "lipgeo/errors.hpp"

namespace lipgeo {

void IntegratorConfig::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0)) fail(ErrorKind::invalid_argument, std::string(name) + ": must be positive");
  };
  positive(rel_tol, "rel_tol");
  positive(abs_tol, "abs_tol");
  positive(max_step, "max_step");
  positive(event_tol, "event_tol");
  positive(sliding_exit_tol, "sliding_exit_tol");
  positive(surface_tol, "surface_tol");
  positive(tangency_tol, "tangency_tol");
  if (max_events < 1) fail(ErrorKind::invalid_argument, "max_events: must be >= 1");
  if (tie_break != 1 && tie_break != -1) fail(ErrorKind::invalid_argument, "tie_break: must be +1 or -1");
  if (max_steps < 1) fail(ErrorKind::invalid_argument, "max_steps: must be >= 1");
}

std::string_view to_string(SolverTag tag) {
  switch (tag) {
    case SolverTag::filippov: return "filippov";
    case SolverTag::caratheodory: return "caratheodory";
    case SolverTag::regularized: return "regularized";
    case SolverTag::smooth: return "smooth";
  }
  return "unknown";
}

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::completed: return "completed";
    case Termination::chart_exit: return "chart_exit";
    case Termination::degeneracy: return "degeneracy";
    case Termination::zeno: return "zeno";
    case Termination::step_underflow: return "step_underflow";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Dense output

Vector DenseSegment::eval(double t) const {
  if (t == t0) return c[0];
  if (t == t_end && end.size() > 0) return end;
  const double s = (t - t0) / h;
  const double s1 = 1.0 - s;
  return c[0] +
         s * (c[1] + s1 * (c[2] + s * (c[3] + s1 * (c[4] + s * (c[5] + s1 * (c[6] + s * c[7]))))));
}

DenseSegment DenseSegment::linear(double t0, double t1, const Vector& y0, const Vector& y1) {
  DenseSegment seg;
  seg.t0 = t0;
  seg.h = t1 - t0;
  seg.t_end = t1;
  seg.c[0] = y0;
  seg.c[1] = y1 - y0;
  seg.end = y1;
  for (int i = 2; i < 8; ++i) seg.c[i] = Vector::Zero(y0.size());
  return seg;
}

namespace {

// Index of the segment containing t, preferring the later one at breakpoints.
std::size_t find_right(const std::vector<DenseSegment>& segs, double t) {
  auto it = std::upper_bound(segs.begin(), segs.end(), t,
                             [](double v, const DenseSegment& s) { return v < s.t0; });
  if (it == segs.begin()) return 0;
  return static_cast<std::size_t>(std::distance(segs.begin(), it)) - 1;
}

}  // namespace

Vector DenseOutput::eval(double t) const { return eval_right(t); }

Vector DenseOutput::eval_right(double t) const {
  if (segments_.empty()) fail(ErrorKind::precondition, "empty dense output");
  return segments_[find_right(segments_, t)].eval(t);
}

Vector DenseOutput::eval_left(double t) const {
  if (segments_.empty()) fail(ErrorKind::precondition, "empty dense output");
  std::size_t i = find_right(segments_, t);
  while (i > 0 && segments_[i].t0 >= t) --i;
  return segments_[i].eval(t);
}

// ---------------------------------------------------------------------------
// Dormand-Prince 8(5,3), coefficients of Hairer's DOP853.

namespace {

constexpr double kSafety = 0.9;
constexpr double kMaxShrink = 1.0 / 3.0;
constexpr double kMaxGrow = 6.0;

}  // namespace

namespace detail {
namespace {

constexpr double b1 = 5.42937341165687622380535766363E-2;
constexpr double b6 = 4.45031289275240888144113950566E0;
constexpr double b7 = 1.89151789931450038304281599044E0;
constexpr double b8 = -5.8012039600105847814672114227E0;
constexpr double b9 = 3.1116436695781989440891606237E-1;
constexpr double b10 = -1.52160949662516078556178806805E-1;
constexpr double b11 = 2.01365400804030348374776537501E-1;
constexpr double b12 = 4.47106157277725905176885569043E-2;

constexpr double bhh1 = 0.244094488188976377952755905512E+00;
constexpr double bhh2 = 0.733846688281611857341361741547E+00;
constexpr double bhh3 = 0.220588235294117647058823529412E-01;

constexpr double er1 = 0.1312004499419488073250102996E-01;
constexpr double er6 = -0.1225156446376204440720569753E+01;
constexpr double er7 = -0.4957589496572501915214079952E+00;
constexpr double er8 = 0.1664377182454986536961530415E+01;
constexpr double er9 = -0.3503288487499736816886487290E+00;
constexpr double er10 = 0.3341791187130174790297318841E+00;
constexpr double er11 = 0.8192320648511571246570742613E-01;
constexpr double er12 = -0.2235530786388629525884427845E-01;

constexpr double a21 = 5.26001519587677318785587544488E-2;
constexpr double a31 = 1.97250569845378994544595329183E-2;
constexpr double a32 = 5.91751709536136983633785987549E-2;
constexpr double a41 = 2.95875854768068491816892993775E-2;
constexpr double a43 = 8.87627564304205475450678981324E-2;
constexpr double a51 = 2.41365134159266685502369798665E-1;
constexpr double a53 = -8.84549479328286085344864962717E-1;
constexpr double a54 = 9.24834003261792003115737966543E-1;
constexpr double a61 = 3.7037037037037037037037037037E-2;
constexpr double a64 = 1.70828608729473871279604482173E-1;
constexpr double a65 = 1.25467687566822425016691814123E-1;
constexpr double a71 = 3.7109375E-2;
constexpr double a74 = 1.70252211019544039314978060272E-1;
constexpr double a75 = 6.02165389804559606850219397283E-2;
constexpr double a76 = -1.7578125E-2;
constexpr double a81 = 3.70920001185047927108779319836E-2;
constexpr double a84 = 1.70383925712239993810214054705E-1;
constexpr double a85 = 1.07262030446373284651809199168E-1;
constexpr double a86 = -1.53194377486244017527936158236E-2;
constexpr double a87 = 8.27378916381402288758473766002E-3;
constexpr double a91 = 6.24110958716075717114429577812E-1;
constexpr double a94 = -3.36089262944694129406857109825E0;
constexpr double a95 = -8.68219346841726006818189891453E-1;
constexpr double a96 = 2.75920996994467083049415600797E1;
constexpr double a97 = 2.01540675504778934086186788979E1;
constexpr double a98 = -4.34898841810699588477366255144E1;
constexpr double a101 = 4.77662536438264365890433908527E-1;
constexpr double a104 = -2.48811461997166764192642586468E0;
constexpr double a105 = -5.90290826836842996371446475743E-1;
constexpr double a106 = 2.12300514481811942347288949897E1;
constexpr double a107 = 1.52792336328824235832596922938E1;
constexpr double a108 = -3.32882109689848629194453265587E1;
constexpr double a109 = -2.03312017085086261358222928593E-2;
constexpr double a111 = -9.3714243008598732571704021658E-1;
constexpr double a114 = 5.18637242884406370830023853209E0;
constexpr double a115 = 1.09143734899672957818500254654E0;
constexpr double a116 = -8.14978701074692612513997267357E0;
constexpr double a117 = -1.85200656599969598641566180701E1;
constexpr double a118 = 2.27394870993505042818970056734E1;
constexpr double a119 = 2.49360555267965238987089396762E0;
constexpr double a1110 = -3.0467644718982195003823669022E0;
constexpr double a121 = 2.27331014751653820792359768449E0;
constexpr double a124 = -1.05344954667372501984066689879E1;
constexpr double a125 = -2.00087205822486249909675718444E0;
constexpr double a126 = -1.79589318631187989172765950534E1;
constexpr double a127 = 2.79488845294199600508499808837E1;
constexpr double a128 = -2.85899827713502369474065508674E0;
constexpr double a129 = -8.87285693353062954433549289258E0;
constexpr double a1210 = 1.23605671757943030647266201528E1;
constexpr double a1211 = 6.43392746015763530355970484046E-1;

constexpr double a141 = 5.61675022830479523392909219681E-2;
constexpr double a147 = 2.53500210216624811088794765333E-1;
constexpr double a148 = -2.46239037470802489917441475441E-1;
constexpr double a149 = -1.24191423263816360469010140626E-1;
constexpr double a1410 = 1.5329179827876569731206322685E-1;
constexpr double a1411 = 8.20105229563468988491666602057E-3;
constexpr double a1412 = 7.56789766054569976138603589584E-3;
constexpr double a1413 = -8.298E-3;
constexpr double a151 = 3.18346481635021405060768473261E-2;
constexpr double a156 = 2.83009096723667755288322961402E-2;
constexpr double a157 = 5.35419883074385676223797384372E-2;
constexpr double a158 = -5.49237485713909884646569340306E-2;
constexpr double a1511 = -1.08347328697249322858509316994E-4;
constexpr double a1512 = 3.82571090835658412954920192323E-4;
constexpr double a1513 = -3.40465008687404560802977114492E-4;
constexpr double a1514 = 1.41312443674632500278074618366E-1;
constexpr double a161 = -4.28896301583791923408573538692E-1;
constexpr double a166 = -4.69762141536116384314449447206E0;
constexpr double a167 = 7.68342119606259904184240953878E0;
constexpr double a168 = 4.06898981839711007970213554331E0;
constexpr double a169 = 3.56727187455281109270669543021E-1;
constexpr double a1613 = -1.39902416515901462129418009734E-3;
constexpr double a1614 = 2.9475147891527723389556272149E0;
constexpr double a1615 = -9.15095847217987001081870187138E0;

constexpr double d41 = -0.84289382761090128651353491142E+01;
constexpr double d46 = 0.56671495351937776962531783590E+00;
constexpr double d47 = -0.30689499459498916912797304727E+01;
constexpr double d48 = 0.23846676565120698287728149680E+01;
constexpr double d49 = 0.21170345824450282767155149946E+01;
constexpr double d410 = -0.87139158377797299206789907490E+00;
constexpr double d411 = 0.22404374302607882758541771650E+01;
constexpr double d412 = 0.63157877876946881815570249290E+00;
constexpr double d413 = -0.88990336451333310820698117400E-01;
constexpr double d414 = 0.18148505520854727256656404962E+02;
constexpr double d415 = -0.91946323924783554000451984436E+01;
constexpr double d416 = -0.44360363875948939664310572000E+01;
constexpr double d51 = 0.10427508642579134603413151009E+02;
constexpr double d56 = 0.24228349177525818288430175319E+03;
constexpr double d57 = 0.16520045171727028198505394887E+03;
constexpr double d58 = -0.37454675472269020279518312152E+03;
constexpr double d59 = -0.22113666853125306036270938578E+02;
constexpr double d510 = 0.77334326684722638389603898808E+01;
constexpr double d511 = -0.30674084731089398182061213626E+02;
constexpr double d512 = -0.93321305264302278729567221706E+01;
constexpr double d513 = 0.15697238121770843886131091075E+02;
constexpr double d514 = -0.31139403219565177677282850411E+02;
constexpr double d515 = -0.93529243588444783865713862664E+01;
constexpr double d516 = 0.35816841486394083752465898540E+02;
constexpr double d61 = 0.19985053242002433820987653617E+02;
constexpr double d66 = -0.38703730874935176555105901742E+03;
constexpr double d67 = -0.18917813819516756882830838328E+03;
constexpr double d68 = 0.52780815920542364900561016686E+03;
constexpr double d69 = -0.11573902539959630126141871134E+02;
constexpr double d610 = 0.68812326946963000169666922661E+01;
constexpr double d611 = -0.10006050966910838403183860980E+01;
constexpr double d612 = 0.77771377980534432092869265740E+00;
constexpr double d613 = -0.27782057523535084065932004339E+01;
constexpr double d614 = -0.60196695231264120758267380846E+02;
constexpr double d615 = 0.84320405506677161018159903784E+02;
constexpr double d616 = 0.11992291136182789328035130030E+02;
constexpr double d71 = -0.25693933462703749003312586129E+02;
constexpr double d76 = -0.15418974869023643374053993627E+03;
constexpr double d77 = -0.23152937917604549567536039109E+03;
constexpr double d78 = 0.35763911791061412378285349910E+03;
constexpr double d79 = 0.93405324183624310003907691704E+02;
constexpr double d710 = -0.37458323136451633156875139351E+02;
constexpr double d711 = 0.10409964950896230045147246184E+03;
constexpr double d712 = 0.29840293426660503123344363579E+02;
constexpr double d713 = -0.43533456590011143754432175058E+02;
constexpr double d714 = 0.96324553959188282948394950600E+02;
constexpr double d715 = -0.39177261675615439165231486172E+02;
constexpr double d716 = -0.14972683625798562581422125276E+03;

}  // namespace

StepResult Dop853::step(double t, const Vector& y, const Vector& k1, double h) {
  const Vector k2 = f(y + h * a21 * k1);
  const Vector k3 = f(y + h * (a31 * k1 + a32 * k2));
  const Vector k4 = f(y + h * (a41 * k1 + a43 * k3));
  const Vector k5 = f(y + h * (a51 * k1 + a53 * k3 + a54 * k4));
  const Vector k6 = f(y + h * (a61 * k1 + a64 * k4 + a65 * k5));
  const Vector k7 = f(y + h * (a71 * k1 + a74 * k4 + a75 * k5 + a76 * k6));
  const Vector k8 = f(y + h * (a81 * k1 + a84 * k4 + a85 * k5 + a86 * k6 + a87 * k7));
  const Vector k9 =
      f(y + h * (a91 * k1 + a94 * k4 + a95 * k5 + a96 * k6 + a97 * k7 + a98 * k8));
  const Vector k10 = f(y + h * (a101 * k1 + a104 * k4 + a105 * k5 + a106 * k6 + a107 * k7 +
                                a108 * k8 + a109 * k9));
  const Vector k11 = f(y + h * (a111 * k1 + a114 * k4 + a115 * k5 + a116 * k6 + a117 * k7 +
                                a118 * k8 + a119 * k9 + a1110 * k10));
  const Vector k12 = f(y + h * (a121 * k1 + a124 * k4 + a125 * k5 + a126 * k6 + a127 * k7 +
                                a128 * k8 + a129 * k9 + a1210 * k10 + a1211 * k11));

  const Vector incr =
      b1 * k1 + b6 * k6 + b7 * k7 + b8 * k8 + b9 * k9 + b10 * k10 + b11 * k11 + b12 * k12;
  StepResult out;
  out.z1 = y + h * incr;

  const auto n = y.size();
  double err = 0.0, err2 = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double sk = cfg_.abs_tol + cfg_.rel_tol * std::max(std::abs(y[i]), std::abs(out.z1[i]));
    const double e2 = (incr[i] - bhh1 * k1[i] - bhh2 * k9[i] - bhh3 * k12[i]) / sk;
    const double e = (er1 * k1[i] + er6 * k6[i] + er7 * k7[i] + er8 * k8[i] + er9 * k9[i] +
                      er10 * k10[i] + er11 * k11[i] + er12 * k12[i]) /
                     sk;
    err2 += e2 * e2;
    err += e * e;
  }
  double deno = err + 0.01 * err2;
  if (deno <= 0.0) deno = 1.0;
  out.error = std::abs(h) * err / std::sqrt(deno * static_cast<double>(n));
  if (!std::isfinite(out.error)) out.error = std::numeric_limits<double>::infinity();
  if (!(out.error <= 1.0)) return out;

  const Vector k13 = f(out.z1);
  out.f1 = k13;

  auto& c = out.dense.c;
  const Vector ydiff = out.z1 - y;
  const Vector bspl = h * k1 - ydiff;
  c[0] = y;
  c[1] = ydiff;
  c[2] = bspl;
  c[3] = ydiff - h * k13 - bspl;
  c[4] = d41 * k1 + d46 * k6 + d47 * k7 + d48 * k8 + d49 * k9 + d410 * k10 + d411 * k11 +
         d412 * k12;
  c[5] = d51 * k1 + d56 * k6 + d57 * k7 + d58 * k8 + d59 * k9 + d510 * k10 + d511 * k11 +
         d512 * k12;
  c[6] = d61 * k1 + d66 * k6 + d67 * k7 + d68 * k8 + d69 * k9 + d610 * k10 + d611 * k11 +
         d612 * k12;
  c[7] = d71 * k1 + d76 * k6 + d77 * k7 + d78 * k8 + d79 * k9 + d710 * k10 + d711 * k11 +
         d712 * k12;

  const Vector k14 = f(y + h * (a141 * k1 + a147 * k7 + a148 * k8 + a149 * k9 + a1410 * k10 +
                                a1411 * k11 + a1412 * k12 + a1413 * k13));
  const Vector k15 = f(y + h * (a151 * k1 + a156 * k6 + a157 * k7 + a158 * k8 + a1511 * k11 +
                                a1512 * k12 + a1513 * k13 + a1514 * k14));
  const Vector k16 = f(y + h * (a161 * k1 + a166 * k6 + a167 * k7 + a168 * k8 + a169 * k9 +
                                a1613 * k13 + a1614 * k14 + a1615 * k15));
  c[4] = h * (c[4] + d413 * k13 + d414 * k14 + d415 * k15 + d416 * k16);
  c[5] = h * (c[5] + d513 * k13 + d514 * k14 + d515 * k15 + d516 * k16);
  c[6] = h * (c[6] + d613 * k13 + d614 * k14 + d615 * k15 + d616 * k16);
  c[7] = h * (c[7] + d713 * k13 + d714 * k14 + d715 * k15 + d716 * k16);

  out.dense.t0 = t;
  out.dense.h = h;
  out.dense.t_end = t + h;
  return out;
}

double Dop853::initial_step(const Vector& y, const Vector& f0, double h_max) {
  double dnf = 0.0, dny = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double sk = cfg_.abs_tol + cfg_.rel_tol * std::abs(y[i]);
    dnf += (f0[i] / sk) * (f0[i] / sk);
    dny += (y[i] / sk) * (y[i] / sk);
  }
  double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : std::sqrt(dny / dnf) * 0.01;
  h = std::min(h, h_max);
  double der2 = 0.0;
  try {
    const Vector f1 = f(y + h * f0);
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double sk = cfg_.abs_tol + cfg_.rel_tol * std::abs(y[i]);
      der2 += ((f1[i] - f0[i]) / sk) * ((f1[i] - f0[i]) / sk);
    }
    der2 = std::sqrt(der2) / h;
  } catch (const Error&) {
    return h * 1e-3;
  }
  const double der12 = std::max(std::abs(der2), std::sqrt(dnf));
  const double h1 = der12 <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 0.125);
  return std::min({100.0 * h, h1, h_max});
}

double Dop853::step_factor(double error) {
  if (error <= 0.0) return kMaxGrow;
  const double fac = std::pow(error, 0.125) / kSafety;
  return 1.0 / std::clamp(fac, 1.0 / kMaxGrow, 1.0 / kMaxShrink);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Smooth driver

namespace {

bool is_boundary(ErrorKind k) {
  return k == ErrorKind::domain || k == ErrorKind::chart_exit || k == ErrorKind::degeneracy;
}

Termination termination_for(ErrorKind k) {
  return k == ErrorKind::degeneracy ? Termination::degeneracy : Termination::chart_exit;
}

}  // namespace

Trajectory integrate_smooth(const Rhs& rhs, const Vector& z0, double t0, double t1,
                            const IntegratorConfig& cfg) {
  cfg.validate();
  if (!(t1 > t0)) fail(ErrorKind::invalid_argument, "integration interval must satisfy t1 > t0");

  Trajectory traj;
  traj.t0 = t0;
  traj.t1 = t1;
  traj.tag = SolverTag::smooth;
  traj.position_dim = static_cast<int>(z0.size());
  traj.times.push_back(t0);
  traj.states.push_back(z0);

  detail::Dop853 rk(rhs, cfg);
  Vector z = z0;
  Vector f0 = rhs(z0);
  double t = t0;
  double h = rk.initial_step(z, f0, std::min(cfg.max_step, t1 - t0));
  bool rejected = false;

  while (t < t1) {
    if (traj.steps_taken >= cfg.max_steps) {
      traj.termination = Termination::step_underflow;
      traj.message = "step limit reached";
      break;
    }
    const double h_min = 1e-14 * std::max(1.0, std::abs(t));
    bool last = false;
    if (t + 1.01 * h >= t1) {
      h = t1 - t;
      last = true;
    }
    detail::StepResult res;
    try {
      res = rk.step(t, z, f0, h);
    } catch (const Error& e) {
      if (!is_boundary(e.kind())) throw;
      h *= 0.25;
      if (h < h_min) {
        traj.termination = termination_for(e.kind());
        traj.message = e.what();
        break;
      }
      continue;
    }
    if (res.error > 1.0) {
      h *= std::max(kMaxShrink, kSafety / std::pow(res.error, 0.125));
      rejected = true;
      if (h < h_min) {
        traj.termination = Termination::step_underflow;
        traj.message = "step size underflow at t = " + num(t);
        break;
      }
      continue;
    }
    const double t_new = last ? t1 : t + h;
    res.dense.t_end = t_new;
    if (last) res.z1 = res.dense.eval(t1);
    res.dense.end = res.z1;
    traj.dense.push(std::move(res.dense));
    traj.times.push_back(t_new);
    traj.states.push_back(res.z1);
    ++traj.steps_taken;
    z = std::move(res.z1);
    f0 = std::move(res.f1);
    t = t_new;
    double h_new = h * detail::Dop853::step_factor(res.error);
    if (rejected) h_new = std::min(h_new, h);
    rejected = false;
    h = std::min(h_new, cfg.max_step);
  }
  traj.rhs_evaluations = rk.evaluations();
  return traj;
}

// ---------------------------------------------------------------------------
// Event location

std::optional<LocatedEvent> locate_root(const std::function<double(double)>& g, double t_lo,
                                        double t_hi, double event_tol, double surface_tol) {
  constexpr int kScan = 8;
  const double g0 = g(t_lo);
  if (g0 == 0.0) return LocatedEvent{t_lo, false};
  const double ref = g0 > 0.0 ? 1.0 : -1.0;

  std::array<double, kScan + 1> ts{}, gs{};
  for (int i = 0; i <= kScan; ++i) {
    ts[i] = i == kScan ? t_hi : t_lo + (t_hi - t_lo) * i / kScan;
    gs[i] = i == 0 ? g0 : g(ts[i]);
  }

  auto bisect = [&](double lo, double hi) {
    while (hi - lo > event_tol) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if (ref * g(mid) < 0.0) hi = mid;
      else lo = mid;
    }
    return hi;
  };

  for (int i = 1; i <= kScan; ++i) {
    if (ref * gs[i] < 0.0) return LocatedEvent{bisect(ts[i - 1], ts[i]), false};
  }

  // No sign change at the scan points: refine the minimum of ref * g.
  int imin = 0;
  for (int i = 1; i <= kScan; ++i) {
    if (ref * gs[i] < ref * gs[imin]) imin = i;
  }
  double a = ts[std::max(imin - 1, 0)];
  double b = ts[std::min(imin + 1, kScan)];
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
  double f1 = ref * g(x1), f2 = ref * g(x2);
  for (int it = 0; it < 200 && b - a > event_tol; ++it) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = ref * g(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = ref * g(x2);
    }
    if (f1 < 0.0 || f2 < 0.0) break;
  }
  double t_min = f1 < f2 ? x1 : x2;
  double g_min = std::min(f1, f2);
  if (ref * gs[imin] < g_min) {
    t_min = ts[imin];
    g_min = ref * gs[imin];
  }
  if (g_min < 0.0) {
    // Two crossings between scan points; the first lies before t_min.
    double lo = ts[std::max(imin - 1, 0)];
    return LocatedEvent{bisect(lo, t_min), false};
  }
  if (g_min <= surface_tol) return LocatedEvent{t_min, true};
  return std::nullopt;
}

std::optional<LocatedEvent> locate_event(const DenseOutput& dense,
                                         const SwitchingSurface& surface, double t_lo,
                                         double t_hi, double event_tol, double surface_tol) {
  return locate_root([&](double t) { return surface.sigma(dense.eval(t)); }, t_lo, t_hi,
                     event_tol, surface_tol);
}

}  // namespace lipgeo
