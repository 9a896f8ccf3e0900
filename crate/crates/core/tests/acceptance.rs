//! End-to-end acceptance suite for the paper's parameter set.
//!
//! Runs as a plain binary (`harness = false`) so the expensive shared data
//! (χ = 0 trajectories, the t = 1000 ps characteristic-function scan and the
//! moment series) is computed once. Prints one `[PASS]`/`[FAIL]` line per
//! criterion and exits nonzero if any criterion fails. `[INFO]` lines are
//! diagnostics and never affect the verdict.

use std::cell::OnceCell;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use heatcount_core::analysis::{detrended_std, envelope_peaks, linear_slope, PeakRule};
use heatcount_core::engine::{CountingVariant, HcRcme};
use heatcount_core::ergotropy::{ergotropy_series, ErgotropyReport};
use heatcount_core::ibm;
use heatcount_core::linalg::{hermiticity_defect, hermitian_eigenvalues, trace};
use heatcount_core::model::{map_to_rc, reorganization_energy, ModelParams, HBAR};
use heatcount_core::quadrature::QuadratureSpec;
use heatcount_core::statistics::{
    cf_scan, fd_mean, fd_variance, moment_series, step_grid, CfScan, CfSource, MomentSeries,
};
use heatcount_core::{Result, C64};

const M_BASE: usize = 20;
const M_CHECK: usize = 28;
const CF_TIME: f64 = 1000.0;
const CHI_EPS: f64 = 0.005;
const BUDGET: Duration = Duration::from_secs(15 * 60);

use CountingVariant::{FullEnvironment as Full, ResidualEnvironment as Residual};

/// `⟨σ_x⟩` and `2|ρ_eg|` along a χ = 0 trajectory.
struct Trajectory {
    sigma_x: Vec<f64>,
    coherence: Vec<f64>,
}

struct Moments {
    full: MomentSeries,
    residual: MomentSeries,
    exact_mean: Vec<f64>,
    exact_variance: Vec<f64>,
}

struct Ctx {
    quad: QuadratureSpec,
    short_grid: Vec<f64>,
    long_grid: Vec<f64>,
    chi_grid: Vec<f64>,
    models: [OnceCell<HcRcme>; 2],
    short: [OnceCell<Trajectory>; 2],
    long: [OnceCell<Trajectory>; 2],
    exact_short: OnceCell<Vec<f64>>,
    exact_long: OnceCell<Vec<f64>>,
    exact_envelope: OnceCell<Vec<f64>>,
    cf: OnceCell<CfScan>,
    moments_short: [OnceCell<Moments>; 2],
    moments_long: [OnceCell<Moments>; 2],
    ergotropy: OnceCell<ErgotropyReport>,
}

fn slot(m: usize) -> usize {
    usize::from(m != M_BASE)
}

fn unwrap<T>(r: Result<T>) -> T {
    r.unwrap_or_else(|e| panic!("{e}"))
}

impl Ctx {
    fn new() -> Self {
        Self {
            quad: QuadratureSpec::default(),
            short_grid: unwrap(step_grid(0.0, 5.0, 0.005)),
            long_grid: unwrap(step_grid(0.0, 300.0, 0.1)),
            chi_grid: unwrap(step_grid(-1.0, 1.0, 0.025)),
            models: Default::default(),
            short: Default::default(),
            long: Default::default(),
            exact_short: OnceCell::new(),
            exact_long: OnceCell::new(),
            exact_envelope: OnceCell::new(),
            cf: OnceCell::new(),
            moments_short: Default::default(),
            moments_long: Default::default(),
            ergotropy: OnceCell::new(),
        }
    }

    fn model(&self, m: usize) -> &HcRcme {
        self.models[slot(m)].get_or_init(|| {
            unwrap(HcRcme::from_params(ModelParams {
                m_rc: m,
                ..ModelParams::default()
            }))
        })
    }

    fn trajectory(&self, m: usize, grid: &[f64]) -> Trajectory {
        let mut tr = Trajectory {
            sigma_x: Vec::with_capacity(grid.len()),
            coherence: Vec::with_capacity(grid.len()),
        };
        unwrap(self.model(m).dynamics_chi0_each(grid, |s| {
            tr.sigma_x.push(s.sigma_x);
            tr.coherence.push(s.coherence_magnitude());
            Ok(())
        }));
        tr
    }

    fn short(&self, m: usize) -> &Trajectory {
        self.short[slot(m)].get_or_init(|| self.trajectory(m, &self.short_grid))
    }

    fn long(&self, m: usize) -> &Trajectory {
        self.long[slot(m)].get_or_init(|| self.trajectory(m, &self.long_grid))
    }

    fn exact_on(&self, grid: &[f64], f: fn(f64, &ModelParams, &QuadratureSpec) -> Result<f64>) -> Vec<f64> {
        let p = ModelParams::default();
        grid.iter().map(|&t| unwrap(f(t, &p, &self.quad))).collect()
    }

    fn exact_short(&self) -> &[f64] {
        self.exact_short
            .get_or_init(|| self.exact_on(&self.short_grid, ibm::exact_coherence_with))
    }

    fn exact_long(&self) -> &[f64] {
        self.exact_long
            .get_or_init(|| self.exact_on(&self.long_grid, ibm::exact_coherence_with))
    }

    fn exact_envelope(&self) -> &[f64] {
        self.exact_envelope
            .get_or_init(|| self.exact_on(&self.long_grid, ibm::exact_coherence_envelope_with))
    }

    fn cf(&self) -> &CfScan {
        self.cf.get_or_init(|| {
            let sources = [CfSource::Rcme(Full), CfSource::Rcme(Residual), CfSource::Exact];
            unwrap(cf_scan(&sources, &self.chi_grid, &[CF_TIME], self.model(M_BASE), &self.quad))
        })
    }

    fn moments_on(&self, m: usize, grid: &[f64]) -> Moments {
        let model = self.model(m);
        let mut series = unwrap(moment_series(&[Full, Residual], grid, CHI_EPS, model)).into_iter();
        let p = *model.params();
        Moments {
            full: series.next().expect("two variants"),
            residual: series.next().expect("two variants"),
            exact_mean: grid.iter().map(|&t| unwrap(ibm::exact_mean_with(t, &p, &self.quad))).collect(),
            exact_variance: grid
                .iter()
                .map(|&t| unwrap(ibm::exact_variance_with(t, &p, &self.quad)))
                .collect(),
        }
    }

    fn moments_short(&self, m: usize) -> &Moments {
        self.moments_short[slot(m)].get_or_init(|| self.moments_on(m, &unwrap(step_grid(0.0, 10.0, 0.01))))
    }

    fn moments_long(&self, m: usize) -> &Moments {
        self.moments_long[slot(m)].get_or_init(|| self.moments_on(m, &unwrap(step_grid(0.0, 500.0, 0.5))))
    }

    fn ergotropy(&self) -> &ErgotropyReport {
        self.ergotropy.get_or_init(|| {
            let grid = unwrap(step_grid(0.0, 300.0, 0.05));
            unwrap(ergotropy_series(self.model(M_BASE), &grid))
        })
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn max_abs(a: &[f64]) -> f64 {
    a.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

fn fmt_times(t: &[f64]) -> String {
    let parts: Vec<String> = t.iter().map(|x| format!("{x:.1}")).collect();
    format!("[{}]", parts.join(", "))
}

/// One named check inside a criterion.
struct Check {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Check {
    Check {
        pass,
        detail: detail.into(),
    }
}

fn info(line: impl AsRef<str>) {
    println!("[INFO] {}", line.as_ref());
}

// --- criteria ----------------------------------------------------------------

fn coherence_benchmark(ctx: &Ctx, m: usize) -> (f64, f64) {
    (
        max_abs_diff(&ctx.short(m).sigma_x, ctx.exact_short()),
        max_abs_diff(&ctx.long(m).sigma_x, ctx.exact_long()),
    )
}

fn criterion_1(ctx: &Ctx) -> Vec<Check> {
    let start = Instant::now();
    let (short, long) = coherence_benchmark(ctx, M_BASE);
    let secs = start.elapsed().as_secs_f64();
    info(format!("criterion 1 dynamics and oracle evaluation took {secs:.1} s"));
    vec![
        check(short <= 0.02, format!("max |<sx> err| on [0,5] ps = {short:.3e} (limit 0.02)")),
        check(long <= 0.02, format!("max |<sx> err| on [0,300] ps = {long:.3e} (limit 0.02)")),
    ]
}

fn recoherence_period() -> f64 {
    2.0 * std::f64::consts::PI * HBAR / ModelParams::default().omega0
}

fn spacing_check(label: &str, peaks: &[f64]) -> Check {
    let period = recoherence_period();
    if peaks.len() < 2 {
        return check(false, format!("{label}: fewer than two envelope maxima {}", fmt_times(peaks)));
    }
    let worst = peaks
        .windows(2)
        .map(|w| ((w[1] - w[0]) / period - 1.0).abs())
        .fold(0.0, f64::max);
    check(
        worst <= 0.05,
        format!(
            "{label} maxima {} spaced within {:.2}% of {period:.2} ps (limit 5%)",
            fmt_times(peaks),
            100.0 * worst
        ),
    )
}

fn criterion_2_for(ctx: &Ctx, m: usize) -> Vec<Check> {
    let rule = PeakRule::default();
    let rc = unwrap(envelope_peaks(&ctx.long_grid, &ctx.long(m).coherence, rule));
    let ex = unwrap(envelope_peaks(&ctx.long_grid, ctx.exact_envelope(), rule));
    let mut out = vec![spacing_check("RCME", &rc), spacing_check("exact", &ex)];
    if rc.len() == ex.len() {
        let worst = rc.iter().zip(&ex).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        out.push(check(worst <= 1.0, format!("peak times differ by at most {worst:.2} ps (limit 1 ps)")));
    } else {
        out.push(check(
            false,
            format!("peak counts differ: RCME {} vs exact {}", rc.len(), ex.len()),
        ));
    }
    out
}

fn criterion_2(ctx: &Ctx) -> Vec<Check> {
    criterion_2_for(ctx, M_BASE)
}

fn cf_at(scan: &CfScan, source: CfSource) -> Vec<C64> {
    scan.get(source).expect("scanned source").values.column(0).to_vec()
}

fn criterion_3(ctx: &Ctx) -> Vec<Check> {
    let scan = ctx.cf();
    let mut out = Vec::new();
    if !scan.failures.is_empty() {
        out.push(check(false, format!("{} scan points failed", scan.failures.len())));
    }
    let f_rc = cf_at(scan, CfSource::Rcme(Full));
    let f_ex = cf_at(scan, CfSource::Exact);
    let worst = f_rc.iter().zip(&f_ex).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    out.push(check(
        worst <= 0.05,
        format!(
            "max |F_rc - F_ex| at t = {CF_TIME} ps over {} chi points in [-1,1] = {worst:.3e} (limit 0.05)",
            ctx.chi_grid.len()
        ),
    ));
    let zero = ctx.chi_grid.iter().position(|c| c.abs() < 1e-12).expect("grid contains 0");
    for source in [CfSource::Rcme(Full), CfSource::Rcme(Residual), CfSource::Exact] {
        let phi0 = cf_at(scan, source)[zero];
        let dev = (phi0 - C64::new(1.0, 0.0)).norm();
        out.push(check(dev <= 1e-6, format!("|{}(0) - 1| = {dev:.1e} (limit 1e-6)", source.label())));
    }
    out
}

fn moment_checks(label: &str, m: &Moments) -> Vec<Check> {
    let mean_ref = max_abs(&m.exact_mean);
    let var_ref = max_abs(&m.exact_variance);
    let mean_dev = max_abs_diff(&m.full.mean, &m.exact_mean) / mean_ref;
    let var_dev = max_abs_diff(&m.full.variance, &m.exact_variance) / var_ref;
    vec![
        check(
            mean_dev <= 0.05,
            format!("{label}: mean deviation {:.2}% of max exact mean (limit 5%)", 100.0 * mean_dev),
        ),
        check(
            var_dev <= 0.07,
            format!("{label}: variance deviation {:.2}% of max exact variance (limit 7%)", 100.0 * var_dev),
        ),
    ]
}

fn criterion_4_for(ctx: &Ctx, m: usize) -> Vec<Check> {
    let mut out = moment_checks("[0,10] ps", ctx.moments_short(m));
    out.extend(moment_checks("[0,500] ps", ctx.moments_long(m)));
    out
}

fn criterion_4(ctx: &Ctx) -> Vec<Check> {
    criterion_4_for(ctx, M_BASE)
}

fn criterion_5(ctx: &Ctx) -> Vec<Check> {
    let m = ctx.moments_long(M_BASE);
    let t = &m.full.t_grid;
    let full = unwrap(detrended_std(t, &m.full.mean, 20.0, 200.0, 500.0));
    let residual = unwrap(detrended_std(t, &m.residual.mean, 20.0, 200.0, 500.0));
    let ratio = residual / full;
    vec![check(
        ratio <= 0.25,
        format!("detrended mean std on [200,500] ps: R {residual:.3e}, F {full:.3e}, ratio {ratio:.3} (limit 0.25)"),
    )]
}

fn criterion_6(ctx: &Ctx) -> Vec<Check> {
    let m = ctx.moments_long(M_BASE);
    let t = &m.full.t_grid;
    let slope = unwrap(linear_slope(t, &m.residual.variance));
    let residual = unwrap(detrended_std(t, &m.residual.variance, 20.0, 0.0, 500.0));
    let full = unwrap(detrended_std(t, &m.full.variance, 20.0, 0.0, 500.0));
    vec![
        check(slope > 0.0, format!("var_R slope over [0,500] ps = {slope:.3e} eV^2/ps (must be > 0)")),
        check(
            residual < full,
            format!("detrended variance std: R {residual:.3e} vs F {full:.3e} (R must be smaller)"),
        ),
    ]
}

fn criterion_7(ctx: &Ctx) -> Vec<Check> {
    let r = ctx.ergotropy();
    let e0 = r.tls_ergotropy[0];
    let mut out = vec![check((e0 - 1.0).abs() <= 1e-6, format!("TLS ergotropy at t = 0 is {e0:.9} eV (1 +- 1e-6)"))];
    let violations: Vec<usize> = (0..r.t_grid.len())
        .filter(|&k| r.es_ergotropy[k] < r.tls_ergotropy[k])
        .collect();
    let margin = r
        .es_ergotropy
        .iter()
        .zip(&r.tls_ergotropy)
        .map(|(a, b)| a - b)
        .fold(f64::INFINITY, f64::min);
    out.push(check(
        violations.is_empty(),
        format!(
            "ES >= TLS ergotropy at {}/{} points of the 0.05 ps grid (min margin {margin:.3e} eV)",
            r.t_grid.len() - violations.len(),
            r.t_grid.len()
        ),
    ));
    let rule = PeakRule::default();
    let erg = unwrap(envelope_peaks(&r.t_grid, &r.tls_ergotropy, rule));
    let coh = unwrap(envelope_peaks(&r.t_grid, &r.coherence, rule));
    let aligned = erg.len() == coh.len() && erg.iter().zip(&coh).all(|(a, b)| (a - b).abs() <= 2.0);
    out.push(check(
        aligned,
        format!("TLS ergotropy peaks {} vs |<sx>| envelope peaks {} (within 2 ps)", fmt_times(&erg), fmt_times(&coh)),
    ));
    out
}

/// Empirical orders `log2(e(h)/e(h/2))` of the sup-norm errors of the
/// finite-difference moments against the closed forms.
fn fd_orders() -> (Vec<f64>, Vec<f64>, Vec<(f64, f64)>) {
    let p = ModelParams::default();
    let quad = QuadratureSpec::default().with_rel_tol(1e-12);
    let times: Vec<f64> = (1..=20).map(|k| 0.5 * k as f64).chain((1..=10).map(|k| 50.0 * k as f64)).collect();
    let reference: Vec<(f64, f64)> = times
        .iter()
        .map(|&t| (unwrap(ibm::exact_mean_with(t, &p, &quad)), unwrap(ibm::exact_variance_with(t, &p, &quad))))
        .collect();
    let errors: Vec<(f64, f64)> = [0.02, 0.01, 0.005]
        .iter()
        .map(|&eps| {
            times.iter().zip(&reference).fold((0.0f64, 0.0f64), |(em, ev), (&t, &(mean, var))| {
                let phi = unwrap(ibm::exact_cf_with(eps, t, &p, &quad));
                let m = unwrap(fd_mean(phi, eps));
                let v = unwrap(fd_variance(phi, m, eps));
                (em.max((m - mean).abs()), ev.max((v - var).abs()))
            })
        })
        .collect();
    let order = |f: fn(&(f64, f64)) -> f64| -> Vec<f64> {
        errors.windows(2).map(|w| (f(&w[0]) / f(&w[1])).log2()).collect()
    };
    (order(|e| e.0), order(|e| e.1), errors)
}

/// Orders are judged at two decimals: the estimate approaches its
/// asymptotic value with an O(χ_ε²) correction of either sign.
fn order_at_least(orders: &[f64], min: f64) -> bool {
    orders.iter().all(|&o| (o * 100.0).round() / 100.0 >= min)
}

fn criterion_8(ctx: &Ctx, started: Instant) -> Vec<Check> {
    let mut out = Vec::new();
    let model = ctx.model(M_BASE);
    let p = *model.params();

    // χ = 0 reduction
    let r = unwrap(model.rate_operators(0.0));
    let diff = |a: &ndarray::Array2<C64>, b: &ndarray::Array2<C64>| {
        a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    };
    let d24 = diff(r.a2(), r.a4());
    let d31 = diff(r.a3(), r.a1());
    out.push(check(
        d24 <= 1e-12 && d31 <= 1e-12,
        format!("chi = 0 reduction: max|A2-A4| = {d24:.1e}, max|A3-A1| = {d31:.1e} (limit 1e-12)"),
    ));

    // trace, Hermiticity and positivity over 1000 ps
    let grid = unwrap(step_grid(0.0, 1000.0, 1.0));
    let (mut drift, mut herm, mut min_eig) = (0.0f64, 0.0f64, f64::INFINITY);
    unwrap(model.dynamics_chi0_each(&grid, |s| {
        drift = drift.max((trace(&s.rho_es) - C64::new(1.0, 0.0)).norm());
        herm = herm.max(hermiticity_defect(&s.rho_es));
        min_eig = min_eig.min(hermitian_eigenvalues(&s.rho_es)?[0]);
        Ok(())
    }));
    out.push(check(drift <= 1e-8, format!("trace drift over 1000 ps = {drift:.1e} (limit 1e-8)")));
    out.push(check(herm <= 1e-8, format!("Hermiticity defect over 1000 ps = {herm:.1e} (limit 1e-8)")));
    out.push(check(min_eig >= -1e-6, format!("min eigenvalue of rho_ES = {min_eig:.1e} (limit -1e-6)")));

    // detailed balance of the dissipator entries
    let es = model.extended_system();
    let beta = unwrap(p.beta());
    let lam = &es.spectral.eigenvalues;
    let (mut kms, mut pairs) = (0.0f64, 0usize);
    for m in 0..es.dim() {
        for n in 0..es.dim() {
            let gap = lam[m] - lam[n];
            let emit = r.eigenbasis[3][[m, n]];
            if gap > 1e-9 && emit.norm() > 1e-14 {
                let ratio = r.eigenbasis[0][[m, n]] / emit;
                kms = kms.max((ratio / (-beta * gap).exp() - 1.0).norm());
                pairs += 1;
            }
        }
    }
    out.push(check(
        pairs > 0 && kms <= 1e-10,
        format!("KMS ratios over {pairs} transitions: max relative error {kms:.1e} (limit 1e-10)"),
    ));

    // Φ(-χ) = Φ(χ)* on the symmetric grid
    let scan = ctx.cf();
    let n = ctx.chi_grid.len();
    for source in [CfSource::Rcme(Full), CfSource::Rcme(Residual), CfSource::Exact] {
        let phi = cf_at(scan, source);
        let worst = (0..n).map(|k| (phi[n - 1 - k] - phi[k].conj()).norm()).fold(0.0, f64::max);
        out.push(check(
            worst <= 1e-8,
            format!("{} conjugate symmetry: max |phi(-chi) - phi(chi)*| = {worst:.1e} (limit 1e-8)", source.label()),
        ));
    }

    // reorganization energy
    let rc = unwrap(map_to_rc(&p));
    let reorg = unwrap(reorganization_energy(&p, Some(200.0 * p.omega0)));
    let mapped = rc.lambda_rc.powi(2) / rc.omega_rc;
    let rel = (reorg - mapped).abs() / mapped;
    out.push(check(rel < 1e-3, format!("reorganization identity relative error {rel:.2e} (limit 1e-3)")));

    // finite-difference orders
    let (mean_orders, var_orders, errors) = fd_orders();
    let listed: Vec<String> = errors.iter().map(|(m, v)| format!("({m:.3e}, {v:.3e})")).collect();
    info(format!("finite-difference sup errors (mean, variance) for chi_eps = 0.02, 0.01, 0.005: {}", listed.join(" ")));
    out.push(check(
        order_at_least(&mean_orders, 1.0),
        format!("finite-difference mean orders {mean_orders:.6?} (>= 1)"),
    ));
    out.push(check(
        order_at_least(&var_orders, 2.0),
        format!("finite-difference variance orders {var_orders:.6?} (>= 2)"),
    ));

    // truncation stability
    let sx = |m: usize| (ctx.short(m).sigma_x.clone(), ctx.long(m).sigma_x.clone());
    let (s20, l20) = sx(M_BASE);
    let (s28, l28) = sx(M_CHECK);
    let dsx = max_abs_diff(&s20, &s28).max(max_abs_diff(&l20, &l28));
    out.push(check(
        dsx < 1e-3,
        format!("M_RC {M_BASE} -> {M_CHECK}: max |d<sx>| on the benchmark grids = {dsx:.3e} (limit 1e-3)"),
    ));
    let start = Instant::now();
    let check_scan = unwrap(cf_scan(
        &[CfSource::Rcme(Full), CfSource::Rcme(Residual)],
        &ctx.chi_grid,
        &[CF_TIME],
        ctx.model(M_CHECK),
        &ctx.quad,
    ));
    info(format!("M_RC = {M_CHECK} CF scan over {} chi points took {:.1} s", ctx.chi_grid.len(), start.elapsed().as_secs_f64()));
    let mut dcf = 0.0f64;
    for source in [CfSource::Rcme(Full), CfSource::Rcme(Residual)] {
        let base = cf_at(scan, source);
        let fine = cf_at(&check_scan, source);
        for (a, b) in base.iter().zip(fine) {
            dcf = dcf.max((a - b).norm());
        }
    }
    out.push(check(
        dcf < 1e-3 && check_scan.failures.is_empty(),
        format!("M_RC {M_BASE} -> {M_CHECK}: max |d cf_value| at t = {CF_TIME} ps on the 0.05 chi grid = {dcf:.3e} (limit 1e-3)"),
    ));

    diagnostics_at_check_truncation(ctx);

    let elapsed = started.elapsed();
    out.push(check(
        elapsed <= BUDGET,
        format!("suite runtime {:.0} s (limit {} s)", elapsed.as_secs_f64(), BUDGET.as_secs()),
    ));
    out
}

/// How the benchmark criteria fare with the larger truncation. Reported
/// only; the verdicts above use M_RC = 20 as stated.
fn diagnostics_at_check_truncation(ctx: &Ctx) {
    let (short, long) = coherence_benchmark(ctx, M_CHECK);
    info(format!(
        "M_RC = {M_CHECK}: criterion 1 deviations {short:.3e} on [0,5] ps, {long:.3e} on [0,300] ps"
    ));
    for c in criterion_2_for(ctx, M_CHECK) {
        info(format!("M_RC = {M_CHECK}: criterion 2 {} {}", verdict(c.pass), c.detail));
    }
    let grid = [CF_TIME];
    let p = ModelParams::default();
    let worst = [-1.0, -0.5, 0.5, 1.0]
        .iter()
        .map(|&chi| {
            let rc = unwrap(ctx.model(M_CHECK).cf_trace(chi, &grid, &[Full]))[0][0];
            (rc - unwrap(ibm::exact_cf_with(chi, CF_TIME, &p, &ctx.quad))).norm()
        })
        .fold(0.0, f64::max);
    info(format!("M_RC = {M_CHECK}: |F_rc - F_ex| at chi in {{+-0.5, +-1}} = {worst:.3e}"));
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn main() {
    // libtest flags such as --nocapture or test filters are accepted and ignored
    let started = Instant::now();
    let ctx = Ctx::new();
    type Criterion<'a> = Box<dyn Fn(&Ctx) -> Vec<Check> + 'a>;
    let criteria: Vec<(&str, Criterion)> = vec![
        ("coherence benchmark against the exact solution", Box::new(criterion_1)),
        ("recoherence peak structure", Box::new(criterion_2)),
        ("characteristic function near chi = 0", Box::new(criterion_3)),
        ("finite-difference moments against the closed forms", Box::new(criterion_4)),
        ("residual-variant mean oscillation suppression", Box::new(criterion_5)),
        ("residual-variant variance trend", Box::new(criterion_6)),
        ("ergotropy", Box::new(criterion_7)),
        ("structural properties", Box::new(move |c: &Ctx| criterion_8(c, started))),
    ];

    let mut failed = Vec::new();
    for (k, (name, run)) in criteria.iter().enumerate() {
        let id = k + 1;
        let t0 = Instant::now();
        let checks = catch_unwind(AssertUnwindSafe(|| run(&ctx)))
            .unwrap_or_else(|e| {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_else(|| "panic".into());
                vec![check(false, format!("aborted: {msg}"))]
            });
        let pass = checks.iter().all(|c| c.pass);
        for c in &checks {
            println!("    {} {}", if c.pass { "ok  " } else { "FAIL" }, c.detail);
        }
        println!("[{}] criterion {id}: {name} ({:.1} s)", verdict(pass), t0.elapsed().as_secs_f64());
        if !pass {
            failed.push(id);
        }
    }
    println!(
        "acceptance: {} of {} criteria passed in {:.0} s",
        criteria.len() - failed.len(),
        criteria.len(),
        started.elapsed().as_secs_f64()
    );
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
