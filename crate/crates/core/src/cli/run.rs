//! Executes a config's checks and assembles the run report.

use super::config::{CheckName, ExperimentConfig, FixtureSpec, SuiteName};
use super::suite::{paper_suite, CriterionResult, CRITERIA};
use crate::bblcheck::{
    admissibility_report, appendix_limit_residual, bbl_gap, derived_gap, equivalence_scan, GapTail,
};
use crate::error::{Error, Result};
use crate::extgrid::{read_grid, EpigraphDomain, ExtGridFn, GridSpec};
use crate::field::Field;
use crate::fixtures::{Bump, ExtremalPair, OffsetPower, PowerCost, RadialPower, Shifted, Sum};
use crate::hopflax::{hj_difference_quotient, semigroup_residual};
use crate::params::BblParams;
use crate::quad::QuadSpec;
use crate::sharpconst::{
    approx_family, assemble_constants, extremal_f, trace_gn_check, trace_refinement, weighted_trace_check, GrowthGate,
    SharpConstants, TraceReport,
};
use crate::transforms::NormSpec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::time::Instant;

/// Tabular data ready for CSV export.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct Curve {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Curve {
    fn new(name: &str, columns: &[&str]) -> Self {
        Curve { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }
}

#[derive(Debug, Clone, Serialize, serde::Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub passed: bool,
    /// Extra slack from the config on top of the built-in tolerance.
    pub tolerance: f64,
    pub error: Option<String>,
    pub result: Value,
    pub curves: Vec<Curve>,
}

#[derive(Debug, Clone, Serialize, serde::Deserialize)]
pub struct RunReport {
    pub name: String,
    pub seed: u64,
    pub passed: bool,
    pub quadrature: Value,
    pub checks: Vec<CheckReport>,
}

/// Wall times, kept apart from the report so that reruns compare bit for bit.
#[derive(Debug, Clone, Serialize)]
pub struct Timings {
    pub total_seconds: f64,
    pub checks: Vec<(String, f64)>,
}

/// Runs every check in declaration order; a failing check does not stop the others.
pub fn run_config(cfg: &ExperimentConfig) -> (RunReport, Timings) {
    let start = Instant::now();
    let mut checks = Vec::new();
    let mut times = Vec::new();
    for &name in &cfg.checks {
        let t = Instant::now();
        let tol = cfg.tolerances.get(&name).copied().unwrap_or(0.0);
        let rep = match run_check(cfg, name, tol) {
            Ok(out) => CheckReport {
                check: name.as_str().into(),
                passed: out.passed,
                tolerance: tol,
                error: None,
                result: out.result,
                curves: out.curves,
            },
            Err(e) => CheckReport {
                check: name.as_str().into(),
                passed: false,
                tolerance: tol,
                error: Some(e.to_string()),
                result: Value::Null,
                curves: vec![],
            },
        };
        times.push((name.as_str().to_string(), t.elapsed().as_secs_f64()));
        checks.push(rep);
    }
    if cfg.suite == Some(SuiteName::Paper) {
        let ids: Vec<u32> = CRITERIA.iter().map(|c| c.0).collect();
        for c in paper_suite(&ids) {
            times.push((format!("suite_{}", c.id), c.seconds));
            checks.push(criterion_report(&c));
        }
    }
    let report = RunReport {
        name: cfg.name.clone(),
        seed: cfg.seed,
        passed: checks.iter().all(|c| c.passed),
        quadrature: serde_json::to_value(&cfg.quadrature).unwrap_or(Value::Null),
        checks,
    };
    (report, Timings { total_seconds: start.elapsed().as_secs_f64(), checks: times })
}

pub fn criterion_report(c: &CriterionResult) -> CheckReport {
    CheckReport {
        check: format!("criterion_{}", c.id),
        passed: c.passed,
        tolerance: 0.0,
        error: if c.passed { None } else { Some(c.detail.clone()) },
        result: json!({ "name": c.name, "detail": c.detail, "metrics": c.metrics }),
        curves: vec![],
    }
}

struct Out {
    passed: bool,
    result: Value,
    curves: Vec<Curve>,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

/// g for the analytic checks: the extremal, possibly bumped.
#[derive(Clone)]
enum GField {
    Extremal(Shifted<PowerCost>),
    Bumped(Sum<Shifted<PowerCost>, Bump>),
}

impl Field for GField {
    fn dim(&self) -> usize {
        match self {
            GField::Extremal(g) => g.dim(),
            GField::Bumped(g) => g.dim(),
        }
    }
    fn value(&self, x: &[f64]) -> f64 {
        match self {
            GField::Extremal(g) => g.value(x),
            GField::Bumped(g) => g.value(x),
        }
    }
    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        match self {
            GField::Extremal(g) => g.gradient(x),
            GField::Bumped(g) => g.gradient(x),
        }
    }
}

/// f for the trace checks.
#[derive(Clone)]
enum TField {
    Extremal(OffsetPower),
    Bump(Bump),
}

impl Field for TField {
    fn dim(&self) -> usize {
        match self {
            TField::Extremal(f) => f.dim(),
            TField::Bump(f) => f.dim(),
        }
    }
    fn value(&self, x: &[f64]) -> f64 {
        match self {
            TField::Extremal(f) => f.value(x),
            TField::Bump(f) => f.value(x),
        }
    }
    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        match self {
            TField::Extremal(f) => f.gradient(x),
            TField::Bump(f) => f.gradient(x),
        }
    }
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    params: BblParams,
    domain: EpigraphDomain,
    norm: NormSpec,
    quad: QuadSpec,
    tol: f64,
}

impl Ctx<'_> {
    fn extremal(&self) -> Result<bool> {
        match &self.cfg.fixture {
            FixtureSpec::Extremal => Ok(true),
            FixtureSpec::Bump { center, .. } => {
                crate::error::check_dim(self.params.n, center.len())?;
                Ok(false)
            }
            FixtureSpec::GridFile { .. } => Ok(false),
        }
    }

    fn bump(&self) -> Option<Bump> {
        match &self.cfg.fixture {
            FixtureSpec::Bump { center, radius, amp } => Some(Bump { center: center.clone(), radius: *radius, amp: *amp }),
            _ => None,
        }
    }

    fn pair(&self) -> Result<ExtremalPair> {
        ExtremalPair::new(&self.domain, &self.norm, &self.params, &QuadSpec::default())
    }

    fn analytic(&self, what: &str) -> Result<(GField, PowerCost, ExtremalPair)> {
        let pair = self.pair()?;
        let g = match &self.cfg.fixture {
            FixtureSpec::Extremal => GField::Extremal(pair.g.clone()),
            FixtureSpec::Bump { .. } => {
                self.extremal()?;
                GField::Bumped(Sum { base: pair.g.clone(), extra: self.bump().unwrap() })
            }
            FixtureSpec::GridFile { .. } => {
                return Err(Error::InvalidArgument(format!("{what} needs an analytic fixture (extremal or bump)")))
            }
        };
        Ok((g, pair.w.clone(), pair))
    }

    fn trace_f(&self, what: &str) -> Result<TField> {
        match &self.cfg.fixture {
            FixtureSpec::Extremal => Ok(TField::Extremal(extremal_f(&self.params, &self.norm)?.field())),
            FixtureSpec::Bump { .. } => {
                self.extremal()?;
                Ok(TField::Bump(self.bump().unwrap()))
            }
            FixtureSpec::GridFile { .. } => Err(Error::InvalidArgument(format!("{what} needs an analytic fixture"))),
        }
    }

    /// g and W grids at `res` nodes per axis, with the growth tail when analytic.
    fn grids(&self, res: usize) -> Result<(ExtGridFn, ExtGridFn, Option<GapTail>)> {
        match &self.cfg.fixture {
            FixtureSpec::GridFile { g, w } => {
                let open = |p: &std::path::Path| -> Result<ExtGridFn> {
                    let f = std::fs::File::open(p)
                        .map_err(|e| Error::InvalidArgument(format!("cannot open grid file {}: {e}", p.display())))?;
                    read_grid(std::io::BufReader::new(f))
                };
                Ok((open(g)?, open(w)?, None))
            }
            _ => {
                self.extremal()?;
                let pair = self.pair()?;
                let r = self.cfg.quadrature.half_width;
                let (g, w) = pair.sample(&self.domain, r, res, self.bump().as_ref())?;
                let tail = matches!(self.norm, NormSpec::Euclidean | NormSpec::PNorm { .. }).then(|| pair.tail(r));
                Ok((g, w, tail))
            }
        }
    }

    fn h_list(&self) -> Result<Vec<f64>> {
        let h = self.cfg.params.as_ref().map(|p| p.h.clone()).unwrap_or_default();
        if h.is_empty() {
            return Err(Error::InvalidArgument("params.h must list at least one h".into()));
        }
        Ok(h)
    }

    /// Resolutions of the refinement levels, finest first: r, (r+1)/2, …
    fn resolutions(&self) -> Vec<usize> {
        let mut out = vec![self.cfg.quadrature.resolution];
        for _ in 1..self.cfg.quadrature.levels {
            let r = *out.last().unwrap();
            if r < 9 || r % 2 == 0 {
                break;
            }
            out.push((r + 1) / 2);
        }
        out
    }
}

fn run_check(cfg: &ExperimentConfig, name: CheckName, tol: f64) -> Result<Out> {
    let ps = cfg.params.as_ref().ok_or_else(|| Error::InvalidArgument("missing params".into()))?;
    let params = BblParams::new(ps.n, ps.a, ps.p)?;
    let spec = cfg.domain.as_ref().ok_or_else(|| Error::InvalidArgument("missing domain".into()))?;
    let domain = EpigraphDomain::from_spec(spec, ps.n)?;
    let ctx = Ctx { cfg, params, domain, norm: cfg.norm.clone(), quad: QuadSpec::mapped(cfg.quadrature.step), tol };
    match name {
        CheckName::BblGap => check_bbl_gap(&ctx),
        CheckName::DerivedGap => check_derived_gap(&ctx),
        CheckName::AppendixLimit => check_appendix(&ctx),
        CheckName::Semigroup => check_semigroup(&ctx),
        CheckName::HjQuotient => check_hj(&ctx),
        CheckName::TraceGn => check_trace(&ctx, false),
        CheckName::WeightedTrace => check_trace(&ctx, true),
        CheckName::Constants => check_constants(&ctx),
        CheckName::Admissibility => check_admissibility(&ctx),
        CheckName::EquivalenceScan => check_equivalence(&ctx),
    }
}

/// gap ≥ −ε at every h; for the extremal also |gap| ≤ ε and ε shrinking with the grid.
fn check_bbl_gap(ctx: &Ctx) -> Result<Out> {
    let hs = ctx.h_list()?;
    let extremal = ctx.extremal()?;
    let mut passed = true;
    let mut reports = Vec::new();
    let mut curve = Curve::new("gap", &["h", "gap", "error"]);
    let res_list = if matches!(ctx.cfg.fixture, FixtureSpec::GridFile { .. }) { vec![0] } else { ctx.resolutions() };
    let (g, w, tail) = ctx.grids(res_list[0])?;
    for &h in &hs {
        let r = bbl_gap(&g, &w, &ctx.params.with_h(h)?, tail)?;
        passed &= r.gap >= -r.quadrature_error_estimate - ctx.tol;
        if extremal {
            passed &= r.gap.abs() <= r.quadrature_error_estimate + ctx.tol;
        }
        curve.rows.push(vec![h, r.gap, r.quadrature_error_estimate]);
        reports.push(r);
    }
    let mut curves = vec![curve];
    if extremal && res_list.len() > 1 {
        let h = hs[hs.len() / 2];
        let mut refine = Curve::new("gap_refinement", &["dx", "gap", "error"]);
        for &res in &res_list {
            let (g, w, tail) = ctx.grids(res)?;
            let r = bbl_gap(&g, &w, &ctx.params.with_h(h)?, tail)?;
            refine.rows.push(vec![g.grid().max_step(), r.gap, r.quadrature_error_estimate]);
        }
        // finest first, so the error must grow along the list
        passed &= refine.rows.windows(2).all(|p| p[0][2] < p[1][2]);
        curves.push(refine);
    }
    Ok(Out { passed, result: to_value(&reports), curves })
}

fn check_derived_gap(ctx: &Ctx) -> Result<Out> {
    let (g, w, _) = ctx.analytic("derived_gap")?;
    let r = derived_gap(&g, &w, &ctx.params, &ctx.domain, &ctx.norm, &ctx.quad, ctx.cfg.admissibility.as_ref())?;
    let eps = r.quadrature_error_estimate + ctx.tol;
    let passed = if ctx.extremal()? { r.gap.abs() <= eps.max(1e-8) } else { r.gap >= -eps };
    Ok(Out { passed, result: to_value(&r), curves: vec![] })
}

/// |residual| at the smallest h within 5% of the limit; (iii) ≡ 0 on cones.
fn check_appendix(ctx: &Ctx) -> Result<Out> {
    let (g, w, _) = ctx.analytic("appendix_limit")?;
    let mut hs = ctx.h_list()?;
    hs.sort_by(|a, b| b.total_cmp(a));
    let r = appendix_limit_residual(&g, &w, &ctx.params, &ctx.domain, &ctx.norm, &hs, &ctx.quad, ctx.cfg.admissibility.as_ref())?;
    let last = r.rows.last().expect("h list is non-empty");
    let mut passed = last.residual.abs() <= 0.05 * r.limit.abs() + last.error + ctx.tol;
    if ctx.domain.is_homogeneous() {
        passed &= r.rows.iter().all(|row| row.term_iii == 0.0);
    }
    let mut curve = Curve::new("appendix", &["h", "term_i", "term_ii", "term_iii", "residual"]);
    for row in &r.rows {
        curve.rows.push(vec![row.h, row.term_i, row.term_ii, row.term_iii, row.residual]);
    }
    Ok(Out { passed, result: to_value(&r), curves: vec![curve] })
}

/// Q_h against Q_{h−s}∘Q_s with h the largest and s the smallest listed value.
fn check_semigroup(ctx: &Ctx) -> Result<Out> {
    let hs = ctx.h_list()?;
    let h = hs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut s = hs.iter().cloned().fold(f64::INFINITY, f64::min);
    if s >= h {
        s = h / 3.0;
    }
    let (g, w, _) = ctx.grids(ctx.cfg.quadrature.resolution)?;
    let r = semigroup_residual(&g, &w, h, s)?;
    let dx = g.grid().max_step();
    Ok(Out { passed: r <= 5.0 * dx + ctx.tol, result: json!({ "h": h, "s": s, "residual": r, "dx": dx }), curves: vec![] })
}

/// Difference quotients at 20 seeded interior points against −W*(∇g), within 1% of scale.
fn check_hj(ctx: &Ctx) -> Result<Out> {
    let (g, w, _) = ctx.analytic("hj_quotient")?;
    // the cost on all of ℝⁿ on a centred cube, doubled until its edge slope dominates ∇g
    let w = PowerCost::new(w.c, w.q, w.norm.clone(), w.n);
    let n = ctx.params.n;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.cfg.seed);
    let points: Vec<Vec<f64>> = (0..20)
        .map(|_| {
            let x1: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut x = x1.clone();
            x.push(ctx.domain.phi(&x1) + rng.gen_range(0.3..1.5));
            x
        })
        .collect();
    let hs = [0.08, 0.04, 0.02, 0.01];
    let base = 4 * ctx.cfg.quadrature.resolution;
    let mut rows = Vec::new();
    for k in 0..4 {
        let r = ctx.cfg.quadrature.half_width * f64::from(1u32 << k);
        let wgrid = ExtGridFn::from_fn(GridSpec::cube(n, -r, r, (base << k) + 1)?, |y| w.value(y))?;
        match points.iter().map(|x| hj_difference_quotient(&g, &wgrid, &hs, x, Some(&ctx.domain))).collect::<Result<Vec<_>>>() {
            Ok(r) => {
                rows = r;
                break;
            }
            Err(Error::Hypothesis(m)) if m.contains("W grid too small") && k < 3 => continue,
            Err(e) => return Err(e),
        }
    }
    let scale = rows.iter().map(|r| r.reference.abs()).fold(0.0, f64::max);
    let worst = rows.iter().map(|r| r.deviation).fold(0.0, f64::max);
    Ok(Out {
        passed: worst <= 0.01 * scale + ctx.tol,
        result: json!({ "h": hs, "scale": scale, "max_deviation": worst, "points": rows }),
        curves: vec![],
    })
}

/// Extremal: ratio = 1 within 2%, with a refinement curve. Bump: ratio ≤ 1 + ε.
/// Each ε in params.eps also checks the approximating family f_ε.
fn check_trace(ctx: &Ctx, weighted: bool) -> Result<Out> {
    let what = if weighted { "weighted_trace" } else { "trace_gn" };
    let f = ctx.trace_f(what)?;
    let gate = GrowthGate::default();
    let eval = |f: &dyn FieldRef, quad: &QuadSpec| -> Result<(TraceReport, SharpConstants)> {
        if weighted {
            weighted_trace_check(f.get(), &ctx.params, &ctx.domain, &ctx.norm, quad, &gate)
        } else {
            trace_gn_check(f.get(), &ctx.params, &ctx.domain, &ctx.norm, quad)
        }
    };
    let (r, k) = eval(&f, &ctx.quad)?;
    let extremal = ctx.extremal()?;
    let mut passed = if extremal {
        (r.ratio - 1.0).abs() <= 0.02 + ctx.tol
    } else {
        r.ratio <= 1.0 + r.quadrature_error + ctx.tol
    };
    let mut curves = Vec::new();
    if extremal && ctx.cfg.quadrature.levels > 1 {
        let steps: Vec<f64> = (0..ctx.cfg.quadrature.levels).rev().map(|l| ctx.cfg.quadrature.step * 2f64.powi(l as i32)).collect();
        let rows: Vec<(f64, f64)> = if weighted {
            steps
                .iter()
                .map(|&s| eval(&f, &QuadSpec::mapped(s)).map(|(r, _)| (s, (r.ratio - 1.0).abs())))
                .collect::<Result<_>>()?
        } else {
            trace_refinement(&f, &ctx.params, &ctx.domain, &ctx.norm, &steps)?
        };
        let mut curve = Curve::new("refinement", &["dx", "abs_ratio_minus_one"]);
        curve.rows = rows.iter().map(|(s, e)| vec![*s, *e]).collect();
        curves.push(curve);
    }
    let mut family = Vec::new();
    let eps_list = ctx.cfg.params.as_ref().map(|p| p.eps.clone()).unwrap_or_default();
    if !eps_list.is_empty() {
        let nf = ctx.params.n as f64;
        let gamma = 1.0f64.max(ctx.params.a / (nf - 1.0)) + 1.0;
        // the family is built around a base normalised to unit ∫f^{ap/(a−p)}
        let m = ctx.params.a * ctx.params.p / (ctx.params.a - ctx.params.p);
        let mass = r.beta.powf(ctx.params.a * ctx.params.p / (ctx.params.a - ctx.params.p));
        let base = crate::fixtures::Scaled { inner: f.clone(), factor: mass.powf(-1.0 / m) };
        for &e in &eps_list {
            let fam = approx_family(&base, e, gamma, &ctx.params, &ctx.domain, &ctx.norm, &ctx.quad)?;
            let (rf, _) = eval(&fam, &ctx.quad)?;
            passed &= rf.ratio <= 1.0 + rf.quadrature_error + ctx.tol;
            family.push(json!({ "eps": e, "ratio": rf.ratio, "error": rf.quadrature_error }));
        }
    }
    Ok(Out { passed, result: json!({ "report": r, "constants": k, "family": family }), curves })
}

/// Lets the trace closure take any concrete field without generics on the closure.
trait FieldRef {
    fn get(&self) -> &dyn Field;
}

impl<F: Field> FieldRef for F {
    fn get(&self) -> &dyn Field {
        self
    }
}

fn check_constants(ctx: &Ctx) -> Result<Out> {
    let k = assemble_constants(&ctx.params, &ctx.domain, &ctx.norm, &ctx.quad)?;
    let (n, a, p, q) = (ctx.params.n as f64, ctx.params.a, ctx.params.p, ctx.params.q);
    let close = |x: f64, y: f64| (x - y).abs() <= 1e-12 * (1.0 + y.abs());
    let mut ok = close(k.c, q * k.i_qa.powf(1.0 / a))
        && close(k.a_const, k.c.powf(1.0 - p) * (a - 1.0) / p * (p / (a - p)).powf(p))
        && close(k.b, k.i_qa.powf((1.0 - a) / a) * k.i_qa1)
        && close(k.d, k.a_const.powf(k.u) / ((k.b * k.v).powf(k.u - 1.0) * k.u))
        && close(k.theta, (a - p) / (p * (a - n - 1.0) + n));
    if a == n {
        ok &= k.theta == 1.0;
    }
    let routes = (k.b_direct / k.b - 1.0).abs();
    ok &= routes <= 0.01 + ctx.tol;
    let cone = ctx.domain.is_cone_seeded(256, 1e-9, ctx.cfg.seed).is_cone;
    Ok(Out { passed: ok, result: json!({ "constants": k, "b_routes_rel": routes, "cone": cone }), curves: vec![] })
}

fn check_admissibility(ctx: &Ctx) -> Result<Out> {
    let adm = ctx
        .cfg
        .admissibility
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("the admissibility check needs an `admissibility` block".into()))?;
    let (g, w, _) = ctx.analytic("admissibility")?;
    let r = admissibility_report(&g, &w, adm, &ctx.params, &ctx.domain, &ctx.norm, 64);
    Ok(Out { passed: r.all_pass, result: to_value(&r), curves: vec![] })
}

/// On ℝⁿ with W = (1 + |x|²)² and g = W (extremal) or W plus the bump.
fn check_equivalence(ctx: &Ctx) -> Result<Out> {
    let n = ctx.params.n;
    let w = RadialPower { kappa: 1.0, m: 2.0, n };
    let r = ctx.cfg.quadrature.half_width;
    let grid = GridSpec::cube(n, -r, r, ctx.cfg.quadrature.resolution)?;
    let hs = ctx.h_list()?;
    let tail = Some(GapTail { gamma: 4.0, a1: 1.0, a3: 1.0, radius: r });
    let rep = if ctx.extremal()? {
        equivalence_scan(&w, &w, n, &hs, &grid, 0.02, tail)?
    } else {
        let g = Sum { base: w, extra: ctx.bump().unwrap_or(Bump { center: vec![0.0; n], radius: 1.0, amp: 0.0 }) };
        equivalence_scan(&g, &w, n, &hs, &grid, 0.02, tail)?
    };
    let mut curve = Curve::new("phi", &["h", "phi", "error"]);
    for i in 0..rep.h.len() {
        curve.rows.push(vec![rep.h[i], rep.phi[i], rep.phi_error[i] + rep.tail[i]]);
    }
    let passed = rep.phi_above_one && (rep.richardson - rep.integral).abs() <= rep.tolerance + ctx.tol;
    Ok(Out { passed, result: to_value(&rep), curves: vec![curve] })
}

/// Writes one CSV per curve as `<check>_<curve>.csv` (with an index suffix when a check
/// appears more than once) and returns the paths.
pub fn emit_curves(report: &RunReport, dir: &std::path::Path) -> Result<Vec<std::path::PathBuf>> {
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    let mut out = Vec::new();
    for c in &report.checks {
        let k = seen.entry(c.check.clone()).or_insert(0);
        *k += 1;
        let stem = if *k == 1 { c.check.clone() } else { format!("{}{}", c.check, k) };
        for curve in &c.curves {
            let mut text = curve.columns.join(",");
            text.push('\n');
            for row in &curve.rows {
                let cells: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
                text.push_str(&cells.join(","));
                text.push('\n');
            }
            let path = dir.join(format!("{stem}_{}.csv", curve.name));
            crate::atomic_write(&path, text.as_bytes())?;
            out.push(path);
        }
    }
    Ok(out)
}
