//! Convergence studies: mesh, spaces, assembly, solve and errors for a list of
//! refinement levels, followed by observed orders and table output.

use std::fmt::Write as _;
use std::sync::Arc;
use std::time::Instant;

use crate::analysis::diagnostics::{
    displacement_mass, infsup_constant, kellipticity_constant, lifting_constant, star_gram, MAX_DENSE_DOFS,
};
use crate::analysis::{compute_errors, observed_order, ErrorReport, Orders};
use crate::error::{Error, Result};
use crate::forms::{assemble_system, uniform_penalty, ComplianceTensor};
use crate::mesh::build_uniform_mesh;
use crate::problems::{problem_2d, problem_3d, ManufacturedProblem};
use crate::solver::{solve_saddle, SolveOptions, SolverKind};
use crate::spaces::{build_space, ValueKind};

/// Optional dense diagnostics evaluated on each level small enough for them.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DiagnosticSet {
    pub infsup: bool,
    pub kellipticity: bool,
    pub lifting: bool,
}

impl DiagnosticSet {
    pub fn any(&self) -> bool {
        self.infsup || self.kellipticity || self.lifting
    }
}

impl std::str::FromStr for DiagnosticSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut set = DiagnosticSet::default();
        for part in s.split(',').map(str::trim) {
            match part {
                "none" => {}
                "infsup" => set.infsup = true,
                "kell" => set.kellipticity = true,
                "lifting" => set.lifting = true,
                "all" => {
                    set = DiagnosticSet {
                        infsup: true,
                        kellipticity: true,
                        lifting: true,
                    }
                }
                other => return Err(Error::Config(format!("unknown diagnostic '{other}'"))),
            }
        }
        Ok(set)
    }
}

#[derive(Debug, Clone)]
pub struct StudyConfig {
    pub dim: usize,
    /// Displacement degree; stresses use `k + 1`.
    pub k: usize,
    /// Cells per side of the unit square or cube, strictly increasing.
    pub levels: Vec<usize>,
    pub eta: f64,
    pub solver: SolverKind,
    pub mu: f64,
    pub lambda: f64,
    pub diagnostics: DiagnosticSet,
    /// Caps CG (Schur path) or GMRES (direct path) iterations; solver defaults otherwise.
    pub max_iterations: Option<usize>,
}

impl StudyConfig {
    pub fn new(dim: usize, k: usize, levels: Vec<usize>) -> Self {
        StudyConfig {
            dim,
            k,
            levels,
            eta: 1.0,
            solver: SolverKind::Direct,
            mu: 0.5,
            lambda: 1.0,
            diagnostics: DiagnosticSet::default(),
            max_iterations: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim != 2 && self.dim != 3 {
            return Err(Error::Config(format!("dimension must be 2 or 3, got {}", self.dim)));
        }
        if self.levels.is_empty() || self.levels[0] == 0 {
            return Err(Error::InvalidLevels("levels must be positive".into()));
        }
        if self.levels.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidLevels(format!(
                "levels must increase strictly: {:?}",
                self.levels
            )));
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::Config(format!("penalty must be positive, got {}", self.eta)));
        }
        ComplianceTensor::new(self.mu, self.lambda, self.dim)?;
        Ok(())
    }

    pub fn problem(&self) -> ManufacturedProblem {
        let p = if self.dim == 2 { problem_2d() } else { problem_3d() };
        p.with_lame(self.mu, self.lambda)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelResult {
    pub errors: ErrorReport,
    pub solve_seconds: f64,
    pub solver_iterations: usize,
    /// `(name, value)` pairs of the diagnostics computed on this level.
    pub diagnostics: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelFailure {
    pub one_over_h: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyOutcome {
    pub levels: Vec<LevelResult>,
    /// Orders between consecutive completed levels.
    pub orders: Vec<Orders>,
    pub failure: Option<LevelFailure>,
}

impl StudyOutcome {
    pub fn succeeded(&self) -> bool {
        self.failure.is_none()
    }

    pub fn final_orders(&self) -> Option<&Orders> {
        self.orders.last()
    }
}

/// Solves and measures one refinement level.
pub fn run_level(config: &StudyConfig, problem: &ManufacturedProblem, n: usize) -> Result<LevelResult> {
    let dim = config.dim;
    let mesh = Arc::new(build_uniform_mesh(dim, n)?);
    let stress = build_space(mesh.clone(), ValueKind::SymTensor, config.k + 1);
    let displacement = build_space(mesh.clone(), ValueKind::Vector, config.k);
    let ct = ComplianceTensor::new(problem.mu, problem.lambda, dim)?;
    let eta = uniform_penalty(&mesh, config.eta);
    let system = assemble_system(&stress, &displacement, &ct, &eta, |x| problem.f(x))?;
    let mut options = SolveOptions {
        context: format!("dim={dim} k={} 1/h={n}", config.k),
        ..SolveOptions::with_kind(config.solver)
    };
    if let Some(cap) = config.max_iterations {
        options.cg_max_iterations = cap;
        options.gmres_max_iterations = cap;
    }
    let start = Instant::now();
    let solution = solve_saddle(&system, &options)?;
    let solve_seconds = start.elapsed().as_secs_f64();
    let sigma_h = stress.coefficients(solution.stress)?;
    let u_h = displacement.coefficients(solution.displacement)?;
    let errors = compute_errors(problem, &sigma_h, &u_h, &eta, n)?;

    let mut diagnostics = Vec::new();
    let dense_ok = stress.total_dofs <= MAX_DENSE_DOFS;
    if config.diagnostics.infsup && dense_ok {
        let g = star_gram(&stress, &eta)?;
        diagnostics.push(("infsup".to_string(), infsup_constant(&g, &system.b, &displacement_mass(&displacement))?));
    }
    if config.diagnostics.kellipticity && dense_ok {
        let g = star_gram(&stress, &eta)?;
        diagnostics.push(("kellipticity".to_string(), kellipticity_constant(&system.a, &system.b, &g)?));
    }
    if config.diagnostics.lifting {
        diagnostics.push(("lifting".to_string(), lifting_constant(&displacement, 4, 0x5eed ^ n as u64)?));
    }
    Ok(LevelResult {
        errors,
        solve_seconds,
        solver_iterations: solution.iterations,
        diagnostics,
    })
}

/// Runs every level in order. A failing level stops the study; the levels
/// completed before it are kept and the failure is recorded.
pub fn run_study(config: &StudyConfig) -> Result<StudyOutcome> {
    config.validate()?;
    let problem = config.problem();
    let mut levels = Vec::new();
    let mut failure = None;
    for &n in &config.levels {
        match run_level(config, &problem, n) {
            Ok(r) => levels.push(r),
            Err(e) => {
                failure = Some(LevelFailure {
                    one_over_h: n,
                    message: e.to_string(),
                });
                break;
            }
        }
    }
    let orders = levels
        .windows(2)
        .map(|w| {
            let (c, f) = (&w[0].errors, &w[1].errors);
            let o = |a: f64, b: f64| observed_order(a, b, c.h, f.h);
            Orders {
                u_l2: o(c.err_u_l2, f.err_u_l2),
                sigma_l2: o(c.err_sigma_l2, f.err_sigma_l2),
                div: o(c.err_div, f.err_div),
                star: o(c.err_star, f.err_star),
            }
        })
        .collect();
    Ok(StudyOutcome {
        levels,
        orders,
        failure,
    })
}

/// Six significant digits in exponent form.
pub fn sig6(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else {
        format!("{x:.5e}")
    }
}

fn printed(x: f64) -> f64 {
    sig6(x).parse().expect("formatted float parses")
}

/// Orders recomputed from the printed errors and the printed `1/h`, so that
/// a table is self-consistent.
fn table_orders(levels: &[LevelResult], pick: fn(&ErrorReport) -> f64) -> Vec<Option<f64>> {
    let mut out = vec![None];
    for w in levels.windows(2) {
        let (c, f) = (&w[0].errors, &w[1].errors);
        let (ec, ef) = (printed(pick(c)), printed(pick(f)));
        out.push(Some(observed_order(ec, ef, 1.0 / c.one_over_h as f64, 1.0 / f.one_over_h as f64)));
    }
    out
}

type Column = (&'static str, fn(&ErrorReport) -> f64);

const COLUMNS: [Column; 4] = [
    ("u_L2", |r| r.err_u_l2),
    ("sigma_L2", |r| r.err_sigma_l2),
    ("div", |r| r.err_div),
    ("star", |r| r.err_star),
];

/// The failure marker written after partial tables.
pub fn failure_marker(f: &LevelFailure) -> String {
    format!("FAILED level 1/h={}: {}", f.one_over_h, f.message.replace('\n', " "))
}

/// CSV table. `solve_seconds` is written as 0 unless `timings` is set, so the
/// default output is byte-for-byte reproducible.
pub fn csv_table(outcome: &StudyOutcome, timings: bool) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "level",
        "one_over_h",
        "h",
        "dofs_sigma",
        "dofs_u",
        "err_u_L2",
        "rate_u",
        "err_sigma_L2",
        "rate_sigma",
        "err_div",
        "rate_div",
        "err_star",
        "rate_star",
        "solve_seconds",
    ])?;
    let rates: Vec<Vec<Option<f64>>> = COLUMNS.iter().map(|(_, f)| table_orders(&outcome.levels, *f)).collect();
    for (i, l) in outcome.levels.iter().enumerate() {
        let r = &l.errors;
        let mut rec = vec![
            i.to_string(),
            r.one_over_h.to_string(),
            sig6(r.h),
            r.dofs_sigma.to_string(),
            r.dofs_u.to_string(),
        ];
        for (c, (_, f)) in COLUMNS.iter().enumerate() {
            rec.push(sig6(f(r)));
            rec.push(rates[c][i].map(sig6).unwrap_or_default());
        }
        rec.push(if timings { format!("{:.3}", l.solve_seconds) } else { "0".into() });
        w.write_record(&rec)?;
    }
    let mut out = String::from_utf8(w.into_inner().map_err(|e| Error::Config(e.to_string()))?)
        .expect("csv output is utf-8");
    if let Some(f) = &outcome.failure {
        writeln!(out, "# {}", failure_marker(f)).unwrap();
    }
    Ok(out)
}

/// Markdown table in the layout error / order per norm, orders to two decimals.
pub fn markdown_table(config: &StudyConfig, outcome: &StudyOutcome, timings: bool) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "Mixed LDG, d = {}, k = {} (stress degree {}), eta = {}, mu = {}, lambda = {}, solver = {}\n",
        config.dim,
        config.k,
        config.k + 1,
        config.eta,
        config.mu,
        config.lambda,
        config.solver
    )
    .unwrap();
    out.push_str("| 1/h | ‖u−u_h‖ | order | ‖σ−σ_h‖ | order | ‖div_h(σ−σ_h)‖ | order | ‖σ−σ_h‖_* | order |");
    if timings {
        out.push_str(" solve (s) |");
    }
    out.push('\n');
    out.push_str("|---|---|---|---|---|---|---|---|---|");
    if timings {
        out.push_str("---|");
    }
    out.push('\n');
    let rates: Vec<Vec<Option<f64>>> = COLUMNS.iter().map(|(_, f)| table_orders(&outcome.levels, *f)).collect();
    for (i, l) in outcome.levels.iter().enumerate() {
        write!(out, "| {} |", l.errors.one_over_h).unwrap();
        for (c, (_, f)) in COLUMNS.iter().enumerate() {
            let rate = rates[c][i].map(|r| format!("{r:.2}")).unwrap_or_else(|| "–".into());
            write!(out, " {} | {} |", sig6(f(&l.errors)), rate).unwrap();
        }
        if timings {
            write!(out, " {:.3} |", l.solve_seconds).unwrap();
        }
        out.push('\n');
    }
    let diag: Vec<(usize, &String, f64)> = outcome
        .levels
        .iter()
        .flat_map(|l| l.diagnostics.iter().map(move |(k, v)| (l.errors.one_over_h, k, *v)))
        .collect();
    if !diag.is_empty() {
        out.push_str("\n| 1/h | diagnostic | value |\n|---|---|---|\n");
        for (n, k, v) in diag {
            writeln!(out, "| {n} | {k} | {} |", sig6(v)).unwrap();
        }
    }
    if let Some(f) = &outcome.failure {
        writeln!(out, "\n**{}**", failure_marker(f)).unwrap();
    }
    out
}

/// Diagnostics as CSV rows `one_over_h,diagnostic,value`.
pub fn diagnostics_csv(outcome: &StudyOutcome) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["one_over_h", "diagnostic", "value"])?;
    for l in &outcome.levels {
        for (k, v) in &l.diagnostics {
            w.write_record([l.errors.one_over_h.to_string(), k.clone(), sig6(*v)])?;
        }
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| Error::Config(e.to_string()))?).expect("utf-8"))
}
