use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::besov::{besov_norm, weighted_blocks, LPPartition};
use crate::fields::seeded_rng;
use crate::fw::{
    continuity_experiment, empirical_lifespan, pair_norm, run_scheme, solve_fw_direct, solve_fw_on,
    stability_experiment, FWState, LifespanMode, SchemeConfig,
};
use crate::spectral::{Grid, GridFunction};
use crate::transport::{
    fit_constant_from_profiles, random_transport_family, solve_transport, EstimateProfile, NodeSeries, TimeGrid,
    TransportProblem,
};

use super::config::{ExperimentKind, FieldSource, RunConfig};
use super::io::{create_dir, field_table, io_error, read_field_csv, Cell, Table};
use super::HarnessError;

/// Size of the calibration family and of its held-out twin.
pub const FAMILY_SIZE: usize = 10;
/// Partition identity tolerance.
pub const PARTITION_TOL: f64 = 1e-12;
/// Conservation tolerance for the spatial means.
pub const MEAN_TOL: f64 = 1e-10;
/// Distance of the last iterate to the direct solution.
pub const ITERATE_TOL: f64 = 1e-4;
/// Allowed spread of `T_emp · P₀²` around its geometric mean.
pub const LIFESPAN_SPREAD: f64 = 0.30;
/// Allowed relative spread of the fitted Gronwall rates.
pub const BETA_SPREAD: f64 = 0.10;
/// Continuity error required once `εⱼ < dx`.
pub const CONTINUITY_TOL: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq)]
pub struct Scalar {
    pub name: String,
    pub value: f64,
    /// CSV column the value is read from or reduced over.
    pub source: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub config: RunConfig,
    pub version: &'static str,
    pub wall_time: Duration,
    pub output_dir: PathBuf,
    pub tables: Vec<Table>,
    pub scalars: Vec<Scalar>,
    pub verdicts: Vec<Verdict>,
}

impl ExperimentReport {
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }

    pub fn scalar(&self, name: &str) -> Option<f64> {
        self.scalars.iter().find(|s| s.name == name).map(|s| s.value)
    }

    pub fn table(&self, file: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.file == file)
    }

    pub fn verdict(&self, name: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.name == name)
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        let cfg = &self.config;
        let _ = writeln!(out, "fwlab {} experiment: {}", self.version, cfg.experiment.kind);
        let _ = writeln!(out, "wall time: {:.3} s", self.wall_time.as_secs_f64());
        if cfg.defaulted.is_empty() {
            let _ = writeln!(out, "defaults applied: none");
        } else {
            let _ = writeln!(out, "defaults applied: {}", cfg.defaulted.join(", "));
        }
        let _ = writeln!(out, "\n[config]\n{}", cfg.to_toml().trim_end());
        let _ = writeln!(out, "\n[scalars]");
        for s in &self.scalars {
            let _ = writeln!(out, "{} = {:.16e}    ({})", s.name, s.value, s.source);
        }
        let _ = writeln!(out, "\n[verdicts]");
        for v in &self.verdicts {
            let _ = writeln!(out, "{} {}: {}", if v.passed { "PASS" } else { "FAIL" }, v.name, v.detail);
        }
        let _ = writeln!(out, "\n[tables]");
        for t in &self.tables {
            let _ = writeln!(out, "{} ({} rows): {}", t.file, t.rows.len(), t.header.join(", "));
        }
        out
    }
}

/// Replaces the output directory with `FWLAB_OUT` when that is set.
pub fn apply_env_overrides(cfg: &mut RunConfig) {
    if let Some(dir) = std::env::var_os("FWLAB_OUT").filter(|d| !d.is_empty()) {
        cfg.output_dir = PathBuf::from(dir);
    }
}

#[derive(Default)]
struct Collector {
    tables: Vec<Table>,
    scalars: Vec<Scalar>,
    verdicts: Vec<Verdict>,
}

impl Collector {
    fn scalar(&mut self, name: &str, value: f64, source: &str) {
        self.scalars.push(Scalar {
            name: name.into(),
            value,
            source: source.into(),
        });
    }

    fn verdict(&mut self, name: &str, passed: bool, detail: String) {
        self.verdicts.push(Verdict {
            name: name.into(),
            passed,
            detail,
        });
    }
}

struct Context<'a> {
    cfg: &'a RunConfig,
    grid: Grid,
    part: LPPartition,
}

fn wrap<E>(context: &'static str) -> impl Fn(E) -> HarnessError
where
    E: std::error::Error + Send + Sync + 'static,
{
    move |e| HarnessError::Experiment {
        context: context.to_string(),
        source: Box::new(e),
    }
}

/// Runs the configured experiment, writes its CSVs, `config.toml` and
/// `summary.txt` into the output directory and returns the report.
pub fn run_experiment(cfg: &RunConfig) -> Result<ExperimentReport, HarnessError> {
    cfg.validate()?;
    let start = Instant::now();
    let grid = Grid::new(cfg.grid.n, cfg.grid.scale).map_err(wrap("grid"))?;
    let part = LPPartition::new(&grid);
    let ctx = Context { cfg, grid, part };
    let mut out = Collector::default();
    match cfg.experiment.kind {
        ExperimentKind::Norm => norm(&ctx, &mut out)?,
        ExperimentKind::PartitionCheck => partition_check(&ctx, &mut out),
        ExperimentKind::Transport => transport(&ctx, &mut out)?,
        ExperimentKind::Simulate => simulate(&ctx, &mut out)?,
        ExperimentKind::Iterate => iterate(&ctx, &mut out)?,
        ExperimentKind::LifespanSweep => lifespan_sweep(&ctx, &mut out)?,
        ExperimentKind::Stability => stability(&ctx, &mut out)?,
        ExperimentKind::Continuity => continuity(&ctx, &mut out)?,
        ExperimentKind::Verify => verify(&ctx, &mut out)?,
    }
    let dir = cfg.output_dir.clone();
    create_dir(&dir)?;
    for t in &out.tables {
        t.write(&dir)?;
    }
    write_text(&dir.join("config.toml"), &cfg.to_toml())?;
    let report = ExperimentReport {
        config: cfg.clone(),
        version: env!("CARGO_PKG_VERSION"),
        wall_time: start.elapsed(),
        output_dir: dir.clone(),
        tables: out.tables,
        scalars: out.scalars,
        verdicts: out.verdicts,
    };
    write_text(&dir.join("summary.txt"), &report.summary())?;
    Ok(report)
}

fn write_text(path: &Path, text: &str) -> Result<(), HarnessError> {
    fs::write(path, text).map_err(|e| io_error(path, e))
}

fn initial_data(ctx: &Context) -> Result<(GridFunction, GridFunction), HarnessError> {
    let e = &ctx.cfg.experiment;
    let (mut u0, mut rho0) = e.preset.build(&ctx.grid, e.amplitude);
    if let Some(path) = &e.u0 {
        u0 = read_field_csv(path, &ctx.grid)?;
    }
    if let Some(path) = &e.rho0 {
        rho0 = read_field_csv(path, &ctx.grid)?;
    }
    Ok((u0, rho0))
}

fn source_field(grid: &Grid, src: &FieldSource) -> Result<GridFunction, HarnessError> {
    Ok(match src {
        FieldSource::Zero => GridFunction::zeros(grid),
        FieldSource::Sine => GridFunction::from_fn(grid, f64::sin),
        FieldSource::Cosine => GridFunction::from_fn(grid, f64::cos),
        FieldSource::Gauss => {
            let centre = 0.5 * grid.length();
            GridFunction::from_fn(grid, |x| (-(x - centre).powi(2)).exp())
        }
        FieldSource::Csv(path) => read_field_csv(path, grid)?,
    })
}

fn profiles(ctx: &Context, problems: &[TransportProblem]) -> Result<Vec<EstimateProfile>, HarnessError> {
    problems
        .par_iter()
        .map(|p| EstimateProfile::new(&solve_transport(p)?, &ctx.part, &ctx.cfg.besov))
        .collect::<Result<Vec<_>, _>>()
        .map_err(wrap("transport calibration"))
}

/// Fits `C` on the seeded family; with `held_out` also re-validates it on a
/// second family drawn from the same stream.
fn calibrate(ctx: &Context, out: &mut Collector, held_out: bool) -> Result<f64, HarnessError> {
    let mut rng = seeded_rng(ctx.cfg.seed);
    let train = random_transport_family(&ctx.grid, FAMILY_SIZE, &mut rng);
    let train = profiles(ctx, &train)?;
    let mut table = Table::new("calibration.csv", &["member", "c_member"]);
    for (i, p) in train.iter().enumerate() {
        let own = fit_constant_from_profiles(std::slice::from_ref(p)).map_err(wrap("transport calibration"))?;
        table.push(vec![(i + 1).into(), own.into()]);
    }
    let c = fit_constant_from_profiles(&train).map_err(wrap("transport calibration"))?;
    out.tables.push(table);
    out.scalar("C_emp", c, "calibration.csv:c_member (joint bisection over all members)");
    if held_out {
        let test = random_transport_family(&ctx.grid, FAMILY_SIZE, &mut rng);
        let test = profiles(ctx, &test)?;
        let mut table = Table::new("held_out.csv", &["member", "violations", "max_ratio"]);
        let mut total = 0;
        for (i, p) in test.iter().enumerate() {
            let rep = p.evaluate(c);
            total += rep.violations();
            table.push(vec![(i + 1).into(), rep.violations().into(), rep.max_violation_ratio.into()]);
        }
        out.tables.push(table);
        out.verdict(
            "held-out transport estimate",
            total == 0,
            format!("{total} violations over {FAMILY_SIZE} held-out problems at C = {c:.6}"),
        );
    }
    Ok(c)
}

fn constant(ctx: &Context, out: &mut Collector) -> Result<f64, HarnessError> {
    match ctx.cfg.scheme.c {
        Some(c) => Ok(c),
        None => calibrate(ctx, out, false),
    }
}

fn norm(ctx: &Context, out: &mut Collector) -> Result<(), HarnessError> {
    let (u0, _) = initial_data(ctx)?;
    let b = ctx.cfg.besov;
    let value = besov_norm(&ctx.part, &u0, &b).map_err(wrap("norm"))?;
    let blocks = weighted_blocks(&ctx.part, &u0, b.s, b.p).map_err(wrap("norm"))?;
    let mut bt = Table::new("blocks.csv", &["q", "weighted_block"]);
    for (i, w) in blocks.iter().enumerate() {
        bt.push(vec![Cell::Int(i as i64 - 1), (*w).into()]);
    }
    let mut nt = Table::new("norm.csv", &["s", "p", "r", "besov_norm"]);
    nt.push(vec![b.s.into(), b.p.into(), b.r.into(), value.into()]);
    out.tables.extend([field_table("field.csv", &u0), bt, nt]);
    out.scalar("besov_norm", value, "norm.csv:besov_norm");
    out.verdict("norm is finite", value.is_finite(), format!("‖f‖ = {value:.6e}"));
    Ok(())
}

fn partition_check(ctx: &Context, out: &mut Collector) {
    let part = &ctx.part;
    let q_max = part.q_max();
    let mut header = vec!["xi".to_string(), "chi".to_string()];
    header.extend((0..=q_max).map(|q| format!("phi_q{q}")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut masks = Table::new("masks.csv", &header);
    let g = &ctx.grid;
    for k in 0..=(g.len() / 2) as i64 {
        let idx = g.index_of_mode(k).unwrap_or(g.nyquist_index());
        let mut row = vec![g.wavenumbers()[idx].abs().into(), part.chi_mask()[idx].into()];
        row.extend(part.phi_masks().iter().map(|m| Cell::Real(m[idx])));
        masks.push(row);
    }
    let residual = part.telescoping_residual();
    let mut summary = Table::new("partition.csv", &["N", "L", "q_max", "max_residual"]);
    summary.push(vec![g.len().into(), g.scale().into(), Cell::Int(q_max as i64), residual.into()]);
    out.tables.extend([masks, summary]);
    out.scalar("max_residual", residual, "partition.csv:max_residual");
    out.verdict(
        "partition of unity",
        residual <= PARTITION_TOL,
        format!("max |χ + Σφ_q − 1| = {residual:.3e}"),
    );
}

fn transport(ctx: &Context, out: &mut Collector) -> Result<(), HarnessError> {
    let cfg = ctx.cfg;
    let (f0, _) = initial_data(ctx)?;
    let v = source_field(&ctx.grid, &cfg.experiment.velocity)?;
    let f = source_field(&ctx.grid, &cfg.experiment.forcing)?;
    let time = TimeGrid::covering(cfg.time.t_end, cfg.time.dt);
    let problem = TransportProblem::new(f0, NodeSeries::Constant(v), NodeSeries::Constant(f), time)
        .map_err(wrap("transport"))?;
    let traj = solve_transport(&problem).map_err(wrap("transport"))?;
    let profile = EstimateProfile::new(&traj, &ctx.part, &cfg.besov).map_err(wrap("transport"))?;
    let c = if cfg.experiment.fit_constant {
        let c = fit_constant_from_profiles(std::slice::from_ref(&profile)).map_err(wrap("transport"))?;
        out.scalar("C_fit", c, "transport.csv:ratio (smallest C with ratio ≤ 1)");
        c
    } else {
        constant(ctx, out)?
    };
    let rep = profile.evaluate(c);
    let mut table = Table::new("transport.csv", &["t", "besov_norm", "V", "lhs", "rhs", "ratio"]);
    for i in 0..time.nodes() {
        let ratio = if rep.rhs[i] > 0.0 { rep.lhs[i] / rep.rhs[i] } else { 0.0 };
        table.push(vec![
            time.t(i).into(),
            profile.solution_norms[i].into(),
            profile.v_profile[i].into(),
            rep.lhs[i].into(),
            rep.rhs[i].into(),
            ratio.into(),
        ]);
    }
    out.tables.extend([table, field_table("f_final.csv", traj.last())]);
    out.scalar("max_ratio", rep.max_violation_ratio, "transport.csv:ratio (max)");
    out.verdict(
        "transport estimate",
        rep.all_hold(),
        format!("{} of {} nodes violate at C = {c:.6}", rep.violations(), time.nodes()),
    );
    Ok(())
}

fn simulate(ctx: &Context, out: &mut Collector) -> Result<(), HarnessError> {
    let cfg = ctx.cfg;
    let (u0, rho0) = initial_data(ctx)?;
    let initial = FWState::new(u0, rho0, 0.0).map_err(wrap("simulate"))?;
    let traj = solve_fw_direct(&initial, cfg.time.t_end, cfg.time.dt).map_err(wrap("simulate"))?;
    let lower = cfg.besov.shifted(-1.0);
    let mut table = Table::new("trajectories.csv", &["t", "norm_u_Bs", "norm_rho_Bsm1", "mean_u", "mean_rho"]);
    for (state, &(mu, mr)) in traj.states.iter().zip(&traj.means) {
        let nu = besov_norm(&ctx.part, &state.u, &cfg.besov).map_err(wrap("simulate"))?;
        let nr = besov_norm(&ctx.part, &state.rho, &lower).map_err(wrap("simulate"))?;
        table.push(vec![state.t.into(), nu.into(), nr.into(), mu.into(), mr.into()]);
    }
    let (du, dr) = traj.mean_drift();
    let last = traj.last();
    out.tables.extend([table, field_table("u_final.csv", &last.u), field_table("rho_final.csv", &last.rho)]);
    out.scalar("mean_drift_u", du, "trajectories.csv:mean_u (max deviation from t = 0)");
    out.scalar("mean_drift_rho", dr, "trajectories.csv:mean_rho (max deviation from t = 0)");
    out.verdict(
        "means conserved",
        du <= MEAN_TOL && dr <= MEAN_TOL,
        format!("drift (u, ρ) = ({du:.3e}, {dr:.3e})"),
    );
    Ok(())
}

fn iterate(ctx: &Context, out: &mut Collector) -> Result<(), HarnessError> {
    let cfg = ctx.cfg;
    let c = constant(ctx, out)?;
    let (u0, rho0) = initial_data(ctx)?;
    let mut scfg = SchemeConfig::new(cfg.besov, c, cfg.scheme.n_max, cfg.time.dt);
    scfg.t_cap = cfg.time.t_end;
    let trace = run_scheme(&ctx.part, &u0, &rho0, &scfg).map_err(wrap("iterate"))?;
    let time = trace.time;

    let mut table = Table::new("scheme.csv", &["n", "t", "norm_sum", "bound_312", "bound_313", "d_n"]);
    for n in 1..=cfg.scheme.n_max {
        for i in 0..time.nodes() {
            table.push(vec![
                n.into(),
                time.t(i).into(),
                trace.norm_sum(n, i).into(),
                trace.bound_312[i].into(),
                trace.bound_313.into(),
                trace.d[n - 1].into(),
            ]);
        }
    }

    let initial = FWState::new(u0, rho0, 0.0).map_err(wrap("iterate"))?;
    let direct = solve_fw_on(&initial, time).map_err(wrap("iterate"))?;
    let last = trace.last_iterate();
    let lower = cfg.besov.shifted(-1.0);
    let mut dist = Table::new("scheme_vs_direct.csv", &["t", "distance"]);
    let mut worst = 0.0f64;
    for (i, s) in direct.states.iter().enumerate() {
        let d = pair_norm(&ctx.part, &(&last.u[i] - &s.u), &(&last.rho[i] - &s.rho), &lower)
            .map_err(wrap("iterate"))?;
        worst = worst.max(d);
        dist.push(vec![time.t(i).into(), d.into()]);
    }
    out.tables.extend([table, dist]);

    out.scalar("C", c, "scheme configuration");
    out.scalar("P0", trace.p0, "scheme.csv:bound_313 (half)");
    out.scalar("T", time.t_end(), "scheme.csv:t (max)");
    out.scalar("final_distance", worst, "scheme_vs_direct.csv:distance (max)");

    let ratios = trace.contraction_ratios();
    // ratios[k] = d_{k+2} / d_{k+1}; the claim starts at n = 2.
    let tail: Vec<f64> = ratios.iter().skip(1).copied().collect();
    let max_ratio = tail.iter().copied().fold(0.0, f64::max);
    if !tail.is_empty() {
        out.scalar("max_contraction_ratio", max_ratio, "scheme.csv:d_n (max d_{n+1}/d_n, n ≥ 2)");
    }
    out.verdict(
        "iterates contract",
        !tail.is_empty() && max_ratio < 1.0,
        format!("max d_(n+1)/d_n over n ≥ 2 = {max_ratio:.4} ({} ratios)", tail.len()),
    );
    let (b312, b313) = trace.all_flags_hold();
    out.verdict("riccati bound", b312, format!("norm_sum ≤ bound_312 at every node with C = {c:.6}"));
    out.verdict("2P0 bound", b313, format!("norm_sum ≤ 2 P0 = {:.6e} at every node", trace.bound_313));
    out.verdict(
        "last iterate matches direct solution",
        worst <= ITERATE_TOL,
        format!("sup_t distance of iterate {} = {worst:.3e}", cfg.scheme.n_max),
    );
    Ok(())
}

fn lifespan_sweep(ctx: &Context, out: &mut Collector) -> Result<(), HarnessError> {
    let cfg = ctx.cfg;
    let scfg = SchemeConfig::new(cfg.besov, cfg.scheme.c.unwrap_or(1.0), cfg.scheme.n_max, cfg.time.dt);
    let runs = cfg
        .experiment
        .amplitudes
        .par_iter()
        .map(|&a| {
            let (u0, rho0) = cfg.experiment.preset.build(&ctx.grid, a);
            empirical_lifespan(&ctx.part, &u0, &rho0, &scfg, cfg.time.t_cap, LifespanMode::Direct)
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(wrap("lifespan sweep"))?;
    let mut table = Table::new("lifespan.csv", &["a", "P0", "T_emp", "product"]);
    let mut products = Vec::new();
    let mut capped = 0;
    for (&a, run) in cfg.experiment.amplitudes.iter().zip(&runs) {
        let product = run.t_emp * run.p0 * run.p0;
        capped += run.reached_cap as usize;
        products.push(product);
        table.push(vec![a.into(), run.p0.into(), run.t_emp.into(), product.into()]);
    }
    let geo = (products.iter().map(|p| p.ln()).sum::<f64>() / products.len() as f64).exp();
    let spread = products.iter().map(|p| (p / geo - 1.0).abs()).fold(0.0, f64::max);
    out.tables.push(table);
    out.scalar("product_geomean", geo, "lifespan.csv:product (geometric mean)");
    out.scalar("product_max_deviation", spread, "lifespan.csv:product (max |p/geomean − 1|)");
    out.verdict(
        "lifespan scaling",
        spread.is_finite() && spread <= LIFESPAN_SPREAD,
        format!(
            "max deviation of T_emp·P0² from its geometric mean = {:.1}% (limit {:.0}%), {capped} runs reached t_cap",
            100.0 * spread,
            100.0 * LIFESPAN_SPREAD
        ),
    );
    Ok(())
}

/// Perturbation shape for the stability experiment.
pub fn stability_perturbation(grid: &Grid, delta: f64) -> (GridFunction, GridFunction) {
    (
        GridFunction::from_fn(grid, |x| delta * (2.0 * x).cos()),
        GridFunction::from_fn(grid, |x| delta * (2.0 * x).sin()),
    )
}

fn stability(ctx: &Context, out: &mut Collector) -> Result<(), HarnessError> {
    let cfg = ctx.cfg;
    let (u0, rho0) = initial_data(ctx)?;
    let reports = cfg
        .experiment
        .deltas
        .par_iter()
        .map(|&delta| {
            let (du, dr) = stability_perturbation(&ctx.grid, delta);
            stability_experiment(&ctx.part, &u0, &rho0, (&du, &dr), &cfg.besov, cfg.time.t_end, cfg.time.dt)
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(wrap("stability"))?;
    let mut summary = Table::new("stability.csv", &["delta", "beta_fit", "max_bound_ratio"]);
    let mut betas = Vec::new();
    for (i, (&delta, rep)) in cfg.experiment.deltas.iter().zip(&reports).enumerate() {
        let mut t = Table::new(format!("stability_delta{}.csv", i + 1), &["t", "distance", "bound"]);
        for ((&time, &d), &b) in rep.times.iter().zip(&rep.distance).zip(&rep.bound) {
            t.push(vec![time.into(), d.into(), b.into()]);
        }
        out.tables.push(t);
        let beta = rep.beta_fit.unwrap_or(0.0);
        betas.push(beta);
        summary.push(vec![delta.into(), beta.into(), rep.max_bound_ratio.into()]);
        out.verdict(
            &format!("gronwall bound, delta = {delta:e}"),
            rep.holds,
            format!("max D/bound = {:.4}, beta = {beta:.6}", rep.max_bound_ratio),
        );
    }
    out.tables.push(summary);
    let hi = betas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = betas.iter().copied().fold(f64::INFINITY, f64::min);
    let scale = betas.iter().map(|b| b.abs()).fold(0.0, f64::max);
    let spread = if scale > 0.0 { (hi - lo) / scale } else { 0.0 };
    out.scalar("beta_spread", spread, "stability.csv:beta_fit ((max − min)/max|β|)");
    out.verdict(
        "gronwall rates agree",
        spread <= BETA_SPREAD,
        format!("relative spread of beta_fit = {:.2}% (limit {:.0}%)", 100.0 * spread, 100.0 * BETA_SPREAD),
    );
    Ok(())
}

fn continuity(ctx: &Context, out: &mut Collector) -> Result<(), HarnessError> {
    let cfg = ctx.cfg;
    let (u0, rho0) = initial_data(ctx)?;
    let rep = continuity_experiment(
        &ctx.part,
        &u0,
        &rho0,
        cfg.experiment.j_max,
        &cfg.besov,
        cfg.time.t_end,
        cfg.time.dt,
    )
    .map_err(wrap("continuity"))?;
    let mut table = Table::new("continuity.csv", &["j", "epsilon", "error"]);
    for (j, (&eps, &err)) in rep.epsilons.iter().zip(&rep.errors).enumerate() {
        table.push(vec![(j + 1).into(), eps.into(), err.into()]);
    }
    out.tables.push(table);
    out.verdict(
        "errors nonincreasing in j",
        rep.nonincreasing,
        format!("errors = {:?}", rep.errors.iter().map(|e| format!("{e:.3e}")).collect::<Vec<_>>()),
    );
    let dx = ctx.grid.dx();
    match rep.epsilons.iter().position(|&e| e < dx) {
        Some(idx) => {
            let err = rep.errors[idx];
            out.scalar("error_below_dx", err, "continuity.csv:error (first j with epsilon < dx)");
            out.verdict(
                "sub-grid mollification converges",
                err <= CONTINUITY_TOL,
                format!("error at j = {} (ε = {:.4} < dx = {dx:.4}) = {err:.3e}", idx + 1, rep.epsilons[idx]),
            );
        }
        None => out.verdict(
            "sub-grid mollification converges",
            false,
            format!("no εⱼ below dx = {dx:.4} for j ≤ {}", cfg.experiment.j_max),
        ),
    }
    Ok(())
}

fn verify(ctx: &Context, out: &mut Collector) -> Result<(), HarnessError> {
    partition_check(ctx, out);
    let c = calibrate(ctx, out, true)?;
    let mut cfg = ctx.cfg.clone();
    cfg.scheme.c = Some(ctx.cfg.scheme.c.unwrap_or(c));
    let sub = Context {
        cfg: &cfg,
        grid: ctx.grid.clone(),
        part: ctx.part.clone(),
    };
    iterate(&sub, out)?;
    lifespan_sweep(&sub, out)?;
    stability(&sub, out)?;
    continuity(&sub, out)?;
    Ok(())
}
