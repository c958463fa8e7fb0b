//! Executes one experiment configuration.

use serde::Serialize;
use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use cwikel_core::approx::{build_kn, hom_seminorm, weighted_error};
use cwikel_core::covering::{build_equal_j_covering, verify_covering};
use cwikel_core::inversion::{counterexample_growth, exterior_inversion_checks, inversion_v, rd_rhs_norm, split_norm};
use cwikel_core::orlicz::{
    decreasing_rearrangement, exp_l2_norm, field_llogl_norm, j_cube, lambda1_norm, llogl_norm, marcinkiewicz_psi_norm,
};
use cwikel_core::spectral::{assemble_cwikel, birman_schwinger_count, cwikel_ratio, singular_values, weak_quasinorm};
use cwikel_core::{Check, InversionChecks, SampledFunction, TorusCube};

use crate::config::{ExperimentConfig, ExperimentKind, FieldSource};
use crate::report::{InputDigest, Report, Series, Table};
use crate::CliError;

struct Outputs {
    tables: Vec<Table>,
    checks: Vec<Check>,
    series: Vec<Series>,
}

impl Outputs {
    fn new() -> Self {
        Self { tables: Vec::new(), checks: Vec::new(), series: Vec::new() }
    }

    fn table(&mut self, name: impl Into<String>, mut content: String) {
        if !content.ends_with('\n') {
            content.push('\n');
        }
        self.tables.push(Table { name: name.into(), content });
    }
}

fn to_json<T: Serialize>(v: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(v).map_err(|e| CliError::Io(e.to_string()))
}

fn csv_of(write: impl FnOnce(&mut Vec<u8>) -> cwikel_core::Result<()>) -> Result<String, CliError> {
    let mut buf = Vec::new();
    write(&mut buf)?;
    Ok(String::from_utf8(buf).expect("csv writers emit utf-8"))
}

/// Runs `cfg` with relative input paths resolved against the working
/// directory.
pub fn run(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    run_in(cfg, Path::new("."))
}

pub fn run_in(cfg: &ExperimentConfig, base: &Path) -> Result<Report, CliError> {
    cfg.validate()?;
    let start = Instant::now();
    let mut digest = InputDigest::new();
    digest.add("config", to_json(cfg)?.as_bytes());
    for source in cfg.inputs.iter().chain(cfg.u.iter()) {
        if let FieldSource::File { path } = source {
            let full = base.join(path);
            let bytes = std::fs::read(&full).map_err(|e| CliError::Io(format!("{}: {e}", full.display())))?;
            digest.add(&path.to_string_lossy(), &bytes);
        }
    }
    let inputs = cfg.inputs.iter().map(|s| s.load(cfg.seed, base)).collect::<Result<Vec<_>, _>>()?;
    let mut out = Outputs::new();
    match cfg.kind {
        ExperimentKind::Rearrange => rearrange(&inputs, &mut out)?,
        ExperimentKind::Cover => cover(&inputs[0], cfg, &mut out)?,
        ExperimentKind::Approx => {
            let u = cfg.u.as_ref().expect("validated").load(cfg.seed, base)?;
            approx(&inputs[0], &u, cfg, &mut out)?
        }
        ExperimentKind::Spectrum => spectrum(&inputs[0], cfg, &mut out)?,
        ExperimentKind::Sweep => sweep(&inputs, cfg, &mut out)?,
        ExperimentKind::Counterexample => counterexample(cfg, &mut out)?,
        ExperimentKind::Equivalence => equivalence(&inputs, &mut out)?,
        ExperimentKind::BsCount => bs_count(&inputs[0], cfg, &mut out)?,
    }
    Ok(Report {
        id: cfg.id(),
        kind: cfg.kind.name().to_string(),
        inputs_digest: digest.hex(),
        tables: out.tables,
        checks: out.checks,
        series: out.series,
        wall_clock_s: start.elapsed().as_secs_f64(),
    })
}

/// Compares `m{|f| > s}` with the level measure of `μ(f)` at up to 64 levels.
fn equimeasurable(f: &SampledFunction) -> bool {
    let mu = decreasing_rearrangement(f);
    let mut levels: Vec<f64> = f.values().iter().map(|v| v.abs()).collect();
    levels.sort_by(f64::total_cmp);
    let step = (levels.len() / 64).max(1);
    levels.iter().step_by(step).all(|&s| {
        let direct = f.values().iter().filter(|v| v.abs() > s).count() as f64 * f.cell_measure();
        let from_mu: f64 = mu.pieces().filter(|p| p.2 > s).map(|p| p.1 - p.0).sum();
        (direct - from_mu).abs() <= 1e-9 * f.total_measure()
    })
}

fn rearrange(inputs: &[SampledFunction], out: &mut Outputs) -> Result<(), CliError> {
    let mut norms = String::from("input,llogl,exp_l2,marcinkiewicz,lambda1\n");
    for (i, f) in inputs.iter().enumerate() {
        let mu = decreasing_rearrangement(f);
        let name = if inputs.len() == 1 { "rearrangement.csv".to_string() } else { format!("rearrangement-{i}.csv") };
        out.table(name, csv_of(|w| mu.write_csv(w))?);
        let (ll, el) = if mu.is_zero() { (0.0, 0.0) } else { (llogl_norm(&mu)?, exp_l2_norm(&mu)?) };
        let _ =
            writeln!(norms, "{i},{ll:.12e},{el:.12e},{:.12e},{:.12e}", marcinkiewicz_psi_norm(&mu), lambda1_norm(&mu));
        out.checks.push(Check::flag(format!("input {i}: rearrangement is equimeasurable"), equimeasurable(f)));
    }
    out.table("norms.csv", norms);
    Ok(())
}

fn cover(f: &SampledFunction, cfg: &ExperimentConfig, out: &mut Outputs) -> Result<(), CliError> {
    let norm = field_llogl_norm(f);
    let mut summary =
        String::from("n,cubes,cubes_over_n,max_multiplicity,max_rel_deviation,saturated,families,coverage\n");
    let mut counts = Vec::new();
    for &n in &cfg.n {
        let cov = build_equal_j_covering(f, n, cfg.tol)?;
        let rep = verify_covering(f, &cov, n);
        let _ = writeln!(
            summary,
            "{n},{},{:.6},{},{:.6e},{},{},{:.6}",
            rep.cube_count,
            rep.count_over_n,
            rep.max_multiplicity,
            rep.max_rel_deviation,
            rep.saturated,
            rep.family_count,
            rep.coverage
        );
        let name = if cfg.n.len() == 1 { "covering.json".to_string() } else { format!("covering-n{n}.json") };
        out.table(name, cov.to_json()?);
        out.checks.push(Check::close(format!("cover n={n}: every cell covered"), rep.coverage, 1.0, 0.0));
        out.checks.push(Check::le(
            format!("cover n={n}: |J(cube) - ‖f‖/n| ≤ tol ‖f‖/n"),
            rep.max_rel_deviation,
            cfg.tol,
            0.0,
        ));
        out.checks.push(Check::flag(format!("cover n={n}: families pairwise disjoint"), rep.families_disjoint));
        let family_sum = cov
            .families
            .iter()
            .map(|fam| fam.iter().map(|&k| j_cube(f, &cov.cubes[k])).sum::<f64>())
            .fold(0.0, f64::max);
        out.checks.push(Check::le(
            format!("J subadditivity n={n}: Σ J over a disjoint family ≤ 4‖f‖"),
            family_sum,
            4.0 * norm,
            0.0,
        ));
        counts.push([n as f64, rep.count_over_n]);
    }
    out.table("covering.csv", summary);
    if counts.len() > 1 {
        out.series.push(Series {
            name: "cube-count".into(),
            x_label: "n".into(),
            y_label: "m(n)/n".into(),
            points: counts,
            fit: Vec::new(),
        });
    }
    Ok(())
}

fn approx(f: &SampledFunction, u: &SampledFunction, cfg: &ExperimentConfig, out: &mut Outputs) -> Result<(), CliError> {
    let dim = f.dim();
    let hom = hom_seminorm(u, dim as f64 / 2.0, &TorusCube::whole(dim))?.value;
    if !(hom > 0.0) {
        return Err(cwikel_core::Error::ZeroSeminorm.into());
    }
    let norm = field_llogl_norm(f);
    let mut table = String::from("n,rank_bound,error,normalized\n");
    let mut points = Vec::new();
    let mut normalized = Vec::new();
    for &n in &cfg.n {
        let k = build_kn(f, n)?;
        let err = weighted_error(f, u, &k)?;
        let q = n as f64 * err / (norm * hom * hom);
        let _ = writeln!(table, "{n},{},{err:.12e},{q:.12e}", k.rank_bound());
        if cfg.n.len() == 1 {
            out.table("kn.json", k.to_json()?);
        }
        points.push([n as f64, n as f64 * err]);
        normalized.push(q);
    }
    out.table("approx.csv", table);
    if normalized.len() > 1 {
        let max = normalized.iter().cloned().fold(0.0, f64::max);
        let min = normalized.iter().cloned().fold(f64::INFINITY, f64::min);
        out.checks.push(Check::le("approximation: max/min of n·err/(‖f‖ ‖u‖²_hom) ≤ 3", max / min, 3.0, 0.0));
    }
    out.series.push(Series {
        name: "error-times-n".into(),
        x_label: "n".into(),
        y_label: "n · ∫ f |u - K_n u|²".into(),
        points,
        fit: Vec::new(),
    });
    Ok(())
}

fn spectrum(f: &SampledFunction, cfg: &ExperimentConfig, out: &mut Outputs) -> Result<(), CliError> {
    let cutoff = cfg.cutoffs[0];
    let t = assemble_cwikel(f, cutoff)?;
    let s = singular_values(&t);
    out.table("spectrum.csv", csv_of(|w| s.write_csv(w))?);
    let q = weak_quasinorm(&s, cfg.p);
    let norm = field_llogl_norm(f);
    out.table(
        "summary.csv",
        format!(
            "N,rows,p,quasinorm,llogl_norm,ratio\n{cutoff},{},{},{q:.12e},{norm:.12e},{:.12e}\n",
            t.lattice.len(),
            cfg.p,
            q / norm
        ),
    );
    Ok(())
}

fn sweep(inputs: &[SampledFunction], cfg: &ExperimentConfig, out: &mut Outputs) -> Result<(), CliError> {
    let mut table = String::from("f_id,N,ratio\n");
    for (i, f) in inputs.iter().enumerate() {
        let mut points = Vec::new();
        for &cutoff in &cfg.cutoffs {
            let r = cwikel_ratio(f, cutoff)?;
            let _ = writeln!(table, "{i},{cutoff},{r:.12e}");
            points.push([cutoff as f64, r]);
        }
        out.series.push(Series {
            name: format!("ratio-f{i}"),
            x_label: "N".into(),
            y_label: "‖T_N‖_{1,∞} / ‖f‖_{L log L}".into(),
            points,
            fit: Vec::new(),
        });
    }
    out.table("sweep.csv", table);
    Ok(())
}

fn counterexample(cfg: &ExperimentConfig, out: &mut Outputs) -> Result<(), CliError> {
    let dim = cfg.dim.expect("validated");
    let g = counterexample_growth(&cfg.ns, dim, cfg.cutoffs[0], cfg.counterexample_resolution())?;
    out.table("growth.csv", csv_of(|w| g.write_csv(w))?);
    out.table("growth.json", to_json(&g)?);
    out.checks.push(Check::flag("ball-union family: q_n strictly increasing", g.strictly_increasing()));
    out.checks.push(Check::flag("ball-union family: fit slope against √log n positive", g.slope > 0.0));
    out.checks.push(Check::le("ball-union family: ‖f_n‖_{L log L} constant to 1%", g.norm_variation(), 0.01, 0.0));
    let x: Vec<f64> = g.ns.iter().map(|&n| (n as f64).ln().sqrt()).collect();
    out.series.push(Series {
        name: "growth".into(),
        x_label: "√log n".into(),
        y_label: "q_n".into(),
        points: x.iter().zip(&g.q).map(|(a, b)| [*a, *b]).collect(),
        fit: x.iter().zip(&g.fit).map(|(a, b)| [*a, *b]).collect(),
    });
    Ok(())
}

#[derive(Serialize)]
struct EquivalenceRecord {
    input: usize,
    split_norm: f64,
    rd_rhs_norm: f64,
    ratio: f64,
    masked_cells: usize,
    origin_defect: f64,
    far_defect: f64,
    exterior: InversionChecks,
}

fn equivalence(inputs: &[SampledFunction], out: &mut Outputs) -> Result<(), CliError> {
    let mut records = Vec::new();
    for (i, f) in inputs.iter().enumerate() {
        let split = split_norm(f)?;
        let rhs = rd_rhs_norm(f);
        let v = inversion_v(f)?;
        let ext = exterior_inversion_checks(f)?;
        out.checks.push(Check { anchor: format!("input {i}: {}", ext.upper.anchor), ..ext.upper.clone() });
        out.checks.push(Check { anchor: format!("input {i}: {}", ext.lower.anchor), ..ext.lower.clone() });
        records.push(EquivalenceRecord {
            input: i,
            split_norm: split,
            rd_rhs_norm: rhs,
            ratio: if rhs > 0.0 { split / rhs } else { 0.0 },
            masked_cells: v.masked_cells,
            origin_defect: v.origin_defect,
            far_defect: v.far_defect,
            exterior: ext,
        });
    }
    let body = if records.len() == 1 { to_json(&records[0])? } else { to_json(&records)? };
    out.table("equivalence.json", body);
    Ok(())
}

fn bs_count(f: &SampledFunction, cfg: &ExperimentConfig, out: &mut Outputs) -> Result<(), CliError> {
    let cutoff = cfg.cutoffs[0];
    let mut table = String::from("t,cwikel,schrodinger\n");
    for &t in &cfg.couplings {
        let c = birman_schwinger_count(f, t, cutoff)?;
        let _ = writeln!(table, "{t},{},{}", c.cwikel, c.schrodinger);
        out.checks.push(Check::close(
            format!("t={t}: #{{eig T_(f/t) > 1}} = #{{negative eig of (1-Δ)^(d/2) - f/t}}"),
            c.cwikel as f64,
            c.schrodinger as f64,
            0.0,
        ));
    }
    out.table("counts.csv", table);
    Ok(())
}
