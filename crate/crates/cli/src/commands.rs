use std::collections::BTreeMap;
use std::fmt::Write as _;

use hamsys::auxfun::{check_inequalities, PerturbedPower, SampleSpec};
use hamsys::functional::{mp_level_report, mp_threshold, rayleigh_constant, RayleighOptions, RayleighResult};
use hamsys::groundstate::{fit_decay, solve_ground_state_with, sobolev_constant, GroundStateOptions, RadialProfile};
use hamsys::mesh::RadialMesh;
use hamsys::params::{classify, q_from_p, smallness_thresholds, SystemParams};
use hamsys::scalar::{ball_volume, sphere_area};
use hamsys::solver::{existence_sweep, solve_ball, SolveOptions, Verdict};
use serde::Serialize;
use serde_json::{json, Value};

use crate::cache::Bundle;
use crate::config::{Command, RunConfig, Settings};
use crate::error::CliError;

const LEMMA_RANGE: (f64, f64) = (1e-8, 1e8);
const MP_MESH_INTERVALS: usize = 4000;
const MP_MESH_GRADING: f64 = 14.0;
const RAYLEIGH_GRADING: f64 = 3.0;

struct Output {
    result: Value,
    files: Vec<(String, String)>,
    exit_code: u8,
}

impl Output {
    fn new(result: Value) -> Self {
        Self { result, files: Vec::new(), exit_code: 0 }
    }

    fn file(mut self, name: &str, body: String) -> Self {
        self.files.push((name.to_string(), body));
        self
    }
}

#[derive(Serialize)]
struct Summary<'a> {
    command: &'static str,
    version: &'static str,
    config_hash: String,
    settings: &'a Settings,
    result: Value,
}

pub fn execute(cfg: &RunConfig) -> Result<Bundle, CliError> {
    let s = &cfg.settings;
    let out = match s.command {
        Command::GroundState => ground_state(s)?,
        Command::CheckLemmas => check_lemmas(s)?,
        Command::Sobolev => sobolev(s)?,
        Command::MpLevel => mp_level(s)?,
        Command::Rayleigh => rayleigh(s)?,
        Command::SolveBall => ball(s)?,
        Command::Sweep => sweep(s)?,
        Command::Classify => classify_point(s)?,
    };
    let summary = Summary {
        command: s.command.name(),
        version: env!("CARGO_PKG_VERSION"),
        config_hash: cfg.cache_key(),
        settings: s,
        result: out.result,
    };
    let mut files = BTreeMap::new();
    let text = serde_json::to_string_pretty(&summary).map_err(|e| CliError::Io(e.to_string()))?;
    files.insert("summary.json".to_string(), text + "\n");
    files.extend(out.files);
    Ok(Bundle { exit_code: out.exit_code, files })
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("results serialize")
}

fn csv(header: &str, rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut out = format!("{header}\n");
    for row in rows {
        let cells: Vec<String> = row.iter().map(|x| format!("{x:e}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

fn hyperbola_q(s: &Settings) -> Result<f64, CliError> {
    let q = q_from_p(s.n, s.p)?;
    if let Some(given) = s.q {
        if (given - q).abs() > 1e-9 * q.max(1.0) {
            return Err(CliError::Validation(format!(
                "q = {given} is off the critical hyperbola (q = {q} for N = {}, p = {})",
                s.n, s.p
            )));
        }
    }
    Ok(q)
}

fn system(s: &Settings) -> Result<SystemParams<f64>, CliError> {
    let q = hyperbola_q(s)?;
    Ok(SystemParams { n: s.n, p: s.p, q, r: s.r, s: s.s, lambda: s.lambda, mu: s.mu }.validate()?)
}

fn profile(s: &Settings, far: bool) -> Result<RadialProfile<f64>, CliError> {
    let q = hyperbola_q(s)?;
    let mut opts = GroundStateOptions { tol: s.tol, ..GroundStateOptions::default() };
    if far {
        opts.decay_ratio = 1e-16;
        opts.r_cap = 1e9;
    }
    Ok(solve_ground_state_with(s.n, s.p, q, &opts)?)
}

fn ground_state(s: &Settings) -> Result<Output, CliError> {
    let gs = profile(s, false)?;
    let decay = fit_decay(&gs)?;
    let result = json!({
        "N": gs.n,
        "p": gs.p,
        "q": gs.q,
        "beta": gs.beta(),
        "r_max": gs.r_max(),
        "nodes": gs.len(),
        "bisections": gs.bisections,
        "ode_residual": gs.ode_residual(),
        "decay": to_value(&decay),
    });
    let rows = (0..gs.len()).map(|i| vec![gs.r[i], gs.phi[i], gs.psi[i], gs.dphi[i], gs.dpsi[i]]);
    Ok(Output::new(result).file("profile.csv", csv("r,phi,psi,dphi,dpsi", rows)))
}

fn check_lemmas(s: &Settings) -> Result<Output, CliError> {
    let pp = PerturbedPower::new(s.lambda, s.r, s.p)?;
    let spec = SampleSpec::log_spaced(s.samples, LEMMA_RANGE.0, LEMMA_RANGE.1);
    let reports = check_inequalities(&pp, s.s, &spec);
    let all_pass = reports.iter().all(|r| r.pass);
    let result = json!({
        "lambda": s.lambda,
        "r": s.r,
        "p": s.p,
        "s": s.s,
        "samples": s.samples,
        "t_range": [LEMMA_RANGE.0, LEMMA_RANGE.1],
        "threshold": pp.threshold(),
        "all_pass": all_pass,
        "reports": to_value(&reports),
    });
    let mut out = Output::new(result);
    if !all_pass {
        out.exit_code = 2;
    }
    Ok(out)
}

/// `N(N-2)/4 |S^N|^{2/N}`, exact for the symmetric instanton.
fn closed_form_quotient(n: u32) -> f64 {
    let nn = f64::from(n);
    nn * (nn - 2.0) / 4.0 * sphere_area::<f64>(n + 1).powf(2.0 / nn)
}

fn sobolev(s: &Settings) -> Result<Output, CliError> {
    let gs = profile(s, true)?;
    let quotient = sobolev_constant(&gs)?;
    let energy = quotient.powf((gs.p + 1.0) / gs.p);
    let symmetric = (gs.p - gs.q).abs() <= 1e-12 * gs.p;
    let exact = symmetric.then(|| closed_form_quotient(gs.n));
    let result = json!({
        "N": gs.n,
        "p": gs.p,
        "q": gs.q,
        "quotient": quotient,
        "sobolev": energy,
        "threshold": mp_threshold(gs.n, quotient),
        "t_bound": energy.powf(gs.p / (gs.p * gs.q - 1.0)),
        "closed_form": exact,
        "relative_error": exact.map(|e| (quotient / e - 1.0).abs()),
    });
    Ok(Output::new(result))
}

fn mp_level(s: &Settings) -> Result<Output, CliError> {
    let params = system(s)?;
    let gs = profile(s, true)?;
    let quotient = sobolev_constant(&gs)?;
    let mesh = RadialMesh::graded(s.n, s.radius, MP_MESH_INTERVALS, MP_MESH_GRADING)?;
    let deltas: Vec<f64> = s.deltas.iter().map(|d| d * s.rho).collect();
    let reports = mp_level_report(&params, &deltas, s.rho, &gs, &mesh, quotient)?;
    let result = json!({
        "params": to_value(&params),
        "rho": s.rho,
        "quotient": quotient,
        "mesh_intervals": MP_MESH_INTERVALS,
        "reports": to_value(&reports),
    });
    let rows = reports.iter().map(|r| {
        vec![r.delta, r.t_delta, r.level, r.level_identity, r.threshold, r.margin, r.t_bound, r.laplacian_energy]
    });
    let table = csv("delta,t_delta,level,level_identity,threshold,margin,t_bound,laplacian_energy", rows);
    let mut dat = String::from("# delta margin\n");
    for r in &reports {
        let _ = writeln!(dat, "{:e} {:e}", r.delta, r.margin);
    }
    Ok(Output::new(result).file("mp_level.csv", table).file("margin.dat", dat))
}

fn rayleigh_summary(c: &RayleighResult<f64>) -> Value {
    json!({
        "value": c.value,
        "per_start": c.per_start,
        "iterations": c.iterations,
        "converged": c.converged,
    })
}

fn rayleigh(s: &Settings) -> Result<Output, CliError> {
    let params = system(s)?;
    let mesh = RadialMesh::graded(s.n, s.radius, s.samples, RAYLEIGH_GRADING)?;
    let opts = RayleighOptions { seed: s.seed, ..RayleighOptions::default() };
    let c_r = rayleigh_constant(&mesh, params.r, params.p, &opts)?;
    let c_s = rayleigh_constant(&mesh, params.s, params.q, &opts)?;
    let volume = ball_volume(s.n, s.radius);
    let smallness = smallness_thresholds(&params, c_r.value, c_s.value, volume);
    let result = json!({
        "params": to_value(&params),
        "R": s.radius,
        "mesh_intervals": s.samples,
        "seed": s.seed,
        "c_r": rayleigh_summary(&c_r),
        "c_s": rayleigh_summary(&c_s),
        "volume": volume,
        "smallness": to_value(&smallness),
        "admits": smallness.admits(&params),
    });
    let table = |c: &RayleighResult<f64>| {
        let rows = (0..mesh.len()).map(|i| vec![mesh.nodes[i], c.minimizer[i], c.density[i]]);
        csv("r,u,density", rows)
    };
    Ok(Output::new(result).file("rayleigh_r.csv", table(&c_r)).file("rayleigh_s.csv", table(&c_s)))
}

fn solve_options(s: &Settings) -> SolveOptions<f64> {
    SolveOptions { tol: s.tol, ..SolveOptions::default() }
}

fn ball(s: &Settings) -> Result<Output, CliError> {
    let params = system(s)?;
    let opts = solve_options(s);
    let res = solve_ball(&params, s.radius, &opts)?;
    let result = json!({
        "params": to_value(&params),
        "R": s.radius,
        "options": to_value(&opts),
        "verdict": to_value(&res.verdict),
        "converged": res.converged,
        "alpha": res.alpha,
        "beta": res.beta,
        "residual_u": res.residual_u,
        "residual_v": res.residual_v,
        "residual": res.residual(),
        "positive": res.positive,
        "decreasing": res.decreasing,
        "shots": res.shots,
        "note": res.note,
    });
    let mut trace = String::from("alpha,beta,zero_radius\n");
    for t in &res.trace {
        let cell = |x: Option<f64>| x.map(|v| format!("{v:e}")).unwrap_or_default();
        let _ = writeln!(trace, "{:e},{},{}", t.alpha, cell(t.beta), cell(t.zero_radius));
    }
    let mut out = Output::new(result).file("trace.csv", trace);
    if let (Verdict::Found | Verdict::Inconclusive, Some(pr)) = (res.verdict, &res.profile) {
        let rows = (0..pr.len()).map(|i| vec![pr.r[i], pr.u[i], pr.v[i], pr.du[i], pr.dv[i]]);
        out = out.file("ball_profile.csv", csv("r,u,v,du,dv", rows));
    }
    Ok(out)
}

fn sweep(s: &Settings) -> Result<Output, CliError> {
    let q = hyperbola_q(s)?;
    let base = SystemParams { n: s.n, p: s.p, q, r: s.r, s: s.s, lambda: s.lambda, mu: s.mu };
    let grid = s.grid.clone().unwrap_or_default();
    let res = existence_sweep(&base, s.radius, &grid, &solve_options(s))?;
    let mut table = String::from("index,N,p,q,r,s,lambda,mu,R,verdict,residual,alpha,beta,region\n");
    for e in &res.entries {
        let pt = &e.point.params;
        let cell = |x: Option<f64>| x.map(|v| format!("{v:e}")).unwrap_or_default();
        let verdict = to_value(&e.verdict);
        let region = e.region.as_ref().map(|r| to_value(&r.kind));
        let _ = writeln!(
            table,
            "{},{},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{},{},{},{},{}",
            e.point.index,
            pt.n,
            pt.p,
            pt.q,
            pt.r,
            pt.s,
            pt.lambda,
            pt.mu,
            e.point.radius,
            verdict.as_str().unwrap_or_default(),
            cell(e.residual),
            cell(e.alpha),
            cell(e.beta),
            region.as_ref().and_then(Value::as_str).unwrap_or(""),
        );
    }
    Ok(Output::new(to_value(&res)).file("sweep.csv", table))
}

fn classify_point(s: &Settings) -> Result<Output, CliError> {
    let q = hyperbola_q(s)?;
    let region = classify(s.n, s.p, s.r, s.s)?;
    let result = json!({
        "N": s.n,
        "p": s.p,
        "q": q,
        "r": s.r,
        "s": s.s,
        "region": to_value(&region),
    });
    Ok(Output::new(result))
}
