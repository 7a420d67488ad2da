//! Command dispatch. Each command writes CSV or JSON to `--out` or stdout.

use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use phasekit::kernels::{Displacement, Kernel, KernelSpec, Side};
use phasekit::liealgebra::{build_generators, trace_norm, z_index, Algebra};
use phasekit::linalg::{
    hermiticity_defect, identity, kron_all, operator_norm, real, trace, trace_product, zeros,
};
use phasekit::rotations::{annihilation, block_offset};
use phasekit::statmech::{self, Record, ThermalSpec, DEFAULT_STEP};
use phasekit::transforms::{self, GridOptions, PhaseFunction, PhaseSpace, VerifyOptions};
use phasekit::{build_state, MatrixJson, OperatorMatrix, PhasePoint, SystemDescriptor};
use serde_json::{json, Value};

use crate::config::{CommandName, RunConfig};
use crate::parse::{parse_complexes, parse_state, parse_system, ParseError};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] phasekit::Error),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("{0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.display().to_string(),
            source,
        }
    }

    /// Short machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Core(_) => "computation",
            Self::Parse(_) => "parse",
            Self::Usage(_) => "usage",
            Self::Config(_) => "config",
            Self::Io { .. } => "io",
            Self::Json(_) => "json",
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Cap the global worker pool at `hint`, further capped by
/// `PHASEKIT_MAX_THREADS` when set.
pub fn configure_threads(hint: Option<usize>) {
    let cap = std::env::var("PHASEKIT_MAX_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok());
    let n = match (hint, cap) {
        (Some(h), Some(c)) => h.min(c),
        (Some(h), None) => h,
        (None, Some(c)) => c,
        (None, None) => return,
    };
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n.max(1))
        .build_global();
}

pub(crate) fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub(crate) fn cjson(z: Complex64) -> Value {
    json!([z.re, z.im])
}

pub(crate) fn system(cfg: &RunConfig) -> Result<SystemDescriptor> {
    let text = cfg
        .system
        .as_deref()
        .ok_or_else(|| usage("--system is required"))?;
    Ok(parse_system(text)?)
}

pub(crate) fn grid_options(cfg: &RunConfig) -> GridOptions {
    GridOptions {
        resolution: cfg.grid_res,
        radius: cfg.radius,
    }
}

/// `e . (J(1), J(2), J(3))` summed over the spin factors of `desc`.
pub(crate) fn spin_operator(desc: &SystemDescriptor, e: &[f64]) -> Result<OperatorMatrix> {
    if e.len() != 3 {
        return Err(usage(format!("expected three components, got {}", e.len())));
    }
    let factors = desc.factors();
    let dims: Vec<usize> = factors
        .iter()
        .map(|f| f.dimension())
        .collect::<std::result::Result<_, _>>()?;
    let mut total = zeros(desc.dimension()?);
    for (i, f) in factors.iter().enumerate() {
        let SystemDescriptor::Sun { n: 2, m } = *f else {
            return Err(usage(format!(
                "field operators need su:2:M factors, got {f}"
            )));
        };
        let g = build_generators(2, m)?;
        let local = &g[0] * real(e[0]) + &g[1] * real(e[1]) + &g[2] * real(e[2]);
        total += embed(&dims, i, &local);
    }
    Ok(total)
}

fn embed(dims: &[usize], i: usize, op: &OperatorMatrix) -> OperatorMatrix {
    if dims.len() == 1 {
        return op.clone();
    }
    let mats: Vec<OperatorMatrix> = dims
        .iter()
        .enumerate()
        .map(|(j, &d)| if j == i { op.clone() } else { identity(d) })
        .collect();
    kron_all(&mats)
}

pub(crate) fn hamiltonian(
    cfg: &RunConfig,
    desc: &SystemDescriptor,
) -> Result<Option<OperatorMatrix>> {
    if let Some(path) = &cfg.hamiltonian {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mj: MatrixJson = serde_json::from_str(&text)?;
        let h = OperatorMatrix::try_from(&mj)?;
        let d = desc.dimension()?;
        if h.nrows() != d {
            return Err(phasekit::Error::DimensionMismatch {
                expected: d,
                found: h.nrows(),
            }
            .into());
        }
        return Ok(Some(h));
    }
    cfg.field
        .as_deref()
        .map(|f| spin_operator(desc, f))
        .transpose()
}

fn require_hamiltonian(cfg: &RunConfig, desc: &SystemDescriptor) -> Result<OperatorMatrix> {
    hamiltonian(cfg, desc)?.ok_or_else(|| usage("--field or --hamiltonian is required"))
}

pub(crate) fn state(cfg: &RunConfig, desc: &SystemDescriptor) -> Result<OperatorMatrix> {
    let text = cfg
        .state
        .as_deref()
        .ok_or_else(|| usage("--state is required"))?;
    let h = hamiltonian(cfg, desc)?;
    let spec = parse_state(text, desc, h.as_ref())?;
    Ok(build_state(&spec, desc)?)
}

/// Write `bytes` to `--out`, or to `stdout` when no file is given.
pub(crate) fn emit(cfg: &RunConfig, stdout: &mut dyn Write, bytes: &[u8]) -> Result<()> {
    match &cfg.out {
        Some(p) => std::fs::write(p, bytes).map_err(|e| CliError::io(p, e)),
        None => stdout
            .write_all(bytes)
            .map_err(|e| CliError::io(Path::new("<stdout>"), e)),
    }
}

pub(crate) fn print_json(stdout: &mut dyn Write, v: &impl serde::Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(v)? + "\n";
    stdout
        .write_all(text.as_bytes())
        .map_err(|e| CliError::io(Path::new("<stdout>"), e))
}

fn space_for(cfg: &RunConfig, desc: &SystemDescriptor, side: Side) -> Result<Arc<PhaseSpace>> {
    let spec = KernelSpec {
        side,
        system: desc.clone(),
        displacement: cfg.displacement.unwrap_or_default(),
    };
    Ok(PhaseSpace::default_for(spec, &grid_options(cfg))?)
}

/// Run one configured command.
pub fn run(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<()> {
    let cmd = cfg.command.ok_or_else(|| usage("no command given"))?;
    match cmd {
        CommandName::Algebra => algebra(cfg, stdout),
        CommandName::Kernel => kernel(cfg, stdout),
        CommandName::Wigner => sample(cfg, stdout, Side::Wigner),
        CommandName::Weyl => sample(cfg, stdout, Side::Weyl),
        CommandName::Reconstruct => reconstruct(cfg, stdout),
        CommandName::Verify => verify(cfg, stdout),
        CommandName::Partition | CommandName::Mean | CommandName::Freeenergy => {
            thermal(cfg, stdout, cmd)
        }
        CommandName::Moments => moments(cfg, stdout),
        CommandName::Autocorr => autocorr(cfg, stdout),
        CommandName::Crosscorr => crosscorr(cfg, stdout),
        CommandName::Evolve => evolve(cfg, stdout),
        CommandName::FigureData => crate::figures::figure_data(cfg, stdout),
    }
}

fn algebra(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<()> {
    let desc = system(cfg)?;
    let SystemDescriptor::Sun { n, m } = desc else {
        return Err(usage(format!(
            "algebra needs a single su:N:M system, got {desc}"
        )));
    };
    let alg = Algebra::new(n, m)?;
    let norm = trace_norm(n, m)?;
    let g = alg.generators();
    let mut residual: f64 = 0.0;
    for (i, a) in g.iter().enumerate() {
        for (j, b) in g.iter().enumerate() {
            let expect = if i == j { norm } else { 0.0 };
            residual = residual.max((trace_product(a, b) - real(expect)).norm());
        }
    }
    let gens: Vec<Value> = g
        .iter()
        .enumerate()
        .map(|(k, mat)| json!({"index": k + 1, "matrix": MatrixJson::from(mat)}))
        .collect();
    let out = json!({
        "system": desc.to_string(),
        "dim": alg.dim(),
        "basis": alg.basis().iter().map(|b| b.occupations.clone()).collect::<Vec<_>>(),
        "generators": gens,
        "trace_rule": {"expected": norm, "residual": residual},
    });
    emit(
        cfg,
        stdout,
        (serde_json::to_string_pretty(&out)? + "\n").as_bytes(),
    )
}

fn kernel(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<()> {
    let desc = system(cfg)?;
    let side = cfg.side.unwrap_or(Side::Wigner);
    let displacement = cfg.displacement.unwrap_or_default();
    let k = Kernel::new(KernelSpec {
        side,
        system: desc.clone(),
        displacement,
    })?;
    let euler = side == Side::Weyl && displacement == Displacement::Euler;
    let template = PhasePoint::origin(&desc, euler);
    let point = match &cfg.point {
        Some(c) => template.with_coordinates(c)?,
        None => template,
    };
    let mat = k.at(&point)?;
    let tr = trace(&mat);
    let residual = (side == Side::Wigner).then(|| (tr - real(1.0)).norm());
    let out = json!({
        "system": desc.to_string(),
        "side": side,
        "displacement": displacement,
        "coordinate_names": point.coordinate_names(),
        "coordinates": point.coordinates(),
        "kernel": MatrixJson::from(&mat),
        "trace": cjson(tr),
        "oracle_trace": residual.map(|_| 1.0),
        "residual": residual,
        "hermiticity_defect": hermiticity_defect(&mat),
    });
    emit(
        cfg,
        stdout,
        (serde_json::to_string_pretty(&out)? + "\n").as_bytes(),
    )
}

fn sample(cfg: &RunConfig, stdout: &mut dyn Write, side: Side) -> Result<()> {
    let desc = system(cfg)?;
    let space = space_for(cfg, &desc, side)?;
    let rho = state(cfg, &desc)?;
    let f = space.transform(&rho)?;
    let mut csv = Vec::new();
    f.write_csv(&mut csv)
        .map_err(|e| CliError::io(Path::new("<buffer>"), e))?;
    emit(cfg, stdout, &csv)?;
    if cfg.out.is_some() {
        let rec = transforms::reconstruct(&f);
        print_json(
            stdout,
            &json!({
                "command": if side == Side::Wigner { "wigner" } else { "weyl" },
                "system": desc.to_string(),
                "state": cfg.state,
                "nodes": f.len(),
                "out": cfg.out,
                "round_trip_residual": operator_norm(&(rec - &rho)),
            }),
        )?;
    }
    Ok(())
}

fn read_function(space: &Arc<PhaseSpace>, path: &Path) -> Result<PhaseFunction> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap_or("").split(',').collect();
    let grid = space.grid();
    let mut expect = grid.point(0).coordinate_names();
    expect.extend(["weight", "re", "im"].map(String::from));
    if header != expect {
        return Err(usage(format!(
            "{}: header {:?} does not match the grid columns {:?}",
            path.display(),
            header,
            expect
        )));
    }
    let n_coord = expect.len() - 3;
    let mut values = Vec::with_capacity(grid.len());
    for (i, line) in lines.enumerate() {
        if i >= grid.len() {
            return Err(usage(format!(
                "{}: more rows than the {} grid nodes",
                path.display(),
                grid.len()
            )));
        }
        let cells: Vec<f64> = line
            .split(',')
            .map(|c| c.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| usage(format!("{}: row {}: {e}", path.display(), i + 1)))?;
        if cells.len() != expect.len() {
            return Err(usage(format!(
                "{}: row {} has {} cells",
                path.display(),
                i + 1,
                cells.len()
            )));
        }
        let node = grid.point(i).coordinates();
        let off = node
            .iter()
            .zip(&cells[..n_coord])
            .any(|(a, b)| (a - b).abs() > 1e-12 * (1.0 + a.abs()));
        if off {
            return Err(usage(format!(
                "{}: row {} is not grid node {i}",
                path.display(),
                i + 1
            )));
        }
        values.push(Complex64::new(cells[n_coord + 1], cells[n_coord + 2]));
    }
    if values.len() != grid.len() {
        return Err(usage(format!(
            "{}: {} rows for {} grid nodes",
            path.display(),
            values.len(),
            grid.len()
        )));
    }
    Ok(PhaseFunction::from_values(Arc::clone(space), values)?)
}

fn reconstruct(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<()> {
    let desc = system(cfg)?;
    let side = cfg.side.unwrap_or(Side::Wigner);
    let space = space_for(cfg, &desc, side)?;
    let input = cfg
        .input
        .as_deref()
        .ok_or_else(|| usage("--input is required"))?;
    let f = read_function(&space, input)?;
    let a = transforms::reconstruct(&f);
    let (oracle, residual) = match cfg.state {
        Some(_) => {
            let rho = state(cfg, &desc)?;
            (
                Some(MatrixJson::from(&rho)),
                Some(operator_norm(&(&a - &rho))),
            )
        }
        None => (None, None),
    };
    let out = json!({
        "system": desc.to_string(),
        "side": side,
        "nodes": f.len(),
        "matrix": MatrixJson::from(&a),
        "trace": cjson(trace(&a)),
        "hermiticity_defect": hermiticity_defect(&a),
        "oracle": oracle,
        "residual": residual,
    });
    emit(
        cfg,
        stdout,
        (serde_json::to_string_pretty(&out)? + "\n").as_bytes(),
    )
}

fn verify(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<()> {
    let desc = system(cfg)?;
    let opts = VerifyOptions {
        grid: grid_options(cfg),
        displacement: cfg.displacement.unwrap_or_default(),
        seed: cfg.seed.unwrap_or(1),
        ..VerifyOptions::default()
    };
    let report = transforms::verify_stratonovich(&desc, cfg.side.unwrap_or(Side::Wigner), &opts)?;
    emit(
        cfg,
        stdout,
        (serde_json::to_string_pretty(&report)? + "\n").as_bytes(),
    )
}

fn thermal(cfg: &RunConfig, stdout: &mut dyn Write, cmd: CommandName) -> Result<()> {
    let desc = system(cfg)?;
    let h = require_hamiltonian(cfg, &desc)?;
    let beta = cfg.beta.unwrap_or(1.0);
    let spec = ThermalSpec::new(h, beta)?;
    let space = space_for(cfg, &desc, Side::Wigner)?;
    let mut params = json!({
        "system": desc.to_string(),
        "beta": beta,
        "field": cfg.field,
        "hamiltonian": cfg.hamiltonian,
        "grid_nodes": space.len(),
    });
    let z_oracle = spec.eigenvalue_partition();
    let rec = match cmd {
        CommandName::Partition => Record::real(
            "partition_function",
            params,
            statmech::partition_function(&spec, &space)?,
            Some(z_oracle),
        ),
        CommandName::Mean => {
            let e = cfg
                .observable
                .as_deref()
                .ok_or_else(|| usage("--observable is required"))?;
            let a = spin_operator(&desc, e)?;
            params["observable"] = json!(e);
            let oracle = trace_product(&a, &spec.density()).re;
            Record::real(
                "thermal_mean",
                params,
                statmech::thermal_mean(&a, &spec, &space)?,
                Some(oracle),
            )
        }
        _ => {
            let f = statmech::free_energy(&spec, &space)?;
            Record::real("free_energy", params, f, Some(-z_oracle.ln() / beta))
        }
    };
    emit(
        cfg,
        stdout,
        (serde_json::to_string_pretty(&rec)? + "\n").as_bytes(),
    )
}

/// `∂/∂ω Tr[ρ D(ω)]` at the origin for each moment variable, from the
/// generators: `i Tr[ρ G]` for an Euler angle, `Tr[ρ a†]` and `-Tr[ρ a]`
/// for an oscillator.
fn first_derivatives(desc: &SystemDescriptor, rho: &OperatorMatrix) -> Result<Vec<Complex64>> {
    let factors = desc.factors();
    let dims: Vec<usize> = factors
        .iter()
        .map(|f| f.dimension())
        .collect::<std::result::Result<_, _>>()?;
    let mut out = Vec::new();
    let i_unit = Complex64::new(0.0, 1.0);
    for (fi, f) in factors.iter().enumerate() {
        match *f {
            SystemDescriptor::Hw { n_max } => {
                let a = annihilation(n_max);
                out.push(trace_product(rho, &embed(&dims, fi, &a.adjoint())));
                out.push(-trace_product(rho, &embed(&dims, fi, &a)));
            }
            SystemDescriptor::Sun { n, m } => {
                let alg = Algebra::new(n, m)?;
                let k = n * (n - 1) / 2;
                let mut theta_gen = vec![0; k];
                for q in (2..=n).rev() {
                    for p in 2..=q {
                        theta_gen[(p - 2) + block_offset(n, q)] = p;
                    }
                }
                let mut gens: Vec<OperatorMatrix> = vec![alg.generator(3)?.clone(); k];
                gens.extend(theta_gen.iter().map(|&p| alg.jy(1, p).clone()));
                for c in 1..n {
                    gens.push(alg.generator(z_index(c))?.clone());
                }
                for g in gens {
                    out.push(i_unit * trace_product(rho, &embed(&dims, fi, &g)));
                }
            }
            SystemDescriptor::Composite(_) => unreachable!("factors are flat"),
        }
    }
    Ok(out)
}

fn moments(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<()> {
    let desc = system(cfg)?;
    let rho = state(cfg, &desc)?;
    let vars = statmech::moment_variables(&desc);
    let orders = cfg.orders.clone().ok_or_else(|| {
        usage(format!(
            "--orders is required; variables: {}",
            vars.join(",")
        ))
    })?;
    let eta = match &cfg.eta {
        Some(t) => parse_complexes(t)?,
        None => vec![Complex64::new(1.0, 0.0); vars.len()],
    };
    let step = cfg.step.unwrap_or(DEFAULT_STEP);
    let value = statmech::weyl_moments(&rho, &desc, &orders, &eta, step)?;
    let total: usize = orders.iter().sum();
    let oracle = match total {
        0 => Some(trace(&rho)),
        1 => {
            let k = orders
                .iter()
                .position(|&o| o == 1)
                .expect("one nonzero order");
            Some(eta[k] * first_derivatives(&desc, &rho)?[k])
        }
        _ => None,
    };
    let params = json!({
        "system": desc.to_string(),
        "state": cfg.state,
        "variables": vars,
        "orders": orders,
        "eta": eta.iter().map(|z| cjson(*z)).collect::<Vec<_>>(),
        "step": step,
    });
    let rec = Record::complex("weyl_moment", params, value, oracle);
    emit(
        cfg,
        stdout,
        (serde_json::to_string_pretty(&rec)? + "\n").as_bytes(),
    )
}

fn autocorr(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<()> {
    let desc = system(cfg)?;
    let rho = state(cfg, &desc)?;
    let axis = cfg.axis.as_deref().ok_or_else(|| {
        usage(format!(
            "--axis is required; one of {}",
            statmech::autocorrelation_axes(&desc).join(", ")
        ))
    })?;
    let samples = cfg
        .samples
        .as_deref()
        .ok_or_else(|| usage("--samples is required"))?;
    let values = statmech::autocorrelation(&rho, &desc, axis, samples)?;
    let mut csv = String::from("sample,re,im\n");
    for (s, v) in samples.iter().zip(&values) {
        csv.push_str(&format!("{},{},{}\n", num(*s), num(v.re), num(v.im)));
    }
    emit(cfg, stdout, csv.as_bytes())?;
    if cfg.out.is_some() {
        let r0 = statmech::autocorrelation(&rho, &desc, axis, &[0.0])?[0];
        let tr = trace(&rho);
        print_json(
            stdout,
            &Record::complex(
                "autocorrelation_at_zero",
                json!({"system": desc.to_string(), "axis": axis}),
                r0,
                Some(tr),
            ),
        )?;
    }
    Ok(())
}

fn crosscorr(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<()> {
    let desc = system(cfg)?;
    let side = cfg.side.unwrap_or(Side::Wigner);
    let space = space_for(cfg, &desc, side)?;
    let rho = state(cfg, &desc)?;
    let f = space.transform(&rho)?;
    let template = space.grid().point(0);
    let shift_coords = cfg
        .shift
        .clone()
        .unwrap_or_else(|| vec![0.0; template.coordinates().len()]);
    let shift = template.with_coordinates(&shift_coords)?;
    let value = statmech::phase_cross_correlation(&f, &shift)?;
    let zero = shift_coords.iter().all(|&x| x == 0.0);
    let v = space.grid().weight_sum();
    let oracle = zero.then(|| match side {
        Side::Wigner => trace_product(&rho, &rho) / v,
        Side::Weyl => {
            let s: f64 = f
                .values()
                .iter()
                .enumerate()
                .map(|(i, x)| x.norm_sqr() * space.grid().weight(i))
                .sum();
            real(s / v)
        }
    });
    let dtrace = match (side, &shift) {
        (Side::Weyl, _) => Some(space.kernel().trace_with(&rho, &shift)?),
        _ => None,
    };
    let out = json!({
        "quantity": "cross_correlation",
        "parameters": {"system": desc.to_string(), "side": side, "state": cfg.state,
                       "shift_names": template.coordinate_names(), "shift": shift_coords, "volume": v},
        "value": cjson(value),
        "oracle_value": oracle.map(cjson),
        "residual": oracle.map(|o| (value - o).norm()),
        "displacement_trace": dtrace.map(cjson),
        "ratio": dtrace.filter(|d| d.norm() > 1e-300).map(|d| cjson(value / d)),
    });
    emit(
        cfg,
        stdout,
        (serde_json::to_string_pretty(&out)? + "\n").as_bytes(),
    )
}

fn evolve(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<()> {
    let desc = system(cfg)?;
    let h = require_hamiltonian(cfg, &desc)?;
    let rho = state(cfg, &desc)?;
    let space = space_for(cfg, &desc, Side::Wigner)?;
    let t_final = cfg.t_final.unwrap_or(1.0);
    let dt = cfg.dt.unwrap_or(1e-3);
    let every = cfg.record_every.unwrap_or(100);
    let fr = space.transform(&rho)?;
    let fh = space.transform(&h)?;
    let series = transforms::evolve_series(&fr, &fh, t_final, dt, every)?;
    if let Some(dir) = &cfg.out {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let hexp = phasekit::linalg::HermitianExp::new(&h);
    let tr0 = fr.integral();
    let p0 = transforms::overlap(&fr, &fr)?;
    let mut frames = Vec::new();
    let (mut max_res, mut max_tr, mut max_pur) = (0.0f64, 0.0f64, 0.0f64);
    for (k, (t, f)) in series.iter().enumerate() {
        let u = hexp.exp_i(-t);
        let exact = space.transform(&(&u * &rho * u.adjoint()))?;
        let res = f.max_abs_diff(&exact)?;
        let tr = f.integral();
        let pur = transforms::overlap(f, f)?;
        max_res = max_res.max(res);
        max_tr = max_tr.max((tr - tr0).norm());
        max_pur = max_pur.max((pur - p0).norm());
        let file = match &cfg.out {
            Some(dir) => {
                let p = dir.join(format!("frame_{k:05}.csv"));
                let mut buf = Vec::new();
                f.write_csv(&mut buf).map_err(|e| CliError::io(&p, e))?;
                std::fs::write(&p, buf).map_err(|e| CliError::io(&p, e))?;
                Some(p)
            }
            None => None,
        };
        frames.push(json!({"index": k, "time": t, "file": file, "trace": cjson(tr), "purity": cjson(pur), "residual": res}));
    }
    print_json(
        stdout,
        &json!({
            "command": "evolve",
            "system": desc.to_string(),
            "state": cfg.state,
            "t_final": t_final,
            "dt": dt,
            "frames": frames,
            "max_residual": max_res,
            "max_trace_drift": max_tr,
            "max_purity_drift": max_pur,
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(cmd: CommandName, system: &str) -> RunConfig {
        RunConfig {
            command: Some(cmd),
            system: Some(system.into()),
            ..Default::default()
        }
    }

    fn run_json(c: &RunConfig) -> Value {
        let mut out = Vec::new();
        run(c, &mut out).unwrap();
        serde_json::from_slice(&out).unwrap()
    }

    #[test]
    fn partition_record() {
        let c = RunConfig {
            field: Some(vec![0.0, 0.0, 1.0]),
            beta: Some(1.0),
            ..cfg(CommandName::Partition, "su:2:1")
        };
        let v = run_json(&c);
        assert!((v["value"].as_f64().unwrap() - 2.0 * 1f64.cosh()).abs() < 1e-10);
        assert!(v["residual"].as_f64().unwrap() < 1e-10);
    }

    #[test]
    fn first_derivative_oracle_matches_moments() {
        for (sys, state, orders) in [
            ("su:3:1", "random:4", vec![0, 1, 0, 0, 0, 0, 0, 0]),
            ("su:3:1", "random:4", vec![0, 0, 0, 0, 0, 0, 0, 1]),
            ("su:3:1", "random:4", vec![0, 0, 0, 0, 1, 0, 0, 0]),
            ("hw:20", "coherent:0.3,0.1", vec![0, 1]),
            ("su:2:1*su:2:2", "random:2", vec![0, 0, 0, 1, 0, 0]),
        ] {
            let c = RunConfig {
                state: Some(state.into()),
                orders: Some(orders),
                step: Some(0.05),
                ..cfg(CommandName::Moments, sys)
            };
            let v = run_json(&c);
            assert!(v["residual"].as_f64().unwrap() < 1e-5, "{sys}: {v}");
        }
    }

    #[test]
    fn missing_arguments_are_usage_errors() {
        let mut out = Vec::new();
        let e = run(&cfg(CommandName::Partition, "su:2:1"), &mut out).unwrap_err();
        assert_eq!(e.kind(), "usage");
        let e = run(&RunConfig::default(), &mut out).unwrap_err();
        assert_eq!(e.kind(), "usage");
        let e = run(&cfg(CommandName::Wigner, "su:2:x"), &mut out).unwrap_err();
        assert_eq!(e.kind(), "parse");
        let c = RunConfig {
            state: Some("fock:1".into()),
            ..cfg(CommandName::Wigner, "su:2:1")
        };
        assert_eq!(run(&c, &mut out).unwrap_err().kind(), "computation");
    }

    #[test]
    fn field_operator_on_composites() {
        let d = parse_system("su:2:1*su:2:1").unwrap();
        let h = spin_operator(&d, &[0.0, 0.0, 1.0]).unwrap();
        let diag: Vec<f64> = (0..4).map(|i| h[(i, i)].re).collect();
        assert_eq!(diag, vec![2.0, 0.0, 0.0, -2.0]);
        assert!(spin_operator(&parse_system("hw:3").unwrap(), &[0.0, 0.0, 1.0]).is_err());
    }
}
