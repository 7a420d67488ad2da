//! Plot-ready lattices for cat and GHZ states.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::io::Write;

use nalgebra::DVector;
use num_complex::Complex64;
use phasekit::kernels::{Displacement, Kernel, KernelSpec, Side};
use phasekit::linalg::{real, trace, trace_product};
use phasekit::states::ghz_ket;
use phasekit::{build_state, OperatorMatrix, PhasePoint, SystemDescriptor};
use serde_json::json;

use crate::commands::{cjson, emit, num, print_json, CliError};
use crate::config::RunConfig;
use crate::parse::{parse_state, parse_system};

pub const PRESETS: [&str; 4] = [
    "cat3-hw",
    "spincat-j40",
    "spincat-5half",
    "ghz5-equal-angle",
];

/// Density matrix plus its state vector when it is pure.
struct Source {
    rho: OperatorMatrix,
    ket: Option<DVector<Complex64>>,
}

impl Source {
    fn new(rho: OperatorMatrix) -> Self {
        let purity = trace_product(&rho, &rho).re;
        let ket = ((purity - 1.0).abs() < 1e-10).then(|| {
            let eig = rho.clone().symmetric_eigen();
            let k = eig.eigenvalues.imax();
            eig.eigenvectors.column(k).into_owned()
        });
        Self { rho, ket }
    }

    fn value(&self, k: &Kernel, p: &PhasePoint) -> Result<Complex64, CliError> {
        Ok(match &self.ket {
            Some(v) => k.pure_expectation(v, p)?,
            None => k.trace_with(&self.rho, p)?,
        })
    }
}

fn lattice(n: usize, a: f64, b: f64) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect()
}

fn value_cells(v: Complex64) -> String {
    format!(
        "{},{},{},{}",
        num(v.re),
        num(v.im),
        num(v.norm()),
        num(v.arg())
    )
}

/// Stereographic coordinates of the lower hemisphere `θ ≤ π/4`; blank above.
fn stereo_cells(phi: f64, theta: f64) -> String {
    if theta <= FRAC_PI_4 + 1e-12 {
        format!(
            "{},{}",
            num(theta.tan() * phi.cos()),
            num(theta.tan() * phi.sin())
        )
    } else {
        ",".into()
    }
}

fn sphere_point(side: Side, displacement: Displacement, phi: f64, theta: f64) -> PhasePoint {
    match (side, displacement) {
        (Side::Weyl, Displacement::Euler) => PhasePoint::euler(vec![phi], vec![theta], vec![-phi]),
        _ => PhasePoint::cp(vec![phi], vec![theta]),
    }
}

pub fn figure_data(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<(), CliError> {
    let preset = cfg.preset.as_deref().ok_or_else(|| {
        CliError::Usage(format!(
            "--preset is required; one of {}",
            PRESETS.join(", ")
        ))
    })?;
    let side = cfg.side.unwrap_or(Side::Wigner);
    let displacement = cfg.displacement.unwrap_or_default();
    let default_system = match preset {
        "cat3-hw" => "hw:60",
        "spincat-j40" => "su:2:80",
        "spincat-5half" => "su:2:5",
        "ghz5-equal-angle" => "su:2:1*su:2:1*su:2:1*su:2:1*su:2:1",
        other => {
            return Err(CliError::Usage(format!(
                "unknown preset '{other}'; one of {}",
                PRESETS.join(", ")
            )))
        }
    };
    let desc = parse_system(cfg.system.as_deref().unwrap_or(default_system))?;
    let default_state = match preset {
        "cat3-hw" => "cat3",
        "ghz5-equal-angle" => "ghz",
        _ => "spincat3",
    };
    let state_text = cfg.state.as_deref().unwrap_or(default_state);
    let rho = build_state(&parse_state(state_text, &desc, None)?, &desc)?;
    let src = Source::new(rho);
    let kernel = Kernel::new(KernelSpec {
        side,
        system: desc.clone(),
        displacement,
    })?;
    let n = cfg
        .grid_res
        .unwrap_or(if preset == "cat3-hw" { 101 } else { 61 })
        .max(1);

    let mut csv = String::new();
    let mut summary = json!({
        "preset": preset,
        "system": desc.to_string(),
        "state": state_text,
        "side": side,
        "displacement": displacement,
    });
    let mut rows = 0usize;
    match preset {
        "cat3-hw" => {
            let SystemDescriptor::Hw { n_max } = desc else {
                return Err(CliError::Usage(format!(
                    "cat3-hw needs an hw:n system, got {desc}"
                )));
            };
            let r = cfg.radius.unwrap_or(5.0);
            let xs = lattice(n, -r, r);
            csv.push_str("re_alpha,im_alpha,re,im,magnitude,phase\n");
            for &x in &xs {
                for &y in &xs {
                    let v = src.value(&kernel, &PhasePoint::hw(Complex64::new(x, y)))?;
                    csv.push_str(&format!("{},{},{}\n", num(x), num(y), value_cells(v)));
                    rows += 1;
                }
            }
            let at0 = src.value(&kernel, &PhasePoint::hw(real(0.0)))?;
            let oracle = match side {
                Side::Wigner => real(
                    2.0 * (0..n_max)
                        .map(|k| if k % 2 == 0 { 1.0 } else { -1.0 } * src.rho[(k, k)].re)
                        .sum::<f64>(),
                ),
                Side::Weyl => trace(&src.rho),
            };
            summary["origin"] = json!({"value": cjson(at0), "oracle_value": cjson(oracle), "residual": (at0 - oracle).norm()});
            summary["radius"] = json!(r);
        }
        "spincat-j40" | "spincat-5half" => {
            let phis = lattice(n, 0.0, PI);
            let thetas = lattice(n, 0.0, FRAC_PI_2);
            csv.push_str("phi,theta,re,im,magnitude,phase,x,y\n");
            for &phi in &phis {
                for &theta in &thetas {
                    let v = src.value(&kernel, &sphere_point(side, displacement, phi, theta))?;
                    csv.push_str(&format!(
                        "{},{},{},{}\n",
                        num(phi),
                        num(theta),
                        value_cells(v),
                        stereo_cells(phi, theta)
                    ));
                    rows += 1;
                }
            }
            let p0 = sphere_point(side, displacement, 0.0, 0.0);
            let at0 = src.value(&kernel, &p0)?;
            let oracle = trace_product(&src.rho, &kernel.at(&p0)?);
            summary["origin"] = json!({"value": cjson(at0), "oracle_value": cjson(oracle), "residual": (at0 - oracle).norm()});
        }
        _ => {
            let nq = desc.factors().len();
            if !desc
                .factors()
                .iter()
                .all(|f| *f == SystemDescriptor::qubit())
            {
                return Err(CliError::Usage(format!(
                    "ghz5-equal-angle needs a qubit register, got {desc}"
                )));
            }
            let dicke_desc = SystemDescriptor::sun(2, nq)?;
            let dicke = Kernel::new(KernelSpec {
                side,
                system: dicke_desc.clone(),
                displacement,
            })?;
            let dicke_src = match state_text {
                "ghz" => Source::new({
                    let v = ghz_ket(&dicke_desc, nq)?;
                    &v * v.adjoint()
                }),
                other => Source::new(build_state(
                    &parse_state(other, &dicke_desc, None)?,
                    &dicke_desc,
                )?),
            };
            let phis = lattice(n, 0.0, PI);
            let thetas = lattice(n, 0.0, FRAC_PI_2);
            csv.push_str("phi,theta,re,im,magnitude,phase,x,y,dicke_re,dicke_im,residual\n");
            let mut max_res: f64 = 0.0;
            for &phi in &phis {
                for &theta in &thetas {
                    let single = sphere_point(side, displacement, phi, theta);
                    let tensor = if nq == 1 {
                        single.clone()
                    } else {
                        PhasePoint::Composite(vec![single.clone(); nq])
                    };
                    let v = src.value(&kernel, &tensor)?;
                    let d = dicke_src.value(&dicke, &single)?;
                    let res = (v - d).norm();
                    max_res = max_res.max(res);
                    csv.push_str(&format!(
                        "{},{},{},{},{},{},{}\n",
                        num(phi),
                        num(theta),
                        value_cells(v),
                        stereo_cells(phi, theta),
                        num(d.re),
                        num(d.im),
                        num(res)
                    ));
                    rows += 1;
                }
            }
            summary["dicke_system"] = json!(dicke_desc.to_string());
            summary["max_residual"] = json!(max_res);
        }
    }
    summary["rows"] = json!(rows);
    emit(cfg, stdout, csv.as_bytes())?;
    if cfg.out.is_some() {
        summary["out"] = json!(cfg.out);
        print_json(stdout, &summary)?;
    }
    Ok(())
}
