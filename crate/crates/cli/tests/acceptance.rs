//! End-to-end acceptance checks. Prints one `[PASS]`/`[FAIL]` line per
//! criterion and exits non-zero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::sync::Arc;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use phasekit::liealgebra::build_generators;
use phasekit::linalg::{operator_norm, random_density, random_hermitian, trace, trace_product};
use phasekit::rotations::{arecchi_rotation, euler_rotation};
use phasekit::statmech::{partition_function, thermal_mean, weyl_moments};
use phasekit::transforms::{
    evolve_series, generalized_fourier, reconstruct, round_trip_error, star_product,
    star_product_literal, verify_stratonovich,
};
use phasekit::{
    GridOptions, Kernel, KernelSpec, OperatorMatrix, PhasePoint, PhaseSpace, Side,
    SystemDescriptor, ThermalSpec, VerifyOptions,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn sun(n: usize, m: usize) -> SystemDescriptor {
    SystemDescriptor::sun(n, m).unwrap()
}

fn space(spec: KernelSpec) -> Arc<PhaseSpace> {
    PhaseSpace::default_for(spec, &GridOptions::default()).unwrap()
}

fn binomial(n: u64, k: u64) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * (n - k + i) as f64 / i as f64)
}

/// `(N+M-1)! / (M! (N-1)!)`.
fn irrep_dim(n: usize, m: usize) -> f64 {
    binomial((n + m - 1) as u64, m as u64)
}

fn gell_mann() -> Vec<DMatrix<Complex64>> {
    let z = c(0.0, 0.0);
    let o = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    let s = c(1.0 / 3f64.sqrt(), 0.0);
    let m = |v: [Complex64; 9]| DMatrix::from_row_slice(3, 3, &v);
    vec![
        m([z, o, z, o, z, z, z, z, z]),
        m([z, -i, z, i, z, z, z, z, z]),
        m([o, z, z, z, -o, z, z, z, z]),
        m([z, z, o, z, z, z, o, z, z]),
        m([z, z, -i, z, z, z, i, z, z]),
        m([z, z, z, z, z, o, z, o, z]),
        m([z, z, z, z, z, -i, z, i, z]),
        m([s, z, z, z, s, z, z, z, -s * 2.0]),
    ]
}

fn generator_orthogonality() -> Check {
    let mut worst: f64 = 0.0;
    for n in 2..=4 {
        for m in 1..=3 {
            let g = ok(build_generators(n, m))?;
            ensure(g.len() == n * n - 1, || {
                format!("su({n}) M={m}: {} generators", g.len())
            })?;
            let norm = 2.0 * m as f64 / (n + 1) as f64 * irrep_dim(n + 1, m);
            for (a, ga) in g.iter().enumerate() {
                for (b, gb) in g.iter().enumerate() {
                    let expect = if a == b { norm } else { 0.0 };
                    worst = worst.max((trace_product(ga, gb) - c(expect, 0.0)).norm());
                }
            }
        }
    }
    ensure(worst < 1e-10, || format!("trace rule residual {worst:e}"))?;
    let g = ok(build_generators(3, 1))?;
    for (k, (a, b)) in g.iter().zip(gell_mann()).enumerate() {
        ensure(*a == b, || {
            format!("J({}) differs from the Gell-Mann matrix", k + 1)
        })?;
    }
    Ok(format!(
        "max residual {worst:.2e}; su(3) M=1 equals Gell-Mann exactly"
    ))
}

fn stratonovich_suite() -> Check {
    let mut worst: f64 = 0.0;
    let systems = [sun(2, 1), sun(2, 2), sun(2, 3), sun(3, 1)];
    for desc in &systems {
        let r = ok(verify_stratonovich(
            desc,
            Side::Wigner,
            &VerifyOptions::default(),
        ))?;
        for cond in &r.conditions {
            if let Some(res) = cond.residual {
                ensure(res < 1e-10, || format!("{desc} {}: {res:e}", cond.name))?;
                worst = worst.max(res);
            }
        }
        ensure(r.passed, || format!("{desc} report failed"))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut weyl_worst: f64 = 0.0;
    for desc in &systems {
        let rho = random_density(desc.dimension().unwrap(), &mut rng);
        weyl_worst = weyl_worst.max(ok(round_trip_error(
            &space(KernelSpec::weyl(desc.clone())),
            &rho,
        ))?);
    }
    ensure(weyl_worst < 1e-10, || {
        format!("Weyl round trip {weyl_worst:e}")
    })?;
    Ok(format!(
        "Stratonovich-Weyl residual max {worst:.2e}; Weyl round trip {weyl_worst:.2e}"
    ))
}

fn arecchi_negative_control() -> Check {
    let q = sun(2, 1);
    let jz = build_generators(2, 1).unwrap()[2].clone();
    let bad = ok(round_trip_error(
        &space(KernelSpec::arecchi(q.clone())),
        &jz,
    ))?;
    let good = ok(round_trip_error(&space(KernelSpec::weyl(q)), &jz))?;
    ensure(bad >= 0.1, || {
        format!("Arecchi reconstruction error only {bad:e}")
    })?;
    ensure(good < 1e-10, || {
        format!("Euler reconstruction error {good:e}")
    })?;
    Ok(format!("Arecchi error {bad:.3}; Euler error {good:.2e}"))
}

fn euler_arecchi_identity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for m in 1..=3 {
        let desc = sun(2, m);
        let g = build_generators(2, m).unwrap();
        let jp = &g[0] + &g[1] * c(0.0, 1.0);
        let jm = &g[0] - &g[1] * c(0.0, 1.0);
        for _ in 0..100 {
            let phi = rng.random_range(0.0..std::f64::consts::TAU);
            let theta = rng.random_range(0.0..std::f64::consts::FRAC_PI_2);
            let u = ok(euler_rotation(
                &desc,
                &PhasePoint::euler(vec![phi], vec![theta], vec![-phi]),
            ))?;
            let xi = Complex64::from_polar(theta / 2.0, 2.0 * phi);
            let oracle = (&jp * xi - &jm * xi.conj()).exp();
            worst = worst.max(operator_norm(&(&u - &oracle)));
            let r = ok(arecchi_rotation(&desc, phi, theta))?;
            worst = worst.max(operator_norm(&(&r - &oracle)));
        }
    }
    ensure(worst < 1e-10, || format!("max deviation {worst:e}"))?;
    Ok(format!("max deviation {worst:.2e} over 300 samples"))
}

fn pauli_thermodynamics() -> Check {
    let qs = space(KernelSpec::wigner(sun(2, 1)));
    let s = build_generators(2, 1).unwrap();
    let mut z_worst: f64 = 0.0;
    let mut m_worst: f64 = 0.0;
    let e = [0.6, 0.0, 0.8];
    let obs = &s[0] * c(e[0], 0.0) + &s[2] * c(e[2], 0.0);
    for field in [[0.0, 0.0, 1.0], [0.3, -0.4, 1.2], [-1.0, 2.0, 0.5]] {
        let h = field.iter().map(|x| x * x).sum::<f64>().sqrt();
        let cos = (0..3).map(|k| e[k] * field[k]).sum::<f64>() / h;
        for beta in [0.1, 1.0, 10.0] {
            let spec = ok(ThermalSpec::pauli(field, beta))?;
            let z = ok(partition_function(&spec, &qs))?;
            let exact = 2.0 * (beta * h).cosh();
            z_worst = z_worst.max((z - exact).abs() / exact.max(1.0));
            let mag = ok(thermal_mean(&obs, &spec, &qs))?;
            m_worst = m_worst.max((mag + cos * (beta * h).tanh()).abs());
        }
    }
    ensure(z_worst < 1e-10, || {
        format!("Z relative residual {z_worst:e}")
    })?;
    ensure(m_worst < 1e-9, || {
        format!("magnetization residual {m_worst:e}")
    })?;

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut z0_worst: f64 = 0.0;
    let systems = [
        (sun(2, 1), 1e-10),
        (sun(2, 3), 1e-10),
        (sun(3, 1), 1e-10),
        (sun(4, 1), 1e-10),
        (
            SystemDescriptor::composite(vec![sun(2, 1), sun(2, 1)]).unwrap(),
            1e-10,
        ),
        (SystemDescriptor::hw(10).unwrap(), 1e-6),
    ];
    for (desc, tol) in &systems {
        let d = desc.dimension().unwrap();
        let spec = ok(ThermalSpec::new(random_hermitian(d, &mut rng), 0.0))?;
        let z0 = ok(partition_function(
            &spec,
            &space(KernelSpec::wigner(desc.clone())),
        ))?;
        ensure((z0 - d as f64).abs() < *tol, || {
            format!("{desc}: Z(0) = {z0}, dimension {d}")
        })?;
        z0_worst = z0_worst.max((z0 - d as f64).abs());
    }
    Ok(format!(
        "Z {z_worst:.2e}; magnetization {m_worst:.2e}; Z(0)-d max {z0_worst:.2e} over {} systems",
        systems.len()
    ))
}

fn star_product_oracle() -> Check {
    let s = space(KernelSpec::wigner(sun(2, 1)));
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut rec, mut lit): (f64, f64) = (0.0, 0.0);
    for _ in 0..50 {
        let a = random_hermitian(2, &mut rng);
        let b = random_hermitian(2, &mut rng);
        let fa = ok(s.transform(&a))?;
        let fb = ok(s.transform(&b))?;
        let fast = ok(star_product(&fa, &fb))?;
        rec = rec.max(operator_norm(&(reconstruct(&fast) - &a * &b)));
        lit = lit.max(ok(ok(star_product_literal(&fa, &fb))?.max_abs_diff(&fast))?);
    }
    ensure(rec < 1e-8, || format!("reconstruction {rec:e}"))?;
    ensure(lit < 1e-8, || format!("literal vs fast {lit:e}"))?;
    Ok(format!("reconstruct {rec:.2e}; literal vs fast {lit:.2e}"))
}

fn dynamics_oracle() -> Check {
    let s = space(KernelSpec::wigner(sun(2, 1)));
    let h = build_generators(2, 1).unwrap()[2].clone();
    let rho = random_density(2, &mut ChaCha8Rng::seed_from_u64(10));
    let fr = ok(s.transform(&rho))?;
    let fh = ok(s.transform(&h))?;
    let series = ok(evolve_series(&fr, &fh, 1.0, 1e-3, 100))?;
    let (mut sup, mut dtr, mut dpur): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let purity0 = trace_product(&rho, &rho).re;
    for (t, f) in &series {
        // exp(-iHt) for diagonal H.
        let u = DMatrix::from_diagonal(&DVector::from_iterator(
            2,
            (0..2).map(|k| Complex64::from_polar(1.0, -h[(k, k)].re * t)),
        ));
        let exact = ok(s.transform(&(&u * &rho * u.adjoint())))?;
        sup = sup.max(ok(f.max_abs_diff(&exact))?);
        dtr = dtr.max((f.integral() - c(1.0, 0.0)).norm());
        let w = f.values();
        let pur: f64 = (0..s.len())
            .map(|i| s.grid().weight(i) * w[i].norm_sqr())
            .sum();
        dpur = dpur.max((pur - purity0).abs());
    }
    let t_last = series.last().map(|(t, _)| *t).unwrap_or(0.0);
    ensure((t_last - 1.0).abs() < 1e-12, || {
        format!("final time {t_last}")
    })?;
    ensure(sup < 1e-6, || format!("sup-norm error {sup:e}"))?;
    ensure(dtr < 1e-6 && dpur < 1e-6, || {
        format!("trace drift {dtr:e}, purity drift {dpur:e}")
    })?;
    Ok(format!(
        "sup error {sup:.2e}; trace drift {dtr:.2e}; purity drift {dpur:.2e}"
    ))
}

fn closed_form_coherent(n_max: usize, beta: Complex64) -> OperatorMatrix {
    let mut amp = Vec::with_capacity(n_max);
    let mut a = Complex64::from_polar((-beta.norm_sqr() / 2.0).exp(), 0.0);
    for n in 0..n_max {
        amp.push(a);
        a = a * beta / ((n + 1) as f64).sqrt();
    }
    let v = DVector::from_vec(amp);
    &v * v.adjoint()
}

fn run_cli(args: &[&str]) -> Result<Value, String> {
    let out = ok(Command::new(env!("CARGO_BIN_EXE_phasekit"))
        .args(args)
        .output())?;
    if !out.status.success() {
        return Err(format!(
            "phasekit {}: {}",
            args.join(" "),
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    ok(serde_json::from_slice(&out.stdout))
}

fn hw_truncation() -> Check {
    let h30 = SystemDescriptor::hw(30).unwrap();
    let beta = c(0.5, -0.3);
    let rho = closed_form_coherent(30, beta);
    let k = ok(Kernel::new(KernelSpec::wigner(h30)))?;
    let mut wig: f64 = 0.0;
    let n = 31;
    for i in 0..n {
        for j in 0..n {
            let a = c(
                -1.5 + 3.0 * i as f64 / (n - 1) as f64,
                -1.5 + 3.0 * j as f64 / (n - 1) as f64,
            );
            if a.norm() > 1.5 {
                continue;
            }
            let w = ok(k.trace_with(&rho, &PhasePoint::hw(a)))?;
            wig = wig.max((w - c(2.0 * (-2.0 * (a - beta).norm_sqr()).exp(), 0.0)).norm());
        }
    }
    ensure(wig < 1e-5, || format!("coherent Wigner deviation {wig:e}"))?;

    let h20 = SystemDescriptor::hw(20).unwrap();
    let ws = ok(PhaseSpace::default_for(
        KernelSpec::weyl(h20),
        &GridOptions {
            resolution: None,
            radius: Some(6.0),
        },
    ))?;
    let rt = ok(round_trip_error(
        &ws,
        &closed_form_coherent(20, c(0.4, 0.2)),
    ))?;
    ensure(rt < 1e-4, || format!("Weyl round trip {rt:e}"))?;

    let dir = ok(tempfile::tempdir())?;
    let mut origin = Vec::new();
    for side in ["wigner", "weyl"] {
        let path = dir.path().join(format!("cat3-{side}.csv"));
        let summary = run_cli(&[
            "figure-data",
            "--preset",
            "cat3-hw",
            "--side",
            side,
            "--out",
            path.to_str().unwrap(),
        ])?;
        let res = summary["origin"]["residual"]
            .as_f64()
            .ok_or("missing origin residual")?;
        ensure(res < 1e-6, || format!("{side} origin residual {res:e}"))?;
        let rows = ok(std::fs::read_to_string(&path))?.lines().count() - 1;
        ensure(
            rows == summary["rows"].as_u64().unwrap_or(0) as usize && rows > 0,
            || format!("{rows} rows"),
        )?;
        origin.push(res);
    }
    Ok(format!(
        "coherent Wigner {wig:.2e}; Weyl round trip {rt:.2e}; cat3 origin residuals {:.1e}/{:.1e}",
        origin[0], origin[1]
    ))
}

fn ghz_equivalence() -> Check {
    let mut worst: f64 = 0.0;
    let dir = ok(tempfile::tempdir())?;
    let path = dir.path().join("ghz.csv");
    let summary = run_cli(&[
        "figure-data",
        "--preset",
        "ghz5-equal-angle",
        "--side",
        "weyl",
        "--out",
        path.to_str().unwrap(),
    ])?;
    let rows = summary["rows"].as_u64().unwrap_or(0);
    worst = worst.max(
        summary["max_residual"]
            .as_f64()
            .ok_or("missing max_residual")?,
    );
    ensure(worst < 1e-10 && rows > 0, || {
        format!("max residual {worst:e} over {rows} rows")
    })?;

    // Independent spot check: tensor kernel against the Dicke-space kernel.
    let qubits = SystemDescriptor::composite(vec![sun(2, 1); 5]).unwrap();
    let tensor = ok(Kernel::new(KernelSpec::weyl(qubits)))?;
    let dicke = ok(Kernel::new(KernelSpec::weyl(sun(2, 5))))?;
    let mut ghz = DVector::<Complex64>::zeros(32);
    ghz[0] = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    ghz[31] = ghz[0];
    let mut ghz_d = DVector::<Complex64>::zeros(6);
    ghz_d[0] = ghz[0];
    ghz_d[5] = ghz[0];
    let (rt, rd) = (&ghz * ghz.adjoint(), &ghz_d * ghz_d.adjoint());
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..20 {
        let (p, t) = (
            rng.random_range(0.0..std::f64::consts::PI),
            rng.random_range(0.0..std::f64::consts::FRAC_PI_2),
        );
        let single = PhasePoint::euler(vec![p], vec![t], vec![-p]);
        let a = ok(tensor.trace_with(&rt, &PhasePoint::Composite(vec![single.clone(); 5])))?;
        let b = ok(dicke.trace_with(&rd, &single))?;
        worst = worst.max((a - b).norm());
    }
    ensure(worst < 1e-10, || format!("spot check {worst:e}"))?;
    Ok(format!(
        "max residual {worst:.2e} over {rows} rows plus 20 random points"
    ))
}

fn fourier_bridge() -> Check {
    let q = sun(2, 1);
    let rho = random_density(2, &mut ChaCha8Rng::seed_from_u64(14));
    let (w, y) = (
        space(KernelSpec::wigner(q.clone())),
        space(KernelSpec::weyl(q)),
    );
    let f = ok(w.transform(&rho))?;
    let g = ok(generalized_fourier(&f, &y))?;
    let e_mid = ok(g.max_abs_diff(&ok(y.transform(&rho))?))?;
    let e_su = ok(ok(generalized_fourier(&g, &w))?.max_abs_diff(&f))?.max(e_mid);
    ensure(e_su < 1e-8, || format!("su:2:1 round trip {e_su:e}"))?;

    let h = SystemDescriptor::hw(20).unwrap();
    let (w, y) = (
        space(KernelSpec::wigner(h.clone())),
        space(KernelSpec::weyl(h)),
    );
    let rho = closed_form_coherent(20, c(0.3, -0.4));
    let f = ok(w.transform(&rho))?;
    let back = ok(generalized_fourier(&ok(generalized_fourier(&f, &y))?, &w))?;
    let e_hw = ok(back.max_abs_diff(&f))?;
    ensure(e_hw < 1e-4, || format!("hw:20 round trip {e_hw:e}"))?;
    Ok(format!("su:2:1 {e_su:.2e}; hw:20 {e_hw:.2e}"))
}

fn moments() -> Check {
    let mut worst: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let eta = [c(1.0, 0.0), c(1.0, 0.0), c(0.0, -1.0)];
    for m in 1..=3 {
        let desc = sun(2, m);
        let rho = random_density(desc.dimension().unwrap(), &mut rng);
        let jz = build_generators(2, m).unwrap()[2].clone();
        let v = ok(weyl_moments(&rho, &desc, &[0, 0, 1], &eta, 1e-3))?;
        worst = worst.max((v - trace_product(&rho, &jz)).norm());
        let v0 = ok(weyl_moments(&rho, &desc, &[0, 0, 0], &eta, 1e-3))?;
        worst = worst.max((v0 - trace(&rho)).norm());
    }
    let h = SystemDescriptor::hw(30).unwrap();
    let beta = c(0.4, -0.3);
    let rho = closed_form_coherent(30, beta);
    let one = [c(1.0, 0.0), c(1.0, 0.0)];
    // d/dα Tr[ρ D(α)] = <a†>, d/dα* = -<a>.
    let da = ok(weyl_moments(&rho, &h, &[1, 0], &one, 1e-3))?;
    let dac = ok(weyl_moments(&rho, &h, &[0, 1], &one, 1e-3))?;
    worst = worst
        .max((da - beta.conj()).norm())
        .max((dac + beta).norm());
    ensure(worst < 1e-6, || format!("moment residual {worst:e}"))?;

    let err = |s: f64| weyl_moments(&rho, &h, &[1, 0], &one, s).map(|v| (v - beta.conj()).norm());
    let steps = [0.4, 0.2, 0.1];
    let errs = steps
        .iter()
        .map(|&s| err(s))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let orders: Vec<f64> = errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    ensure(orders.iter().all(|p| (3.5..4.6).contains(p)), || {
        format!("observed orders {orders:?} from errors {errs:?}")
    })?;
    Ok(format!(
        "max residual {worst:.2e}; observed convergence orders {:.2}, {:.2}",
        orders[0], orders[1]
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("generator orthogonality", generator_orthogonality),
        ("Stratonovich-Weyl suite", stratonovich_suite),
        ("Arecchi negative control", arecchi_negative_control),
        ("Euler-Arecchi identity", euler_arecchi_identity),
        ("Pauli thermodynamics", pauli_thermodynamics),
        ("star-product oracle", star_product_oracle),
        ("dynamics oracle", dynamics_oracle),
        ("oscillator truncation checks", hw_truncation),
        ("GHZ kernel equivalence", ghz_equivalence),
        ("Fourier bridge", fourier_bridge),
        ("moment generation", moments),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("[PASS] {:>2} {name}: {detail} ({secs:.2}s)", i + 1),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {:>2} {name}: {detail} ({secs:.2}s)", i + 1);
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
