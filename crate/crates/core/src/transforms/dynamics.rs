//! Phase-space time evolution under the Moyal bracket (`ħ = 1`).

use std::sync::Arc;

use super::{moyal_bracket, reconstruct, same_space, PhaseFunction};
use crate::error::{Error, Result};
use crate::kernels::Side;
use crate::linalg::{hermiticity_defect, C64, I};

/// Relative drift of `∫ f` that aborts the integration.
const DRIFT_LIMIT: f64 = 1e-6;

/// Integrate `∂f/∂t = -i {{f_H, f}}` to `t_final` with fixed-step RK4.
pub fn evolve(
    f_rho: &PhaseFunction,
    f_h: &PhaseFunction,
    t_final: f64,
    dt: f64,
) -> Result<PhaseFunction> {
    let mut series = evolve_series(f_rho, f_h, t_final, dt, 0)?;
    Ok(series.pop().expect("final state is always recorded").1)
}

/// As [`evolve`], also recording the state every `record_every` steps
/// (`0` records only the initial and final states).
pub fn evolve_series(
    f_rho: &PhaseFunction,
    f_h: &PhaseFunction,
    t_final: f64,
    dt: f64,
    record_every: usize,
) -> Result<Vec<(f64, PhaseFunction)>> {
    same_space(f_rho, f_h)?;
    if f_rho.space.side() != Side::Wigner {
        return Err(Error::Incompatible(
            "time evolution runs on the Wigner side".into(),
        ));
    }
    if !dt.is_finite() || !t_final.is_finite() || dt <= 0.0 || t_final < 0.0 {
        return Err(Error::InvalidArgument(
            "need dt > 0 and t_final >= 0".into(),
        ));
    }
    let h = reconstruct(f_h);
    if hermiticity_defect(&h) > 1e-10 {
        return Err(Error::InvalidArgument(
            "Hamiltonian symbol is not Hermitian".into(),
        ));
    }
    let space = Arc::clone(&f_rho.space);
    let steps = (t_final / dt).round() as usize;
    let step = if steps == 0 {
        0.0
    } else {
        t_final / steps as f64
    };

    let rhs = |f: &PhaseFunction| -> Result<Vec<C64>> {
        Ok(moyal_bracket(f_h, f)?
            .values
            .iter()
            .map(|v| v * (-I))
            .collect())
    };
    let axpy = |base: &[C64], k: &[C64], h: f64| -> Result<PhaseFunction> {
        let v = base.iter().zip(k).map(|(b, k)| b + k * h).collect();
        PhaseFunction::from_values(Arc::clone(&space), v)
    };
    let tr0 = f_rho.integral();
    let scale = tr0.norm().max(1.0);
    let mut f = f_rho.clone();
    let mut out = vec![(0.0, f_rho.clone())];
    for k in 1..=steps {
        let k1 = rhs(&f)?;
        let k2 = rhs(&axpy(&f.values, &k1, step / 2.0)?)?;
        let k3 = rhs(&axpy(&f.values, &k2, step / 2.0)?)?;
        let k4 = rhs(&axpy(&f.values, &k3, step)?)?;
        for (i, v) in f.values.iter_mut().enumerate() {
            *v += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (step / 6.0);
        }
        let t = k as f64 * step;
        let drift = (f.integral() - tr0).norm() / scale;
        if drift > DRIFT_LIMIT || !drift.is_finite() {
            return Err(Error::Unstable { drift, time: t });
        }
        if (record_every > 0 && k % record_every == 0) || k == steps {
            out.push((t, f.clone()));
        }
    }
    if steps == 0 {
        out.push((0.0, f));
    }
    Ok(out)
}
