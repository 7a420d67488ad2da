//! Thermal quantities from Wigner symbols, moments from Weyl symbols, and
//! correlation functions.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{Kernel, KernelSpec, Side};
use crate::liealgebra::SystemDescriptor;
use crate::linalg::{c, is_hermitian, real, trace, HermitianExp, OperatorMatrix, C64};
use crate::rotations::PhasePoint;
use crate::transforms::{overlap, reconstruct, PhaseFunction, PhaseSpace};

/// Default finite-difference step for [`weyl_moments`].
pub const DEFAULT_STEP: f64 = 1e-3;

/// Gibbs ensemble `exp(-βH)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalSpec {
    hamiltonian: OperatorMatrix,
    beta: f64,
}

impl ThermalSpec {
    pub fn new(hamiltonian: OperatorMatrix, beta: f64) -> Result<Self> {
        if !hamiltonian.is_square() {
            return Err(Error::InvalidArgument("hamiltonian must be square".into()));
        }
        if !is_hermitian(&hamiltonian, 1e-12) {
            return Err(Error::InvalidArgument(
                "hamiltonian is not Hermitian".into(),
            ));
        }
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "beta must be finite and >= 0, got {beta}"
            )));
        }
        Ok(Self { hamiltonian, beta })
    }

    /// `H = hx σx + hy σy + hz σz` for a qubit.
    pub fn pauli(field: [f64; 3], beta: f64) -> Result<Self> {
        let s = crate::liealgebra::build_generators(2, 1)?;
        let h = &s[0] * real(field[0]) + &s[1] * real(field[1]) + &s[2] * real(field[2]);
        Self::new(h, beta)
    }

    pub fn hamiltonian(&self) -> &OperatorMatrix {
        &self.hamiltonian
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.nrows()
    }

    /// Unnormalized `exp(-βH)` by eigendecomposition.
    pub fn boltzmann(&self) -> OperatorMatrix {
        let b = self.beta;
        HermitianExp::new(&self.hamiltonian).apply(|e| (-b * e).exp())
    }

    /// `exp(-βH) / Z`.
    pub fn density(&self) -> OperatorMatrix {
        let rho = self.boltzmann();
        let z = trace(&rho).re;
        rho / real(z)
    }

    /// `sum_k exp(-β E_k)`.
    pub fn eigenvalue_partition(&self) -> f64 {
        HermitianExp::new(&self.hamiltonian)
            .eigenvalues()
            .iter()
            .map(|e| (-self.beta * e).exp())
            .sum()
    }
}

fn wigner_space(space: &PhaseSpace) -> Result<()> {
    if space.side() != Side::Wigner {
        return Err(Error::Incompatible(
            "thermal quantities need a Wigner phase space".into(),
        ));
    }
    Ok(())
}

/// `Z(β) = ∫ W_{exp(-βH)}`.
pub fn partition_function(spec: &ThermalSpec, space: &Arc<PhaseSpace>) -> Result<f64> {
    wigner_space(space)?;
    Ok(space.transform(&spec.boltzmann())?.integral().re)
}

/// Truncated expansion `Z(0) - β∫W_H + (β²/2)∫W_H²`.
pub fn partition_series(spec: &ThermalSpec, space: &Arc<PhaseSpace>, order: usize) -> Result<f64> {
    wigner_space(space)?;
    if order > 2 {
        return Err(Error::InvalidArgument(format!("series order {order} > 2")));
    }
    let d = spec.dim();
    let mut z = space.transform(&crate::linalg::identity(d))?.integral().re;
    if order >= 1 {
        let wh = space.transform(&spec.hamiltonian)?;
        z -= spec.beta * wh.integral().re;
        if order == 2 {
            z += 0.5 * spec.beta * spec.beta * overlap(&wh, &wh)?.re;
        }
    }
    Ok(z)
}

/// `(1/Z) ∫ W_A W_{exp(-βH)}`.
pub fn thermal_mean(
    a: &OperatorMatrix,
    spec: &ThermalSpec,
    space: &Arc<PhaseSpace>,
) -> Result<f64> {
    wigner_space(space)?;
    if !is_hermitian(a, 1e-10) {
        return Err(Error::InvalidArgument("observable is not Hermitian".into()));
    }
    let wr = space.transform(&spec.boltzmann())?;
    let wa = space.transform(a)?;
    Ok(overlap(&wa, &wr)?.re / wr.integral().re)
}

/// `-ln Z / β`.
pub fn free_energy(spec: &ThermalSpec, space: &Arc<PhaseSpace>) -> Result<f64> {
    if spec.beta == 0.0 {
        return Err(Error::InvalidArgument(
            "free energy undefined at beta = 0".into(),
        ));
    }
    Ok(-partition_function(spec, space)?.ln() / spec.beta)
}

/// Differentiation variables of the Weyl symbol, per factor: the Euler
/// angles of an SU(N) factor, `alpha` and `alpha_conj` of an oscillator.
pub fn moment_variables(desc: &SystemDescriptor) -> Vec<String> {
    let multi = desc.is_composite();
    desc.factors()
        .iter()
        .enumerate()
        .flat_map(|(i, f)| {
            let names = match f {
                SystemDescriptor::Hw { .. } => vec!["alpha".to_string(), "alpha_conj".to_string()],
                _ => PhasePoint::origin(f, true).coordinate_names(),
            };
            names
                .into_iter()
                .map(move |n| if multi { format!("f{}_{n}", i + 1) } else { n })
        })
        .collect()
}

/// Real-coordinate directions of each moment variable.
fn variable_directions(desc: &SystemDescriptor) -> Vec<Vec<(usize, C64)>> {
    let mut out = Vec::new();
    let mut offset = 0;
    for f in desc.factors() {
        match f {
            SystemDescriptor::Hw { .. } => {
                out.push(vec![(offset, real(0.5)), (offset + 1, c(0.0, -0.5))]);
                out.push(vec![(offset, real(0.5)), (offset + 1, c(0.0, 0.5))]);
                offset += 2;
            }
            _ => {
                let k = PhasePoint::origin(f, true).coordinates().len();
                out.extend((offset..offset + k).map(|j| vec![(j, real(1.0))]));
                offset += k;
            }
        }
    }
    out
}

/// Offsets and weights of 4th-order central stencils for the derivative
/// of order `m` (unit step).
fn stencil(m: usize) -> &'static [(i32, f64)] {
    match m {
        0 => &[(0, 1.0)],
        1 => &[
            (-2, 1.0 / 12.0),
            (-1, -2.0 / 3.0),
            (1, 2.0 / 3.0),
            (2, -1.0 / 12.0),
        ],
        2 => &[
            (-2, -1.0 / 12.0),
            (-1, 4.0 / 3.0),
            (0, -5.0 / 2.0),
            (1, 4.0 / 3.0),
            (2, -1.0 / 12.0),
        ],
        3 => &[
            (-3, 1.0 / 8.0),
            (-2, -1.0),
            (-1, 13.0 / 8.0),
            (1, -13.0 / 8.0),
            (2, 1.0),
            (3, -1.0 / 8.0),
        ],
        _ => &[
            (-3, -1.0 / 6.0),
            (-2, 2.0),
            (-1, -13.0 / 2.0),
            (0, 28.0 / 3.0),
            (1, -13.0 / 2.0),
            (2, 2.0),
            (3, -1.0 / 6.0),
        ],
    }
}

/// Mixed partial `prod_i (η_i ∂_i)^{m_i} f(0)` of a function of real
/// coordinates, with each `∂_i` a combination of coordinate directions.
fn mixed_partial(
    f: &dyn Fn(&[f64]) -> Result<C64>,
    n_coords: usize,
    dirs: &[Vec<(usize, C64)>],
    orders: &[usize],
    eta: &[C64],
    step: f64,
) -> Result<C64> {
    let mut poly: BTreeMap<Vec<usize>, C64> = BTreeMap::from([(vec![0; n_coords], real(1.0))]);
    for (i, &m) in orders.iter().enumerate() {
        for _ in 0..m {
            let mut next = BTreeMap::new();
            for (mi, coef) in &poly {
                for &(j, w) in &dirs[i] {
                    let mut k = mi.clone();
                    k[j] += 1;
                    *next.entry(k).or_insert(real(0.0)) += coef * w * eta[i];
                }
            }
            poly = next;
        }
    }
    let mut total = real(0.0);
    for (mi, coef) in poly {
        if coef == real(0.0) {
            continue;
        }
        let axes: Vec<(usize, &[(i32, f64)])> = mi
            .iter()
            .enumerate()
            .filter(|(_, &m)| m > 0)
            .map(|(j, &m)| (j, stencil(m)))
            .collect();
        let order: usize = mi.iter().sum();
        let mut acc = real(0.0);
        let mut idx = vec![0usize; axes.len()];
        loop {
            let mut x = vec![0.0; n_coords];
            let mut w = 1.0;
            for (a, &(j, st)) in axes.iter().enumerate() {
                let (o, wt) = st[idx[a]];
                x[j] = o as f64 * step;
                w *= wt;
            }
            acc += f(&x)? * w;
            let mut a = 0;
            while a < axes.len() {
                idx[a] += 1;
                if idx[a] < axes[a].1.len() {
                    break;
                }
                idx[a] = 0;
                a += 1;
            }
            if a == axes.len() {
                break;
            }
        }
        total += coef * acc / step.powi(order as i32);
    }
    Ok(total)
}

/// Finite-difference moment `prod_i (η_i ∂/∂ω_i)^{m_i} Tr[ρ D(ω)]` at the
/// origin, with `ω` ordered as in [`moment_variables`].
pub fn weyl_moments(
    rho: &OperatorMatrix,
    desc: &SystemDescriptor,
    orders: &[usize],
    eta: &[C64],
    step: f64,
) -> Result<C64> {
    let dirs = variable_directions(desc);
    if orders.len() != dirs.len() || eta.len() != dirs.len() {
        return Err(Error::InvalidArgument(format!(
            "expected {} orders and factors, got {} and {}",
            dirs.len(),
            orders.len(),
            eta.len()
        )));
    }
    let total: usize = orders.iter().sum();
    if total > 4 {
        return Err(Error::InvalidArgument(format!("total order {total} > 4")));
    }
    if step.is_nan() || step <= 0.0 || step.powi(total.max(1) as i32) < 1e-14 {
        return Err(Error::InvalidArgument(format!(
            "step {step:e} underflows for order {total}"
        )));
    }
    let kernel = Kernel::new(KernelSpec::weyl(desc.clone()))?;
    let origin = PhasePoint::origin(desc, true);
    let n = origin.coordinates().len();
    let f = |x: &[f64]| kernel.trace_with(rho, &origin.with_coordinates(x)?);
    mixed_partial(&f, n, &dirs, orders, eta, step)
}

/// Axis names accepted by [`autocorrelation`].
pub fn autocorrelation_axes(desc: &SystemDescriptor) -> Vec<String> {
    let mut names = PhasePoint::origin(desc, true).coordinate_names();
    if matches!(desc, SystemDescriptor::Hw { .. }) {
        names.push("position".into());
    }
    names
}

/// Weyl symbol `Tr[ρ D(ω)]` along one coordinate, all others zero.
/// On an oscillator, `position` samples the shift `χ` with `α = χ/√2`.
pub fn autocorrelation(
    rho: &OperatorMatrix,
    desc: &SystemDescriptor,
    axis: &str,
    samples: &[f64],
) -> Result<Vec<C64>> {
    let origin = PhasePoint::origin(desc, true);
    let names = origin.coordinate_names();
    let (j, scale) = if axis == "position" && matches!(desc, SystemDescriptor::Hw { .. }) {
        (0, std::f64::consts::FRAC_1_SQRT_2)
    } else {
        let j = names.iter().position(|n| n == axis).ok_or_else(|| {
            Error::InvalidArgument(format!(
                "unknown axis '{axis}'; expected one of {}",
                names.join(", ")
            ))
        })?;
        (j, 1.0)
    };
    let kernel = Kernel::new(KernelSpec::weyl(desc.clone()))?;
    let mut x = origin.coordinates();
    samples
        .iter()
        .map(|&s| {
            x[j] = s * scale;
            kernel.trace_with(rho, &origin.with_coordinates(&x)?)
        })
        .collect()
}

/// `(1/V) sum_i w_i f(Ω_i + s) g(Ω_i)` with `V = sum_i w_i`; `g = f` on the
/// Wigner side and `g = f*` on the Weyl side. Shifted values come from
/// re-evaluating the kernel at the shifted coordinates.
pub fn phase_cross_correlation(f: &PhaseFunction, shift: &PhasePoint) -> Result<C64> {
    let space = f.space();
    let grid = space.grid();
    let s = shift.coordinates();
    let a = reconstruct(f);
    let mut acc = real(0.0);
    for (i, v) in f.values().iter().enumerate() {
        let p = grid.point(i);
        let mut x = p.coordinates();
        if x.len() != s.len() {
            return Err(Error::PointMismatch(format!(
                "shift has {} coordinates, grid {}",
                s.len(),
                x.len()
            )));
        }
        for (xi, si) in x.iter_mut().zip(&s) {
            *xi += si;
        }
        let shifted = space.kernel().trace_with(&a, &p.with_coordinates(&x)?)?;
        let second = match space.side() {
            Side::Wigner => *v,
            Side::Weyl => v.conj(),
        };
        acc += shifted * second * grid.weight(i);
    }
    Ok(acc / grid.weight_sum())
}

/// One computed quantity next to its Hilbert-space oracle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub quantity: String,
    pub parameters: serde_json::Value,
    pub value: serde_json::Value,
    pub oracle_value: Option<serde_json::Value>,
    pub residual: Option<f64>,
}

impl Record {
    pub fn real(
        quantity: &str,
        parameters: serde_json::Value,
        value: f64,
        oracle: Option<f64>,
    ) -> Self {
        Self {
            quantity: quantity.into(),
            parameters,
            value: value.into(),
            oracle_value: oracle.map(Into::into),
            residual: oracle.map(|o| (value - o).abs()),
        }
    }

    pub fn complex(
        quantity: &str,
        parameters: serde_json::Value,
        value: C64,
        oracle: Option<C64>,
    ) -> Self {
        let enc = |z: C64| serde_json::json!([z.re, z.im]);
        Self {
            quantity: quantity.into(),
            parameters,
            value: enc(value),
            oracle_value: oracle.map(enc),
            residual: oracle.map(|o| (value - o).norm()),
        }
    }
}
