//! Numerical check of the Stratonovich-Weyl conditions for a kernel family.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{reconstruct, GridOptions, PhaseSpace};
use crate::error::{Error, Result};
use crate::kernels::{Displacement, KernelSpec, Side};
use crate::liealgebra::SystemDescriptor;
use crate::linalg::{
    hermiticity_defect, identity, kron_all, max_abs_diff, operator_norm, random_ginibre,
    random_hermitian, random_unitary, trace, trace_product, OperatorMatrix, C64,
};
use crate::rotations::{cp_coordinates, displacement_projected, EulerRotation, PhasePoint};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub grid: GridOptions,
    pub displacement: Displacement,
    pub seed: u64,
    /// Random probe operators per condition.
    pub probes: usize,
    /// Nodes sampled for the covariance check.
    pub covariance_nodes: usize,
    /// Pass threshold; defaults to 1e-10, or 1e-5 with oscillator factors.
    pub tolerance: Option<f64>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            grid: GridOptions::default(),
            displacement: Displacement::Euler,
            seed: 1,
            probes: 4,
            covariance_nodes: 24,
            tolerance: None,
        }
    }
}

/// Residual of one condition; `residual` is `None` where the condition does
/// not apply to the chosen side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub name: String,
    pub residual: Option<f64>,
    pub passed: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratonovichReport {
    pub system: String,
    pub side: Side,
    pub displacement: Displacement,
    pub grid_nodes: usize,
    pub tolerance: f64,
    pub conditions: Vec<Condition>,
    pub passed: bool,
}

impl StratonovichReport {
    pub fn condition(&self, name: &str) -> Option<&Condition> {
        self.conditions.iter().find(|c| c.name == name)
    }
}

fn has_hw(desc: &SystemDescriptor) -> bool {
    desc.factors()
        .iter()
        .any(|f| matches!(f, SystemDescriptor::Hw { .. }))
}

/// Basis indices on which truncated oscillator factors are reliable
/// (every oscillator index below `n_max / 2`).
fn reliable_mask(desc: &SystemDescriptor) -> Result<Vec<bool>> {
    let dims = desc
        .factors()
        .iter()
        .map(|f| f.dimension())
        .collect::<Result<Vec<_>>>()?;
    let total: usize = dims.iter().product();
    Ok((0..total)
        .map(|mut i| {
            let mut ok = true;
            for (f, d) in desc.factors().iter().zip(&dims).rev() {
                let k = i % d;
                i /= d;
                if let SystemDescriptor::Hw { n_max } = f {
                    ok &= k < n_max / 2;
                }
            }
            ok
        })
        .collect())
}

fn masked(a: &OperatorMatrix, mask: &[bool]) -> OperatorMatrix {
    OperatorMatrix::from_fn(a.nrows(), a.ncols(), |i, j| {
        if mask[i] && mask[j] {
            a[(i, j)]
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

fn probe(rng: &mut ChaCha8Rng, mask: &[bool], hermitian: bool) -> OperatorMatrix {
    let d = mask.len();
    let g = if hermitian {
        random_hermitian(d, rng)
    } else {
        random_ginibre(d, rng)
    };
    masked(&g, mask)
}

type PointMap = Box<dyn Fn(&PhasePoint) -> Result<PhasePoint>>;

/// A random group element: its matrix on the system and the induced map on
/// phase points.
struct Covariance {
    v: OperatorMatrix,
    act: PointMap,
}

fn factor_covariance(desc: &SystemDescriptor, rng: &mut ChaCha8Rng) -> Result<Covariance> {
    match *desc {
        SystemDescriptor::Hw { n_max } => {
            let beta = C64::new(rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3));
            Ok(Covariance {
                v: displacement_projected(n_max, beta),
                act: Box::new(move |p| match p {
                    PhasePoint::Hw { alpha } => Ok(PhasePoint::Hw {
                        alpha: alpha + beta,
                    }),
                    other => Err(Error::PointMismatch(format!("{other:?}"))),
                }),
            })
        }
        SystemDescriptor::Sun { n, m } => {
            let fund = EulerRotation::new(n, 1)?;
            let (v_fund, v) = if m == 1 {
                let u = random_unitary(n, rng);
                (u.clone(), u)
            } else if n == 2 {
                let phi = rng.random_range(0.0..std::f64::consts::TAU);
                let theta = rng.random_range(0.0..std::f64::consts::FRAC_PI_2);
                let big = rng.random_range(0.0..std::f64::consts::TAU);
                (
                    fund.euler(&[phi], &[theta], &[big])?,
                    EulerRotation::new(2, m)?.euler(&[phi], &[theta], &[big])?,
                )
            } else {
                return Err(Error::Unsupported(format!(
                    "covariance for SU({n}) with M = {m}"
                )));
            };
            Ok(Covariance {
                v,
                act: Box::new(move |p| {
                    let u = fund.at(p)?;
                    let psi: Vec<C64> = (0..n)
                        .map(|i| (0..n).map(|k| v_fund[(i, k)] * u[(k, n - 1)]).sum())
                        .collect();
                    let (phi, theta) = cp_coordinates(&psi)?;
                    Ok(PhasePoint::Cp { phi, theta })
                }),
            })
        }
        SystemDescriptor::Composite(_) => unreachable!("factors are flat"),
    }
}

fn covariance(desc: &SystemDescriptor, rng: &mut ChaCha8Rng) -> Result<Covariance> {
    let parts = desc
        .factors()
        .iter()
        .map(|f| factor_covariance(f, rng))
        .collect::<Result<Vec<_>>>()?;
    if parts.len() == 1 {
        return Ok(parts.into_iter().next().unwrap());
    }
    let v = kron_all(parts.iter().map(|c| &c.v));
    let acts: Vec<_> = parts.into_iter().map(|c| c.act).collect();
    Ok(Covariance {
        v,
        act: Box::new(move |p| match p {
            PhasePoint::Composite(ps) => Ok(PhasePoint::Composite(
                ps.iter()
                    .zip(&acts)
                    .map(|(q, a)| a(q))
                    .collect::<Result<Vec<_>>>()?,
            )),
            other => Err(Error::PointMismatch(format!("{other:?}"))),
        }),
    })
}

fn condition(name: &str, residual: Option<f64>, tol: f64) -> Condition {
    Condition {
        name: name.into(),
        residual,
        passed: residual.map(|r| r < tol),
    }
}

/// Check informational completeness, reality, standardization,
/// self-conjugacy (traciality) and covariance of the kernel family of
/// `desc` on `side`. Conditions other than completeness apply to the
/// Wigner side only.
pub fn verify_stratonovich(
    desc: &SystemDescriptor,
    side: Side,
    opts: &VerifyOptions,
) -> Result<StratonovichReport> {
    let spec = KernelSpec {
        side,
        system: desc.clone(),
        displacement: opts.displacement,
    };
    let space = PhaseSpace::default_for(spec, &opts.grid)?;
    verify_on(&space, opts)
}

/// As [`verify_stratonovich`] on an explicit phase space.
pub fn verify_on(space: &Arc<PhaseSpace>, opts: &VerifyOptions) -> Result<StratonovichReport> {
    let desc = space.system().clone();
    let side = space.side();
    let tol = opts
        .tolerance
        .unwrap_or(if has_hw(&desc) { 1e-5 } else { 1e-10 });
    let mask = reliable_mask(&desc)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let d = space.dim();
    let probes = opts.probes.max(1);

    let mut completeness: f64 = 0.0;
    for _ in 0..probes {
        let a = probe(&mut rng, &mask, false);
        let rec = reconstruct(&space.transform(&a)?);
        completeness = completeness.max(operator_norm(&masked(&(rec - &a), &mask)));
    }
    let mut conditions = vec![condition("completeness", Some(completeness), tol)];

    if side == Side::Wigner {
        let g = space.grid();
        let reality = (0..space.len())
            .map(|i| hermiticity_defect(&space.kernel_at(i)))
            .fold(0.0, f64::max);

        let mut standard = max_abs_diff(
            &masked(&space.kernel_integral(), &mask),
            &masked(&identity(d), &mask),
        );
        let mut tracial: f64 = 0.0;
        for _ in 0..probes {
            let a = probe(&mut rng, &mask, true);
            let b = probe(&mut rng, &mask, true);
            let fa = space.transform(&a)?;
            let fb = space.transform(&b)?;
            standard = standard.max((fa.integral() - trace(&a)).norm());
            let s: C64 = (0..space.len())
                .map(|i| fa.values[i] * fb.values[i] * g.weight(i))
                .sum();
            tracial = tracial.max((s - trace_product(&a, &b)).norm());
        }

        let cov = covariance(&desc, &mut rng)?;
        let n = space.len();
        let count = opts.covariance_nodes.clamp(1, n);
        let mut covariance: f64 = 0.0;
        for k in 0..count {
            let i = k * n / count;
            let p = g.point(i);
            let moved = space.kernel().at(&(cov.act)(&p)?)?;
            let conj = &cov.v * space.kernel_at(i).as_ref() * cov.v.adjoint();
            covariance =
                covariance.max(max_abs_diff(&masked(&moved, &mask), &masked(&conj, &mask)));
        }
        conditions.push(condition("reality", Some(reality), tol));
        conditions.push(condition("standardization", Some(standard), tol));
        conditions.push(condition("traciality", Some(tracial), tol));
        conditions.push(condition("covariance", Some(covariance), tol));
    } else {
        for name in ["reality", "standardization", "traciality", "covariance"] {
            conditions.push(condition(name, None, tol));
        }
    }
    let passed = conditions.iter().all(|c| c.passed != Some(false));
    Ok(StratonovichReport {
        system: desc.to_string(),
        side,
        displacement: space.spec().displacement,
        grid_nodes: space.len(),
        tolerance: tol,
        conditions,
        passed,
    })
}
