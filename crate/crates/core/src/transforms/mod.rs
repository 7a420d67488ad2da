//! Forward and inverse phase-space maps and the products built on them.
//!
//! A [`PhaseSpace`] pairs a kernel specification with a quadrature grid and
//! caches kernel matrices per node (write-once). A [`PhaseFunction`] is a
//! list of samples aligned with the nodes of its phase space.
//!
//! Every grid sum is evaluated in fixed-size node chunks whose partial sums
//! are combined in node order, so results do not depend on the number of
//! worker threads.

mod dynamics;
mod star;
mod verify;

use std::io::Write;
use std::sync::{Arc, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{Kernel, KernelSpec, Side};
use crate::liealgebra::SystemDescriptor;
use crate::linalg::{identity, trace_product, zeros, OperatorMatrix, C64};
use crate::measures::{cp_grid, hw_grid, product_grid, sun_grid, ManifoldTag, QuadratureGrid};

pub use dynamics::{evolve, evolve_series};
pub use star::{moyal_bracket, star_product, star_product_literal};
pub use verify::{verify_on, verify_stratonovich, Condition, StratonovichReport, VerifyOptions};

const CHUNK: usize = 64;

/// Kernel cache budget in complex entries (about 128 MiB).
const CACHE_ENTRIES: usize = 1 << 23;

/// Default grid resolution for a simple system on one side.
pub fn default_resolution(desc: &SystemDescriptor, side: Side) -> usize {
    match (desc, side) {
        (SystemDescriptor::Sun { m, .. }, Side::Wigner) => 2 * *m + 1,
        (SystemDescriptor::Sun { m, .. }, Side::Weyl) => (*m + 1).max(2),
        (SystemDescriptor::Hw { .. }, _) => 80,
        _ => 0,
    }
}

/// Default α-plane radius for a truncated oscillator.
pub fn default_radius(n_max: usize) -> f64 {
    6f64.max((n_max as f64).sqrt() + 1.0)
}

/// Overrides for the per-factor default grids.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct GridOptions {
    pub resolution: Option<usize>,
    /// α-plane half-width for oscillator factors.
    pub radius: Option<f64>,
}

impl GridOptions {
    pub fn resolution(r: usize) -> Self {
        Self {
            resolution: Some(r),
            radius: None,
        }
    }
}

/// Default grid for `spec`.
pub fn default_grid(spec: &KernelSpec, opts: &GridOptions) -> Result<QuadratureGrid> {
    let one = |d: &SystemDescriptor| -> Result<QuadratureGrid> {
        let r = opts
            .resolution
            .unwrap_or_else(|| default_resolution(d, spec.side));
        match *d {
            SystemDescriptor::Hw { n_max } => {
                hw_grid(d, opts.radius.unwrap_or_else(|| default_radius(n_max)), r)
            }
            SystemDescriptor::Sun { .. } => match (spec.side, spec.displacement) {
                (Side::Wigner, _) | (Side::Weyl, crate::kernels::Displacement::Arecchi) => {
                    cp_grid(d, r)
                }
                (Side::Weyl, crate::kernels::Displacement::Euler) => sun_grid(d, r),
            },
            SystemDescriptor::Composite(_) => unreachable!("factors are flat"),
        }
    };
    let factors = spec.system.factors();
    if factors.len() == 1 {
        one(&factors[0])
    } else {
        product_grid(&factors.iter().map(one).collect::<Result<Vec<_>>>()?)
    }
}

/// A kernel specification together with the grid it is sampled on.
#[derive(Debug)]
pub struct PhaseSpace {
    kernel: Kernel,
    grid: Arc<QuadratureGrid>,
    cache: Option<Vec<OnceLock<OperatorMatrix>>>,
}

impl PhaseSpace {
    pub fn new(spec: KernelSpec, grid: QuadratureGrid) -> Result<Arc<Self>> {
        Self::with_grid(spec, Arc::new(grid))
    }

    pub fn with_grid(spec: KernelSpec, grid: Arc<QuadratureGrid>) -> Result<Arc<Self>> {
        let kernel = Kernel::new(spec)?;
        if grid.is_empty() {
            return Err(Error::InvalidArgument("empty grid".into()));
        }
        // every node has the same shape, so one evaluation validates the pairing
        kernel.at(&grid.point(0))?;
        let d = kernel.dim();
        let cache = (grid.len().saturating_mul(d * d) <= CACHE_ENTRIES)
            .then(|| (0..grid.len()).map(|_| OnceLock::new()).collect());
        Ok(Arc::new(Self {
            kernel,
            grid,
            cache,
        }))
    }

    /// Phase space on the default grid of `spec`.
    pub fn default_for(spec: KernelSpec, opts: &GridOptions) -> Result<Arc<Self>> {
        let grid = default_grid(&spec, opts)?;
        Self::new(spec, grid)
    }

    pub fn spec(&self) -> &KernelSpec {
        self.kernel.spec()
    }

    pub fn side(&self) -> Side {
        self.spec().side
    }

    pub fn system(&self) -> &SystemDescriptor {
        &self.spec().system
    }

    pub fn grid(&self) -> &Arc<QuadratureGrid> {
        &self.grid
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn dim(&self) -> usize {
        self.kernel.dim()
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn is_cached(&self) -> bool {
        self.cache.is_some()
    }

    fn compute(&self, i: usize) -> OperatorMatrix {
        self.kernel
            .at(&self.grid.point(i))
            .expect("grid nodes were validated against the kernel")
    }

    /// Kernel matrix at node `i`.
    pub fn kernel_at(&self, i: usize) -> std::borrow::Cow<'_, OperatorMatrix> {
        match &self.cache {
            Some(c) => std::borrow::Cow::Borrowed(c[i].get_or_init(|| self.compute(i))),
            None => std::borrow::Cow::Owned(self.compute(i)),
        }
    }

    /// `W_A` sampled on the grid.
    pub fn transform(self: &Arc<Self>, a: &OperatorMatrix) -> Result<PhaseFunction> {
        let d = self.dim();
        if a.nrows() != d || a.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: a.nrows(),
            });
        }
        let values = (0..self.len())
            .into_par_iter()
            .map(|i| {
                if self.cache.is_some() {
                    Ok(trace_product(a, &self.kernel_at(i)))
                } else {
                    self.kernel.trace_with(a, &self.grid.point(i))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PhaseFunction {
            space: Arc::clone(self),
            values,
        })
    }

    /// Ordered, chunked `sum_i f(i)` of matrices.
    fn ordered_sum(&self, f: impl Fn(usize, &OperatorMatrix) -> C64 + Sync) -> OperatorMatrix {
        let d = self.dim();
        let n = self.len();
        let partials: Vec<OperatorMatrix> = (0..n.div_ceil(CHUNK))
            .into_par_iter()
            .map(|c| {
                let mut acc = zeros(d);
                for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
                    let k = self.kernel_at(i);
                    let s = f(i, &k);
                    if s != C64::new(0.0, 0.0) {
                        acc.zip_apply(k.as_ref(), |x, y| *x += s * y);
                    }
                }
                acc
            })
            .collect();
        partials.into_iter().fold(zeros(d), |a, b| a + b)
    }

    /// `sum_i w_i K_i`.
    pub fn kernel_integral(&self) -> OperatorMatrix {
        self.ordered_sum(|i, _| C64::new(self.grid.weight(i), 0.0))
    }
}

/// Samples of a Wigner or Weyl symbol over the nodes of a phase space.
#[derive(Debug, Clone)]
pub struct PhaseFunction {
    space: Arc<PhaseSpace>,
    values: Vec<C64>,
}

impl PhaseFunction {
    pub fn from_values(space: Arc<PhaseSpace>, values: Vec<C64>) -> Result<Self> {
        if values.len() != space.len() {
            return Err(Error::DimensionMismatch {
                expected: space.len(),
                found: values.len(),
            });
        }
        Ok(Self { space, values })
    }

    pub fn space(&self) -> &Arc<PhaseSpace> {
        &self.space
    }

    pub fn spec(&self) -> &KernelSpec {
        self.space.spec()
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `sum_i w_i f_i`.
    pub fn integral(&self) -> C64 {
        let g = &self.space.grid;
        let partials: Vec<C64> = self
            .values
            .par_chunks(CHUNK)
            .enumerate()
            .map(|(c, vs)| {
                vs.iter()
                    .enumerate()
                    .map(|(k, v)| v * g.weight(c * CHUNK + k))
                    .sum()
            })
            .collect();
        partials.into_iter().sum()
    }

    /// Largest imaginary part; zero for Wigner symbols of Hermitian operators.
    pub fn max_imag(&self) -> f64 {
        self.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &PhaseFunction) -> Result<f64> {
        same_space(self, other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> PhaseFunction {
        PhaseFunction {
            space: Arc::clone(&self.space),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(
        &self,
        other: &PhaseFunction,
        f: impl Fn(C64, C64) -> C64,
    ) -> Result<PhaseFunction> {
        same_space(self, other)?;
        Ok(PhaseFunction {
            space: Arc::clone(&self.space),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// CSV: coordinate columns, `weight`, `re`, `im`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let g = &self.space.grid;
        let mut header = g.point(0).coordinate_names();
        header.extend(["weight".to_string(), "re".to_string(), "im".to_string()]);
        writeln!(out, "{}", header.join(","))?;
        for (i, v) in self.values.iter().enumerate() {
            let mut row: Vec<String> = g
                .point(i)
                .coordinates()
                .iter()
                .map(|x| format!("{x:.16e}"))
                .collect();
            row.push(format!("{:.16e}", g.weight(i)));
            row.push(format!("{:.16e}", v.re));
            row.push(format!("{:.16e}", v.im));
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }

    /// JSON envelope with the kernel spec and grid metadata.
    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct Envelope<'a> {
            spec: &'a KernelSpec,
            system: String,
            grid: GridMeta,
            values: Vec<[f64; 2]>,
        }
        #[derive(Serialize)]
        struct GridMeta {
            tag: ManifoldTag,
            resolution: usize,
            nodes: usize,
            exactness_degree: usize,
        }
        let g = &self.space.grid;
        serde_json::to_value(Envelope {
            spec: self.spec(),
            system: self.spec().system.to_string(),
            grid: GridMeta {
                tag: g.tag(),
                resolution: g.resolution(),
                nodes: g.len(),
                exactness_degree: g.exactness_degree(),
            },
            values: self.values.iter().map(|v| [v.re, v.im]).collect(),
        })
        .expect("envelope serializes")
    }
}

fn same_space(a: &PhaseFunction, b: &PhaseFunction) -> Result<()> {
    if Arc::ptr_eq(&a.space, &b.space) {
        return Ok(());
    }
    if a.spec() != b.spec()
        || a.space.len() != b.space.len()
        || a.space.grid.resolution() != b.space.grid.resolution()
    {
        return Err(Error::Incompatible(
            "phase functions live on different phase spaces".into(),
        ));
    }
    Ok(())
}

fn same_system(a: &SystemDescriptor, b: &SystemDescriptor) -> Result<()> {
    if a != b {
        return Err(Error::Incompatible(format!("systems differ: {a} vs {b}")));
    }
    Ok(())
}

/// Node-wise `Tr[A K(node)]` on a phase space.
pub fn phase_function(a: &OperatorMatrix, space: &Arc<PhaseSpace>) -> Result<PhaseFunction> {
    space.transform(a)
}

/// `sum_i w_i f_i K_inv(node_i)`: the kernel on the Wigner side, its adjoint
/// on the Weyl side.
pub fn reconstruct(f: &PhaseFunction) -> OperatorMatrix {
    let s = &f.space;
    let g = &s.grid;
    match s.side() {
        Side::Wigner => s.ordered_sum(|i, _| f.values[i] * g.weight(i)),
        Side::Weyl => s
            .ordered_sum(|i, _| (f.values[i] * g.weight(i)).conj())
            .adjoint(),
    }
}

/// Round-trip self-test: operator-norm error of reconstructing a probe.
pub fn round_trip_error(space: &Arc<PhaseSpace>, probe: &OperatorMatrix) -> Result<f64> {
    let rec = reconstruct(&space.transform(probe)?);
    Ok(crate::linalg::operator_norm(&(rec - probe)))
}

/// Map `f` onto the kernel family of `target`: `W'(Ω') = sum_Ω w f(Ω) F(Ω'; Ω)`
/// with `F(Ω'; Ω) = Tr[K'(Ω') K_inv(Ω)]`, evaluated by reassociating the
/// double sum through the reconstructed operator.
pub fn generalized_fourier(f: &PhaseFunction, target: &Arc<PhaseSpace>) -> Result<PhaseFunction> {
    same_system(f.space.system(), target.system())?;
    target.transform(&reconstruct(f))
}

/// Generalized Fourier kernel matrix `F[i][j] = Tr[K_target(i) K_inv_source(j)]`.
pub fn fourier_kernel(source: &Arc<PhaseSpace>, target: &Arc<PhaseSpace>) -> Result<Vec<Vec<C64>>> {
    same_system(source.system(), target.system())?;
    let inv: Vec<OperatorMatrix> = (0..source.len())
        .map(|j| match source.side() {
            Side::Wigner => source.kernel_at(j).into_owned(),
            Side::Weyl => source.kernel_at(j).adjoint(),
        })
        .collect();
    Ok((0..target.len())
        .into_par_iter()
        .map(|i| {
            let k = target.kernel_at(i);
            inv.iter().map(|b| trace_product(&k, b)).collect()
        })
        .collect())
}

/// Literal quadrature against the Fourier kernel; agrees with
/// [`generalized_fourier`] up to rounding.
pub fn generalized_fourier_literal(
    f: &PhaseFunction,
    target: &Arc<PhaseSpace>,
) -> Result<PhaseFunction> {
    let fk = fourier_kernel(&f.space, target)?;
    let g = &f.space.grid;
    let values = fk
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .map(|(j, fij)| fij * f.values[j] * g.weight(j))
                .sum()
        })
        .collect();
    PhaseFunction::from_values(Arc::clone(target), values)
}

/// `Tr[A B]` from two symbols. Wigner symbols on one grid use
/// `sum w f_A f_B`; anything else goes through the reconstructed operators.
pub fn overlap(fa: &PhaseFunction, fb: &PhaseFunction) -> Result<C64> {
    same_system(fa.space.system(), fb.space.system())?;
    if fa.space.side() == Side::Wigner
        && fb.space.side() == Side::Wigner
        && same_space(fa, fb).is_ok()
    {
        return Ok(fa.zip_with(fb, |a, b| a * b)?.integral());
    }
    Ok(trace_product(&reconstruct(fa), &reconstruct(fb)))
}

/// `sum_i w_i K(node_i)`; the identity for a standardized Wigner kernel.
pub fn standardization_residual(space: &Arc<PhaseSpace>) -> f64 {
    crate::linalg::max_abs_diff(&space.kernel_integral(), &identity(space.dim()))
}
