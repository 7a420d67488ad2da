//! Quadrature grids realizing the invariant measures of CP^{N-1}, SU(N) and
//! the oscillator α-plane.
//!
//! Grids are tensor products of one-dimensional rules and are stored lazily:
//! a node index is decoded into per-axis indices on demand, so large grids
//! cost only the size of their axes.
//!
//! Polar axes carry weights `cos^a(θ) sin^b(θ)` with odd `a, b`. Under
//! `u = cos^2 θ` these become polynomials in `u` and Gauss-Legendre on
//! `[0, 1]` is exact for the trigonometric integrands that occur. Periodic
//! axes use the trapezoid rule over a full period.

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::liealgebra::SystemDescriptor;
use crate::linalg::c;
use crate::rotations::PhasePoint;

/// Which manifold a grid covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ManifoldTag {
    Cp,
    SunFull,
    HwPlane,
    Product,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisKind {
    Phi,
    Theta,
    BigPhi,
    Re,
    Im,
}

/// One-dimensional rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub kind: AxisKind,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Axis {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn weight_sum(&self) -> f64 {
        self.weights.iter().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Chart {
    Hw,
    Cp,
    Euler,
}

/// Tensor grid for one factor of a (possibly composite) system.
#[derive(Debug, Clone)]
pub struct GridBlock {
    pub chart: Chart,
    pub axes: Vec<Axis>,
    /// Factor multiplying every raw weight (`d / V` or `1 / π`).
    pub scale: f64,
    /// Per-kind angle counts, used to rebuild points.
    counts: (usize, usize, usize),
}

impl GridBlock {
    pub fn len(&self) -> usize {
        self.axes.iter().map(Axis::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Integral of the un-normalized measure.
    pub fn raw_volume(&self) -> f64 {
        self.axes.iter().map(Axis::weight_sum).product()
    }

    fn indices(&self, mut i: usize, out: &mut Vec<usize>) {
        let start = out.len();
        for ax in self.axes.iter().rev() {
            out.push(i % ax.len());
            i /= ax.len();
        }
        out[start..].reverse();
    }

    fn point(&self, idx: &[usize]) -> PhasePoint {
        let val = |k: usize| self.axes[k].nodes[idx[k]];
        match self.chart {
            Chart::Hw => PhasePoint::Hw {
                alpha: c(val(0), val(1)),
            },
            Chart::Cp => {
                let (np, nt, _) = self.counts;
                PhasePoint::Cp {
                    phi: (0..np).map(val).collect(),
                    theta: (np..np + nt).map(val).collect(),
                }
            }
            Chart::Euler => {
                let (np, nt, nb) = self.counts;
                PhasePoint::Euler {
                    phi: (0..np).map(val).collect(),
                    theta: (np..np + nt).map(val).collect(),
                    big_phi: (np + nt..np + nt + nb).map(val).collect(),
                }
            }
        }
    }

    fn weight(&self, idx: &[usize]) -> f64 {
        self.axes
            .iter()
            .zip(idx)
            .map(|(a, &k)| a.weights[k])
            .product::<f64>()
            * self.scale
    }
}

/// Nodes and weights of a volume-normalized invariant measure.
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    blocks: Vec<GridBlock>,
    tag: ManifoldTag,
    degree: usize,
    resolution: usize,
    len: usize,
}

impl QuadratureGrid {
    fn from_blocks(
        blocks: Vec<GridBlock>,
        tag: ManifoldTag,
        degree: usize,
        resolution: usize,
    ) -> Result<Self> {
        let len = blocks.iter().try_fold(1usize, |acc, b| {
            b.axes
                .iter()
                .try_fold(acc, |a, ax| a.checked_mul(ax.len()))
                .ok_or_else(|| Error::GridTooLarge("node count overflows".into()))
        })?;
        Ok(Self {
            blocks,
            tag,
            degree,
            resolution,
            len,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn tag(&self) -> ManifoldTag {
        self.tag
    }

    /// Trigonometric degree integrated exactly along every axis.
    pub fn exactness_degree(&self) -> usize {
        self.degree
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn blocks(&self) -> &[GridBlock] {
        &self.blocks
    }

    /// Product of the per-block `d / V` (or `1/π`) prefactors.
    pub fn normalization(&self) -> f64 {
        self.blocks.iter().map(|b| b.scale).product()
    }

    /// Product of the raw (un-normalized) volumes.
    pub fn raw_volume(&self) -> f64 {
        self.blocks.iter().map(GridBlock::raw_volume).product()
    }

    pub fn weight_sum(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.raw_volume() * b.scale)
            .product()
    }

    fn decode(&self, i: usize) -> Vec<Vec<usize>> {
        assert!(i < self.len, "node {i} out of range ({})", self.len);
        let mut rem = i;
        let sizes: Vec<usize> = self.blocks.iter().map(GridBlock::len).collect();
        let mut per = vec![0; sizes.len()];
        for (k, s) in sizes.iter().enumerate().rev() {
            per[k] = rem % s;
            rem /= s;
        }
        self.blocks
            .iter()
            .zip(per)
            .map(|(b, j)| {
                let mut v = Vec::with_capacity(b.axes.len());
                b.indices(j, &mut v);
                v
            })
            .collect()
    }

    /// Node `i` as a phase point (composite for product grids).
    pub fn point(&self, i: usize) -> PhasePoint {
        let idx = self.decode(i);
        if self.tag == ManifoldTag::Product {
            PhasePoint::Composite(
                self.blocks
                    .iter()
                    .zip(&idx)
                    .map(|(b, k)| b.point(k))
                    .collect(),
            )
        } else {
            self.blocks[0].point(&idx[0])
        }
    }

    pub fn weight(&self, i: usize) -> f64 {
        let idx = self.decode(i);
        self.blocks
            .iter()
            .zip(&idx)
            .map(|(b, k)| b.weight(k))
            .product()
    }

    pub fn points(&self) -> Vec<PhasePoint> {
        (0..self.len).map(|i| self.point(i)).collect()
    }

    pub fn weights(&self) -> Vec<f64> {
        (0..self.len).map(|i| self.weight(i)).collect()
    }

    /// One row per node: coordinate columns then `weight`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        if self.is_empty() {
            return Ok(());
        }
        let mut header = self.point(0).coordinate_names();
        header.push("weight".into());
        writeln!(out, "{}", header.join(","))?;
        for i in 0..self.len {
            let mut row: Vec<String> = self
                .point(i)
                .coordinates()
                .iter()
                .map(|x| format!("{x:.16e}"))
                .collect();
            row.push(format!("{:.16e}", self.weight(i)));
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Gauss-Legendre nodes and weights on `[a, b]`.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = mid - half * z;
        x[n - 1 - i] = mid + half * z;
        w[i] = half * wi;
        w[n - 1 - i] = half * wi;
    }
    if n % 2 == 1 {
        x[n / 2] = mid;
    }
    (x, w)
}

/// Trapezoid rule with `n` nodes on the period `[a, a + len)`.
pub fn trapezoid(n: usize, a: f64, len: f64) -> (Vec<f64>, Vec<f64>) {
    let h = len / n as f64;
    ((0..n).map(|k| a + k as f64 * h).collect(), vec![h; n])
}

/// Polar axis with weight `cos^a θ sin^b θ` on `[0, π/2]`, `a, b` odd;
/// `a = b = 1` is read as `sin 2θ`.
/// `n_poly` nodes suffice for integrands that are polynomials in `cos^2 θ`
/// of degree below `n_poly`, times the weight.
fn polar_axis(a: u32, b: u32, resolution: usize) -> Axis {
    debug_assert!(a % 2 == 1 && b % 2 == 1);
    let (pa, pb) = ((a - 1) / 2, (b - 1) / 2);
    let n = resolution + ((pa + pb) as usize).div_ceil(2);
    let (u, wu) = gauss_legendre(n, 0.0, 1.0);
    let factor = if a == 1 && b == 1 { 2.0 } else { 1.0 };
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for (ui, wi) in u.iter().zip(&wu) {
        nodes.push(ui.sqrt().acos());
        weights.push(0.5 * factor * wi * ui.powi(pa as i32) * (1.0 - ui).powi(pb as i32));
    }
    Axis {
        kind: AxisKind::Theta,
        nodes,
        weights,
    }
}

/// `(a, b)` exponents of the polar weight for CP^{N-1} axis `k = 2..=N`.
fn cp_exponents(n: usize, k: usize) -> (u32, u32) {
    if k == 2 {
        (1, 1)
    } else if k < n {
        (2 * k as u32 - 3, 1)
    } else {
        (1, 2 * n as u32 - 3)
    }
}

/// Period of the Cartan angle `Phi_c`.
pub fn cartan_period(c_: usize) -> f64 {
    2.0 * PI * ((c_ * (c_ + 1)) as f64 / 2.0).sqrt()
}

fn periodic_axis(
    kind: AxisKind,
    nodes: usize,
    lo: f64,
    hi: f64,
    period: f64,
    resolution: usize,
) -> Axis {
    let len = hi - lo;
    let (x, w) = if (len - period).abs() < 1e-12 * period {
        trapezoid(nodes, lo, len)
    } else {
        gauss_legendre(nodes.max(resolution + 2), lo, hi)
    };
    Axis {
        kind,
        nodes: x,
        weights: w,
    }
}

fn check_resolution(m: usize, resolution: usize) -> Result<()> {
    let required = (m + 1).max(2);
    if resolution < required {
        return Err(Error::ResolutionTooSmall {
            resolution,
            required,
        });
    }
    Ok(())
}

fn sun_params(desc: &SystemDescriptor) -> Result<(usize, usize, usize)> {
    match *desc {
        SystemDescriptor::Sun { n, m } => Ok((n, m, desc.dimension()?)),
        ref other => Err(Error::Unsupported(format!(
            "expected an su:N:M system, got {other}"
        ))),
    }
}

/// Volume-normalized CP^{N-1} grid (Wigner side).
pub fn cp_grid(desc: &SystemDescriptor, resolution: usize) -> Result<QuadratureGrid> {
    let (n, m, d) = sun_params(desc)?;
    check_resolution(m, resolution)?;
    let mut axes = Vec::with_capacity(2 * (n - 1));
    for _ in 1..n {
        let (x, w) = trapezoid(2 * resolution, 0.0, 2.0 * PI);
        axes.push(Axis {
            kind: AxisKind::Phi,
            nodes: x,
            weights: w,
        });
    }
    for k in 2..=n {
        let (a, b) = cp_exponents(n, k);
        axes.push(polar_axis(a, b, resolution));
    }
    let mut block = GridBlock {
        chart: Chart::Cp,
        axes,
        scale: 1.0,
        counts: (n - 1, n - 1, 0),
    };
    block.scale = d as f64 / block.raw_volume();
    QuadratureGrid::from_blocks(vec![block], ManifoldTag::Cp, 2 * resolution - 1, resolution)
}

/// Integration ranges for the azimuthal and Cartan angles of SU(N).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EulerRanges {
    /// `N(N-1)/2` intervals for the `phi` angles.
    pub phi: Vec<(f64, f64)>,
    /// `N-1` intervals for the `Phi` angles.
    pub big_phi: Vec<(f64, f64)>,
}

impl EulerRanges {
    /// Full periods for every angle: `phi` in `[0, 2π)`, `Phi_c` over
    /// its Cartan period.
    pub fn full_periods(n: usize) -> Self {
        Self {
            phi: vec![(0.0, 2.0 * PI); n * (n - 1) / 2],
            big_phi: (1..n).map(|c_| (0.0, cartan_period(c_))).collect(),
        }
    }

    /// Ranges covering SU(4) exactly once.
    pub fn su4() -> Self {
        let half = (0.0, PI);
        let full = (0.0, 2.0 * PI);
        Self {
            phi: vec![half, full, full, half, full, half],
            big_phi: vec![
                (0.0, 2.0 * PI),
                (0.0, 3.0 * PI / 3f64.sqrt()),
                (0.0, 4.0 * PI / 6f64.sqrt()),
            ],
        }
    }

    /// Default ranges: full periods for N = 2, 3, the single cover for N = 4.
    pub fn for_n(n: usize) -> Result<Self> {
        match n {
            2 | 3 => Ok(Self::full_periods(n)),
            4 => Ok(Self::su4()),
            _ => Err(Error::Unsupported(format!(
                "no built-in SU({n}) integration ranges; supply them explicitly"
            ))),
        }
    }
}

/// Volume-normalized SU(N) grid over all Euler angles (Weyl side).
pub fn sun_grid(desc: &SystemDescriptor, resolution: usize) -> Result<QuadratureGrid> {
    let (n, _, _) = sun_params(desc)?;
    sun_grid_with_ranges(desc, resolution, &EulerRanges::for_n(n)?)
}

/// SU(N) grid over caller-supplied ranges. Axes spanning a full period use
/// the trapezoid rule, others Gauss-Legendre.
pub fn sun_grid_with_ranges(
    desc: &SystemDescriptor,
    resolution: usize,
    ranges: &EulerRanges,
) -> Result<QuadratureGrid> {
    let (n, m, d) = sun_params(desc)?;
    check_resolution(m, resolution)?;
    let k = n * (n - 1) / 2;
    if ranges.phi.len() != k || ranges.big_phi.len() != n - 1 {
        return Err(Error::InvalidArgument(format!(
            "SU({n}) needs {k} phi ranges and {} Phi ranges",
            n - 1
        )));
    }
    let mut axes = Vec::with_capacity(2 * k + n - 1);
    for &(lo, hi) in &ranges.phi {
        axes.push(periodic_axis(
            AxisKind::Phi,
            2 * resolution,
            lo,
            hi,
            2.0 * PI,
            resolution,
        ));
    }
    let mut exps = vec![(1, 1); k];
    for q in (2..=n).rev() {
        let off = crate::rotations::block_offset(n, q);
        for p in 2..=q {
            exps[(p - 2) + off] = if p == 2 {
                (1, 1)
            } else if p < q {
                (2 * p as u32 - 3, 1)
            } else {
                (1, 2 * q as u32 - 3)
            };
        }
    }
    for &(a, b) in &exps {
        axes.push(polar_axis(a, b, resolution));
    }
    for (c0, &(lo, hi)) in ranges.big_phi.iter().enumerate() {
        let c_ = c0 + 1;
        axes.push(periodic_axis(
            AxisKind::BigPhi,
            (c_ + 1) * resolution,
            lo,
            hi,
            cartan_period(c_),
            resolution,
        ));
    }
    let mut block = GridBlock {
        chart: Chart::Euler,
        axes,
        scale: 1.0,
        counts: (k, k, n - 1),
    };
    block.scale = d as f64 / block.raw_volume();
    QuadratureGrid::from_blocks(
        vec![block],
        ManifoldTag::SunFull,
        2 * resolution - 1,
        resolution,
    )
}

/// Tensor Gauss-Legendre grid over `[-radius, radius]^2` with weights `1/π`.
pub fn hw_grid(desc: &SystemDescriptor, radius: f64, resolution: usize) -> Result<QuadratureGrid> {
    if !matches!(desc, SystemDescriptor::Hw { .. }) {
        return Err(Error::Unsupported(format!(
            "expected an hw:n system, got {desc}"
        )));
    }
    if radius.is_nan() || radius <= 0.0 || resolution < 2 {
        return Err(Error::InvalidArgument(
            "hw grid needs radius > 0 and resolution >= 2".into(),
        ));
    }
    let (x, w) = gauss_legendre(resolution, -radius, radius);
    let axes = vec![
        Axis {
            kind: AxisKind::Re,
            nodes: x.clone(),
            weights: w.clone(),
        },
        Axis {
            kind: AxisKind::Im,
            nodes: x,
            weights: w,
        },
    ];
    let block = GridBlock {
        chart: Chart::Hw,
        axes,
        scale: 1.0 / PI,
        counts: (0, 0, 0),
    };
    QuadratureGrid::from_blocks(
        vec![block],
        ManifoldTag::HwPlane,
        2 * resolution - 1,
        resolution,
    )
}

/// Radius relative to `sqrt(n_max)`; values of 1 or more cover the
/// classically allowed region of every retained Fock state.
pub fn hw_coverage(n_max: usize, radius: f64) -> f64 {
    radius / (n_max as f64).sqrt()
}

/// Cartesian product of grids, first grid most significant.
pub fn product_grid(grids: &[QuadratureGrid]) -> Result<QuadratureGrid> {
    if grids.len() < 2 {
        return Err(Error::InvalidArgument(
            "product grid needs at least two factors".into(),
        ));
    }
    let blocks: Vec<GridBlock> = grids
        .iter()
        .flat_map(|g| g.blocks.iter().cloned())
        .collect();
    let degree = grids.iter().map(|g| g.degree).min().unwrap_or(0);
    let res = grids.iter().map(|g| g.resolution).min().unwrap_or(0);
    QuadratureGrid::from_blocks(blocks, ManifoldTag::Product, degree, res)
}
