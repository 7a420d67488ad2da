//! Displacement-type operators: Euler-parameterized SU(N) rotations, the
//! Arecchi spin rotation, and truncated Heisenberg-Weyl displacements.
//!
//! An SU(N) rotation is the ordered product
//!
//! ```text
//! U = prod_{q = N..2} prod_{p = 2..q} exp(i J(3) phi_k) exp(i J_y(1,p) theta_k)
//!     * prod_c exp(i J_z((c+1)^2 - 1) Phi_c),      k = (p - 1) + j(q)
//! ```
//!
//! with `j(N) = 0` and `j(q) = sum_{i=1}^{N-q} (N - i)`. A point on CP^{N-1}
//! keeps only the `q = N` block.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::liealgebra::{z_index, Algebra, SystemDescriptor};
use crate::linalg::{
    c, expm_skew_hermitian, real, unitarity_defect, zeros, HermitianExp, OperatorMatrix, C64, I,
};

/// Coordinates on a phase space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PhasePoint {
    /// Point of the complex α-plane of one oscillator mode.
    Hw { alpha: C64 },
    /// Wigner-side point of CP^{N-1}: `N-1` azimuths and `N-1` polar angles.
    Cp { phi: Vec<f64>, theta: Vec<f64> },
    /// Weyl-side point of SU(N): `N(N-1)/2` azimuths and polar angles plus
    /// `N-1` Cartan angles.
    Euler {
        phi: Vec<f64>,
        theta: Vec<f64>,
        big_phi: Vec<f64>,
    },
    /// One point per factor of a composite system.
    Composite(Vec<PhasePoint>),
}

impl PhasePoint {
    pub fn cp(phi: Vec<f64>, theta: Vec<f64>) -> Self {
        Self::Cp { phi, theta }
    }

    pub fn euler(phi: Vec<f64>, theta: Vec<f64>, big_phi: Vec<f64>) -> Self {
        Self::Euler {
            phi,
            theta,
            big_phi,
        }
    }

    pub fn hw(alpha: C64) -> Self {
        Self::Hw { alpha }
    }

    /// Flat list of real coordinates in column order
    /// (`phi1.., theta1.., Phi1..` or `re, im`).
    pub fn coordinates(&self) -> Vec<f64> {
        match self {
            Self::Hw { alpha } => vec![alpha.re, alpha.im],
            Self::Cp { phi, theta } => phi.iter().chain(theta).copied().collect(),
            Self::Euler {
                phi,
                theta,
                big_phi,
            } => phi.iter().chain(theta).chain(big_phi).copied().collect(),
            Self::Composite(ps) => ps.iter().flat_map(|p| p.coordinates()).collect(),
        }
    }

    /// Column names matching [`PhasePoint::coordinates`].
    pub fn coordinate_names(&self) -> Vec<String> {
        match self {
            Self::Hw { .. } => vec!["re_alpha".into(), "im_alpha".into()],
            Self::Cp { phi, theta } => numbered("phi", phi.len())
                .chain(numbered("theta", theta.len()))
                .collect(),
            Self::Euler {
                phi,
                theta,
                big_phi,
            } => numbered("phi", phi.len())
                .chain(numbered("theta", theta.len()))
                .chain(numbered("Phi", big_phi.len()))
                .collect(),
            Self::Composite(ps) => ps
                .iter()
                .enumerate()
                .flat_map(|(i, p)| {
                    p.coordinate_names()
                        .into_iter()
                        .map(move |n| format!("f{}_{n}", i + 1))
                })
                .collect(),
        }
    }

    /// Rebuild a point of the same shape from a flat coordinate list.
    pub fn with_coordinates(&self, coords: &[f64]) -> Result<Self> {
        let mut it = coords.iter().copied();
        let p = self.refill(&mut it)?;
        if it.next().is_some() {
            return Err(Error::PointMismatch("too many coordinates".into()));
        }
        Ok(p)
    }

    fn refill(&self, it: &mut impl Iterator<Item = f64>) -> Result<Self> {
        let mut take = |n: usize| -> Result<Vec<f64>> {
            let v: Vec<f64> = it.by_ref().take(n).collect();
            if v.len() != n {
                return Err(Error::PointMismatch("too few coordinates".into()));
            }
            Ok(v)
        };
        Ok(match self {
            Self::Hw { .. } => {
                let v = take(2)?;
                Self::Hw {
                    alpha: c(v[0], v[1]),
                }
            }
            Self::Cp { phi, theta } => Self::Cp {
                phi: take(phi.len())?,
                theta: take(theta.len())?,
            },
            Self::Euler {
                phi,
                theta,
                big_phi,
            } => Self::Euler {
                phi: take(phi.len())?,
                theta: take(theta.len())?,
                big_phi: take(big_phi.len())?,
            },
            Self::Composite(ps) => {
                let mut out = Vec::with_capacity(ps.len());
                for p in ps {
                    out.push(p.refill(it)?);
                }
                Self::Composite(out)
            }
        })
    }

    /// The origin of the Wigner (`euler = false`) or Weyl (`euler = true`)
    /// phase space of `desc`.
    pub fn origin(desc: &SystemDescriptor, euler: bool) -> Self {
        match *desc {
            SystemDescriptor::Hw { .. } => Self::Hw { alpha: real(0.0) },
            SystemDescriptor::Sun { n, .. } => {
                if euler {
                    let k = n * (n - 1) / 2;
                    Self::Euler {
                        phi: vec![0.0; k],
                        theta: vec![0.0; k],
                        big_phi: vec![0.0; n - 1],
                    }
                } else {
                    Self::Cp {
                        phi: vec![0.0; n - 1],
                        theta: vec![0.0; n - 1],
                    }
                }
            }
            SystemDescriptor::Composite(ref fs) => {
                Self::Composite(fs.iter().map(|f| Self::origin(f, euler)).collect())
            }
        }
    }
}

fn numbered(prefix: &'static str, n: usize) -> impl Iterator<Item = String> {
    (1..=n).map(move |i| format!("{prefix}{i}"))
}

/// Index offset `j(q)` of the `q`-th block of Euler angles.
pub fn block_offset(n: usize, q: usize) -> usize {
    (1..=n - q).map(|i| n - i).sum()
}

enum Step<'a> {
    Diag(&'a [f64], f64),
    Jy(usize, f64),
}

/// Cached exponentials for repeated evaluation of `U_N^M`.
#[derive(Debug, Clone)]
pub struct EulerRotation {
    n: usize,
    m: usize,
    j3: Vec<f64>,
    jy: Vec<HermitianExp>,
    cartan: Vec<Vec<f64>>,
}

impl EulerRotation {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        let alg = Algebra::new(n, m)?;
        Self::from_algebra(&alg)
    }

    pub fn from_algebra(alg: &Algebra) -> Result<Self> {
        let n = alg.n();
        let diag = |mat: &OperatorMatrix| -> Vec<f64> {
            (0..mat.nrows()).map(|i| mat[(i, i)].re).collect()
        };
        let j3 = diag(alg.generator(3)?);
        let jy = (2..=n).map(|p| HermitianExp::new(alg.jy(1, p))).collect();
        let cartan = (1..n)
            .map(|c_| alg.generator(z_index(c_)).map(diag))
            .collect::<Result<_>>()?;
        Ok(Self {
            n,
            m: alg.m(),
            j3,
            jy,
            cartan,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.j3.len()
    }

    /// Number of `phi` (equivalently `theta`) Euler angles.
    pub fn pair_count(&self) -> usize {
        self.n * (self.n - 1) / 2
    }

    fn scale_columns(acc: &mut OperatorMatrix, diag: &[f64], angle: f64) {
        if angle == 0.0 {
            return;
        }
        for (j, &w) in diag.iter().enumerate() {
            let ph = C64::from_polar(1.0, w * angle);
            for i in 0..acc.nrows() {
                acc[(i, j)] *= ph;
            }
        }
    }

    /// Ordered factors of `U` at `point`, left to right.
    fn steps<'a>(&'a self, point: &PhasePoint) -> Result<Vec<Step<'a>>> {
        let mut out = Vec::new();
        let j3 = self.j3.as_slice();
        let pair = |out: &mut Vec<Step<'a>>, p: usize, phi: f64, theta: f64| {
            out.push(Step::Diag(j3, phi));
            out.push(Step::Jy(p - 2, theta));
        };
        match point {
            PhasePoint::Cp { phi, theta } => {
                if phi.len() != self.n - 1 || theta.len() != self.n - 1 {
                    return Err(Error::PointMismatch(format!(
                        "CP^{} point needs {} phi and theta angles; got {}, {}",
                        self.n - 1,
                        self.n - 1,
                        phi.len(),
                        theta.len()
                    )));
                }
                for p in 2..=self.n {
                    pair(&mut out, p, phi[p - 2], theta[p - 2]);
                }
            }
            PhasePoint::Euler {
                phi,
                theta,
                big_phi,
            } => {
                let k = self.pair_count();
                if phi.len() != k || theta.len() != k || big_phi.len() != self.n - 1 {
                    return Err(Error::PointMismatch(format!(
                        "SU({}) needs {k} phi, {k} theta and {} Phi angles; got {}, {}, {}",
                        self.n,
                        self.n - 1,
                        phi.len(),
                        theta.len(),
                        big_phi.len()
                    )));
                }
                for q in (2..=self.n).rev() {
                    let off = block_offset(self.n, q);
                    for p in 2..=q {
                        let idx = (p - 2) + off;
                        pair(&mut out, p, phi[idx], theta[idx]);
                    }
                }
                for (c_, diag) in self.cartan.iter().enumerate() {
                    out.push(Step::Diag(diag, big_phi[c_]));
                }
            }
            other => {
                return Err(Error::PointMismatch(format!(
                    "SU({}) rotation at {other:?}",
                    self.n
                )))
            }
        }
        Ok(out)
    }

    fn product(&self, point: &PhasePoint) -> Result<OperatorMatrix> {
        let mut acc = OperatorMatrix::identity(self.dim(), self.dim());
        for step in self.steps(point)? {
            match step {
                Step::Diag(d, a) => Self::scale_columns(&mut acc, d, a),
                Step::Jy(i, t) if t != 0.0 => acc = &acc * self.jy[i].exp_i(t),
                Step::Jy(..) => {}
            }
        }
        Ok(acc)
    }

    /// `U_N^M(phi, theta, Phi)`.
    pub fn euler(&self, phi: &[f64], theta: &[f64], big_phi: &[f64]) -> Result<OperatorMatrix> {
        self.product(&PhasePoint::euler(
            phi.to_vec(),
            theta.to_vec(),
            big_phi.to_vec(),
        ))
    }

    /// Rotation onto the CP^{N-1} point: the `q = N` block only.
    pub fn cp(&self, phi: &[f64], theta: &[f64]) -> Result<OperatorMatrix> {
        self.product(&PhasePoint::cp(phi.to_vec(), theta.to_vec()))
    }

    /// `U^dag v` at `point`, without forming `U`.
    pub fn apply_adjoint(&self, point: &PhasePoint, v: &DVector<C64>) -> Result<DVector<C64>> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: v.len(),
            });
        }
        let mut out = v.clone();
        for step in self.steps(point)? {
            match step {
                Step::Diag(d, a) if a != 0.0 => {
                    for (x, &w) in out.iter_mut().zip(d) {
                        *x *= C64::from_polar(1.0, -w * a);
                    }
                }
                Step::Jy(i, t) if t != 0.0 => out = self.jy[i].exp_i_apply(-t, &out),
                _ => {}
            }
        }
        Ok(out)
    }

    /// Rotation for either a CP or an Euler point.
    pub fn at(&self, point: &PhasePoint) -> Result<OperatorMatrix> {
        self.product(point)
    }

    /// Cartan phase factor `B[Phi]` as a diagonal.
    pub fn cartan_phase(&self, big_phi: &[f64]) -> Result<Vec<C64>> {
        if big_phi.len() != self.n - 1 {
            return Err(Error::PointMismatch("wrong number of Cartan angles".into()));
        }
        Ok((0..self.dim())
            .map(|i| {
                let arg: f64 = self.cartan.iter().zip(big_phi).map(|(d, a)| d[i] * a).sum();
                C64::from_polar(1.0, arg)
            })
            .collect())
    }
}

/// `U_N^M` at an Euler point.
pub fn euler_rotation(desc: &SystemDescriptor, point: &PhasePoint) -> Result<OperatorMatrix> {
    match (desc, point) {
        (SystemDescriptor::Sun { n, m }, PhasePoint::Euler { .. }) => {
            EulerRotation::new(*n, *m)?.at(point)
        }
        (SystemDescriptor::Sun { .. }, other) => Err(Error::PointMismatch(format!(
            "Euler rotation needs Euler angles, got {other:?}"
        ))),
        (other, _) => Err(Error::Unsupported(format!("Euler rotation on {other}"))),
    }
}

/// Arecchi displacement `exp(xi J+ - xi* J-)` with `J+- = J(1) +- i J(2)`.
///
/// `xi = theta e^{2 i phi} / 2`, so that `R(phi, theta) = U(phi, theta, -phi)`
/// under the Pauli-normalized generators.
pub fn arecchi_rotation(desc: &SystemDescriptor, phi: f64, theta: f64) -> Result<OperatorMatrix> {
    let m = match *desc {
        SystemDescriptor::Sun { n: 2, m } => m,
        ref other => {
            return Err(Error::Unsupported(format!(
                "Arecchi rotation needs su:2:M, got {other}"
            )))
        }
    };
    let alg = Algebra::new(2, m)?;
    Ok(arecchi_from_algebra(&alg, phi, theta))
}

pub(crate) fn arecchi_from_algebra(alg: &Algebra, phi: f64, theta: f64) -> OperatorMatrix {
    let xi = C64::from_polar(theta / 2.0, 2.0 * phi);
    let jx = alg.jx(1, 2);
    let jy = alg.jy(1, 2);
    let jp = jx + jy * I;
    let jm = jx - jy * I;
    let gen = jp * xi - jm * xi.conj();
    expm_skew_hermitian(&gen)
}

/// Truncated displacement operator together with its truncation metric.
#[derive(Debug, Clone)]
pub struct HwDisplacement {
    /// `exp(alpha a^dag - alpha* a)` of the truncated ladder operators.
    pub matrix: OperatorMatrix,
    /// `max |P^dag P - 1|` of the exact displacement projected onto the
    /// truncated space; zero only when nothing leaks past the cutoff.
    pub unitarity_defect: f64,
}

pub fn annihilation(n_max: usize) -> OperatorMatrix {
    let mut a = zeros(n_max);
    for k in 1..n_max {
        a[(k - 1, k)] = real((k as f64).sqrt());
    }
    a
}

pub fn hw_displacement(desc: &SystemDescriptor, alpha: C64) -> Result<HwDisplacement> {
    let n_max = match *desc {
        SystemDescriptor::Hw { n_max } => n_max,
        ref other => return Err(Error::Unsupported(format!("displacement on {other}"))),
    };
    let a = annihilation(n_max);
    let gen = a.adjoint() * alpha - &a * alpha.conj();
    let matrix = expm_skew_hermitian(&gen);
    let projected = displacement_projected(n_max, alpha);
    Ok(HwDisplacement {
        matrix,
        unitarity_defect: unitarity_defect(&projected),
    })
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// `sqrt(k!/(k+a)!) x^{a/2} e^{-x/2} L_k^{(a)}(x)` for `k = 0..count`.
fn laguerre_functions(a: usize, x: f64, count: usize) -> Vec<f64> {
    let mut g = Vec::with_capacity(count);
    if count == 0 {
        return g;
    }
    let g0 = if x == 0.0 {
        if a == 0 {
            1.0
        } else {
            0.0
        }
    } else {
        (0.5 * (a as f64 * x.ln() - ln_factorial(a)) - 0.5 * x).exp()
    };
    g.push(g0);
    let af = a as f64;
    for k in 0..count.saturating_sub(1) {
        let kf = k as f64;
        let prev = if k == 0 { 0.0 } else { g[k - 1] };
        let next = ((2.0 * kf + 1.0 + af - x) * g[k] - (kf * (kf + af)).sqrt() * prev)
            / ((kf + 1.0) * (kf + af + 1.0)).sqrt();
        g.push(next);
    }
    g
}

/// Matrix elements `<m|D(alpha)|n>` of the exact displacement operator for
/// `m, n < n_max`.
pub fn displacement_projected(n_max: usize, alpha: C64) -> OperatorMatrix {
    let x = alpha.norm_sqr();
    let arg = alpha.arg();
    let mut d = zeros(n_max);
    for a in 0..n_max {
        let g = laguerre_functions(a, x, n_max - a);
        let up = C64::from_polar(1.0, a as f64 * arg);
        let sign = if a % 2 == 0 { 1.0 } else { -1.0 };
        let down = up.conj() * sign;
        for (k, gk) in g.iter().enumerate() {
            d[(k + a, k)] = up * *gk;
            if a > 0 {
                d[(k, k + a)] = down * *gk;
            }
        }
    }
    d
}

/// Fundamental-representation amplitudes `U_cp(phi, theta) |e_N>`.
pub fn cp_amplitudes(phi: &[f64], theta: &[f64]) -> Result<Vec<C64>> {
    let n = phi.len() + 1;
    let u = EulerRotation::new(n, 1)?.cp(phi, theta)?;
    Ok((0..n).map(|i| u[(i, n - 1)]).collect())
}

/// CP^{N-1} coordinates of the ray through `psi` (inverse of
/// [`cp_amplitudes`] up to a global phase).
pub fn cp_coordinates(psi: &[C64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = psi.len();
    if n < 2 {
        return Err(Error::InvalidArgument(
            "state needs at least two amplitudes".into(),
        ));
    }
    let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::InvalidArgument("zero state".into()));
    }
    let psi: Vec<C64> = psi.iter().map(|z| z / norm).collect();
    let tiny = 1e-300;
    if n == 2 {
        let theta = psi[0].norm().atan2(psi[1].norm());
        let phi = if psi[0].norm() > tiny && psi[1].norm() > tiny {
            0.5 * (psi[0] / psi[1]).arg()
        } else {
            0.0
        };
        return Ok((vec![phi], vec![theta]));
    }
    // remove the global phase so the last amplitude is real and non-negative
    let g = if psi[n - 1].norm() > tiny {
        psi[n - 1].conj() / psi[n - 1].norm()
    } else {
        real(1.0)
    };
    let psi: Vec<C64> = psi.iter().map(|z| z * g).collect();

    let mut phi = vec![0.0; n - 1];
    let mut theta = vec![0.0; n - 1];
    let tail_norm = |k: usize| -> f64 { psi[..k].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() };
    theta[n - 2] = tail_norm(n - 1).atan2(psi[n - 1].re);
    // cumulative phases P_k = arg(B_k) with psi_k = -B_k sin(theta_{k-1})
    let mut cum = vec![None; n];
    for k in 3..n {
        theta[k - 2] = psi[k - 1].norm().atan2(tail_norm(k - 1));
        if psi[k - 1].norm() > tiny {
            cum[k] = Some((-psi[k - 1]).arg());
        }
    }
    let (a, b) = (psi[0], -psi[1]);
    theta[0] = psi[1].norm().atan2(psi[0].norm());
    let (p2, phi1) = if a.norm() > tiny && b.norm() > tiny {
        let p2 = 0.5 * (a * b).arg();
        (Some(p2), a.arg() - p2)
    } else {
        (None, 0.0)
    };
    cum[2] = p2;
    phi[0] = phi1;
    // fill unknown cumulative phases, then take differences
    let mut resolved = vec![0.0; n];
    let mut last = 0.0;
    for k in (2..n).rev() {
        if let Some(v) = cum[k] {
            last = v;
        }
        resolved[k] = last;
    }
    if p2.is_none() {
        // psi_1 or psi_2 vanishes; fold the phase of the survivor into phi_1
        let p = resolved[2];
        if a.norm() > tiny {
            phi[0] = a.arg() - p;
        } else if b.norm() > tiny {
            phi[0] = p - b.arg();
        }
    }
    phi[n - 2] = resolved[n - 1];
    for k in 2..n - 1 {
        phi[k - 1] = resolved[k] - resolved[k + 1];
    }
    Ok((phi, theta))
}
