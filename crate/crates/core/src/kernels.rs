//! Generalized parity operators and the Wigner (displaced parity) and Weyl
//! (displacement) kernels built from them.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::liealgebra::{Algebra, SystemDescriptor};
use crate::linalg::{diagonal, kron_all, real, OperatorMatrix, C64};
use crate::rotations::{arecchi_from_algebra, displacement_projected, EulerRotation, PhasePoint};

fn ln_fact(n: i64) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

fn twice(x: f64, what: &str) -> Result<i64> {
    let t = 2.0 * x;
    if (t - t.round()).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "{what} = {x} is not a half-integer"
        )));
    }
    Ok(t.round() as i64)
}

/// Clebsch-Gordan coefficient `<j1 m1; j2 m2 | j m>` (Condon-Shortley
/// phase), from the Racah sum evaluated with log-factorials.
pub fn clebsch_gordan(j1: f64, m1: f64, j2: f64, m2: f64, j: f64, m: f64) -> Result<f64> {
    let (tj1, tm1, tj2, tm2, tj, tm) = (
        twice(j1, "j1")?,
        twice(m1, "m1")?,
        twice(j2, "j2")?,
        twice(m2, "m2")?,
        twice(j, "j")?,
        twice(m, "m")?,
    );
    for (tj_, tm_, name) in [(tj1, tm1, "1"), (tj2, tm2, "2"), (tj, tm, "")] {
        if tj_ < 0 || tm_.abs() > tj_ || (tj_ - tm_) % 2 != 0 {
            return Err(Error::InvalidArgument(format!(
                "inconsistent j{name}, m{name}"
            )));
        }
    }
    if tm1 + tm2 != tm || tj > tj1 + tj2 || tj < (tj1 - tj2).abs() || (tj1 + tj2 + tj) % 2 != 0 {
        return Ok(0.0);
    }
    // everything below is an integer once halved
    let h = |x: i64| x / 2;
    let (a, b, cc) = (h(tj1 + tj2 - tj), h(tj1 - tj2 + tj), h(-tj1 + tj2 + tj));
    let pref = 0.5
        * (((tj + 1) as f64).ln() + ln_fact(a) + ln_fact(b) + ln_fact(cc)
            - ln_fact(h(tj1 + tj2 + tj) + 1)
            + ln_fact(h(tj + tm))
            + ln_fact(h(tj - tm))
            + ln_fact(h(tj1 - tm1))
            + ln_fact(h(tj1 + tm1))
            + ln_fact(h(tj2 - tm2))
            + ln_fact(h(tj2 + tm2)));
    let d = [
        a,
        h(tj1 - tm1),
        h(tj2 + tm2),
        h(tj - tj2 + tm1),
        h(tj - tj1 - tm2),
    ];
    let kmin = 0.max(-d[3]).max(-d[4]);
    let kmax = d[0].min(d[1]).min(d[2]);
    let mut sum = 0.0;
    for k in kmin..=kmax {
        let den = ln_fact(k)
            + ln_fact(d[0] - k)
            + ln_fact(d[1] - k)
            + ln_fact(d[2] - k)
            + ln_fact(d[3] + k)
            + ln_fact(d[4] + k);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * (pref - den).exp();
    }
    Ok(sum)
}

/// Diagonal generalized parity.
#[derive(Debug, Clone, PartialEq)]
pub struct ParityOperator {
    pub diagonal: Vec<f64>,
}

impl ParityOperator {
    pub fn matrix(&self) -> OperatorMatrix {
        diagonal(&self.diagonal.iter().map(|&x| real(x)).collect::<Vec<_>>())
    }

    pub fn trace(&self) -> f64 {
        self.diagonal.iter().sum()
    }
}

/// Spin-`M/2` parity from the multipole sum. Basis index `i` carries
/// `m = M/2 - i`; the weight at `m` is
/// `sum_l (2l+1)/(M+1) <j,-m; l,0 | j,-m>`, which places the large
/// eigenvalue on the lowest-weight state.
pub fn su2_parity(m: usize) -> Result<ParityOperator> {
    let j = m as f64 / 2.0;
    let mut diag = Vec::with_capacity(m + 1);
    for i in 0..=m {
        let mz = j - i as f64;
        let mut acc = 0.0;
        for l in 0..=m {
            acc += (2 * l + 1) as f64 / (m + 1) as f64
                * clebsch_gordan(j, -mz, l as f64, 0.0, j, -mz)?;
        }
        diag.push(acc);
    }
    Ok(ParityOperator { diagonal: diag })
}

/// Fundamental-representation parity `(1/N)(1 - sqrt(N+1) diag(1,..,1,-(N-1)))`.
pub fn sun_fundamental_parity(n: usize) -> ParityOperator {
    let s = ((n + 1) as f64).sqrt();
    let nf = n as f64;
    let mut diag = vec![(1.0 - s) / nf; n];
    diag[n - 1] = (1.0 + s * (nf - 1.0)) / nf;
    ParityOperator { diagonal: diag }
}

/// Generalized parity of a simple system.
pub fn parity(desc: &SystemDescriptor) -> Result<ParityOperator> {
    match *desc {
        SystemDescriptor::Hw { n_max } => Ok(ParityOperator {
            diagonal: (0..n_max)
                .map(|n| if n % 2 == 0 { 2.0 } else { -2.0 })
                .collect(),
        }),
        SystemDescriptor::Sun { n: 2, m } => su2_parity(m),
        SystemDescriptor::Sun { n, m: 1 } => Ok(sun_fundamental_parity(n)),
        SystemDescriptor::Sun { n, m } => Err(Error::Unsupported(format!(
            "parity for SU({n}) beyond the fundamental representation (M = {m})"
        ))),
        SystemDescriptor::Composite(_) => Err(Error::Unsupported(
            "parity of a composite system; use the factor parities".into(),
        )),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Wigner,
    Weyl,
}

impl std::str::FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "wigner" => Ok(Side::Wigner),
            "weyl" => Ok(Side::Weyl),
            other => Err(Error::InvalidArgument(format!("unknown side '{other}'"))),
        }
    }
}

/// Displacement family used for SU(2) Weyl kernels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Displacement {
    /// Full Euler-angle rotation `U_N^M`.
    #[default]
    Euler,
    /// Two-angle Arecchi rotation on the sphere; not informationally complete.
    Arecchi,
}

impl std::str::FromStr for Displacement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "euler" => Ok(Displacement::Euler),
            "arecchi" => Ok(Displacement::Arecchi),
            other => Err(Error::InvalidArgument(format!(
                "unknown displacement '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct KernelSpec {
    pub side: Side,
    pub system: SystemDescriptor,
    #[serde(default)]
    pub displacement: Displacement,
}

impl KernelSpec {
    pub fn wigner(system: SystemDescriptor) -> Self {
        Self {
            side: Side::Wigner,
            system,
            displacement: Displacement::Euler,
        }
    }

    pub fn weyl(system: SystemDescriptor) -> Self {
        Self {
            side: Side::Weyl,
            system,
            displacement: Displacement::Euler,
        }
    }

    pub fn arecchi(system: SystemDescriptor) -> Self {
        Self {
            side: Side::Weyl,
            system,
            displacement: Displacement::Arecchi,
        }
    }
}

#[derive(Debug, Clone)]
enum Factor {
    Hw {
        n_max: usize,
    },
    Sun {
        rot: EulerRotation,
        parity: Option<Vec<f64>>,
        alg: Option<Algebra>,
    },
}

/// Kernel evaluator for one [`KernelSpec`], holding the cached generator
/// decompositions of every factor.
#[derive(Debug, Clone)]
pub struct Kernel {
    spec: KernelSpec,
    factors: Vec<Factor>,
    dim: usize,
}

impl Kernel {
    pub fn new(spec: KernelSpec) -> Result<Self> {
        let dim = spec.system.dimension()?;
        if spec.displacement == Displacement::Arecchi
            && (spec.side != Side::Weyl
                || !matches!(spec.system, SystemDescriptor::Sun { n: 2, .. }))
        {
            return Err(Error::Unsupported(
                "Arecchi kernels exist only on the su:2:M Weyl side".into(),
            ));
        }
        let mut factors = Vec::new();
        for f in spec.system.factors() {
            factors.push(match *f {
                SystemDescriptor::Hw { n_max } => Factor::Hw { n_max },
                SystemDescriptor::Sun { n, m } => {
                    let alg = Algebra::new(n, m)?;
                    let rot = EulerRotation::from_algebra(&alg)?;
                    let parity = match spec.side {
                        Side::Wigner => Some(parity(f)?.diagonal),
                        Side::Weyl => None,
                    };
                    let alg = (spec.displacement == Displacement::Arecchi).then_some(alg);
                    Factor::Sun { rot, parity, alg }
                }
                SystemDescriptor::Composite(_) => unreachable!("factors are flat"),
            });
        }
        Ok(Self { spec, factors, dim })
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn factor_at(&self, f: &Factor, point: &PhasePoint) -> Result<OperatorMatrix> {
        match (f, point) {
            (Factor::Hw { n_max }, PhasePoint::Hw { alpha }) => Ok(match self.spec.side {
                Side::Wigner => hw_wigner(*n_max, *alpha),
                Side::Weyl => displacement_projected(*n_max, *alpha),
            }),
            (
                Factor::Sun { rot, parity, alg },
                p @ (PhasePoint::Cp { .. } | PhasePoint::Euler { .. }),
            ) => match self.spec.side {
                Side::Wigner => {
                    let u = rot.at(p)?;
                    Ok(conjugate_diagonal(
                        &u,
                        parity.as_ref().expect("wigner parity"),
                    ))
                }
                Side::Weyl => match (alg, p) {
                    (Some(alg), PhasePoint::Cp { phi, theta }) => {
                        Ok(arecchi_from_algebra(alg, phi[0], theta[0]))
                    }
                    (Some(_), _) => Err(Error::PointMismatch(
                        "Arecchi kernels take (phi, theta) points".into(),
                    )),
                    (None, PhasePoint::Euler { .. }) => rot.at(p),
                    (None, _) => Err(Error::PointMismatch(
                        "Weyl kernels take full Euler-angle points".into(),
                    )),
                },
            },
            (_, other) => Err(Error::PointMismatch(format!(
                "point {other:?} does not fit {}",
                self.spec.system
            ))),
        }
    }

    fn factor_points<'a>(&self, point: &'a PhasePoint) -> Result<Vec<&'a PhasePoint>> {
        match point {
            PhasePoint::Composite(ps) => {
                if ps.len() != self.factors.len() {
                    return Err(Error::PointMismatch(format!(
                        "{} factor points for {} factors",
                        ps.len(),
                        self.factors.len()
                    )));
                }
                Ok(ps.iter().collect())
            }
            p if self.factors.len() == 1 => Ok(vec![p]),
            _ => Err(Error::PointMismatch(
                "composite system needs a composite point".into(),
            )),
        }
    }

    /// Kernel matrix at `point`.
    pub fn at(&self, point: &PhasePoint) -> Result<OperatorMatrix> {
        let pts = self.factor_points(point)?;
        let mats = self
            .factors
            .iter()
            .zip(pts)
            .map(|(f, p)| self.factor_at(f, p))
            .collect::<Result<Vec<_>>>()?;
        Ok(if mats.len() == 1 {
            mats.into_iter().next().unwrap()
        } else {
            kron_all(&mats)
        })
    }

    /// `Tr[A K(point)]`. Single SU(N) Wigner factors avoid forming the
    /// kernel: `Tr[A U P U^dag] = sum_j p_j (U^dag A U)_jj`.
    pub fn trace_with(&self, a: &OperatorMatrix, point: &PhasePoint) -> Result<C64> {
        if a.nrows() != self.dim || a.ncols() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: a.nrows(),
            });
        }
        if let (
            [Factor::Sun {
                rot,
                parity: Some(p),
                ..
            }],
            Side::Wigner,
        ) = (self.factors.as_slice(), self.spec.side)
        {
            if matches!(point, PhasePoint::Cp { .. } | PhasePoint::Euler { .. }) {
                let u = rot.at(point)?;
                let b = a * &u;
                let mut acc = C64::new(0.0, 0.0);
                for (j, &pj) in p.iter().enumerate() {
                    let col: C64 = u
                        .column(j)
                        .iter()
                        .zip(b.column(j).iter())
                        .map(|(x, y)| x.conj() * y)
                        .sum();
                    acc += col * pj;
                }
                return Ok(acc);
            }
        }
        Ok(crate::linalg::trace_product(a, &self.at(point)?))
    }

    /// `<psi|K(point)|psi>`. Single SU(N) factors act on the vector directly.
    pub fn pure_expectation(&self, psi: &DVector<C64>, point: &PhasePoint) -> Result<C64> {
        if psi.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: psi.len(),
            });
        }
        if let [Factor::Sun {
            rot,
            parity,
            alg: None,
        }] = self.factors.as_slice()
        {
            if matches!(point, PhasePoint::Cp { .. } | PhasePoint::Euler { .. }) {
                let v = rot.apply_adjoint(point, psi)?;
                return Ok(match parity {
                    Some(p) => real(v.iter().zip(p).map(|(x, pj)| x.norm_sqr() * pj).sum()),
                    None => v.dotc(psi),
                });
            }
        }
        Ok(psi.dotc(&(self.at(point)? * psi)))
    }

    /// Operator paired with the kernel in the inverse map: the kernel itself
    /// on the Wigner side, its adjoint on the Weyl side.
    pub fn inverse_at(&self, point: &PhasePoint) -> Result<OperatorMatrix> {
        let k = self.at(point)?;
        Ok(match self.spec.side {
            Side::Wigner => k,
            Side::Weyl => k.adjoint(),
        })
    }
}

/// `U diag(p) U^dag`.
fn conjugate_diagonal(u: &OperatorMatrix, p: &[f64]) -> OperatorMatrix {
    let mut up = u.clone();
    for (j, &w) in p.iter().enumerate() {
        up.column_mut(j).scale_mut(w);
    }
    let k = up * u.adjoint();
    (&k + k.adjoint()).scale(0.5)
}

/// `2 D(2 alpha) P` in the truncated Fock basis.
fn hw_wigner(n_max: usize, alpha: C64) -> OperatorMatrix {
    let mut d = displacement_projected(n_max, alpha * 2.0);
    for n in 0..n_max {
        let s = if n % 2 == 0 { 2.0 } else { -2.0 };
        d.column_mut(n).scale_mut(s);
    }
    d
}

/// Wigner kernel `Pi(point)` of a simple or composite system.
pub fn wigner_kernel_at(desc: &SystemDescriptor, point: &PhasePoint) -> Result<OperatorMatrix> {
    Kernel::new(KernelSpec::wigner(desc.clone()))?.at(point)
}

/// Weyl kernel `D(point)` of a simple or composite system.
pub fn weyl_kernel_at(desc: &SystemDescriptor, point: &PhasePoint) -> Result<OperatorMatrix> {
    Kernel::new(KernelSpec::weyl(desc.clone()))?.at(point)
}

/// Tensor product of factor kernels for a composite system.
pub fn composite_kernel_at(
    desc: &SystemDescriptor,
    point: &PhasePoint,
    side: Side,
) -> Result<OperatorMatrix> {
    if !desc.is_composite() {
        return Err(Error::InvalidSystem(format!("{desc} is not composite")));
    }
    Kernel::new(KernelSpec {
        side,
        system: desc.clone(),
        displacement: Displacement::Euler,
    })?
    .at(point)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermiticity_defect, max_abs_diff, trace};
    use crate::rotations::hw_displacement;
    use proptest::prelude::*;

    #[test]
    fn clebsch_gordan_values() {
        assert!((clebsch_gordan(0.5, 0.5, 0.0, 0.0, 0.5, 0.5).unwrap() - 1.0).abs() < 1e-14);
        let s3 = 1.0 / 3f64.sqrt();
        assert!((clebsch_gordan(0.5, 0.5, 1.0, 0.0, 0.5, 0.5).unwrap() - s3).abs() < 1e-14);
        assert!((clebsch_gordan(0.5, -0.5, 1.0, 0.0, 0.5, -0.5).unwrap() + s3).abs() < 1e-14);
        // <1/2 1/2; 1/2 -1/2 | 0 0> = 1/sqrt2
        assert!(
            (clebsch_gordan(0.5, 0.5, 0.5, -0.5, 0.0, 0.0).unwrap() - 0.5f64.sqrt()).abs() < 1e-14
        );
        assert_eq!(clebsch_gordan(1.0, 1.0, 1.0, 1.0, 1.0, 1.0).unwrap(), 0.0);
        assert!(clebsch_gordan(0.3, 0.3, 1.0, 0.0, 1.0, 0.3).is_err());
        assert!(clebsch_gordan(0.5, 1.5, 1.0, 0.0, 0.5, 1.5).is_err());
    }

    #[test]
    fn pure_expectation_matches_trace() {
        let psi = |d: usize| {
            let v = DVector::from_fn(d, |i, _| C64::new(1.0 + i as f64, 0.5 - i as f64));
            v.normalize()
        };
        let cases = [
            (
                KernelSpec::wigner(SystemDescriptor::sun(2, 6).unwrap()),
                PhasePoint::cp(vec![0.4], vec![1.1]),
            ),
            (
                KernelSpec::weyl(SystemDescriptor::sun(2, 6).unwrap()),
                PhasePoint::euler(vec![0.4], vec![1.1], vec![-0.7]),
            ),
            (
                KernelSpec::wigner(SystemDescriptor::sun(3, 1).unwrap()),
                PhasePoint::cp(vec![0.2, 1.3], vec![0.5, 0.9]),
            ),
            (
                KernelSpec::wigner(SystemDescriptor::hw(12).unwrap()),
                PhasePoint::hw(C64::new(0.3, -0.2)),
            ),
        ];
        for (spec, p) in cases {
            let k = Kernel::new(spec).unwrap();
            let v = psi(k.dim());
            let rho = &v * v.adjoint();
            let a = k.pure_expectation(&v, &p).unwrap();
            let b = k.trace_with(&rho, &p).unwrap();
            assert!((a - b).norm() < 1e-12, "{a} {b}");
        }
    }

    proptest! {
        #[test]
        fn clebsch_gordan_rows_are_normalized(tj1 in 0i64..8, tj2 in 0i64..8, pick in 0usize..16) {
            let (j1, j2) = (tj1 as f64 / 2.0, tj2 as f64 / 2.0);
            let js: Vec<f64> = ((tj1 - tj2).abs()..=tj1 + tj2).step_by(2).map(|t| t as f64 / 2.0).collect();
            let j = js[pick % js.len()];
            let mut tm = -2.0 * j;
            while tm <= 2.0 * j + 1e-9 {
                let m = tm / 2.0;
                let mut s = 0.0;
                let mut tm1 = -2.0 * j1;
                while tm1 <= 2.0 * j1 + 1e-9 {
                    let m1 = tm1 / 2.0;
                    let cg = clebsch_gordan(j1, m1, j2, m - m1, j, m).unwrap_or(0.0);
                    s += cg * cg;
                    tm1 += 2.0;
                }
                prop_assert!((s - 1.0).abs() < 1e-12);
                tm += 2.0;
            }
        }
    }

    #[test]
    fn parity_closed_forms() {
        let s3 = 3f64.sqrt();
        let p = parity(&SystemDescriptor::sun(2, 1).unwrap()).unwrap();
        assert!((p.diagonal[0] - (1.0 - s3) / 2.0).abs() < 1e-14);
        assert!((p.diagonal[1] - (1.0 + s3) / 2.0).abs() < 1e-14);
        let closed = sun_fundamental_parity(2);
        assert!(closed
            .diagonal
            .iter()
            .zip(&p.diagonal)
            .all(|(a, b)| (a - b).abs() < 1e-14));
        let hw = parity(&SystemDescriptor::hw(4).unwrap()).unwrap();
        assert_eq!(hw.diagonal, vec![2.0, -2.0, 2.0, -2.0]);
        assert!(parity(&SystemDescriptor::sun(3, 2).unwrap()).is_err());
        for n in 2..=5 {
            assert!((sun_fundamental_parity(n).trace() - 1.0).abs() < 1e-14);
        }
        for m in 1..=6 {
            assert!((su2_parity(m).unwrap().trace() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn su2_wigner_kernel_spectrum_is_invariant() {
        let d = SystemDescriptor::sun(2, 1).unwrap();
        let k = wigner_kernel_at(&d, &PhasePoint::cp(vec![0.7], vec![1.1])).unwrap();
        assert!(hermiticity_defect(&k) < 1e-14);
        let mut ev: Vec<f64> = k.symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        let s3 = 3f64.sqrt();
        assert!((ev[0] - (1.0 - s3) / 2.0).abs() < 1e-12);
        assert!((ev[1] - (1.0 + s3) / 2.0).abs() < 1e-12);
        let origin = wigner_kernel_at(&d, &PhasePoint::origin(&d, false)).unwrap();
        assert!(max_abs_diff(&origin, &parity(&d).unwrap().matrix()) < 1e-15);
    }

    #[test]
    fn hw_wigner_kernel_gaussian() {
        let d = SystemDescriptor::hw(30).unwrap();
        let beta = crate::linalg::c(0.4, -0.9);
        let coh = hw_displacement(&d, beta)
            .unwrap()
            .matrix
            .column(0)
            .into_owned();
        for alpha in [
            crate::linalg::c(0.0, 0.0),
            crate::linalg::c(1.2, 0.3),
            crate::linalg::c(-0.5, -1.4),
        ] {
            let k = wigner_kernel_at(&d, &PhasePoint::hw(alpha)).unwrap();
            let w = (coh.adjoint() * &k * &coh)[(0, 0)];
            let expect = 2.0 * (-2.0 * (alpha - beta).norm_sqr()).exp();
            assert!((w.re - expect).abs() < 1e-5, "{w} vs {expect}");
        }
    }

    #[test]
    fn weyl_kernel_cases() {
        let d = SystemDescriptor::sun(2, 2).unwrap();
        let o = weyl_kernel_at(&d, &PhasePoint::origin(&d, true)).unwrap();
        assert!(max_abs_diff(&o, &OperatorMatrix::identity(3, 3)) < 1e-15);
        let (phi, theta) = (0.9, 0.4);
        let u = weyl_kernel_at(&d, &PhasePoint::euler(vec![phi], vec![theta], vec![-phi])).unwrap();
        let a = crate::rotations::arecchi_rotation(&d, phi, theta).unwrap();
        assert!(max_abs_diff(&u, &a) < 1e-12);
        assert!(weyl_kernel_at(&d, &PhasePoint::cp(vec![0.0], vec![0.0])).is_err());

        let h = SystemDescriptor::hw(30).unwrap();
        let at = crate::linalg::c(0.3, 0.5);
        let k = weyl_kernel_at(&h, &PhasePoint::hw(at)).unwrap();
        assert!((k[(0, 0)] - real((-at.norm_sqr() / 2.0).exp())).norm() < 1e-12);
    }

    #[test]
    fn composite_kernels() {
        let q = SystemDescriptor::qubit();
        let qq = SystemDescriptor::composite(vec![q.clone(), q.clone()]).unwrap();
        let o = PhasePoint::origin(&qq, false);
        let k = composite_kernel_at(&qq, &o, Side::Wigner).unwrap();
        let p = parity(&q).unwrap().matrix();
        assert!(max_abs_diff(&k, &p.kronecker(&p)) < 1e-15);
        assert!((trace(&k) - real(1.0)).norm() < 1e-14);
        assert!(
            composite_kernel_at(&qq, &PhasePoint::Composite(vec![o.clone()]), Side::Wigner)
                .is_err()
        );

        let hyb = SystemDescriptor::composite(vec![q.clone(), SystemDescriptor::hw(12).unwrap()])
            .unwrap();
        let alpha = crate::linalg::c(0.2, -0.1);
        let pt = PhasePoint::Composite(vec![
            PhasePoint::cp(vec![0.3], vec![0.8]),
            PhasePoint::hw(alpha),
        ]);
        let k = composite_kernel_at(&hyb, &pt, Side::Wigner).unwrap();
        let hk =
            wigner_kernel_at(&SystemDescriptor::hw(12).unwrap(), &PhasePoint::hw(alpha)).unwrap();
        assert!((trace(&k) - trace(&hk)).norm() < 1e-12);
    }

    #[test]
    fn arecchi_spec_restrictions() {
        let q = SystemDescriptor::qubit();
        assert!(Kernel::new(KernelSpec {
            side: Side::Wigner,
            system: q.clone(),
            displacement: Displacement::Arecchi
        })
        .is_err());
        assert!(Kernel::new(KernelSpec::arecchi(SystemDescriptor::sun(3, 1).unwrap())).is_err());
        let k = Kernel::new(KernelSpec::arecchi(q)).unwrap();
        assert!(k.at(&PhasePoint::cp(vec![0.1], vec![0.2])).is_ok());
    }
}
