//! Generalized Pauli matrices for the symmetric SU(N) irreps and the
//! descriptors naming which Hilbert space a computation lives in.
//!
//! Basis states of the `(N, M)` irrep are occupation tuples
//! `|m_1, ..., m_N>` with `sum m_k = M`, ordered lexicographically
//! decreasing, so the highest-weight state `|M, 0, ..., 0>` comes first and
//! the lowest-weight state `|0, ..., 0, M>` last.
//!
//! Generators are numbered `k = 1 .. N^2 - 1`: for each `b = 2..=N` the
//! pairs `(a, b)` with `a < b` contribute `J_x(a, b)` and `J_y(a, b)` in
//! ascending `a`, followed by the Cartan generator `J_z((c+1)^2 - 1)` with
//! `c = b - 1`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, real, zeros, OperatorMatrix};

/// Which group/representation a computation lives in.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SystemDescriptor {
    /// Heisenberg-Weyl oscillator truncated to `n_max` Fock states.
    Hw { n_max: usize },
    /// Symmetric rank-`m` irrep of SU(`n`).
    Sun { n: usize, m: usize },
    /// Ordered tensor product; always flat with at least two factors.
    Composite(Vec<SystemDescriptor>),
}

impl SystemDescriptor {
    pub fn hw(n_max: usize) -> Result<Self> {
        if n_max < 2 {
            return Err(Error::InvalidSystem(format!(
                "Fock truncation must be at least 2, got {n_max}"
            )));
        }
        Ok(Self::Hw { n_max })
    }

    pub fn sun(n: usize, m: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidSystem(format!("SU(N) needs N >= 2, got {n}")));
        }
        if m < 1 {
            return Err(Error::InvalidSystem(format!(
                "SU(N) irrep needs M >= 1, got {m}"
            )));
        }
        let d = Self::Sun { n, m };
        d.dimension()?;
        Ok(d)
    }

    pub fn qubit() -> Self {
        Self::Sun { n: 2, m: 1 }
    }

    /// Tensor product of the given factors. Nested composites are flattened.
    pub fn composite(factors: Vec<SystemDescriptor>) -> Result<Self> {
        let mut flat = Vec::new();
        for f in factors {
            match f {
                Self::Composite(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        if flat.len() < 2 {
            return Err(Error::InvalidSystem(
                "a composite system needs at least two factors".into(),
            ));
        }
        let d = Self::Composite(flat);
        d.dimension()?;
        Ok(d)
    }

    /// Factors of a composite, or the system itself.
    pub fn factors(&self) -> &[SystemDescriptor] {
        match self {
            Self::Composite(f) => f,
            other => std::slice::from_ref(other),
        }
    }

    pub fn is_composite(&self) -> bool {
        matches!(self, Self::Composite(_))
    }

    pub fn dimension(&self) -> Result<usize> {
        match *self {
            Self::Hw { n_max } => Ok(n_max),
            Self::Sun { n, m } => irrep_dimension(n, m),
            Self::Composite(ref fs) => fs.iter().try_fold(1usize, |acc, f| {
                acc.checked_mul(f.dimension()?)
                    .ok_or_else(|| Error::DimensionOverflow(format!("{self}")))
            }),
        }
    }
}

impl fmt::Display for SystemDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Hw { n_max } => write!(f, "hw:{n_max}"),
            Self::Sun { n, m } => write!(f, "su:{n}:{m}"),
            Self::Composite(fs) => {
                for (i, x) in fs.iter().enumerate() {
                    if i > 0 {
                        f.write_str("*")?;
                    }
                    write!(f, "{x}")?;
                }
                Ok(())
            }
        }
    }
}

/// Hilbert-space dimension of a descriptor.
pub fn dimension(desc: &SystemDescriptor) -> Result<usize> {
    desc.dimension()
}

/// `d_N^M = (N+M-1)! / (M! (N-1)!)`, evaluated as a running binomial so no
/// factorial is ever formed.
pub fn irrep_dimension(n: usize, m: usize) -> Result<usize> {
    if n < 1 {
        return Err(Error::InvalidSystem("N must be positive".into()));
    }
    let k = m.min(n - 1);
    let top = n + m - 1;
    let mut acc: u128 = 1;
    for i in 1..=k {
        acc = acc
            .checked_mul((top - k + i) as u128)
            .ok_or_else(|| Error::DimensionOverflow(format!("d_{n}^{m}")))?
            / i as u128;
    }
    usize::try_from(acc).map_err(|_| Error::DimensionOverflow(format!("d_{n}^{m}")))
}

/// Occupation numbers `(m_1, ..., m_N)` labelling one basis state.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BasisLabel {
    pub occupations: Vec<usize>,
}

impl BasisLabel {
    pub fn total(&self) -> usize {
        self.occupations.iter().sum()
    }
}

/// All basis labels of the `(n, m)` irrep in the fixed decreasing order.
pub fn basis(n: usize, m: usize) -> Vec<BasisLabel> {
    fn fill(slot: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<BasisLabel>) {
        if slot + 1 == cur.len() {
            cur[slot] = left;
            out.push(BasisLabel {
                occupations: cur.clone(),
            });
            return;
        }
        for v in (0..=left).rev() {
            cur[slot] = v;
            fill(slot + 1, left - v, cur, out);
        }
    }
    let mut out = Vec::new();
    let mut cur = vec![0; n];
    fill(0, m, &mut cur, &mut out);
    out
}

/// Index of `J_x(a, b)` (1-based `a < b`); `J_y(a, b)` is the next index.
pub fn x_index(a: usize, b: usize) -> usize {
    debug_assert!(1 <= a && a < b);
    (b - 1) * (b - 1) + 2 * (a - 1)
}

pub fn y_index(a: usize, b: usize) -> usize {
    x_index(a, b) + 1
}

/// Index of the Cartan generator `J_z((c+1)^2 - 1)`.
pub fn z_index(c: usize) -> usize {
    (c + 1) * (c + 1) - 1
}

/// The full generator set of one irrep, with lookup helpers.
#[derive(Debug, Clone)]
pub struct Algebra {
    n: usize,
    m: usize,
    basis: Vec<BasisLabel>,
    generators: Vec<OperatorMatrix>,
}

impl Algebra {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        SystemDescriptor::sun(n, m)?;
        let basis = basis(n, m);
        let index: std::collections::HashMap<&[usize], usize> = basis
            .iter()
            .enumerate()
            .map(|(i, b)| (b.occupations.as_slice(), i))
            .collect();
        let d = basis.len();

        // E(a,b) moves one quantum from mode b to mode a: J_b^a.
        let transfer = |a: usize, b: usize| -> OperatorMatrix {
            let mut op = zeros(d);
            for (col, label) in basis.iter().enumerate() {
                let occ = &label.occupations;
                if occ[b] == 0 {
                    continue;
                }
                let amp = (((occ[a] + 1) * occ[b]) as f64).sqrt();
                let mut target = occ.clone();
                target[a] += 1;
                target[b] -= 1;
                let row = index[target.as_slice()];
                op[(row, col)] = real(amp);
            }
            op
        };

        let mut generators = vec![zeros(d); n * n - 1];
        for b in 2..=n {
            for a in 1..b {
                let up = transfer(a - 1, b - 1);
                let down = up.adjoint();
                generators[x_index(a, b) - 1] = &up + &down;
                generators[y_index(a, b) - 1] = (&up - &down) * c(0.0, -1.0);
            }
            generators[z_index(b - 1) - 1] = cartan(&basis, b - 1);
        }
        Ok(Self {
            n,
            m,
            basis,
            generators,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[BasisLabel] {
        &self.basis
    }

    /// Generator `J(k)` for `k = 1 .. N^2 - 1`.
    pub fn generator(&self, k: usize) -> Result<&OperatorMatrix> {
        if k == 0 || k > self.generators.len() {
            return Err(Error::OutOfRange {
                index: k,
                limit: self.generators.len(),
            });
        }
        Ok(&self.generators[k - 1])
    }

    pub fn generators(&self) -> &[OperatorMatrix] {
        &self.generators
    }

    pub fn jx(&self, a: usize, b: usize) -> &OperatorMatrix {
        &self.generators[x_index(a, b) - 1]
    }

    pub fn jy(&self, a: usize, b: usize) -> &OperatorMatrix {
        &self.generators[y_index(a, b) - 1]
    }

    /// Diagonal generator `l`; `l = 0` is the identity.
    pub fn diagonal(&self, l: usize) -> Result<OperatorMatrix> {
        if l >= self.n {
            return Err(Error::OutOfRange {
                index: l,
                limit: self.n - 1,
            });
        }
        if l == 0 {
            return Ok(OperatorMatrix::identity(self.dim(), self.dim()));
        }
        Ok(self.generators[z_index(l) - 1].clone())
    }
}

fn cartan(basis: &[BasisLabel], c_: usize) -> OperatorMatrix {
    let d = basis.len();
    let pref = 1.0 / ((c_ * (c_ + 1)) as f64 / 2.0).sqrt();
    let mut op = zeros(d);
    for (i, label) in basis.iter().enumerate() {
        let occ = &label.occupations;
        let s: usize = occ[..c_].iter().sum();
        let v = s as f64 - (c_ * occ[c_]) as f64;
        op[(i, i)] = real(pref * v);
    }
    op
}

/// The `N^2 - 1` generalized Pauli matrices of the `(n, m)` irrep.
pub fn build_generators(n: usize, m: usize) -> Result<Vec<OperatorMatrix>> {
    Ok(Algebra::new(n, m)?.generators)
}

/// The `l`-th Cartan generator (`l = 0` gives the identity).
pub fn diagonal_generator(n: usize, m: usize, l: usize) -> Result<OperatorMatrix> {
    if l >= n {
        return Err(Error::OutOfRange {
            index: l,
            limit: n.saturating_sub(1),
        });
    }
    SystemDescriptor::sun(n, m)?;
    let basis = basis(n, m);
    if l == 0 {
        return Ok(OperatorMatrix::identity(basis.len(), basis.len()));
    }
    Ok(cartan(&basis, l))
}

/// Right-hand side of the trace rule `Tr[J(i) J(j)] = (2M/(N+1)) d_{N+1}^M δ_ij`.
pub fn trace_norm(n: usize, m: usize) -> Result<f64> {
    Ok(2.0 * m as f64 / (n + 1) as f64 * irrep_dimension(n + 1, m)? as f64)
}

/// Weight of each basis state under the first Cartan generator, i.e. the
/// eigenvalue of `J(3)` (an integer in `-M ..= M`).
pub fn j3_weight(label: &BasisLabel) -> i64 {
    label.occupations[0] as i64 - label.occupations[1] as i64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{
        commutator, hermiticity_defect, max_abs_diff, trace, trace_product, C64, I,
    };

    #[test]
    fn irrep_dimensions() {
        assert_eq!(irrep_dimension(3, 1).unwrap(), 3);
        assert_eq!(irrep_dimension(2, 5).unwrap(), 6);
        assert_eq!(irrep_dimension(4, 3).unwrap(), 20);
        assert_eq!(SystemDescriptor::hw(2).unwrap().dimension().unwrap(), 2);
        assert!(SystemDescriptor::sun(1, 3).is_err());
        assert!(SystemDescriptor::sun(2, 0).is_err());
        assert!(SystemDescriptor::hw(1).is_err());
    }

    #[test]
    fn dimension_overflow_is_reported() {
        assert!(matches!(
            irrep_dimension(200, 200),
            Err(Error::DimensionOverflow(_))
        ));
        let big = SystemDescriptor::Composite(vec![
            SystemDescriptor::Hw {
                n_max: usize::MAX / 2
            };
            3
        ]);
        assert!(matches!(big.dimension(), Err(Error::DimensionOverflow(_))));
    }

    #[test]
    fn composite_flattens_and_multiplies() {
        let q = SystemDescriptor::qubit();
        let pair = SystemDescriptor::composite(vec![q.clone(), q.clone()]).unwrap();
        let triple = SystemDescriptor::composite(vec![pair, q.clone()]).unwrap();
        assert_eq!(triple.factors().len(), 3);
        assert_eq!(triple.dimension().unwrap(), 8);
        assert!(SystemDescriptor::composite(vec![q]).is_err());
        assert_eq!(triple.to_string(), "su:2:1*su:2:1*su:2:1");
    }

    #[test]
    fn basis_order_is_decreasing() {
        let b = basis(3, 2);
        let occ: Vec<Vec<usize>> = b.iter().map(|l| l.occupations.clone()).collect();
        assert_eq!(
            occ,
            vec![
                vec![2, 0, 0],
                vec![1, 1, 0],
                vec![1, 0, 1],
                vec![0, 2, 0],
                vec![0, 1, 1],
                vec![0, 0, 2]
            ]
        );
    }

    #[test]
    fn su3_fundamental_is_gell_mann() {
        let g = build_generators(3, 1).unwrap();
        let z = real(0.0);
        let o = real(1.0);
        let i = I;
        let m = |rows: [[C64; 3]; 3]| OperatorMatrix::from_fn(3, 3, |r, c_| rows[r][c_]);
        let s3 = 1.0 / 3f64.sqrt();
        let expected = [
            m([[z, o, z], [o, z, z], [z, z, z]]),
            m([[z, -i, z], [i, z, z], [z, z, z]]),
            m([[o, z, z], [z, -o, z], [z, z, z]]),
            m([[z, z, o], [z, z, z], [o, z, z]]),
            m([[z, z, -i], [z, z, z], [i, z, z]]),
            m([[z, z, z], [z, z, o], [z, o, z]]),
            m([[z, z, z], [z, z, -i], [z, i, z]]),
            m([[real(s3), z, z], [z, real(s3), z], [z, z, real(-2.0 * s3)]]),
        ];
        for (k, (a, b)) in g.iter().zip(expected.iter()).enumerate() {
            assert!(
                max_abs_diff(a, b) == 0.0 || (k == 7 && max_abs_diff(a, b) < 1e-15),
                "J({})",
                k + 1
            );
        }
    }

    #[test]
    fn su2_fundamental_is_pauli() {
        let g = build_generators(2, 1).unwrap();
        assert_eq!(g[0][(0, 1)], real(1.0));
        assert_eq!(g[1][(0, 1)], c(0.0, -1.0));
        assert_eq!(g[2][(0, 0)], real(1.0));
        assert_eq!(g[2][(1, 1)], real(-1.0));
    }

    #[test]
    fn spin_one_uses_ladder_normalization() {
        let g = build_generators(2, 2).unwrap();
        let r2 = 2f64.sqrt();
        assert!((g[0][(0, 1)].re - r2).abs() < 1e-15);
        assert!((g[0][(1, 2)].re - r2).abs() < 1e-15);
        let jz = diagonal_generator(2, 2, 1).unwrap();
        assert_eq!(jz[(0, 0)], real(2.0));
        assert_eq!(jz[(1, 1)], real(0.0));
        assert_eq!(jz[(2, 2)], real(-2.0));
    }

    #[test]
    fn diagonal_generator_cases() {
        let id = diagonal_generator(3, 1, 0).unwrap();
        assert_eq!(id, OperatorMatrix::identity(3, 3));
        let j8 = diagonal_generator(3, 1, 2).unwrap();
        assert!((j8[(2, 2)].re + 2.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!(diagonal_generator(3, 1, 3).is_err());
    }

    #[test]
    fn trace_orthogonality_and_hermiticity() {
        for n in 2..=4 {
            for m in 1..=3 {
                let g = build_generators(n, m).unwrap();
                assert_eq!(g.len(), n * n - 1);
                let norm = trace_norm(n, m).unwrap();
                for (i, a) in g.iter().enumerate() {
                    assert!(hermiticity_defect(a) < 1e-12);
                    assert!(trace(a).norm() < 1e-12);
                    for (j, b) in g.iter().enumerate() {
                        let expect = if i == j { norm } else { 0.0 };
                        assert!((trace_product(a, b) - real(expect)).norm() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn su2_commutation_relations() {
        for m in 1..=5 {
            let g = build_generators(2, m).unwrap();
            let lhs = commutator(&g[0], &g[1]);
            let rhs = g[2].map(|z| z * c(0.0, 2.0));
            assert!(max_abs_diff(&lhs, &rhs) < 1e-12, "M = {m}");
        }
    }
}
