//! Density matrices for oscillator, spin and multi-qubit states.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::liealgebra::SystemDescriptor;
use crate::linalg::{random_density, real, MatrixJson, OperatorMatrix, C64};
use crate::rotations::{arecchi_rotation, displacement_projected};
use crate::statmech::ThermalSpec;

pub type Ket = DVector<C64>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StateSpec {
    /// Number state `|n⟩`.
    Fock {
        n: usize,
    },
    /// Computational basis state with the given index.
    Basis {
        index: usize,
    },
    Coherent {
        alpha: C64,
    },
    /// `sum_k w_k |α_k⟩`, normalized with the exact Gaussian overlaps.
    HwCat {
        components: Vec<C64>,
        weights: Vec<C64>,
    },
    /// `R(φ,θ)|j,-j⟩` in the irrep of dimension `m + 1`.
    SpinCoherent {
        m: usize,
        phi: f64,
        theta: f64,
    },
    /// Equal-weight superposition of spin-coherent states.
    SpinCat {
        m: usize,
        points: Vec<(f64, f64)>,
    },
    /// `(|0…0⟩ + |1…1⟩)/√2`.
    Ghz {
        n_qubits: usize,
    },
    Thermal {
        hamiltonian: MatrixJson,
        beta: f64,
    },
    RandomDensity {
        dim: usize,
        seed: u64,
    },
}

impl StateSpec {
    /// Three coherent states at `-3 e^{2πik/3}` with equal weights.
    pub fn three_component_cat() -> Self {
        let components = (0..3)
            .map(|k| C64::from_polar(-3.0, 2.0 * std::f64::consts::PI * k as f64 / 3.0))
            .collect();
        Self::HwCat {
            components,
            weights: vec![real(1.0); 3],
        }
    }

    /// Three spin-coherent states at `θ = π/10`, `φ ∈ {0, π/3, 2π/3}`.
    pub fn three_component_spin_cat(m: usize) -> Self {
        let pi = std::f64::consts::PI;
        let points = (0..3).map(|k| (k as f64 * pi / 3.0, pi / 10.0)).collect();
        Self::SpinCat { m, points }
    }
}

fn projector(v: &Ket) -> OperatorMatrix {
    v * v.adjoint()
}

fn require_hw(desc: &SystemDescriptor) -> Result<usize> {
    match *desc {
        SystemDescriptor::Hw { n_max } => Ok(n_max),
        _ => Err(Error::Incompatible(format!("oscillator state on {desc}"))),
    }
}

fn require_spin(desc: &SystemDescriptor, m: usize) -> Result<()> {
    match *desc {
        SystemDescriptor::Sun { n: 2, m: dm } if dm == m => Ok(()),
        _ => Err(Error::Incompatible(format!(
            "spin state with M = {m} on {desc}"
        ))),
    }
}

/// Truncated coherent-state amplitudes `e^{-|α|²/2} α^n/√n!`.
pub fn coherent_ket(n_max: usize, alpha: C64) -> Ket {
    displacement_projected(n_max, alpha).column(0).into_owned()
}

/// `⟨α|β⟩ = exp(α*β - (|α|² + |β|²)/2)`.
pub fn coherent_overlap(a: C64, b: C64) -> C64 {
    (a.conj() * b - (a.norm_sqr() + b.norm_sqr()) / 2.0).exp()
}

/// Untruncated norm of `sum_k w_k |α_k⟩`.
pub fn cat_norm(components: &[C64], weights: &[C64]) -> f64 {
    let mut s = real(0.0);
    for (a, wa) in components.iter().zip(weights) {
        for (b, wb) in components.iter().zip(weights) {
            s += wa.conj() * wb * coherent_overlap(*a, *b);
        }
    }
    s.re.sqrt()
}

/// `R(φ,θ)` applied to the lowest-weight state of `su:2:m`.
pub fn spin_coherent_ket(m: usize, phi: f64, theta: f64) -> Result<Ket> {
    let desc = SystemDescriptor::sun(2, m)?;
    Ok(arecchi_rotation(&desc, phi, theta)?.column(m).into_owned())
}

/// GHZ ket in the basis of `desc`: the equal superposition of the first and
/// last basis states. Works for `n` qubits and for the symmetric `su:2:n`.
pub fn ghz_ket(desc: &SystemDescriptor, n_qubits: usize) -> Result<Ket> {
    let ok = match desc {
        SystemDescriptor::Sun { n: 2, m } => *m == n_qubits,
        SystemDescriptor::Composite(fs) => {
            fs.len() == n_qubits && fs.iter().all(|f| *f == SystemDescriptor::qubit())
        }
        _ => n_qubits == 1 && *desc == SystemDescriptor::qubit(),
    };
    if !ok || n_qubits == 0 {
        return Err(Error::Incompatible(format!(
            "{n_qubits}-qubit GHZ state on {desc}"
        )));
    }
    let d = desc.dimension()?;
    let mut v = Ket::zeros(d);
    v[0] = real(std::f64::consts::FRAC_1_SQRT_2);
    v[d - 1] += real(std::f64::consts::FRAC_1_SQRT_2);
    Ok(v)
}

/// Build the normalized density matrix of `spec` on `desc`.
pub fn build_state(spec: &StateSpec, desc: &SystemDescriptor) -> Result<OperatorMatrix> {
    let d = desc.dimension()?;
    match spec {
        StateSpec::Fock { n } => {
            let n_max = require_hw(desc)?;
            if *n >= n_max {
                return Err(Error::OutOfRange {
                    index: *n,
                    limit: n_max,
                });
            }
            let mut v = Ket::zeros(n_max);
            v[*n] = real(1.0);
            Ok(projector(&v))
        }
        StateSpec::Basis { index } => {
            if *index >= d {
                return Err(Error::OutOfRange {
                    index: *index,
                    limit: d,
                });
            }
            let mut v = Ket::zeros(d);
            v[*index] = real(1.0);
            Ok(projector(&v))
        }
        StateSpec::Coherent { alpha } => {
            let v = coherent_ket(require_hw(desc)?, *alpha);
            Ok(projector(&v.normalize()))
        }
        StateSpec::HwCat {
            components,
            weights,
        } => {
            let n_max = require_hw(desc)?;
            if components.is_empty() || components.len() != weights.len() {
                return Err(Error::InvalidArgument(
                    "cat needs matching, non-empty components and weights".into(),
                ));
            }
            let norm = cat_norm(components, weights);
            if norm < 1e-12 {
                return Err(Error::InvalidArgument("cat components cancel".into()));
            }
            let mut v = Ket::zeros(n_max);
            for (a, w) in components.iter().zip(weights) {
                v += coherent_ket(n_max, *a) * *w;
            }
            let rho = projector(&(v / real(norm)));
            let t = crate::linalg::trace(&rho);
            Ok(rho / t)
        }
        StateSpec::SpinCoherent { m, phi, theta } => {
            require_spin(desc, *m)?;
            Ok(projector(&spin_coherent_ket(*m, *phi, *theta)?))
        }
        StateSpec::SpinCat { m, points } => {
            require_spin(desc, *m)?;
            if points.is_empty() {
                return Err(Error::InvalidArgument(
                    "spin cat needs at least one component".into(),
                ));
            }
            let mut v = Ket::zeros(d);
            for &(phi, theta) in points {
                v += spin_coherent_ket(*m, phi, theta)?;
            }
            let n = v.norm();
            if n < 1e-12 {
                return Err(Error::InvalidArgument("spin cat components cancel".into()));
            }
            Ok(projector(&(v / real(n))))
        }
        StateSpec::Ghz { n_qubits } => Ok(projector(&ghz_ket(desc, *n_qubits)?)),
        StateSpec::Thermal { hamiltonian, beta } => {
            let h = OperatorMatrix::try_from(hamiltonian)?;
            if h.nrows() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: h.nrows(),
                });
            }
            Ok(ThermalSpec::new(h, *beta)?.density())
        }
        StateSpec::RandomDensity { dim, seed } => {
            if *dim != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: *dim,
                });
            }
            Ok(random_density(d, &mut ChaCha8Rng::seed_from_u64(*seed)))
        }
    }
}
