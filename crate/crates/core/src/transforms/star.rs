//! Star products and Moyal brackets of phase-space symbols.

use std::sync::Arc;

use rayon::prelude::*;

use super::{reconstruct, same_space, PhaseFunction};
use crate::error::Result;
use crate::kernels::Side;
use crate::linalg::{trace_product, OperatorMatrix, C64};

/// `f_A * f_B`, the symbol of `A B`.
///
/// The double quadrature against the triple-trace kernel factorizes as
/// `Tr[K(Ω) (sum w' f_A K_inv') (sum w'' f_B K_inv'')]`, i.e. the symbol of
/// the product of the reconstructed operators.
pub fn star_product(fa: &PhaseFunction, fb: &PhaseFunction) -> Result<PhaseFunction> {
    same_space(fa, fb)?;
    let ab = reconstruct(fa) * reconstruct(fb);
    fa.space.transform(&ab)
}

/// Star product by literal double quadrature over
/// `Tr[K(Ω) K_inv(Ω') K_inv(Ω'')]`. Cost grows with the cube of the node
/// count; meant for cross-checks on small grids.
pub fn star_product_literal(fa: &PhaseFunction, fb: &PhaseFunction) -> Result<PhaseFunction> {
    same_space(fa, fb)?;
    let s = &fa.space;
    let g = s.grid();
    let n = s.len();
    let inv: Vec<OperatorMatrix> = (0..n)
        .map(|j| match s.side() {
            Side::Wigner => s.kernel_at(j).into_owned(),
            Side::Weyl => s.kernel_at(j).adjoint(),
        })
        .collect();
    let wa: Vec<C64> = (0..n).map(|j| fa.values[j] * g.weight(j)).collect();
    let wb: Vec<C64> = (0..n).map(|k| fb.values[k] * g.weight(k)).collect();
    let values = (0..n)
        .into_par_iter()
        .map(|i| {
            let ki = s.kernel_at(i);
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..n {
                let kij = ki.as_ref() * &inv[j];
                let inner: C64 = (0..n).map(|k| wb[k] * trace_product(&kij, &inv[k])).sum();
                acc += wa[j] * inner;
            }
            acc
        })
        .collect();
    PhaseFunction::from_values(Arc::clone(s), values)
}

/// `{{f_A, f_B}} = f_A * f_B - f_B * f_A`.
pub fn moyal_bracket(fa: &PhaseFunction, fb: &PhaseFunction) -> Result<PhaseFunction> {
    same_space(fa, fb)?;
    let a = reconstruct(fa);
    let b = reconstruct(fb);
    fa.space.transform(&(&a * &b - &b * &a))
}
