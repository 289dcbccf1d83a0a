//! Anti-commuting matrices α_1..α_d, β for the free Dirac operator.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{operator_norm, CMatrix};

/// Hermitian matrices with α_iα_j + α_jα_i = 2δ_ij Id over alphas ∪ {beta}.
#[derive(Clone, Debug)]
pub struct CliffordRep {
    pub d: usize,
    pub n: usize,
    pub alphas: Vec<CMatrix>,
    pub beta: CMatrix,
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn sigma1() -> CMatrix {
    CMatrix::from_rows(&[vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]]).unwrap()
}

pub fn sigma2() -> CMatrix {
    CMatrix::from_rows(&[vec![c(0.0, 0.0), c(0.0, -1.0)], vec![c(0.0, 1.0), c(0.0, 0.0)]]).unwrap()
}

pub fn sigma3() -> CMatrix {
    CMatrix::from_rows(&[vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(-1.0, 0.0)]]).unwrap()
}

/// σ_1 (d=1); σ_1, σ_2 (d=2), both with β = σ_3; Pauli-Dirac for d=3.
pub fn build_clifford(d: usize) -> Result<CliffordRep> {
    match d {
        1 => Ok(CliffordRep { d, n: 2, alphas: vec![sigma1()], beta: sigma3() }),
        2 => Ok(CliffordRep { d, n: 2, alphas: vec![sigma1(), sigma2()], beta: sigma3() }),
        3 => {
            // α_i = [[0, σ_i], [σ_i, 0]] = σ_1 ⊗ σ_i,  β = diag(Id_2, −Id_2) = σ_3 ⊗ Id_2.
            let alphas = [sigma1(), sigma2(), sigma3()].iter().map(|s| sigma1().kron(s)).collect();
            Ok(CliffordRep { d, n: 4, alphas, beta: sigma3().kron(&CMatrix::identity(2)) })
        }
        other => Err(Error::UnsupportedDimension(other)),
    }
}

impl CliffordRep {
    /// alphas followed by beta.
    pub fn generators(&self) -> impl Iterator<Item = &CMatrix> {
        self.alphas.iter().chain(std::iter::once(&self.beta))
    }

    /// α·ξ + mβ.
    pub fn symbol(&self, xi: &[f64], m: f64) -> CMatrix {
        let mut s = self.beta.scale_real(m);
        for (a, &x) in self.alphas.iter().zip(xi) {
            s = &s + &a.scale_real(x);
        }
        s
    }
}

/// Worst violation of the relations: ‖α_iα_j + α_jα_i‖_op for i ≠ j and
/// ‖α_i² − Id‖_op on the diagonal (half of the i = j anticommutator).
pub fn anticommutation_residual(rep: &CliffordRep) -> Result<f64> {
    let gens: Vec<&CMatrix> = rep.generators().collect();
    for g in &gens {
        if g.rows() != rep.n || g.cols() != rep.n {
            return Err(Error::DimensionMismatch(format!(
                "generator of size {}x{} in a representation of size {}",
                g.rows(),
                g.cols(),
                rep.n
            )));
        }
    }
    let id = CMatrix::identity(rep.n);
    let mut worst: f64 = 0.0;
    for i in 0..gens.len() {
        for j in i..gens.len() {
            let defect = if i == j {
                &(gens[i] * gens[i]) - &id
            } else {
                &(gens[i] * gens[j]) + &(gens[j] * gens[i])
            };
            worst = worst.max(operator_norm(&defect));
        }
    }
    Ok(worst)
}
