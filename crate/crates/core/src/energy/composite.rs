use super::{Energy, EnergyModel};
use crate::linalg::{Matrix, Vector};

/// Sum of independent energies `H = Σₖ Hₖ` over an interleaved layout
/// `[z1⁽⁰⁾; z1⁽¹⁾; …; z2⁽⁰⁾; z2⁽¹⁾; …]`.
#[derive(Debug, Clone)]
pub struct CompositeEnergy {
    parts: Vec<EnergyModel>,
}

impl CompositeEnergy {
    pub fn new(parts: Vec<EnergyModel>) -> Self {
        Self { parts }
    }

    pub fn parts(&self) -> &[EnergyModel] {
        &self.parts
    }

    /// Global indices of part `k`'s stacked variable `[z1⁽ᵏ⁾; z2⁽ᵏ⁾]`.
    fn indices(&self, k: usize) -> Vec<usize> {
        let n1_total: usize = self.parts.iter().map(|p| p.block_sizes().0).sum();
        let off1: usize = self.parts[..k].iter().map(|p| p.block_sizes().0).sum();
        let off2: usize = self.parts[..k].iter().map(|p| p.block_sizes().1).sum();
        let (a, b) = self.parts[k].block_sizes();
        (0..a).map(|i| off1 + i).chain((0..b).map(|i| n1_total + off2 + i)).collect()
    }

    fn gather(&self, x: &Vector, idx: &[usize]) -> Vector {
        Vector::from_iterator(idx.len(), idx.iter().map(|&i| x[i]))
    }
}

impl Energy for CompositeEnergy {
    fn block_sizes(&self) -> (usize, usize) {
        self.parts.iter().fold((0, 0), |(a, b), p| {
            let (pa, pb) = p.block_sizes();
            (a + pa, b + pb)
        })
    }

    fn value(&self, x: &Vector) -> f64 {
        (0..self.parts.len())
            .map(|k| self.parts[k].value(&self.gather(x, &self.indices(k))))
            .sum()
    }

    fn gradient(&self, x: &Vector) -> Vector {
        let mut g = Vector::zeros(x.len());
        for k in 0..self.parts.len() {
            let idx = self.indices(k);
            let gk = self.parts[k].gradient(&self.gather(x, &idx));
            for (local, &global) in idx.iter().enumerate() {
                g[global] = gk[local];
            }
        }
        g
    }

    fn hessian(&self, x: &Vector) -> Option<Matrix> {
        let mut h = Matrix::zeros(x.len(), x.len());
        for k in 0..self.parts.len() {
            let idx = self.indices(k);
            let hk = self.parts[k].hessian(&self.gather(x, &idx))?;
            for (a, &ga) in idx.iter().enumerate() {
                for (b, &gb) in idx.iter().enumerate() {
                    h[(ga, gb)] = hk[(a, b)];
                }
            }
        }
        Some(h)
    }

    fn is_quadratic(&self) -> bool {
        self.parts.iter().all(|p| p.is_quadratic())
    }

    fn secant_defect(&self, z: &Vector, zp: &Vector) -> Option<f64> {
        let mut total = 0.0;
        for k in 0..self.parts.len() {
            let idx = self.indices(k);
            total += self.parts[k].secant_defect(&self.gather(z, &idx), &self.gather(zp, &idx))?;
        }
        Some(total)
    }
}
