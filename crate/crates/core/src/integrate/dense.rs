//! Dense f64 coefficient tensors with cheap elimination of the leading variable.

use crate::poly::Poly;

/// Coefficients of Σ c_{k₀…k_{d−1}} ∏ x_i^{k_i}, row-major with variable 0 slowest.
#[derive(Clone, Debug, PartialEq)]
pub struct DensePoly {
    shape: Vec<usize>,
    coeffs: Vec<f64>,
}

impl DensePoly {
    /// Restricts `p` to the listed variables, which must cover every variable
    /// `p` actually depends on.
    pub fn from_poly(p: &Poly<f64>, vars: &[usize]) -> Self {
        let degs = p.degree_per_var();
        let shape: Vec<usize> = vars.iter().map(|&v| degs[v] as usize + 1).collect();
        let len = shape.iter().product::<usize>().max(1);
        let mut coeffs = vec![0.0; len];
        for (alpha, c) in p.terms() {
            let e = alpha.exponents();
            debug_assert!(
                e.iter().enumerate().all(|(i, &a)| a == 0 || vars.contains(&i)),
                "polynomial depends on a dropped variable"
            );
            let mut idx = 0;
            for (s, &v) in shape.iter().zip(vars) {
                idx = idx * s + e[v] as usize;
            }
            coeffs[idx] += *c;
        }
        DensePoly { shape, coeffs }
    }

    pub fn univariate(coeffs: Vec<f64>) -> Self {
        DensePoly { shape: vec![coeffs.len().max(1)], coeffs: if coeffs.is_empty() { vec![0.0] } else { coeffs } }
    }

    pub fn nvars(&self) -> usize {
        self.shape.len()
    }

    /// Degree in the leading variable.
    pub fn leading_degree(&self) -> usize {
        self.shape.first().map(|s| s - 1).unwrap_or(0)
    }

    /// Fixes the leading variable at `x`.
    pub fn specialize_first(&self, x: f64) -> DensePoly {
        let stride: usize = self.shape[1..].iter().product::<usize>().max(1);
        let mut out = vec![0.0; stride];
        for k in (0..self.shape[0]).rev() {
            let row = &self.coeffs[k * stride..(k + 1) * stride];
            for (o, &c) in out.iter_mut().zip(row) {
                *o = *o * x + c;
            }
        }
        DensePoly { shape: self.shape[1..].to_vec(), coeffs: out }
    }

    /// Coefficient slice of a univariate polynomial, lowest power first.
    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.nvars());
        let mut cur = self.clone();
        for &xi in &x[..x.len().saturating_sub(1)] {
            cur = cur.specialize_first(xi);
        }
        match x.last() {
            Some(&t) => super::roots::horner(&cur.coeffs, t),
            None => cur.coeffs[0],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{MultiIndex, QPoly};

    #[test]
    fn matches_sparse_evaluation() {
        let x = QPoly::var(3, 0);
        let y = QPoly::var(3, 1);
        let z = QPoly::var(3, 2);
        let p = &(&(&x.pow(3) * &y) - &z.pow(2)) + &QPoly::monomial(MultiIndex::new(vec![1, 2, 1]), crate::poly::rat(4));
        let pf = p.to_f64();
        let d = DensePoly::from_poly(&pf, &[0, 1, 2]);
        let pt = [0.7, -1.3, 2.1];
        assert!((d.eval(&pt) - pf.eval_f64(&pt).unwrap()).abs() < 1e-12);
        let s = d.specialize_first(0.7).specialize_first(-1.3);
        assert!((crate::integrate::roots::horner(s.coefficients(), 2.1) - d.eval(&pt)).abs() < 1e-12);
    }

    #[test]
    fn drops_unused_variables() {
        let y = QPoly::var(2, 1).pow(2).to_f64();
        let d = DensePoly::from_poly(&y, &[1]);
        assert_eq!(d.nvars(), 1);
        assert_eq!(d.coefficients(), &[0.0, 0.0, 1.0]);
    }
}
